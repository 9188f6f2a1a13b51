#include <doctest.h>

#include <cmath>

#include "geosid/geo.hpp"
#include "geosid/io.hpp"
#include "geosid/reward.hpp"
#include "geosid/s2cell.hpp"
#include "testutil.hpp"

using namespace geosid;

namespace {

const GeoPoint kParkingPoint{40.7400, -74.0100};
const GeoPoint kOfficePoint{40.7445, -74.0100};

SidRegistry two_poi_registry() {
    std::vector<RegistryEntry> entries;
    RegistryEntry parking;
    parking.poi_id = "poi_parking";
    parking.sid.geo = {161, 17};
    parking.sid.semantic = {21, 8};
    parking.sid.suffix = 0;
    parking.hex_cell_id = CellId::from_point(kParkingPoint).to_hex();
    RegistryEntry office;
    office.poi_id = "poi_office";
    office.sid.geo = {161, 115};
    office.sid.semantic = {12, 7};
    office.sid.suffix = 0;
    office.hex_cell_id = CellId::from_point(kOfficePoint).to_hex();
    entries.push_back(parking);
    entries.push_back(office);
    return SidRegistry(SidConfig{}, "89c25", std::move(entries));
}

SpatialSemanticId sid_of(std::initializer_list<int> geo,
                         std::initializer_list<int> semantic, int suffix) {
    SpatialSemanticId sid;
    sid.geo = geo;
    sid.semantic = semantic;
    sid.suffix = suffix;
    return sid;
}

const SpatialSemanticId kGold = sid_of({161, 115}, {12, 7}, 0);

}  // namespace

TEST_CASE("distance reward pins the appendix constants") {
    const RewardConfig cfg;
    CHECK(distance_reward(0.05, cfg) == 1.0);   // inside d_near: full credit
    CHECK(distance_reward(0.0, cfg) == 1.0);
    CHECK(distance_reward(3.0, cfg) == 0.0);    // saturates at d_far
    CHECK(distance_reward(50.0, cfg) == 0.0);
    // 1 - (ln 2 - ln 1.1) / (ln 4 - ln 1.1), evaluated with high precision.
    CHECK(std::fabs(distance_reward(1.0, cfg) - 0.536914) < 1e-6);
}

TEST_CASE("distance reward boundary exactness") {
    const RewardConfig cfg;
    CHECK(distance_reward(cfg.d_near_km, cfg) == cfg.r_max);
    CHECK(distance_reward(cfg.d_far_km, cfg) == cfg.r_min);
}

TEST_CASE("distance reward is monotone non-increasing") {
    const RewardConfig cfg;
    testutil::Rng rng(41);
    for (int t = 0; t < 1000; ++t) {
        const double d1 = rng.uniform(0, 10);
        const double d2 = rng.uniform(0, 10);
        if (d1 <= d2) {
            CHECK(distance_reward(d1, cfg) >= distance_reward(d2, cfg));
        }
    }
    CHECK_THROWS_AS(distance_reward(-0.5, cfg), ValidationError);
}

TEST_CASE("distance reward is independent of the logarithm base") {
    // Base-10 reimplementation: kappa normalizes by the same base, so the
    // two routes agree to machine precision.
    const RewardConfig cfg;
    const auto base10 = [&cfg](double d) {
        const double near = std::log10(1 + cfg.d_near_km);
        const double far = std::log10(1 + cfg.d_far_km);
        const double kappa = (cfg.r_min - cfg.r_max) / (far - near);
        const double r = cfg.r_max + kappa * (std::log10(1 + d) - near);
        return std::clamp(r, cfg.r_min, cfg.r_max);
    };
    testutil::Rng rng(43);
    for (int t = 0; t < 1000; ++t) {
        const double d = rng.uniform(0, 20);
        CHECK(std::fabs(distance_reward(d, cfg) - base10(d)) < 1e-12);
    }
}

TEST_CASE("sid accuracy reward hierarchy values") {
    const RewardConfig cfg;
    CHECK(sid_accuracy_reward(kGold, kGold, cfg) == 1.0);
    // Only g1 matches.
    CHECK(sid_accuracy_reward(sid_of({161, 200}, {1, 1}, 3), kGold, cfg) == 0.3);
    // g1 and g2 match, semantics differ.
    CHECK(sid_accuracy_reward(sid_of({161, 115}, {1, 1}, 3), kGold, cfg) == 0.5);
    // Everything but the suffix.
    CHECK(sid_accuracy_reward(sid_of({161, 115}, {12, 7}, 3), kGold, cfg) == 0.9);
    // Nothing matches.
    CHECK(sid_accuracy_reward(sid_of({1, 1}, {1, 1}, 1), kGold, cfg) == 0.0);
    // g2 alone earns nothing without g1 (cumulative indicators).
    CHECK(sid_accuracy_reward(sid_of({1, 115}, {1, 1}, 1), kGold, cfg) == 0.0);
    // s1 alone.
    CHECK(sid_accuracy_reward(sid_of({1, 1}, {12, 1}, 1), kGold, cfg) == 0.25);
}

TEST_CASE("sid accuracy reward never decreases with an extra match") {
    const RewardConfig cfg;
    const auto base = sid_of({1, 1}, {1, 1}, 1);
    auto g1 = base; g1.geo[0] = kGold.geo[0];
    auto g12 = g1; g12.geo[1] = kGold.geo[1];
    auto s1 = g12; s1.semantic[0] = kGold.semantic[0];
    auto s12 = s1; s12.semantic[1] = kGold.semantic[1];
    auto exact = s12; exact.suffix = kGold.suffix;
    double previous = -1;
    for (const auto& sid : {base, g1, g12, s1, s12, exact}) {
        const double r = sid_accuracy_reward(sid, kGold, cfg);
        CHECK(r >= previous);
        previous = r;
    }
    CHECK(previous == 1.0);
}

TEST_CASE("weight spreading generalizes beyond two tokens") {
    CHECK(RewardConfig::spread_weights(2, 0.5) ==
          std::vector<double>{0.3, 0.2});
    const auto w3 = RewardConfig::spread_weights(3, 0.5);
    CHECK(w3.size() == 3);
    double sum = 0;
    for (std::size_t i = 0; i < w3.size(); ++i) {
        sum += w3[i];
        if (i > 0) CHECK(w3[i] <= w3[i - 1]);
    }
    CHECK(sum == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("format reward accepts the appendix trace") {
    const RewardConfig cfg;
    const std::string trace = read_file(testutil::fixture("golden_trace.txt"));
    CHECK(format_reward(trace, cfg) == 2.0);
}

TEST_CASE("format reward rejects mutated traces") {
    const RewardConfig cfg;
    const std::string trace = read_file(testutil::fixture("golden_trace.txt"));

    auto drop = [&trace](const std::string& needle) {
        std::string out = trace;
        const auto pos = out.find(needle);
        REQUIRE(pos != std::string::npos);
        out.erase(pos, needle.size());
        return out;
    };
    CHECK(format_reward(drop("Step 1:"), cfg) == 0.0);
    CHECK(format_reward(drop("Step 2:"), cfg) == 0.0);
    CHECK(format_reward(drop("Step 3:"), cfg) == 0.0);
    CHECK(format_reward(drop("<think>"), cfg) == 0.0);
    CHECK(format_reward(drop("</think>"), cfg) == 0.0);

    // Steps out of order.
    std::string reordered = trace;
    reordered.replace(reordered.find("Step 1:"), 7, "Step 9:");
    reordered.replace(reordered.find("Step 3:"), 7, "Step 1:");
    CHECK(format_reward(reordered, cfg) == 0.0);

    // Duplicated SID run after the close tag.
    CHECK(format_reward(trace + "<m_161><n_115><a_12><b_7><c_0>", cfg) == 0.0);
    // Trailing prose after the SID.
    CHECK(format_reward(trace + "that is my answer", cfg) == 0.0);
    // Prose before the think block.
    CHECK(format_reward("Sure! " + trace, cfg) == 0.0);
    // A second think block.
    CHECK(format_reward("<think>hm</think>" + trace, cfg) == 0.0);
    // Out-of-range tokens after the close tag.
    std::string bad_tokens = trace;
    bad_tokens.replace(bad_tokens.rfind("<m_161>"), 7, "<m_999>");
    CHECK(format_reward(bad_tokens, cfg) == 0.0);
    // No SID at all after the close tag.
    std::string no_sid = trace;
    no_sid.erase(no_sid.rfind("<m_161>"));
    CHECK(format_reward(no_sid, cfg) == 0.0);

    // Whitespace tolerance: padding is fine.
    CHECK(format_reward("\n  " + trace + "  \n", cfg) == 2.0);
}

TEST_CASE("extract prediction from the appendix trace") {
    const auto registry = two_poi_registry();
    const std::string trace = read_file(testutil::fixture("golden_trace.txt"));
    const auto prediction = extract_prediction(trace, registry);
    REQUIRE(prediction.has_value());
    CHECK(render_sid(prediction->sid) == "<m_161><n_115><a_12><b_7><c_0>");
    REQUIRE(prediction->point.has_value());
    CHECK(haversine_km(*prediction->point, kOfficePoint) < 1e-4);
}

TEST_CASE("extraction without tokens is absent") {
    const auto registry = two_poi_registry();
    CHECK(!extract_prediction("no tokens here", registry).has_value());
    CHECK(!extract_prediction("", registry).has_value());
}

TEST_CASE("extraction picks the first run after the last think close") {
    const auto registry = two_poi_registry();
    const std::string text =
        "<think>considering <m_161><n_17><a_21><b_8><c_0> first</think>\n"
        "<m_161><n_115><a_12><b_7><c_0> <m_161><n_17><a_21><b_8><c_0>";
    const auto prediction = extract_prediction(text, registry);
    REQUIRE(prediction.has_value());
    CHECK(prediction->sid == sid_of({161, 115}, {12, 7}, 0));
}

TEST_CASE("unregistered SID keeps the parse but yields no coordinates") {
    const auto registry = two_poi_registry();
    const auto prediction =
        extract_prediction("<m_9><n_9><a_9><b_9><c_9>", registry);
    REQUIRE(prediction.has_value());
    CHECK(!prediction->point.has_value());

    const RewardConfig cfg;
    const auto breakdown =
        composite_reward("<m_9><n_9><a_9><b_9><c_9>", kGold, kOfficePoint,
                         registry, cfg);
    CHECK(breakdown.r_dist == 0.0);
    CHECK(!breakdown.haversine_error_km.has_value());
}

TEST_CASE("composite reward on a perfect formatted completion") {
    const auto registry = two_poi_registry();
    const RewardConfig cfg;
    const std::string trace = read_file(testutil::fixture("golden_trace.txt"));
    const auto b = composite_reward(trace, kGold, kOfficePoint, registry, cfg);
    CHECK(b.r_fmt == 2.0);
    CHECK(b.r_acc == 1.0);
    CHECK(b.r_dist == 1.0);
    CHECK(b.total == 5.0);
}

TEST_CASE("composite reward with a bare but correct SID") {
    const auto registry = two_poi_registry();
    const RewardConfig cfg;
    const auto b = composite_reward("<m_161><n_115><a_12><b_7><c_0>", kGold,
                                    kOfficePoint, registry, cfg);
    CHECK(b.r_fmt == 0.0);
    CHECK(b.r_acc == 1.0);
    CHECK(b.r_dist == 1.0);
    CHECK(b.total == 3.0);
}

TEST_CASE("composite reward on an unparseable completion") {
    const auto registry = two_poi_registry();
    const RewardConfig cfg;
    const auto b =
        composite_reward("gibberish", kGold, kOfficePoint, registry, cfg);
    CHECK(b.total == 0.0);
    CHECK(!b.parsed_sid.has_value());
}

TEST_CASE("composite total is affine in the components") {
    const auto registry = two_poi_registry();
    const std::string wrong_poi = "<m_161><n_17><a_21><b_8><c_0>";
    RewardConfig cfg;
    const auto base = composite_reward(wrong_poi, kGold, kOfficePoint,
                                       registry, cfg);
    cfg.alpha = 5.0;
    cfg.beta = 3.0;
    const auto scaled = composite_reward(wrong_poi, kGold, kOfficePoint,
                                         registry, cfg);
    CHECK(scaled.r_acc == base.r_acc);
    CHECK(scaled.r_dist == base.r_dist);
    CHECK(scaled.total ==
          doctest::Approx(scaled.r_fmt + 5.0 * base.r_acc + 3.0 * base.r_dist)
              .epsilon(1e-12));
}

TEST_CASE("group advantages") {
    const RewardConfig cfg;
    CHECK(group_advantages({3, 3, 3, 3}, cfg) ==
          std::vector<double>{0, 0, 0, 0});

    const auto two = group_advantages({4, 2}, cfg);
    CHECK(std::fabs(two[0] - 1.0) < 1e-5);
    CHECK(std::fabs(two[1] + 1.0) < 1e-5);

    const auto three = group_advantages({5, 3, 1}, cfg);
    CHECK(std::fabs(three[0] - 1.2247) < 1e-4);
    CHECK(std::fabs(three[1]) < 1e-12);
    CHECK(std::fabs(three[2] + 1.2247) < 1e-4);

    CHECK_THROWS_AS(group_advantages({}, cfg), ValidationError);
}

TEST_CASE("advantages normalize to zero mean and unit deviation") {
    const RewardConfig cfg;
    testutil::Rng rng(47);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> rewards;
        const int n = 2 + static_cast<int>(rng.next() % 14);
        for (int i = 0; i < n; ++i) rewards.push_back(rng.uniform(0, 5));
        const auto adv = group_advantages(rewards, cfg);
        double mean = 0, var = 0;
        for (double a : adv) mean += a;
        mean /= static_cast<double>(n);
        for (double a : adv) var += (a - mean) * (a - mean);
        const double std_pop = std::sqrt(var / static_cast<double>(n));
        CHECK(std::fabs(mean) < 1e-9);
        if (std_pop > 0) CHECK(std::fabs(std_pop - 1.0) < 1e-3);
    }
}

TEST_CASE("reward config validation") {
    RewardConfig cfg;
    cfg.d_near_km = 5.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = RewardConfig{};
    cfg.lambda_u = 0.5;  // pushes the weight budget past 1
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    CHECK_NOTHROW(RewardConfig{}.validate());
}

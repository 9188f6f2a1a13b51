#include <doctest.h>

#include <algorithm>

#include "geosid/io.hpp"
#include "geosid/prompt.hpp"
#include "geosid/s2cell.hpp"
#include "geosid/timeutil.hpp"
#include "testutil.hpp"

using namespace geosid;

namespace {

constexpr int kTzOffset = -240;  // EDT

// Reconstruction of the two-POI fixture behind the golden prompt: a parking
// lot and an office about half a kilometer apart.
const GeoPoint kParkingPoint{40.7400, -74.0100};
const GeoPoint kOfficePoint{40.7445, -74.0100};

CheckIn visit(const std::string& poi, int month, int day, int hour, int minute) {
    CheckIn c;
    c.user_id = "u_golden";
    c.poi_id = poi;
    c.category_id = poi == "poi_parking" ? "cat_parking" : "cat_office";
    c.category_name = poi == "poi_parking" ? "Parking" : "Office";
    const GeoPoint p = poi == "poi_parking" ? kParkingPoint : kOfficePoint;
    c.lat = p.lat;
    c.lng = p.lng;
    c.tz_offset_minutes = kTzOffset;
    c.utc_timestamp = timestamp_from_civil(2012, month, day, hour, minute, 0) -
                      std::int64_t{60} * kTzOffset;
    return c;
}

SidRegistry golden_registry() {
    SidConfig cfg;
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
    return SidRegistry(cfg, "89c25", std::move(entries));
}

PoiCatalog golden_catalog() {
    PoiCatalog catalog;
    PoiInfo parking;
    parking.poi_id = "poi_parking";
    parking.category_id = "cat_parking";
    parking.category_name = "Parking";
    parking.lat = kParkingPoint.lat;
    parking.lng = kParkingPoint.lng;
    parking.address = "85 Washington St";
    PoiInfo office;
    office.poi_id = "poi_office";
    office.category_id = "cat_office";
    office.category_name = "Office";
    office.lat = kOfficePoint.lat;
    office.lng = kOfficePoint.lng;
    office.address = "101 Broadway";
    catalog.emplace(parking.poi_id, parking);
    catalog.emplace(office.poi_id, office);
    return catalog;
}

Trajectory traj(const std::string& id, std::vector<CheckIn> checkins) {
    Trajectory t;
    t.trajectory_id = id;
    t.user_id = "u_golden";
    t.checkins = std::move(checkins);
    return t;
}

struct GoldenInputs {
    std::vector<Trajectory> history;
    Trajectory context;
    CheckIn target;
};

GoldenInputs golden_inputs() {
    GoldenInputs in;
    in.history.push_back(traj("t1", {visit("poi_parking", 4, 11, 4, 59),
                                     visit("poi_office", 4, 11, 14, 30),
                                     visit("poi_parking", 4, 12, 4, 50),
                                     visit("poi_office", 4, 12, 5, 44),
                                     visit("poi_parking", 4, 13, 4, 56)}));
    in.history.push_back(traj("t2", {visit("poi_parking", 4, 19, 4, 58),
                                     visit("poi_office", 4, 19, 5, 50),
                                     visit("poi_parking", 4, 20, 4, 55),
                                     visit("poi_office", 4, 20, 6, 7)}));
    in.context = traj("t3", {visit("poi_parking", 4, 23, 4, 55),
                             visit("poi_office", 4, 23, 5, 27),
                             visit("poi_parking", 4, 24, 4, 45)});
    in.target = visit("poi_office", 4, 24, 4, 58);
    return in;
}

}  // namespace

TEST_CASE("english ordinals") {
    CHECK(english_ordinal(1) == "1st");
    CHECK(english_ordinal(2) == "2nd");
    CHECK(english_ordinal(3) == "3rd");
    CHECK(english_ordinal(4) == "4th");
    CHECK(english_ordinal(11) == "11th");
    CHECK(english_ordinal(12) == "12th");
    CHECK(english_ordinal(13) == "13th");
    CHECK(english_ordinal(21) == "21st");
    CHECK(english_ordinal(22) == "22nd");
    CHECK(english_ordinal(23) == "23rd");
    CHECK(english_ordinal(31) == "31st");
}

TEST_CASE("check-in line without a predecessor") {
    const auto c = visit("poi_parking", 4, 11, 4, 59);
    const std::string line = format_checkin_line(
        c, "<m_161><n_17><a_21><b_8><c_0>", nullptr, "85 Washington St", {});
    CHECK(line ==
          "April 11th, 2012, Wednesday, 04:59, visit Parking at "
          "85 Washington St <m_161><n_17><a_21><b_8><c_0>.");
}

TEST_CASE("check-in line with a nearby predecessor") {
    const auto prev = visit("poi_parking", 4, 11, 4, 59);
    const auto c = visit("poi_office", 4, 11, 14, 30);
    const std::string line = format_checkin_line(
        c, "<m_161><n_115><a_12><b_7><c_0>", &prev, "101 Broadway", {});
    CHECK(line ==
          "April 11th, 2012, Wednesday, 14:30, visit Office at 101 Broadway "
          "<m_161><n_115><a_12><b_7><c_0>, distance is Nearby.");
}

TEST_CASE("line renders a 23rd-style ordinal") {
    const auto c = visit("poi_parking", 4, 23, 4, 55);
    const std::string line = format_checkin_line(
        c, "<m_161><n_17><a_21><b_8><c_0>", nullptr, "85 Washington St", {});
    CHECK(line.rfind("April 23rd, 2012, Monday, 04:55, visit", 0) == 0);
}

TEST_CASE("golden prompt body reproduced byte for byte") {
    const auto in = golden_inputs();
    const auto registry = golden_registry();
    const auto catalog = golden_catalog();
    const auto record = build_eval_prompt(in.history, in.context, in.target,
                                          registry, catalog, {}, 300);
    const std::string expected =
        read_file(testutil::fixture("golden_prompt.txt"));
    CHECK(record.prompt_text == expected);
    CHECK(record.target_sid_surface == "<m_161><n_115><a_12><b_7><c_0>");
    CHECK(record.user_id == "u_golden");
}

TEST_CASE("placeholder address when geocoding is absent") {
    const auto in = golden_inputs();
    auto catalog = golden_catalog();
    catalog.at("poi_parking").address.clear();
    const auto record = build_eval_prompt(in.history, in.context, in.target,
                                          golden_registry(), catalog, {}, 300);
    CHECK(record.prompt_text.find("visit Parking at an unknown address") !=
          std::string::npos);
}

TEST_CASE("address elision for the no-address variant") {
    const auto in = golden_inputs();
    SerializationConfig cfg;
    cfg.include_addresses = false;
    const auto record = build_eval_prompt(in.history, in.context, in.target,
                                          golden_registry(), golden_catalog(),
                                          cfg, 300);
    CHECK(record.prompt_text.find(
              "visit Parking <m_161><n_17><a_21><b_8><c_0>") !=
          std::string::npos);
    CHECK(record.prompt_text.find("85 Washington St") == std::string::npos);
}

TEST_CASE("distance clauses can be disabled") {
    const auto in = golden_inputs();
    SerializationConfig cfg;
    cfg.include_distances = false;
    const auto record = build_eval_prompt(in.history, in.context, in.target,
                                          golden_registry(), golden_catalog(),
                                          cfg, 300);
    CHECK(record.prompt_text.find("distance is") == std::string::npos);
}

TEST_CASE("limit of one renders only the most recent context check-in") {
    const auto in = golden_inputs();
    const auto record = build_eval_prompt(in.history, in.context, in.target,
                                          golden_registry(), golden_catalog(),
                                          {}, 1);
    // One visit line only, and it is the most recent context check-in.
    std::size_t visits = 0;
    std::size_t pos = 0;
    while ((pos = record.prompt_text.find(", visit ", pos)) !=
           std::string::npos) {
        ++visits;
        pos += 1;
    }
    CHECK(visits == 1);
    CHECK(record.prompt_text.find("April 24th, 2012, Tuesday, 04:45") !=
          std::string::npos);
    // The line keeps its distance clause: its predecessor exists in the
    // original trajectory even though it is not rendered.
    CHECK(record.prompt_text.find("04:45, visit Parking at 85 Washington St "
                                  "<m_161><n_17><a_21><b_8><c_0>, distance "
                                  "is Nearby.") != std::string::npos);
}

TEST_CASE("monotone truncation never rewrites surviving visit lines") {
    const auto in = golden_inputs();
    const auto lines_of = [&](int limit) {
        const auto record =
            build_eval_prompt(in.history, in.context, in.target,
                              golden_registry(), golden_catalog(), {}, limit);
        std::vector<std::string> visit_lines;
        for (const auto& line : split_view(record.prompt_text, '\n')) {
            if (line.find(", visit ") != std::string_view::npos) {
                visit_lines.emplace_back(line);
            }
        }
        return visit_lines;
    };
    std::vector<std::string> previous;
    for (int limit = 1; limit <= 12; ++limit) {
        const auto current = lines_of(limit);
        CHECK(current.size() ==
              std::min<std::size_t>(static_cast<std::size_t>(limit), 12));
        // The smaller limit's lines are exactly the tail of the larger's.
        REQUIRE(current.size() >= previous.size());
        for (std::size_t i = 0; i < previous.size(); ++i) {
            CHECK(previous[previous.size() - 1 - i] ==
                  current[current.size() - 1 - i]);
        }
        previous = current;
    }
}

TEST_CASE("alignment pairs: two records per POI, surfaces parse back") {
    const auto registry = golden_registry();
    const auto catalog = golden_catalog();
    const auto pairs = emit_alignment_pairs(registry, catalog);
    REQUIRE(pairs.size() == 4);  // 2 POIs x 2 directions
    CHECK(pairs[0].first == "Category: Office. Address: 101 Broadway.");
    CHECK(pairs[0].second == "<m_161><n_115><a_12><b_7><c_0>");
    CHECK(pairs[1].first == pairs[0].second);
    CHECK(pairs[1].second == pairs[0].first);
    for (const auto& [input, target] : pairs) {
        const std::string& surface =
            input.rfind("<m_", 0) == 0 ? input : target;
        const auto sid = parse_sid(surface, registry.config());
        CHECK(registry.find_poi(sid) != nullptr);
    }
}

TEST_CASE("pretrain examples: one record per (context, target) pair") {
    DatasetSplit split;
    const auto in = golden_inputs();
    split.train = in.history;  // lengths 5 and 4
    split.catalog = golden_catalog();
    const auto records =
        emit_pretrain_examples(split, golden_registry(), {});
    CHECK(records.size() == (5 - 1) + (4 - 1));
    for (const auto& r : records) {
        CHECK(r.prompt_text.rfind(", user will visit ") ==
              r.prompt_text.size() - std::string(", user will visit ").size());
    }
    // A length-2 trajectory yields exactly one record.
    DatasetSplit small;
    small.train.push_back(traj("s1", {visit("poi_parking", 4, 11, 4, 59),
                                      visit("poi_office", 4, 11, 14, 30)}));
    small.catalog = golden_catalog();
    CHECK(emit_pretrain_examples(small, golden_registry(), {}).size() == 1);
}

TEST_CASE("eval prompts skip length-1 trajectories") {
    DatasetSplit split;
    const auto in = golden_inputs();
    split.train = in.history;
    split.test.push_back(traj("q1", {visit("poi_parking", 4, 23, 4, 55),
                                     visit("poi_office", 4, 23, 5, 27)}));
    split.test.push_back(traj("q2", {visit("poi_parking", 4, 25, 9, 0)}));
    split.catalog = golden_catalog();
    const auto records =
        emit_eval_prompts(split, EvalPart::test, golden_registry(), {});
    REQUIRE(records.size() == 1);
    CHECK(records[0].prompt_id == "q1");
    CHECK(records[0].target_sid_surface == "<m_161><n_115><a_12><b_7><c_0>");
    // History trajectories appear, numbered from 1, oldest first.
    CHECK(records[0].prompt_text.find("User Traj#1:") != std::string::npos);
    CHECK(records[0].prompt_text.find("User Traj#2:") != std::string::npos);
}

TEST_CASE("every SID surface in emitted text parses to a registered SID") {
    DatasetSplit split;
    const auto in = golden_inputs();
    split.train = in.history;
    split.catalog = golden_catalog();
    const auto registry = golden_registry();
    for (const auto& r : emit_pretrain_examples(split, registry, {})) {
        std::size_t pos = 0;
        while ((pos = r.prompt_text.find("<m_", pos)) != std::string::npos) {
            const auto sid =
                parse_sid(std::string_view(r.prompt_text).substr(pos),
                          registry.config());
            CHECK(registry.find_poi(sid) != nullptr);
            ++pos;
        }
    }
}

TEST_CASE("empty context is rejected") {
    Trajectory empty;
    empty.trajectory_id = "e";
    empty.user_id = "u_golden";
    CHECK_THROWS_AS(build_prompt_text({}, empty, 0, golden_registry(),
                                      golden_catalog(), {}, 10),
                    ValidationError);
}

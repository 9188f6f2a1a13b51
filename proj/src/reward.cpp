#include "geosid/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

#include "geosid/geo.hpp"

namespace geosid {

namespace {

bool is_whitespace_only(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return std::isspace(c) != 0;
    });
}

std::string syntactic_pattern(const SidConfig& cfg) {
    // Same letter layout as render_sid; value ranges are checked by parse_sid.
    std::string pattern;
    const auto add = [&pattern](char letter) {
        pattern += std::string("<") + letter + "_\\d+>";
    };
    for (int i = 0; i < cfg.geo_token_count; ++i)
        add(static_cast<char>('m' + i));
    for (int i = 0; i < cfg.rvq_levels; ++i) add(static_cast<char>('a' + i));
    add(static_cast<char>('a' + cfg.rvq_levels));
    return pattern;
}

struct TokenRun {
    std::size_t begin;
    std::size_t end;
};

std::vector<TokenRun> find_token_runs(std::string_view text,
                                      const SidConfig& cfg) {
    const std::regex re(syntactic_pattern(cfg));
    std::vector<TokenRun> runs;
    auto begin = std::cregex_iterator(text.data(), text.data() + text.size(), re);
    for (auto it = begin; it != std::cregex_iterator(); ++it) {
        const auto pos = static_cast<std::size_t>(it->position(0));
        runs.push_back({pos, pos + static_cast<std::size_t>(it->length(0))});
    }
    return runs;
}

std::optional<SpatialSemanticId> parse_run(std::string_view run,
                                           const SidConfig& cfg) {
    try {
        return parse_sid(run, cfg);
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

}  // namespace

void RewardConfig::validate() const {
    if (!(d_near_km < d_far_km)) {
        throw ValidationError("d_near must be < d_far");
    }
    if (!(r_min < r_max)) throw ValidationError("r_min must be < r_max");
    double weight_sum = lambda_u;
    for (double w : geo_weights) {
        if (w < 0) throw ValidationError("negative hierarchy weight");
        weight_sum += w;
    }
    for (double w : semantic_weights) {
        if (w < 0) throw ValidationError("negative hierarchy weight");
        weight_sum += w;
    }
    if (weight_sum > 1.0 + 1e-12) {
        throw ValidationError("hierarchy weights plus lambda_u exceed 1");
    }
}

std::vector<double> RewardConfig::spread_weights(int count, double total) {
    // Linearly decreasing proportions (count+1, count, ..., 2); reproduces
    // (0.3, 0.2) for two geo tokens.
    std::vector<double> weights(static_cast<std::size_t>(count));
    double denom = 0;
    for (int i = 0; i < count; ++i) denom += static_cast<double>(count + 1 - i);
    for (int i = 0; i < count; ++i) {
        weights[static_cast<std::size_t>(i)] =
            total * static_cast<double>(count + 1 - i) / denom;
    }
    return weights;
}

double distance_reward(double distance_km, const RewardConfig& config) {
    if (!(distance_km >= 0)) {
        throw ValidationError("distance must be non-negative");
    }
    const double d_tilde = std::log1p(distance_km);
    const double near = std::log1p(config.d_near_km);
    const double far = std::log1p(config.d_far_km);
    const double kappa = (config.r_min - config.r_max) / (far - near);
    const double r = config.r_max + kappa * (d_tilde - near);
    return std::clamp(r, config.r_min, config.r_max);
}

double sid_accuracy_reward(const SpatialSemanticId& predicted,
                           const SpatialSemanticId& gold,
                           const RewardConfig& config) {
    if (predicted.geo.size() != gold.geo.size() ||
        predicted.semantic.size() != gold.semantic.size()) {
        throw ValidationError("SID shape mismatch in accuracy reward");
    }
    const auto weights_for = [](const std::vector<double>& configured,
                                std::size_t count, double total) {
        if (configured.size() == count) return configured;
        return RewardConfig::spread_weights(static_cast<int>(count), total);
    };
    const auto geo_w = weights_for(config.geo_weights, gold.geo.size(), 0.5);
    const auto sem_w =
        weights_for(config.semantic_weights, gold.semantic.size(), 0.4);

    double r = 0;
    for (std::size_t i = 0; i < gold.geo.size(); ++i) {
        if (predicted.geo[i] != gold.geo[i]) break;
        r += geo_w[i];
    }
    for (std::size_t i = 0; i < gold.semantic.size(); ++i) {
        if (predicted.semantic[i] != gold.semantic[i]) break;
        r += sem_w[i];
    }
    if (predicted == gold) r += config.lambda_u;
    return std::min(1.0, r);
}

double format_reward(std::string_view completion, const RewardConfig& config,
                     const SidConfig& sid_config) {
    constexpr std::string_view kOpen = "<think>";
    constexpr std::string_view kClose = "</think>";

    const std::size_t open = completion.find(kOpen);
    if (open == std::string_view::npos) return 0.0;
    if (completion.find(kOpen, open + 1) != std::string_view::npos) return 0.0;
    if (!is_whitespace_only(completion.substr(0, open))) return 0.0;

    const std::size_t close = completion.find(kClose, open + kOpen.size());
    if (close == std::string_view::npos) return 0.0;
    if (completion.find(kClose, close + 1) != std::string_view::npos) return 0.0;

    const std::string_view body =
        completion.substr(open + kOpen.size(), close - open - kOpen.size());
    const std::size_t step1 = body.find("Step 1:");
    if (step1 == std::string_view::npos) return 0.0;
    const std::size_t step2 = body.find("Step 2:", step1);
    if (step2 == std::string_view::npos) return 0.0;
    if (body.find("Step 3:", step2) == std::string_view::npos) return 0.0;

    const std::string_view tail = completion.substr(close + kClose.size());
    const auto runs = find_token_runs(tail, sid_config);
    if (runs.size() != 1) return 0.0;
    if (!parse_run(tail.substr(runs[0].begin, runs[0].end - runs[0].begin),
                   sid_config)) {
        return 0.0;
    }
    if (!is_whitespace_only(tail.substr(0, runs[0].begin)) ||
        !is_whitespace_only(tail.substr(runs[0].end))) {
        return 0.0;
    }
    return config.fmt_value;
}

std::optional<Prediction> extract_prediction(std::string_view completion,
                                             const SidRegistry& registry) {
    constexpr std::string_view kClose = "</think>";
    const std::size_t last_close = completion.rfind(kClose);
    const std::string_view scan =
        last_close == std::string_view::npos
            ? completion
            : completion.substr(last_close + kClose.size());
    for (const auto& run : find_token_runs(scan, registry.config())) {
        const auto sid =
            parse_run(scan.substr(run.begin, run.end - run.begin),
                      registry.config());
        if (!sid) continue;
        return Prediction{*sid, registry.coordinates(*sid)};
    }
    return std::nullopt;
}

RewardBreakdown composite_reward(std::string_view completion,
                                 const SpatialSemanticId& gold_sid,
                                 const GeoPoint& gold_point,
                                 const SidRegistry& registry,
                                 const RewardConfig& config) {
    RewardBreakdown out;
    out.r_fmt = format_reward(completion, config, registry.config());
    const auto prediction = extract_prediction(completion, registry);
    if (prediction) {
        out.parsed_sid = prediction->sid;
        out.r_acc = sid_accuracy_reward(prediction->sid, gold_sid, config);
        if (prediction->point) {
            const double d = haversine_km(*prediction->point, gold_point);
            out.haversine_error_km = d;
            out.r_dist = distance_reward(d, config);
        }
        // An unregistered SID resolves no coordinates: r_dist stays 0 so it
        // cannot outscore a registered but distant prediction.
    }
    out.total = out.r_fmt + config.alpha * out.r_acc + config.beta * out.r_dist;
    return out;
}

std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     const RewardConfig& config) {
    if (rewards.empty()) throw ValidationError("group_advantages: empty group");
    const double n = static_cast<double>(rewards.size());
    const double mean =
        std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double var = 0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double std_pop = std::sqrt(var / n);

    std::vector<double> advantages(rewards.size(), 0.0);
    if (std_pop < config.advantage_epsilon) return advantages;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        advantages[i] = (rewards[i] - mean) / (std_pop + config.advantage_epsilon);
    }
    return advantages;
}

}  // namespace geosid

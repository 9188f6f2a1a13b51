#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "geosid/sid.hpp"
#include "geosid/types.hpp"

namespace geosid {

struct RewardConfig {
    double alpha = 2.0;
    double beta = 1.0;
    double lambda_u = 0.1;
    double d_near_km = 0.1;
    double d_far_km = 3.0;
    double r_min = 0.0;
    double r_max = 1.0;
    // Cumulative-match weights: geo_weights[i] applies when geo tokens
    // 0..i all match, semantic_weights likewise.
    std::vector<double> geo_weights = {0.3, 0.2};
    std::vector<double> semantic_weights = {0.25, 0.15};
    double fmt_value = 2.0;
    double advantage_epsilon = 1e-6;

    void validate() const;

    // Weights for non-default token counts: the default mass (0.5 geo, 0.4
    // semantic) spread as a linearly decreasing sequence.
    static std::vector<double> spread_weights(int count, double total);
};

// Clipped log-linear distance reward: full credit inside d_near, saturating
// to r_min beyond d_far. Invariant under the logarithm base.
double distance_reward(double distance_km, const RewardConfig& config);

// Hierarchical SID match reward with the exact-match bonus, capped at 1.
double sid_accuracy_reward(const SpatialSemanticId& predicted,
                           const SpatialSemanticId& gold,
                           const RewardConfig& config);

// fmt_value iff the completion is exactly one <think> block whose body names
// Step 1/2/3 in order, followed by exactly one SID token run and whitespace.
double format_reward(std::string_view completion, const RewardConfig& config,
                     const SidConfig& sid_config = {});

struct Prediction {
    SpatialSemanticId sid;
    std::optional<GeoPoint> point;  // absent when the SID is unregistered
};

// First valid SID run after the last </think> (whole text when no think
// block). Absence is a value, not an error.
std::optional<Prediction> extract_prediction(std::string_view completion,
                                             const SidRegistry& registry);

struct RewardBreakdown {
    double r_fmt = 0.0;
    double r_acc = 0.0;
    double r_dist = 0.0;
    double total = 0.0;
    std::optional<SpatialSemanticId> parsed_sid;
    std::optional<double> haversine_error_km;
};

RewardBreakdown composite_reward(std::string_view completion,
                                 const SpatialSemanticId& gold_sid,
                                 const GeoPoint& gold_point,
                                 const SidRegistry& registry,
                                 const RewardConfig& config);

// Group-relative advantages: (r - mean) / (population std + epsilon); all
// zeros when the group variance vanishes.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     const RewardConfig& config);

}  // namespace geosid

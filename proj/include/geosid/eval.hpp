#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "geosid/sid.hpp"
#include "geosid/types.hpp"

namespace geosid {

struct PredictionRecord {
    std::string prompt_id;
    std::vector<std::string> ranked;  // SID surfaces, best first, no duplicates
    std::string gold_surface;
    GeoPoint gold_point;
};

// Fraction of records whose gold SID appears in the top K. Surfaces are
// compared after canonicalization through parse_sid.
double hit_rate_at_k(const std::vector<PredictionRecord>& records, int k,
                     const SidConfig& sid_config = {});

// Single relevant item per record, so IDCG = 1 and each hit at rank r
// contributes 1/log2(1 + r).
double ndcg_at_k(const std::vector<PredictionRecord>& records, int k,
                 const SidConfig& sid_config = {});

struct ErrorDistribution {
    std::map<int, double> percentiles;               // level -> km
    std::vector<std::pair<double, double>> cdf;      // distance, fraction <=
    std::size_t n_resolved = 0;
    std::size_t n_unresolved = 0;  // top-1 without registry coordinates
};

// Haversine error of each record's top-1 prediction. Nearest-rank
// percentiles; CDF sampled at cdf_points equally spaced distances.
ErrorDistribution error_distribution(
    const std::vector<PredictionRecord>& records, const SidRegistry& registry,
    const std::vector<int>& percentiles = {50, 75, 90}, int cdf_points = 200);

struct EvalReport {
    std::size_t n_queries = 0;
    std::map<int, double> hr_at;
    std::map<int, double> ndcg_at;
    std::map<int, double> error_percentiles;
    std::vector<std::pair<double, double>> cdf;
    std::size_t n_unresolved = 0;
};

EvalReport evaluate(const std::vector<PredictionRecord>& records,
                    const SidRegistry& registry, const std::vector<int>& ks,
                    int cdf_points = 200);

enum class ReportFormat { json, csv };

void write_report(const EvalReport& report, const std::string& path,
                  ReportFormat format);
EvalReport read_report(const std::string& path, ReportFormat format);

// Two-column CSV (distance_km, cumulative_fraction) for plotting tools.
void write_cdf_csv(const EvalReport& report, const std::string& path);

// Element-wise mean over reports from repeated inference runs.
EvalReport aggregate_reports(const std::vector<EvalReport>& reports);

std::vector<PredictionRecord> load_predictions(
    const std::string& predictions_path, const std::string& prompts_path);

}  // namespace geosid

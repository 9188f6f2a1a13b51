#include "geosid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "geosid/geo.hpp"
#include "geosid/io.hpp"

namespace geosid {

namespace {

std::optional<SpatialSemanticId> canonical(const std::string& surface,
                                           const SidConfig& cfg) {
    try {
        return parse_sid(surface, cfg);
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

// 1-based rank of the gold SID within the ranked list, 0 when absent.
std::size_t gold_rank(const PredictionRecord& record, const SidConfig& cfg) {
    const auto gold = canonical(record.gold_surface, cfg);
    if (!gold) return 0;
    for (std::size_t i = 0; i < record.ranked.size(); ++i) {
        const auto candidate = canonical(record.ranked[i], cfg);
        if (candidate && *candidate == *gold) return i + 1;
    }
    return 0;
}

}  // namespace

double hit_rate_at_k(const std::vector<PredictionRecord>& records, int k,
                     const SidConfig& sid_config) {
    if (k < 1) throw ValidationError("K must be >= 1");
    if (records.empty()) throw ValidationError("no prediction records");
    std::size_t hits = 0;
    for (const auto& r : records) {
        const std::size_t rank = gold_rank(r, sid_config);
        if (rank >= 1 && rank <= static_cast<std::size_t>(k)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double ndcg_at_k(const std::vector<PredictionRecord>& records, int k,
                 const SidConfig& sid_config) {
    if (k < 1) throw ValidationError("K must be >= 1");
    if (records.empty()) throw ValidationError("no prediction records");
    double total = 0;
    for (const auto& r : records) {
        const std::size_t rank = gold_rank(r, sid_config);
        if (rank >= 1 && rank <= static_cast<std::size_t>(k)) {
            total += 1.0 / std::log2(1.0 + static_cast<double>(rank));
        }
    }
    return total / static_cast<double>(records.size());
}

ErrorDistribution error_distribution(
    const std::vector<PredictionRecord>& records, const SidRegistry& registry,
    const std::vector<int>& percentiles, int cdf_points) {
    if (cdf_points < 1) throw ValidationError("cdf_points must be >= 1");
    ErrorDistribution out;
    std::vector<double> errors;
    for (const auto& r : records) {
        if (r.ranked.empty()) {
            ++out.n_unresolved;
            continue;
        }
        const auto sid = canonical(r.ranked.front(), registry.config());
        const auto point = sid ? registry.coordinates(*sid) : std::nullopt;
        if (!point) {
            ++out.n_unresolved;
            continue;
        }
        errors.push_back(haversine_km(*point, r.gold_point));
    }
    out.n_resolved = errors.size();
    if (errors.empty()) {
        throw ValidationError("no records resolve a predicted point");
    }
    std::sort(errors.begin(), errors.end());

    for (int p : percentiles) {
        if (p < 1 || p > 100) throw ValidationError("percentile out of range");
        const auto rank = static_cast<std::size_t>(
            std::ceil(static_cast<double>(p) / 100.0 *
                      static_cast<double>(errors.size())));
        out.percentiles[p] = errors[std::max<std::size_t>(rank, 1) - 1];
    }

    const double max_error = errors.back();
    const auto fraction_at = [&errors](double x) {
        const auto it = std::upper_bound(errors.begin(), errors.end(), x);
        return static_cast<double>(it - errors.begin()) /
               static_cast<double>(errors.size());
    };
    if (max_error == 0.0 || cdf_points == 1) {
        out.cdf.emplace_back(0.0, fraction_at(0.0));
    } else {
        for (int i = 0; i < cdf_points; ++i) {
            const double x = max_error * static_cast<double>(i) /
                             static_cast<double>(cdf_points - 1);
            out.cdf.emplace_back(x, fraction_at(x));
        }
    }
    return out;
}

EvalReport evaluate(const std::vector<PredictionRecord>& records,
                    const SidRegistry& registry, const std::vector<int>& ks,
                    int cdf_points) {
    EvalReport report;
    report.n_queries = records.size();
    for (int k : ks) {
        report.hr_at[k] = hit_rate_at_k(records, k, registry.config());
        report.ndcg_at[k] = ndcg_at_k(records, k, registry.config());
    }
    const auto dist = error_distribution(records, registry, {50, 75, 90},
                                         cdf_points);
    report.error_percentiles = dist.percentiles;
    report.cdf = dist.cdf;
    report.n_unresolved = dist.n_unresolved;
    return report;
}

namespace {

nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["n_queries"] = r.n_queries;
    j["n_unresolved"] = r.n_unresolved;
    for (const auto& [k, v] : r.hr_at) j["hr_at"][std::to_string(k)] = v;
    for (const auto& [k, v] : r.ndcg_at) j["ndcg_at"][std::to_string(k)] = v;
    for (const auto& [p, v] : r.error_percentiles) {
        j["error_percentiles"][std::to_string(p)] = v;
    }
    auto& cdf = j["cdf"] = nlohmann::json::array();
    for (const auto& [x, f] : r.cdf) cdf.push_back({x, f});
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.n_queries = j.value("n_queries", std::size_t{0});
    r.n_unresolved = j.value("n_unresolved", std::size_t{0});
    if (j.contains("hr_at")) {
        for (const auto& [k, v] : j["hr_at"].items())
            r.hr_at[std::stoi(k)] = v.get<double>();
    }
    if (j.contains("ndcg_at")) {
        for (const auto& [k, v] : j["ndcg_at"].items())
            r.ndcg_at[std::stoi(k)] = v.get<double>();
    }
    if (j.contains("error_percentiles")) {
        for (const auto& [k, v] : j["error_percentiles"].items())
            r.error_percentiles[std::stoi(k)] = v.get<double>();
    }
    if (j.contains("cdf")) {
        for (const auto& pair : j["cdf"])
            r.cdf.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    return r;
}

std::string format_double(double v) {
    nlohmann::json j = v;  // shortest round-trip representation
    return j.dump();
}

}  // namespace

void write_report(const EvalReport& report, const std::string& path,
                  ReportFormat format) {
    if (format == ReportFormat::json) {
        write_file(path, report_to_json(report).dump(2) + "\n");
        return;
    }
    std::string out = "metric,key,value\n";
    out += "n_queries,," + std::to_string(report.n_queries) + "\n";
    out += "n_unresolved,," + std::to_string(report.n_unresolved) + "\n";
    for (const auto& [k, v] : report.hr_at) {
        out += "hr," + std::to_string(k) + "," + format_double(v) + "\n";
    }
    for (const auto& [k, v] : report.ndcg_at) {
        out += "ndcg," + std::to_string(k) + "," + format_double(v) + "\n";
    }
    for (const auto& [p, v] : report.error_percentiles) {
        out += "error_percentile," + std::to_string(p) + "," +
               format_double(v) + "\n";
    }
    for (const auto& [x, f] : report.cdf) {
        out += "cdf," + format_double(x) + "," + format_double(f) + "\n";
    }
    write_file(path, out);
}

EvalReport read_report(const std::string& path, ReportFormat format) {
    if (format == ReportFormat::json) {
        auto parsed = nlohmann::json::parse(read_file(path), nullptr, false);
        if (parsed.is_discarded()) {
            throw ValidationError(path + ": invalid JSON report");
        }
        return report_from_json(parsed);
    }
    EvalReport r;
    const auto lines = read_lines(path);
    for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
        if (lines[i].empty()) continue;
        const auto cols = split_view(lines[i], ',');
        if (cols.size() != 3) {
            throw ValidationError(path + ":" + std::to_string(i + 1) +
                                  ": expected metric,key,value");
        }
        const std::string metric(cols[0]), key(cols[1]), value(cols[2]);
        if (metric == "n_queries") r.n_queries = std::stoull(value);
        else if (metric == "n_unresolved") r.n_unresolved = std::stoull(value);
        else if (metric == "hr") r.hr_at[std::stoi(key)] = std::stod(value);
        else if (metric == "ndcg") r.ndcg_at[std::stoi(key)] = std::stod(value);
        else if (metric == "error_percentile")
            r.error_percentiles[std::stoi(key)] = std::stod(value);
        else if (metric == "cdf")
            r.cdf.emplace_back(std::stod(key), std::stod(value));
        else throw ValidationError(path + ": unknown metric '" + metric + "'");
    }
    return r;
}

void write_cdf_csv(const EvalReport& report, const std::string& path) {
    std::string out = "distance_km,cumulative_fraction\n";
    for (const auto& [x, f] : report.cdf) {
        out += format_double(x) + "," + format_double(f) + "\n";
    }
    write_file(path, out);
}

EvalReport aggregate_reports(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ValidationError("no reports to aggregate");
    EvalReport mean;
    mean.n_queries = reports.front().n_queries;
    const double n = static_cast<double>(reports.size());
    for (const auto& r : reports) {
        for (const auto& [k, v] : r.hr_at) mean.hr_at[k] += v / n;
        for (const auto& [k, v] : r.ndcg_at) mean.ndcg_at[k] += v / n;
        for (const auto& [p, v] : r.error_percentiles) {
            mean.error_percentiles[p] += v / n;
        }
        mean.n_unresolved += r.n_unresolved;
    }
    mean.n_unresolved /= reports.size();
    return mean;
}

std::vector<PredictionRecord> load_predictions(
    const std::string& predictions_path, const std::string& prompts_path) {
    std::map<std::string, std::pair<std::string, GeoPoint>> gold;
    for (const auto& j : read_jsonl(prompts_path)) {
        gold[j.at("prompt_id").get<std::string>()] = {
            j.at("target_sid_surface").get<std::string>(),
            {j.at("gt_lat").get<double>(), j.at("gt_lng").get<double>()}};
    }
    std::vector<PredictionRecord> records;
    for (const auto& j : read_jsonl(predictions_path)) {
        PredictionRecord r;
        r.prompt_id = j.at("prompt_id").get<std::string>();
        r.ranked = j.at("ranked").get<std::vector<std::string>>();
        if (r.ranked.empty()) {
            throw ValidationError("prediction with empty ranked list: " +
                                  r.prompt_id);
        }
        const std::set<std::string> unique(r.ranked.begin(), r.ranked.end());
        if (unique.size() != r.ranked.size()) {
            throw ValidationError("duplicate surfaces in ranked list: " +
                                  r.prompt_id);
        }
        const auto it = gold.find(r.prompt_id);
        if (it == gold.end()) {
            throw ValidationError("prediction for unknown prompt_id: " +
                                  r.prompt_id);
        }
        r.gold_surface = it->second.first;
        r.gold_point = it->second.second;
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace geosid

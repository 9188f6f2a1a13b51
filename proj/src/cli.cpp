#include "geosid/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "geosid/eval.hpp"
#include "geosid/geocode.hpp"
#include "geosid/ingest.hpp"
#include "geosid/io.hpp"
#include "geosid/prompt.hpp"
#include "geosid/reward.hpp"
#include "geosid/s2cell.hpp"
#include "geosid/sid.hpp"
#include "geosid/timeutil.hpp"
#include "geosid/types.hpp"

namespace geosid::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CityConfig {
    std::string raw_path;
    CheckinFormat format = CheckinFormat::foursquare_tsv;
    std::vector<std::string> columns;  // empty = format default
    std::string embedding_file;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::map<std::string, CityConfig> cities;

    int min_activity = 10;
    bool fixpoint_filter = false;
    double gap_hours = 24.0;
    SplitRatios ratios;

    SidConfig sid;
    SerializationConfig serialization;
    RewardConfig reward;
    GeocodeConfig geocode;
    bool geocode_offline = true;

    std::string dir_for(const std::string& city) const {
        return output_dir + "/" + city;
    }
};

PipelineConfig load_config(const std::string& path) {
    auto j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw ValidationError(path + ": invalid JSON config");

    PipelineConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);

    const json cities = j.value("cities", json::object());
    for (const auto& [name, cj] : cities.items()) {
        CityConfig city;
        city.raw_path = cj.value("raw_path", "");
        const std::string fmt = cj.value("format", "foursquare_tsv");
        if (fmt == "foursquare_tsv") city.format = CheckinFormat::foursquare_tsv;
        else if (fmt == "gowalla") city.format = CheckinFormat::gowalla;
        else throw ValidationError("unknown check-in format: " + fmt);
        if (cj.contains("columns")) {
            city.columns = cj["columns"].get<std::vector<std::string>>();
        }
        city.embedding_file = cj.value("embedding_file", "");
        cfg.cities[name] = city;
    }

    const auto ingest = j.value("ingest", json::object());
    cfg.min_activity = ingest.value("min_activity", cfg.min_activity);
    cfg.fixpoint_filter = ingest.value("fixpoint_filter", cfg.fixpoint_filter);
    cfg.gap_hours = ingest.value("gap_hours", cfg.gap_hours);
    if (ingest.contains("ratios")) {
        const auto& r = ingest["ratios"];
        cfg.ratios = {r.at(0).get<double>(), r.at(1).get<double>(),
                      r.at(2).get<double>()};
    }

    const auto sid = j.value("sid", json::object());
    cfg.sid.geo_token_count = sid.value("geo_token_count", cfg.sid.geo_token_count);
    cfg.sid.rvq_levels = sid.value("rvq_levels", cfg.sid.rvq_levels);
    cfg.sid.rvq_codebook_size =
        sid.value("rvq_codebook_size", cfg.sid.rvq_codebook_size);
    cfg.sid.lcp_scope = sid.value("lcp_scope", "per_dataset") == std::string("union")
                            ? SidConfig::LcpScope::cross_dataset_union
                            : SidConfig::LcpScope::per_dataset;
    cfg.sid.embedding_key =
        sid.value("embedding_key", "category") == std::string("poi")
            ? SidConfig::EmbeddingKey::poi
            : SidConfig::EmbeddingKey::category;
    cfg.sid.rng_seed = sid.value("rng_seed", cfg.seed);

    const auto prompt = j.value("prompt", json::object());
    cfg.serialization.max_history_checkins_train = prompt.value(
        "max_history_checkins_train",
        cfg.serialization.max_history_checkins_train);
    cfg.serialization.max_history_checkins_eval = prompt.value(
        "max_history_checkins_eval", cfg.serialization.max_history_checkins_eval);
    cfg.serialization.include_addresses =
        prompt.value("include_addresses", cfg.serialization.include_addresses);
    cfg.serialization.include_distances =
        prompt.value("include_distances", cfg.serialization.include_distances);

    const auto reward = j.value("reward", json::object());
    cfg.reward.alpha = reward.value("alpha", cfg.reward.alpha);
    cfg.reward.beta = reward.value("beta", cfg.reward.beta);
    cfg.reward.lambda_u = reward.value("lambda_u", cfg.reward.lambda_u);
    cfg.reward.d_near_km = reward.value("d_near_km", cfg.reward.d_near_km);
    cfg.reward.d_far_km = reward.value("d_far_km", cfg.reward.d_far_km);
    cfg.reward.r_min = reward.value("r_min", cfg.reward.r_min);
    cfg.reward.r_max = reward.value("r_max", cfg.reward.r_max);
    if (reward.contains("weights")) {
        const auto& w = reward["weights"];
        cfg.reward.geo_weights = {w.value("g1", 0.3), w.value("g1g2", 0.2)};
        cfg.reward.semantic_weights = {w.value("s1", 0.25), w.value("s1s2", 0.15)};
    }
    cfg.reward.fmt_value = reward.value("fmt_value", cfg.reward.fmt_value);
    cfg.reward.advantage_epsilon =
        reward.value("advantage_epsilon", cfg.reward.advantage_epsilon);
    cfg.reward.validate();

    const auto geocode = j.value("geocode", json::object());
    cfg.geocode.endpoint_base =
        geocode.value("endpoint", cfg.geocode.endpoint_base);
    cfg.geocode.path_template =
        geocode.value("path_template", cfg.geocode.path_template);
    cfg.geocode.address_field =
        geocode.value("address_field", cfg.geocode.address_field);
    cfg.geocode.bearer_token =
        geocode.value("bearer_token", cfg.geocode.bearer_token);
    cfg.geocode.requests_per_second =
        geocode.value("requests_per_second", cfg.geocode.requests_per_second);
    cfg.geocode.cache_path = geocode.value("cache_path", cfg.geocode.cache_path);
    cfg.geocode_offline = geocode.value("offline", cfg.geocode_offline);
    if (const char* endpoint = std::getenv("GEOSID_GEOCODE_ENDPOINT")) {
        cfg.geocode.endpoint_base = endpoint;
    }
    return cfg;
}

std::string pick_city(const PipelineConfig& cfg, std::string requested) {
    if (!requested.empty()) {
        if (!cfg.cities.count(requested)) {
            throw ValidationError("city '" + requested + "' not in config");
        }
        return requested;
    }
    if (cfg.cities.size() == 1) return cfg.cities.begin()->first;
    throw ValidationError("--city is required when the config has several cities");
}

// ---- stage file helpers -------------------------------------------------

json checkin_to_json(const CheckIn& c) {
    return {{"user_id", c.user_id},
            {"poi_id", c.poi_id},
            {"category_id", c.category_id},
            {"category_name", c.category_name},
            {"lat", c.lat},
            {"lng", c.lng},
            {"utc_timestamp", c.utc_timestamp},
            {"tz_offset_minutes", c.tz_offset_minutes}};
}

CheckIn checkin_from_json(const json& j) {
    CheckIn c;
    c.user_id = j.at("user_id").get<std::string>();
    c.poi_id = j.at("poi_id").get<std::string>();
    c.category_id = j.at("category_id").get<std::string>();
    c.category_name = j.at("category_name").get<std::string>();
    c.lat = j.at("lat").get<double>();
    c.lng = j.at("lng").get<double>();
    c.utc_timestamp = j.at("utc_timestamp").get<std::int64_t>();
    c.tz_offset_minutes = j.at("tz_offset_minutes").get<int>();
    return c;
}

void write_split(const std::string& dir, const DatasetSplit& split) {
    std::vector<json> checkin_records;
    std::vector<json> manifest;
    std::size_t next_index = 0;
    const auto emit_part = [&](const std::vector<Trajectory>& part,
                               std::string_view label) {
        for (const auto& t : part) {
            std::vector<std::size_t> indices;
            for (const auto& c : t.checkins) {
                checkin_records.push_back(checkin_to_json(c));
                indices.push_back(next_index++);
            }
            manifest.push_back({{"trajectory_id", t.trajectory_id},
                                {"user_id", t.user_id},
                                {"split", std::string(label)},
                                {"checkin_indices", indices}});
        }
    };
    emit_part(split.train, "train");
    emit_part(split.valid, "valid");
    emit_part(split.test, "test");
    write_jsonl(dir + "/checkins.jsonl", checkin_records);
    write_jsonl(dir + "/manifest.jsonl", manifest);

    std::vector<json> catalog;
    for (const auto& [poi_id, info] : split.catalog) {
        catalog.push_back({{"poi_id", info.poi_id},
                           {"category_id", info.category_id},
                           {"category_name", info.category_name},
                           {"lat", info.lat},
                           {"lng", info.lng}});
    }
    write_jsonl(dir + "/catalog.jsonl", catalog);
}

DatasetSplit load_split(const std::string& dir) {
    std::vector<CheckIn> checkins;
    for (const auto& j : read_jsonl(dir + "/checkins.jsonl")) {
        checkins.push_back(checkin_from_json(j));
    }
    DatasetSplit split;
    for (const auto& j : read_jsonl(dir + "/manifest.jsonl")) {
        Trajectory t;
        t.trajectory_id = j.at("trajectory_id").get<std::string>();
        t.user_id = j.at("user_id").get<std::string>();
        for (const auto& idx : j.at("checkin_indices")) {
            const auto i = idx.get<std::size_t>();
            if (i >= checkins.size()) {
                throw ValidationError(dir + "/manifest.jsonl: check-in index " +
                                      std::to_string(i) + " out of range");
            }
            t.checkins.push_back(checkins[i]);
        }
        const std::string label = j.at("split").get<std::string>();
        if (label == "train") split.train.push_back(std::move(t));
        else if (label == "valid") split.valid.push_back(std::move(t));
        else if (label == "test") split.test.push_back(std::move(t));
        else throw ValidationError("unknown split label: " + label);
    }
    split.catalog = [&] {
        PoiCatalog catalog;
        const std::string geocoded = dir + "/catalog_geocoded.jsonl";
        const std::string plain = dir + "/catalog.jsonl";
        const std::string path = fs::exists(geocoded) ? geocoded : plain;
        for (const auto& j : read_jsonl(path)) {
            PoiInfo info;
            info.poi_id = j.at("poi_id").get<std::string>();
            info.category_id = j.at("category_id").get<std::string>();
            info.category_name = j.at("category_name").get<std::string>();
            info.lat = j.at("lat").get<double>();
            info.lng = j.at("lng").get<double>();
            info.address = j.value("address", "");
            catalog.emplace(info.poi_id, std::move(info));
        }
        return catalog;
    }();
    return split;
}

json stats_to_json(const DatasetStats& s) {
    return {{"users", s.n_users},
            {"pois", s.n_pois},
            {"categories", s.n_categories},
            {"checkins", s.n_checkins},
            {"trajectories",
             {{"all", s.n_trajectories_all},
              {"train", s.n_trajectories_train},
              {"valid", s.n_trajectories_valid},
              {"test", s.n_trajectories_test}}}};
}

std::vector<json> prompts_to_json(const std::vector<PromptRecord>& records) {
    std::vector<json> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back({{"prompt_id", r.prompt_id},
                       {"user_id", r.user_id},
                       {"prompt", r.prompt_text},
                       {"target_sid_surface", r.target_sid_surface},
                       {"gt_lat", r.ground_truth_point.lat},
                       {"gt_lng", r.ground_truth_point.lng},
                       {"target_time_iso", format_iso(r.target_local_time)}});
    }
    return out;
}

// ---- subcommands --------------------------------------------------------

int cmd_ingest(const PipelineConfig& cfg, const std::string& city_name) {
    const auto& city = cfg.cities.at(city_name);
    if (city.raw_path.empty()) {
        throw ValidationError("city '" + city_name + "' has no raw_path");
    }
    const auto parsed =
        parse_checkin_file(city.raw_path, city.format, city.columns);
    auto filtered = filter_min_activity(parsed.checkins, cfg.min_activity,
                                        cfg.fixpoint_filter);
    auto trajectories = segment_trajectories(std::move(filtered), cfg.gap_hours);
    const auto split = temporal_split(std::move(trajectories), cfg.ratios);
    const auto stats = dataset_stats(split);

    const std::string dir = cfg.dir_for(city_name);
    fs::create_directories(dir);
    write_split(dir, split);
    write_file(dir + "/stats.json", stats_to_json(stats).dump(2) + "\n");

    std::cout << "ingest " << city_name << ": " << parsed.checkins.size()
              << " raw (" << parsed.malformed << " malformed), "
              << stats.n_checkins << " kept, " << stats.n_users << " users, "
              << stats.n_pois << " pois, " << stats.n_trajectories_all
              << " trajectories (" << stats.n_trajectories_train << "/"
              << stats.n_trajectories_valid << "/" << stats.n_trajectories_test
              << ")\n";
    return 0;
}

int cmd_geocode(PipelineConfig cfg, const std::string& city_name, bool offline) {
    const std::string dir = cfg.dir_for(city_name);
    auto split = load_split(dir);
    if (cfg.geocode.cache_path.empty()) {
        cfg.geocode.cache_path = dir + "/geocode_cache.tsv";
    }
    GeocodeClient client(cfg.geocode);
    const auto mode = offline || cfg.geocode_offline ? GeocodeMode::cache_only
                                                     : GeocodeMode::online;
    const auto summary = client.warm_cache(split.catalog, mode);

    std::vector<json> records;
    for (const auto& [poi_id, info] : split.catalog) {
        records.push_back({{"poi_id", info.poi_id},
                           {"category_id", info.category_id},
                           {"category_name", info.category_name},
                           {"lat", info.lat},
                           {"lng", info.lng},
                           {"address", info.address}});
    }
    write_jsonl(dir + "/catalog_geocoded.jsonl", records);
    std::cout << "geocode " << city_name << ": " << summary.hits << " cached, "
              << summary.fetched << " fetched, " << summary.placeholders
              << " placeholders\n";
    return 0;
}

int cmd_build_sid(const PipelineConfig& cfg, const std::string& city_name) {
    const auto& city = cfg.cities.at(city_name);
    const std::string dir = cfg.dir_for(city_name);
    const auto split = load_split(dir);
    if (city.embedding_file.empty()) {
        throw ValidationError("city '" + city_name + "' has no embedding_file");
    }
    const auto embeddings = EmbeddingTable::load(city.embedding_file);

    // Cross-city registries share one token vocabulary: the prefix is the LCP
    // over every configured city's catalog.
    std::vector<std::string> extra_hex;
    if (cfg.sid.lcp_scope == SidConfig::LcpScope::cross_dataset_union) {
        for (const auto& [other_name, other] : cfg.cities) {
            if (other_name == city_name) continue;
            const auto other_split = load_split(cfg.dir_for(other_name));
            for (const auto& [poi_id, info] : other_split.catalog) {
                extra_hex.push_back(
                    CellId::from_point({info.lat, info.lng}).to_hex());
            }
        }
    }

    std::vector<std::string> warnings;
    const auto registry = build_registry(split.catalog, embeddings, cfg.sid,
                                         &warnings, extra_hex);
    registry.save(dir + "/registry.jsonl");
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "build-sid " << city_name << ": " << registry.size()
              << " SIDs, lcp '" << registry.stripped_lcp() << "', "
              << warnings.size() << " warnings\n";
    return 0;
}

int cmd_emit_prompts(const PipelineConfig& cfg, const std::string& city_name) {
    const std::string dir = cfg.dir_for(city_name);
    const auto split = load_split(dir);
    const auto registry = SidRegistry::load(dir + "/registry.jsonl");

    const auto pretrain =
        emit_pretrain_examples(split, registry, cfg.serialization);
    const auto valid =
        emit_eval_prompts(split, EvalPart::valid, registry, cfg.serialization);
    const auto test =
        emit_eval_prompts(split, EvalPart::test, registry, cfg.serialization);
    write_jsonl(dir + "/prompts_train.jsonl", prompts_to_json(pretrain));
    write_jsonl(dir + "/prompts_valid.jsonl", prompts_to_json(valid));
    write_jsonl(dir + "/prompts_test.jsonl", prompts_to_json(test));

    std::vector<json> alignment;
    for (const auto& [input, target] : emit_alignment_pairs(registry,
                                                            split.catalog)) {
        alignment.push_back({{"input", input}, {"target", target}});
    }
    write_jsonl(dir + "/alignment.jsonl", alignment);

    std::cout << "emit-prompts " << city_name << ": " << pretrain.size()
              << " pretrain, " << valid.size() << " valid, " << test.size()
              << " test, " << alignment.size() << " alignment pairs\n";
    return 0;
}

int cmd_score(const PipelineConfig& cfg, const std::string& city_name,
              const std::string& rollouts_path, std::string prompts_path) {
    const std::string dir = cfg.dir_for(city_name);
    if (prompts_path.empty()) prompts_path = dir + "/prompts_test.jsonl";
    const auto registry = SidRegistry::load(dir + "/registry.jsonl");

    std::map<std::string, std::pair<SpatialSemanticId, GeoPoint>> gold;
    for (const auto& j : read_jsonl(prompts_path)) {
        gold[j.at("prompt_id").get<std::string>()] = {
            parse_sid(j.at("target_sid_surface").get<std::string>(),
                      registry.config()),
            {j.at("gt_lat").get<double>(), j.at("gt_lng").get<double>()}};
    }

    struct ScoredRow {
        std::string prompt_id;
        int completion_index;
        RewardBreakdown breakdown;
    };
    std::vector<ScoredRow> rows;
    std::size_t skipped = 0;
    const auto lines = read_lines(rollouts_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto j = json::parse(lines[i], nullptr, false);
        if (j.is_discarded() || !j.contains("prompt_id") ||
            !j.contains("completion_index") || !j.contains("completion_text")) {
            ++skipped;
            continue;
        }
        const std::string prompt_id = j["prompt_id"].get<std::string>();
        const auto it = gold.find(prompt_id);
        if (it == gold.end()) {
            ++skipped;
            continue;
        }
        rows.push_back({prompt_id, j["completion_index"].get<int>(),
                        composite_reward(j["completion_text"].get<std::string>(),
                                         it->second.first, it->second.second,
                                         registry, cfg.reward)});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ScoredRow& a, const ScoredRow& b) {
                         if (a.prompt_id != b.prompt_id)
                             return a.prompt_id < b.prompt_id;
                         return a.completion_index < b.completion_index;
                     });

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        groups[rows[i].prompt_id].push_back(i);
    }
    std::vector<double> advantages(rows.size(), 0.0);
    for (const auto& [prompt_id, members] : groups) {
        std::vector<double> rewards;
        rewards.reserve(members.size());
        for (auto i : members) rewards.push_back(rows[i].breakdown.total);
        const auto adv = group_advantages(rewards, cfg.reward);
        for (std::size_t k = 0; k < members.size(); ++k) {
            advantages[members[k]] = adv[k];
        }
    }

    std::vector<json> records;
    records.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& b = rows[i].breakdown;
        records.push_back(
            {{"prompt_id", rows[i].prompt_id},
             {"completion_index", rows[i].completion_index},
             {"r_fmt", b.r_fmt},
             {"r_acc", b.r_acc},
             {"r_dist", b.r_dist},
             {"total", b.total},
             {"advantage", advantages[i]},
             {"pred_sid", b.parsed_sid ? render_sid(*b.parsed_sid) : ""},
             {"err_km", b.haversine_error_km ? json(*b.haversine_error_km)
                                             : json(nullptr)}});
    }
    write_jsonl(dir + "/scores.jsonl", records);
    if (skipped > 0) {
        std::cerr << "warning: skipped " << skipped << " malformed or "
                  << "unmatched rollout lines\n";
    }
    std::cout << "score " << city_name << ": " << rows.size() << " rollouts, "
              << groups.size() << " prompt groups, " << skipped << " skipped\n";
    return 0;
}

int cmd_advantages(const PipelineConfig& cfg, const std::string& city_name,
                   std::string scores_path) {
    const std::string dir = cfg.dir_for(city_name);
    if (scores_path.empty()) scores_path = dir + "/scores.jsonl";
    auto records = read_jsonl(scores_path);

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        groups[records[i].at("prompt_id").get<std::string>()].push_back(i);
    }
    for (const auto& [prompt_id, members] : groups) {
        std::vector<double> rewards;
        rewards.reserve(members.size());
        for (auto i : members) {
            rewards.push_back(records[i].at("total").get<double>());
        }
        const auto adv = group_advantages(rewards, cfg.reward);
        for (std::size_t k = 0; k < members.size(); ++k) {
            records[members[k]]["advantage"] = adv[k];
        }
    }
    write_jsonl(dir + "/advantages.jsonl", records);
    std::cout << "advantages " << city_name << ": " << records.size()
              << " rows across " << groups.size() << " groups\n";
    return 0;
}

int cmd_evaluate(const PipelineConfig& cfg, const std::string& city_name,
                 const std::string& predictions_path, std::string prompts_path,
                 const std::vector<int>& ks,
                 const std::vector<std::string>& aggregate) {
    const std::string dir = cfg.dir_for(city_name);
    if (!aggregate.empty()) {
        std::vector<EvalReport> reports;
        reports.reserve(aggregate.size());
        for (const auto& path : aggregate) {
            reports.push_back(read_report(path, ReportFormat::json));
        }
        const auto mean = aggregate_reports(reports);
        write_report(mean, dir + "/report_mean.json", ReportFormat::json);
        std::cout << "evaluate " << city_name << ": aggregated "
                  << reports.size() << " reports\n";
        return 0;
    }
    if (prompts_path.empty()) prompts_path = dir + "/prompts_test.jsonl";
    const auto registry = SidRegistry::load(dir + "/registry.jsonl");
    const auto records = load_predictions(predictions_path, prompts_path);
    const auto report = evaluate(records, registry, ks);
    write_report(report, dir + "/report.json", ReportFormat::json);
    write_report(report, dir + "/report.csv", ReportFormat::csv);
    write_cdf_csv(report, dir + "/cdf.csv");
    std::cout << "evaluate " << city_name << ": " << report.n_queries
              << " queries, hr@1 "
              << (report.hr_at.count(1) ? report.hr_at.at(1) : 0.0) << ", "
              << report.n_unresolved << " unresolved\n";
    return 0;
}

int cmd_stats(const PipelineConfig& cfg, const std::string& city_name) {
    const std::string dir = cfg.dir_for(city_name);
    DatasetStats stats;
    if (fs::exists(dir + "/manifest.jsonl")) {
        const auto split = load_split(dir);
        stats = dataset_stats(split);
    }
    std::cout << "city " << city_name << "\n"
              << "  users          " << stats.n_users << "\n"
              << "  pois           " << stats.n_pois << "\n"
              << "  categories     " << stats.n_categories << "\n"
              << "  checkins       " << stats.n_checkins << "\n"
              << "  trajectories   " << stats.n_trajectories_all << " (train "
              << stats.n_trajectories_train << ", valid "
              << stats.n_trajectories_valid << ", test "
              << stats.n_trajectories_test << ")\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"check-in pipeline: spatial semantic ids, prompts, rewards, "
                 "evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string city;
    app.add_option("-c,--config", config_path, "pipeline config JSON")
        ->required();
    app.add_option("--city", city, "city block to operate on");

    auto* ingest = app.add_subcommand("ingest", "parse, filter, segment, split");
    auto* geocode = app.add_subcommand("geocode", "fill street addresses");
    bool offline = false;
    geocode->add_flag("--offline", offline, "never touch the network");
    auto* build_sid = app.add_subcommand("build-sid", "build the SID registry");
    auto* emit_prompts =
        app.add_subcommand("emit-prompts", "serialize prompts and alignments");
    auto* score = app.add_subcommand("score", "score rollout completions");
    std::string rollouts_path, prompts_path;
    score->add_option("--rollouts", rollouts_path, "rollout JSONL")->required();
    score->add_option("--prompts", prompts_path, "prompt JSONL with gold labels");
    auto* advantages =
        app.add_subcommand("advantages", "recompute group advantages");
    std::string scores_path;
    advantages->add_option("--scores", scores_path, "scored rollout JSONL");
    auto* evaluate = app.add_subcommand("evaluate", "HR@K, NDCG@K, error CDF");
    std::string predictions_path, eval_prompts_path;
    std::vector<int> ks = {1, 5, 10, 20};
    std::vector<std::string> aggregate;
    evaluate->add_option("--predictions", predictions_path, "ranked JSONL");
    evaluate->add_option("--prompts", eval_prompts_path, "prompt JSONL");
    evaluate->add_option("--ks", ks, "cutoffs");
    evaluate->add_option("--aggregate", aggregate,
                         "mean over existing report files");
    auto* stats = app.add_subcommand("stats", "print dataset statistics");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    try {
        const PipelineConfig cfg = load_config(config_path);
        const std::string city_name = pick_city(cfg, city);
        if (*ingest) return cmd_ingest(cfg, city_name);
        if (*geocode) return cmd_geocode(cfg, city_name, offline);
        if (*build_sid) return cmd_build_sid(cfg, city_name);
        if (*emit_prompts) return cmd_emit_prompts(cfg, city_name);
        if (*score) return cmd_score(cfg, city_name, rollouts_path, prompts_path);
        if (*advantages) return cmd_advantages(cfg, city_name, scores_path);
        if (*evaluate) {
            if (aggregate.empty() && predictions_path.empty()) {
                throw ValidationError("evaluate needs --predictions or --aggregate");
            }
            return cmd_evaluate(cfg, city_name, predictions_path,
                                eval_prompts_path, ks, aggregate);
        }
        if (*stats) return cmd_stats(cfg, city_name);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 64;
}

}  // namespace geosid::cli

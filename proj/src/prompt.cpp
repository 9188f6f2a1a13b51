#include "geosid/prompt.hpp"

#include <algorithm>
#include <map>

#include "geosid/geo.hpp"
#include "geosid/timeutil.hpp"

namespace geosid {

namespace {

constexpr std::string_view kPreamble =
    "Here is a record of a user's POI accesses, your task is based on the "
    "history to predict the POI that the user is likely to access at the "
    "specified time.";
constexpr std::string_view kHistoryHeader = "Given user historical data:";
constexpr std::string_view kBehaviorHeader = "Given user behavior sequence:";
constexpr std::string_view kUnknownAddress = "an unknown address";

const std::string& poi_address(const PoiCatalog& catalog,
                               const std::string& poi_id) {
    static const std::string empty;
    const auto it = catalog.find(poi_id);
    return it == catalog.end() ? empty : it->second.address;
}

}  // namespace

void SerializationConfig::validate() const {
    if (max_history_checkins_train < 1 || max_history_checkins_eval < 1) {
        throw ValidationError("history limits must be >= 1");
    }
}

std::string format_checkin_line(const CheckIn& c, std::string_view sid_surface,
                                const CheckIn* prev, std::string_view address,
                                const SerializationConfig& config) {
    std::string line = format_prompt_datetime(c.local_timestamp());
    line += ", visit ";
    line += c.category_name;
    if (config.include_addresses) {
        line += " at ";
        line += address.empty() ? kUnknownAddress : address;
    }
    line += " ";
    line += sid_surface;
    if (prev != nullptr && config.include_distances) {
        const double d = haversine_km(prev->point(), c.point());
        line += ", distance is ";
        line += bucket_name(bucket_distance(d));
    }
    line += ".";
    return line;
}

namespace {

struct RenderedLine {
    const CheckIn* checkin;
    const CheckIn* prev;  // predecessor within the original trajectory
    std::size_t block;    // history block index; SIZE_MAX for the context
};

}  // namespace

std::string build_prompt_text(const std::vector<Trajectory>& history,
                              const Trajectory& current_context,
                              std::int64_t target_local_time,
                              const SidRegistry& registry,
                              const PoiCatalog& catalog,
                              const SerializationConfig& config,
                              int max_checkins) {
    config.validate();
    if (current_context.checkins.empty()) {
        throw ValidationError("prompt context must contain >= 1 check-in");
    }
    std::vector<RenderedLine> lines;
    for (std::size_t b = 0; b < history.size(); ++b) {
        const auto& traj = history[b].checkins;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            lines.push_back({&traj[i], i == 0 ? nullptr : &traj[i - 1], b});
        }
    }
    const auto& ctx = current_context.checkins;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        lines.push_back({&ctx[i], i == 0 ? nullptr : &ctx[i - 1],
                         static_cast<std::size_t>(-1)});
    }
    // Keep the most recent max_checkins lines. Distance clauses follow the
    // original trajectory structure, so a partially kept block renders its
    // lines unchanged.
    const std::size_t keep = static_cast<std::size_t>(max_checkins);
    const std::size_t first =
        lines.size() > keep ? lines.size() - keep : 0;

    std::string out;
    out += kPreamble;
    out += "\n";
    out += kHistoryHeader;
    out += "\n";
    std::size_t current_block = static_cast<std::size_t>(-2);
    int block_number = 0;
    for (std::size_t i = first; i < lines.size(); ++i) {
        const auto& l = lines[i];
        if (l.block != current_block) {
            current_block = l.block;
            if (l.block == static_cast<std::size_t>(-1)) {
                out += kBehaviorHeader;
                out += "\n";
            } else {
                ++block_number;
                out += "User Traj#" + std::to_string(block_number) + ":\n";
            }
        }
        const auto& c = *l.checkin;
        out += format_checkin_line(c, registry.surface_for_poi(c.poi_id), l.prev,
                                   poi_address(catalog, c.poi_id), config);
        out += " \n";
    }
    out += "At " + format_prompt_datetime(target_local_time) +
           ", user will visit ";
    return out;
}

PromptRecord build_eval_prompt(const std::vector<Trajectory>& history,
                               const Trajectory& current_context,
                               const CheckIn& target,
                               const SidRegistry& registry,
                               const PoiCatalog& catalog,
                               const SerializationConfig& config,
                               int max_checkins) {
    PromptRecord record;
    record.user_id = current_context.user_id;
    record.prompt_id = current_context.trajectory_id;
    record.prompt_text =
        build_prompt_text(history, current_context, target.local_timestamp(),
                          registry, catalog, config, max_checkins);
    record.target_sid_surface = registry.surface_for_poi(target.poi_id);
    record.ground_truth_point = target.point();
    record.target_local_time = target.local_timestamp();
    return record;
}

std::vector<std::pair<std::string, std::string>> emit_alignment_pairs(
    const SidRegistry& registry, const PoiCatalog& catalog) {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(2 * catalog.size());
    for (const auto& [poi_id, info] : catalog) {
        const std::string surface = registry.surface_for_poi(poi_id);
        const std::string text =
            "Category: " + info.category_name + ". Address: " +
            (info.address.empty() ? std::string(kUnknownAddress)
                                  : info.address) +
            ".";
        out.emplace_back(text, surface);
        out.emplace_back(surface, text);
    }
    return out;
}

namespace {

// User's trajectories grouped in split order; history for a query is every
// earlier trajectory of the same user from the train split.
std::map<std::string, std::vector<const Trajectory*>> train_by_user(
    const DatasetSplit& split) {
    std::map<std::string, std::vector<const Trajectory*>> out;
    for (const auto& t : split.train) out[t.user_id].push_back(&t);
    return out;
}

std::vector<Trajectory> history_before(
    const std::map<std::string, std::vector<const Trajectory*>>& by_user,
    const Trajectory& current) {
    std::vector<Trajectory> history;
    const auto it = by_user.find(current.user_id);
    if (it == by_user.end()) return history;
    for (const auto* t : it->second) {
        if (t->trajectory_id == current.trajectory_id) continue;
        if (t->end_local() < current.start_local()) history.push_back(*t);
    }
    std::sort(history.begin(), history.end(),
              [](const Trajectory& a, const Trajectory& b) {
                  if (a.end_local() != b.end_local())
                      return a.end_local() < b.end_local();
                  return a.trajectory_id < b.trajectory_id;
              });
    return history;
}

}  // namespace

std::vector<PromptRecord> emit_pretrain_examples(
    const DatasetSplit& split, const SidRegistry& registry,
    const SerializationConfig& config) {
    const auto by_user = train_by_user(split);
    std::vector<PromptRecord> out;
    for (const auto& traj : split.train) {
        if (traj.checkins.size() < 2) continue;
        const auto history = history_before(by_user, traj);
        for (std::size_t i = 1; i < traj.checkins.size(); ++i) {
            Trajectory context;
            context.trajectory_id = traj.trajectory_id;
            context.user_id = traj.user_id;
            context.checkins.assign(traj.checkins.begin(),
                                    traj.checkins.begin() +
                                        static_cast<std::ptrdiff_t>(i));
            PromptRecord rec = build_eval_prompt(
                history, context, traj.checkins[i], registry, split.catalog,
                config, config.max_history_checkins_train);
            rec.prompt_id = traj.trajectory_id + "@" + std::to_string(i);
            out.push_back(std::move(rec));
        }
    }
    return out;
}

std::vector<PromptRecord> emit_eval_prompts(const DatasetSplit& split,
                                            EvalPart part,
                                            const SidRegistry& registry,
                                            const SerializationConfig& config) {
    const auto by_user = train_by_user(split);
    const auto& trajectories =
        part == EvalPart::valid ? split.valid : split.test;
    std::vector<PromptRecord> out;
    for (const auto& traj : trajectories) {
        if (traj.checkins.size() < 2) continue;  // needs context + target
        Trajectory context;
        context.trajectory_id = traj.trajectory_id;
        context.user_id = traj.user_id;
        context.checkins.assign(traj.checkins.begin(),
                                traj.checkins.end() - 1);
        out.push_back(build_eval_prompt(
            history_before(by_user, traj), context, traj.checkins.back(),
            registry, split.catalog, config, config.max_history_checkins_eval));
    }
    return out;
}

}  // namespace geosid

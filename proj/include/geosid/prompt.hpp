#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geosid/sid.hpp"
#include "geosid/types.hpp"

namespace geosid {

struct SerializationConfig {
    int max_history_checkins_train = 50;
    int max_history_checkins_eval = 300;
    bool include_addresses = true;
    bool include_distances = true;

    void validate() const;
};

struct PromptRecord {
    std::string prompt_id;
    std::string user_id;
    std::string prompt_text;
    std::string target_sid_surface;
    GeoPoint ground_truth_point;
    std::int64_t target_local_time = 0;
};

// One rendered check-in line, e.g.
// "April 11th, 2012, Wednesday, 04:59, visit Parking at 85 Washington St
// <m_161><n_17><a_21><b_8><c_0>, distance is Nearby."
// prev is the preceding check-in of the same trajectory (none on the first
// line of a trajectory); an empty address renders the placeholder.
std::string format_checkin_line(const CheckIn& c, std::string_view sid_surface,
                                const CheckIn* prev, std::string_view address,
                                const SerializationConfig& config);

// Full prompt body: preamble, numbered history blocks, behavior sequence, and
// the target line ending "user will visit " (trailing space, no newline).
// Truncation keeps the most recent max_checkins check-ins, dropping oldest
// whole trajectories first.
std::string build_prompt_text(const std::vector<Trajectory>& history,
                              const Trajectory& current_context,
                              std::int64_t target_local_time,
                              const SidRegistry& registry,
                              const PoiCatalog& catalog,
                              const SerializationConfig& config,
                              int max_checkins);

PromptRecord build_eval_prompt(const std::vector<Trajectory>& history,
                               const Trajectory& current_context,
                               const CheckIn& target,
                               const SidRegistry& registry,
                               const PoiCatalog& catalog,
                               const SerializationConfig& config,
                               int max_checkins);

// Two records per POI: text -> SID surface and SID surface -> text.
std::vector<std::pair<std::string, std::string>> emit_alignment_pairs(
    const SidRegistry& registry, const PoiCatalog& catalog);

// One record per (context, target) pair inside each train trajectory.
std::vector<PromptRecord> emit_pretrain_examples(
    const DatasetSplit& split, const SidRegistry& registry,
    const SerializationConfig& config);

enum class EvalPart { valid, test };

// One record per valid/test trajectory of length >= 2: the last check-in is
// the target, everything before it the behavior sequence.
std::vector<PromptRecord> emit_eval_prompts(const DatasetSplit& split,
                                            EvalPart part,
                                            const SidRegistry& registry,
                                            const SerializationConfig& config);

}  // namespace geosid

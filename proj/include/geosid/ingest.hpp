#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "geosid/types.hpp"

namespace geosid {

enum class CheckinFormat { foursquare_tsv, gowalla };

struct ParseResult {
    std::vector<CheckIn> checkins;
    std::size_t malformed = 0;
    std::size_t total_lines = 0;
};

// Column names a mapping may use: user_id, poi_id, category_id,
// category_name, lat, lng, tz_offset_minutes, utc_time ("Tue Apr 03 18:00:09
// +0000 2012"), iso_time (ISO-8601), ignore. The defaults reproduce the
// published file layouts.
std::vector<std::string> default_columns(CheckinFormat format);

// Reads a raw check-in file. Malformed lines (wrong column count, out-of-bounds
// coordinates, unparseable timestamps) are counted and skipped; more than 1%
// malformed raises ValidationError naming the first offending line.
ParseResult parse_checkin_file(const std::string& path, CheckinFormat format,
                               const std::vector<std::string>& columns = {});

// Drops POIs with fewer than min_count check-ins, then users with fewer than
// min_count remaining check-ins. Single two-phase pass by default; fixpoint
// mode repeats both phases until stable.
std::vector<CheckIn> filter_min_activity(std::vector<CheckIn> checkins,
                                         int min_count = 10,
                                         bool fixpoint = false);

// Per user, consecutive check-ins whose local-time gap is within gap_hours
// (inclusive) share a trajectory. Sorts each user's check-ins internally.
std::vector<Trajectory> segment_trajectories(std::vector<CheckIn> checkins,
                                             double gap_hours = 24.0);

struct SplitRatios {
    double train = 0.8;
    double valid = 0.1;
    double test = 0.1;
};

// Orders trajectories by end time, cuts at the ratios, then drops valid/test
// trajectories containing any user or POI unseen in train.
DatasetSplit temporal_split(std::vector<Trajectory> trajectories,
                            SplitRatios ratios = {});

struct DatasetStats {
    std::size_t n_users = 0;
    std::size_t n_pois = 0;
    std::size_t n_categories = 0;
    std::size_t n_checkins = 0;
    std::size_t n_trajectories_all = 0;
    std::size_t n_trajectories_train = 0;
    std::size_t n_trajectories_valid = 0;
    std::size_t n_trajectories_test = 0;
};

DatasetStats dataset_stats(const DatasetSplit& split);

PoiCatalog build_catalog(const std::vector<Trajectory>& trajectories);

}  // namespace geosid

#include "geosid/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "geosid/io.hpp"
#include "geosid/timeutil.hpp"

namespace geosid {

namespace {

int month_from_name(std::string_view name) {
    static constexpr std::string_view names[12] = {
        "Jan", "Feb", "Mar", "Apr", "May", "Jun",
        "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    for (int m = 0; m < 12; ++m) {
        if (name == names[m]) return m + 1;
    }
    return 0;
}

// "Tue Apr 03 18:00:09 +0000 2012" -> UTC epoch seconds, or false.
bool parse_foursquare_time(std::string_view text, std::int64_t* out) {
    const auto parts = split_view(text, ' ');
    if (parts.size() != 6) return false;
    const int month = month_from_name(parts[1]);
    if (month == 0) return false;
    int day, h, mi, s, year, zone_sign = 1, zone_hm;
    if (std::sscanf(std::string(parts[2]).c_str(), "%d", &day) != 1) return false;
    if (std::sscanf(std::string(parts[3]).c_str(), "%d:%d:%d", &h, &mi, &s) != 3)
        return false;
    std::string zone(parts[4]);
    if (zone.size() != 5 || (zone[0] != '+' && zone[0] != '-')) return false;
    if (zone[0] == '-') zone_sign = -1;
    if (std::sscanf(zone.c_str() + 1, "%d", &zone_hm) != 1) return false;
    if (std::sscanf(std::string(parts[5]).c_str(), "%d", &year) != 1) return false;
    const int zone_minutes = zone_sign * ((zone_hm / 100) * 60 + zone_hm % 100);
    *out = timestamp_from_civil(year, month, day, h, mi, s) -
           std::int64_t{60} * zone_minutes;
    return true;
}

bool parse_double(std::string_view text, double* out) {
    char* end = nullptr;
    const std::string buf(text);
    *out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && !buf.empty() &&
           std::isfinite(*out);
}

bool parse_int(std::string_view text, int* out) {
    char* end = nullptr;
    const std::string buf(text);
    const long v = std::strtol(buf.c_str(), &end, 10);
    if (end != buf.c_str() + buf.size() || buf.empty()) return false;
    *out = static_cast<int>(v);
    return true;
}

bool parse_mapped_line(std::string_view line, char sep,
                       const std::vector<std::string>& columns, CheckIn* c) {
    const auto cols = split_view(line, sep);
    if (cols.size() != columns.size()) return false;
    bool have_time = false;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const std::string& name = columns[i];
        const std::string_view value = cols[i];
        if (name == "user_id") c->user_id = std::string(value);
        else if (name == "poi_id") c->poi_id = std::string(value);
        else if (name == "category_id") c->category_id = std::string(value);
        else if (name == "category_name") c->category_name = std::string(value);
        else if (name == "lat") {
            if (!parse_double(value, &c->lat)) return false;
        } else if (name == "lng") {
            if (!parse_double(value, &c->lng)) return false;
        } else if (name == "tz_offset_minutes") {
            if (!parse_int(value, &c->tz_offset_minutes)) return false;
        } else if (name == "utc_time") {
            if (!parse_foursquare_time(value, &c->utc_timestamp)) return false;
            have_time = true;
        } else if (name == "iso_time") {
            try {
                c->utc_timestamp = parse_iso(std::string(value));
            } catch (const ValidationError&) {
                return false;
            }
            have_time = true;
        } else if (name != "ignore") {
            throw ValidationError("unknown column name '" + name + "'");
        }
    }
    return have_time && point_in_bounds(c->point());
}

}  // namespace

std::vector<std::string> default_columns(CheckinFormat format) {
    if (format == CheckinFormat::foursquare_tsv) {
        return {"user_id", "poi_id",  "category_id",       "category_name",
                "lat",     "lng",     "tz_offset_minutes", "utc_time"};
    }
    // Gowalla logs carry no category columns; those fields stay empty.
    return {"user_id", "iso_time", "lat", "lng", "poi_id"};
}

ParseResult parse_checkin_file(const std::string& path, CheckinFormat format,
                               const std::vector<std::string>& columns) {
    const auto mapping = columns.empty() ? default_columns(format) : columns;
    for (const char* required : {"user_id", "poi_id", "lat", "lng"}) {
        if (std::find(mapping.begin(), mapping.end(), required) ==
            mapping.end()) {
            throw ValidationError("column mapping lacks '" +
                                  std::string(required) + "'");
        }
    }
    if (std::find(mapping.begin(), mapping.end(), "utc_time") ==
            mapping.end() &&
        std::find(mapping.begin(), mapping.end(), "iso_time") ==
            mapping.end()) {
        throw ValidationError("column mapping lacks a time column");
    }
    const char sep = format == CheckinFormat::foursquare_tsv ? '\t' : ',';
    ParseResult result;
    std::size_t first_bad_line = 0;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++result.total_lines;
        CheckIn c;
        if (parse_mapped_line(lines[i], sep, mapping, &c)) {
            result.checkins.push_back(std::move(c));
        } else {
            ++result.malformed;
            if (first_bad_line == 0) first_bad_line = i + 1;
        }
    }
    if (result.total_lines > 0 &&
        static_cast<double>(result.malformed) >
            0.01 * static_cast<double>(result.total_lines)) {
        throw ValidationError(
            path + ": " + std::to_string(result.malformed) + "/" +
            std::to_string(result.total_lines) +
            " malformed lines (>1%), first at line " +
            std::to_string(first_bad_line));
    }
    return result;
}

namespace {

std::vector<CheckIn> filter_once(std::vector<CheckIn> checkins, int min_count,
                                 bool* changed) {
    std::map<std::string, int> poi_counts;
    for (const auto& c : checkins) ++poi_counts[c.poi_id];

    std::vector<CheckIn> after_poi;
    after_poi.reserve(checkins.size());
    for (auto& c : checkins) {
        if (poi_counts[c.poi_id] >= min_count) after_poi.push_back(std::move(c));
    }

    std::map<std::string, int> user_counts;
    for (const auto& c : after_poi) ++user_counts[c.user_id];

    std::vector<CheckIn> out;
    out.reserve(after_poi.size());
    for (auto& c : after_poi) {
        if (user_counts[c.user_id] >= min_count) out.push_back(std::move(c));
    }
    *changed = out.size() != checkins.size();
    return out;
}

}  // namespace

std::vector<CheckIn> filter_min_activity(std::vector<CheckIn> checkins,
                                         int min_count, bool fixpoint) {
    if (min_count < 1) throw ValidationError("min_count must be >= 1");
    bool changed = true;
    checkins = filter_once(std::move(checkins), min_count, &changed);
    while (fixpoint && changed) {
        checkins = filter_once(std::move(checkins), min_count, &changed);
    }
    return checkins;
}

std::vector<Trajectory> segment_trajectories(std::vector<CheckIn> checkins,
                                             double gap_hours) {
    if (!(gap_hours > 0)) throw ValidationError("gap_hours must be positive");
    std::stable_sort(checkins.begin(), checkins.end(),
                     [](const CheckIn& a, const CheckIn& b) {
                         if (a.user_id != b.user_id) return a.user_id < b.user_id;
                         return a.local_timestamp() < b.local_timestamp();
                     });
    const double gap_seconds = gap_hours * 3600.0;

    std::vector<Trajectory> out;
    std::map<std::string, int> per_user_index;
    for (auto& c : checkins) {
        const bool new_traj =
            out.empty() || out.back().user_id != c.user_id ||
            static_cast<double>(c.local_timestamp() -
                                out.back().checkins.back().local_timestamp()) >
                gap_seconds;
        if (new_traj) {
            Trajectory t;
            t.user_id = c.user_id;
            char suffix[16];
            std::snprintf(suffix, sizeof(suffix), "#%06d",
                          per_user_index[c.user_id]++);
            t.trajectory_id = c.user_id + suffix;
            out.push_back(std::move(t));
        }
        out.back().checkins.push_back(std::move(c));
    }
    return out;
}

DatasetSplit temporal_split(std::vector<Trajectory> trajectories,
                            SplitRatios ratios) {
    const double sum = ratios.train + ratios.valid + ratios.test;
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ValidationError("split ratios must sum to 1, got " +
                              std::to_string(sum));
    }
    DatasetSplit split;
    if (trajectories.empty()) return split;

    std::sort(trajectories.begin(), trajectories.end(),
              [](const Trajectory& a, const Trajectory& b) {
                  if (a.end_local() != b.end_local())
                      return a.end_local() < b.end_local();
                  if (a.user_id != b.user_id) return a.user_id < b.user_id;
                  return a.trajectory_id < b.trajectory_id;
              });

    const std::size_t n = trajectories.size();
    const auto cut1 = static_cast<std::size_t>(
        std::floor(ratios.train * static_cast<double>(n)));
    const auto cut2 = static_cast<std::size_t>(
        std::floor((ratios.train + ratios.valid) * static_cast<double>(n)));

    std::set<std::string> train_users;
    std::set<std::string> train_pois;
    for (std::size_t i = 0; i < cut1; ++i) {
        train_users.insert(trajectories[i].user_id);
        for (const auto& c : trajectories[i].checkins)
            train_pois.insert(c.poi_id);
        split.train.push_back(std::move(trajectories[i]));
    }
    const auto seen_in_train = [&](const Trajectory& t) {
        if (!train_users.count(t.user_id)) return false;
        for (const auto& c : t.checkins) {
            if (!train_pois.count(c.poi_id)) return false;
        }
        return true;
    };
    for (std::size_t i = cut1; i < n; ++i) {
        if (!seen_in_train(trajectories[i])) continue;  // dropped, not reassigned
        auto& bucket = i < cut2 ? split.valid : split.test;
        bucket.push_back(std::move(trajectories[i]));
    }

    std::vector<Trajectory> all;
    all.reserve(split.train.size() + split.valid.size() + split.test.size());
    for (const auto* part : {&split.train, &split.valid, &split.test}) {
        all.insert(all.end(), part->begin(), part->end());
    }
    split.catalog = build_catalog(all);
    return split;
}

PoiCatalog build_catalog(const std::vector<Trajectory>& trajectories) {
    PoiCatalog catalog;
    for (const auto& t : trajectories) {
        for (const auto& c : t.checkins) {
            if (catalog.count(c.poi_id)) continue;
            PoiInfo info;
            info.poi_id = c.poi_id;
            info.category_id = c.category_id;
            info.category_name = c.category_name;
            info.lat = c.lat;
            info.lng = c.lng;
            catalog.emplace(c.poi_id, std::move(info));
        }
    }
    return catalog;
}

DatasetStats dataset_stats(const DatasetSplit& split) {
    DatasetStats stats;
    std::set<std::string> users, pois, categories;
    for (const auto* part : {&split.train, &split.valid, &split.test}) {
        for (const auto& t : *part) {
            users.insert(t.user_id);
            for (const auto& c : t.checkins) {
                pois.insert(c.poi_id);
                categories.insert(c.category_id);
                ++stats.n_checkins;
            }
        }
    }
    stats.n_users = users.size();
    stats.n_pois = pois.size();
    stats.n_categories = categories.size();
    stats.n_trajectories_train = split.train.size();
    stats.n_trajectories_valid = split.valid.size();
    stats.n_trajectories_test = split.test.size();
    stats.n_trajectories_all = split.train.size() + split.valid.size() +
                               split.test.size();
    return stats;
}

}  // namespace geosid

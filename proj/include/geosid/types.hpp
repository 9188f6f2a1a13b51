#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace geosid {

// Input that fails schema or value validation. Maps to CLI exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem or network failure. Maps to CLI exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : IoError {
    using IoError::IoError;
};

struct GeoPoint {
    double lat = 0.0;
    double lng = 0.0;
};

bool point_in_bounds(const GeoPoint& p);

struct CheckIn {
    std::string user_id;
    std::string poi_id;
    std::string category_id;
    std::string category_name;
    double lat = 0.0;
    double lng = 0.0;
    std::int64_t utc_timestamp = 0;  // seconds since epoch
    int tz_offset_minutes = 0;

    // Local time drives segmentation and all date rendering.
    std::int64_t local_timestamp() const {
        return utc_timestamp + std::int64_t{60} * tz_offset_minutes;
    }
    GeoPoint point() const { return {lat, lng}; }
};

struct Trajectory {
    std::string trajectory_id;
    std::string user_id;
    std::vector<CheckIn> checkins;  // ascending local time

    std::int64_t start_local() const { return checkins.front().local_timestamp(); }
    std::int64_t end_local() const { return checkins.back().local_timestamp(); }
};

struct PoiInfo {
    std::string poi_id;
    std::string category_id;
    std::string category_name;
    double lat = 0.0;
    double lng = 0.0;
    std::string address;  // empty until reverse geocoding fills it
};

// Ordered by poi_id so every catalog traversal is deterministic.
using PoiCatalog = std::map<std::string, PoiInfo>;

struct DatasetSplit {
    std::vector<Trajectory> train;
    std::vector<Trajectory> valid;
    std::vector<Trajectory> test;
    PoiCatalog catalog;
};

}  // namespace geosid

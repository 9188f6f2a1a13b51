#pragma once

#include <string_view>

#include "geosid/types.hpp"

namespace geosid {

inline constexpr double kEarthRadiusKm = 6371.0;

// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// Transition-distance bins used in prompt serialization. Upper edges inclusive.
enum class DistanceBucket { Adjacent, Nearby, ShortHop, Far, Long };

DistanceBucket bucket_distance(double km);

// Display names as they appear in prompt text ("Short hop", not "ShortHop").
std::string_view bucket_name(DistanceBucket b);

}  // namespace geosid

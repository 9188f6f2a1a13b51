#include "geosid/geo.hpp"

#include <cmath>

namespace geosid {

bool point_in_bounds(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lng) && p.lat >= -90.0 &&
           p.lat <= 90.0 && p.lng >= -180.0 && p.lng <= 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    const double deg = M_PI / 180.0;
    const double lat1 = a.lat * deg;
    const double lat2 = b.lat * deg;
    const double dlat = (b.lat - a.lat) * deg;
    const double dlng = (b.lng - a.lng) * deg;
    const double s1 = std::sin(dlat / 2);
    const double s2 = std::sin(dlng / 2);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return kEarthRadiusKm * 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

DistanceBucket bucket_distance(double km) {
    if (!(km >= 0.0)) {
        throw ValidationError("distance must be non-negative, got " +
                              std::to_string(km));
    }
    if (km <= 0.2) return DistanceBucket::Adjacent;
    if (km <= 1.2) return DistanceBucket::Nearby;
    if (km <= 3.0) return DistanceBucket::ShortHop;
    if (km <= 10.0) return DistanceBucket::Far;
    return DistanceBucket::Long;
}

std::string_view bucket_name(DistanceBucket b) {
    switch (b) {
        case DistanceBucket::Adjacent: return "Adjacent";
        case DistanceBucket::Nearby: return "Nearby";
        case DistanceBucket::ShortHop: return "Short hop";
        case DistanceBucket::Far: return "Far";
        case DistanceBucket::Long: return "Long";
    }
    return "";
}

}  // namespace geosid

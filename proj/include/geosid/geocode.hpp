#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "geosid/types.hpp"

namespace geosid {

// Injectable clock so rate-limit behavior is testable without real sleeps.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

std::shared_ptr<Clock> system_clock();

enum class GeocodeMode { online, cache_only };

struct GeocodeEntry {
    double lat = 0.0;  // rounded to 6 decimals
    double lng = 0.0;
    std::string address;
    std::int64_t fetched_at = 0;  // UTC seconds
    enum class Source { remote, cache, placeholder } source = Source::placeholder;
};

struct GeocodeConfig {
    std::string endpoint_base;  // e.g. "http://localhost:8080"
    std::string path_template = "/reverse?lat={lat}&lon={lng}&format=json";
    std::string address_field = "display_name";
    std::string bearer_token;
    double requests_per_second = 1.0;
    int max_retries = 3;
    std::string cache_path;
};

struct WarmSummary {
    std::size_t hits = 0;
    std::size_t fetched = 0;
    std::size_t placeholders = 0;
};

// Reverse-geocoding client with a persistent append-only cache keyed by
// coordinates rounded to 6 decimal places (~0.1 m).
class GeocodeClient {
public:
    explicit GeocodeClient(GeocodeConfig config,
                           std::shared_ptr<Clock> clock = system_clock());

    GeocodeEntry reverse_geocode(const GeoPoint& p, GeocodeMode mode);

    // Fills addresses for every catalog POI, honoring the rate limit.
    // Transport errors propagate after partial progress is persisted.
    WarmSummary warm_cache(PoiCatalog& catalog, GeocodeMode mode);

    std::size_t cache_size() const { return cache_.size(); }

private:
    using Key = std::pair<std::int64_t, std::int64_t>;  // micro-degrees
    static Key key_of(const GeoPoint& p);

    void load_cache();
    void append_cache(const GeocodeEntry& entry);
    GeocodeEntry fetch_remote(const GeoPoint& p);
    void wait_for_rate_limit();

    GeocodeConfig config_;
    std::shared_ptr<Clock> clock_;
    std::map<Key, GeocodeEntry> cache_;
    std::int64_t last_request_ms_ = -1;
};

}  // namespace geosid

#include "geosid/geocode.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "geosid/io.hpp"
#include "geosid/timeutil.hpp"

namespace geosid {

namespace {

class SystemClock : public Clock {
public:
    std::int64_t now_ms() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
    void sleep_ms(std::int64_t ms) override {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
};

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace

std::shared_ptr<Clock> system_clock() {
    static auto instance = std::make_shared<SystemClock>();
    return instance;
}

GeocodeClient::GeocodeClient(GeocodeConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
    if (!config_.cache_path.empty()) load_cache();
}

GeocodeClient::Key GeocodeClient::key_of(const GeoPoint& p) {
    return {std::llround(p.lat * 1e6), std::llround(p.lng * 1e6)};
}

void GeocodeClient::load_cache() {
    std::ifstream probe(config_.cache_path);
    if (!probe.good()) return;  // first run: cache file appears on write
    probe.close();
    const auto lines = read_lines(config_.cache_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cols = split_view(lines[i], '\t');
        if (cols.size() != 4) {
            throw ValidationError(config_.cache_path + ":" +
                                  std::to_string(i + 1) + ": bad cache line");
        }
        GeocodeEntry entry;
        entry.lat = std::strtod(std::string(cols[0]).c_str(), nullptr);
        entry.lng = std::strtod(std::string(cols[1]).c_str(), nullptr);
        entry.address = std::string(cols[2]);
        entry.fetched_at = parse_iso(std::string(cols[3]));
        entry.source = GeocodeEntry::Source::cache;
        cache_[key_of({entry.lat, entry.lng})] = entry;  // last write wins
    }
}

void GeocodeClient::append_cache(const GeocodeEntry& entry) {
    if (config_.cache_path.empty()) return;
    std::ofstream out(config_.cache_path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to cache: " + config_.cache_path);
    std::string address = entry.address;
    replace_all(address, "\t", " ");  // keep the TSV layout intact
    replace_all(address, "\n", " ");
    out << format6(entry.lat) << '\t' << format6(entry.lng) << '\t' << address
        << '\t' << format_iso(entry.fetched_at) << "Z\n";
}

void GeocodeClient::wait_for_rate_limit() {
    if (config_.requests_per_second <= 0) return;
    const auto interval_ms =
        static_cast<std::int64_t>(1000.0 / config_.requests_per_second);
    const std::int64_t now = clock_->now_ms();
    if (last_request_ms_ >= 0 && now - last_request_ms_ < interval_ms) {
        clock_->sleep_ms(interval_ms - (now - last_request_ms_));
    }
    last_request_ms_ = clock_->now_ms();
}

GeocodeEntry GeocodeClient::fetch_remote(const GeoPoint& p) {
    if (config_.endpoint_base.empty()) {
        throw ValidationError("geocode endpoint not configured");
    }
    std::string path = config_.path_template;
    replace_all(path, "{lat}", format6(p.lat));
    replace_all(path, "{lng}", format6(p.lng));

    std::string last_error;
    std::int64_t backoff_ms = 1000;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            clock_->sleep_ms(backoff_ms);
            backoff_ms *= 2;
        }
        wait_for_rate_limit();

        httplib::Client client(config_.endpoint_base);
        httplib::Headers headers;
        if (!config_.bearer_token.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.bearer_token);
        }
        const auto response = client.Get(path, headers);
        if (!response) {
            last_error = "connection failed";
            continue;
        }
        if (response->status == 429) {
            last_error = "HTTP 429";
            continue;
        }
        if (response->status != 200) {
            throw TransportError("geocode endpoint returned HTTP " +
                                 std::to_string(response->status));
        }
        auto body = nlohmann::json::parse(response->body, nullptr, false);
        if (body.is_discarded() || !body.contains(config_.address_field)) {
            throw TransportError("geocode response missing field '" +
                                 config_.address_field + "'");
        }
        GeocodeEntry entry;
        entry.lat = std::llround(p.lat * 1e6) / 1e6;
        entry.lng = std::llround(p.lng * 1e6) / 1e6;
        entry.address = body[config_.address_field].get<std::string>();
        entry.fetched_at = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now()
                                   .time_since_epoch())
                               .count();
        entry.source = GeocodeEntry::Source::remote;
        return entry;
    }
    throw TransportError("geocode request failed after " +
                         std::to_string(config_.max_retries) + " retries: " +
                         last_error);
}

GeocodeEntry GeocodeClient::reverse_geocode(const GeoPoint& p,
                                            GeocodeMode mode) {
    if (!point_in_bounds(p)) {
        throw ValidationError("reverse_geocode: point out of bounds");
    }
    const auto it = cache_.find(key_of(p));
    if (it != cache_.end()) {
        GeocodeEntry entry = it->second;
        entry.source = GeocodeEntry::Source::cache;
        return entry;
    }
    if (mode == GeocodeMode::cache_only) {
        GeocodeEntry entry;
        entry.lat = std::llround(p.lat * 1e6) / 1e6;
        entry.lng = std::llround(p.lng * 1e6) / 1e6;
        entry.address = "an unknown address";
        entry.source = GeocodeEntry::Source::placeholder;
        return entry;
    }
    GeocodeEntry entry = fetch_remote(p);
    cache_[key_of(p)] = entry;
    append_cache(entry);
    return entry;
}

WarmSummary GeocodeClient::warm_cache(PoiCatalog& catalog, GeocodeMode mode) {
    WarmSummary summary;
    for (auto& [poi_id, info] : catalog) {
        const GeocodeEntry entry =
            reverse_geocode({info.lat, info.lng}, mode);
        switch (entry.source) {
            case GeocodeEntry::Source::cache: ++summary.hits; break;
            case GeocodeEntry::Source::remote: ++summary.fetched; break;
            case GeocodeEntry::Source::placeholder: ++summary.placeholders; break;
        }
        if (entry.source != GeocodeEntry::Source::placeholder) {
            info.address = entry.address;
        }
    }
    return summary;
}

}  // namespace geosid

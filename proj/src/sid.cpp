#include "geosid/sid.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include <json.hpp>

#include "geosid/io.hpp"
#include "geosid/s2cell.hpp"

namespace geosid {

namespace {

// Token letters: geo tokens run m, n, ...; semantic tokens a, b, ...; the
// suffix takes the next letter after the semantic run (c for two levels).
char geo_letter(int index) { return static_cast<char>('m' + index); }
char semantic_letter(int index) { return static_cast<char>('a' + index); }
char suffix_letter(int levels) { return static_cast<char>('a' + levels); }

std::string grammar_pattern(const SidConfig& cfg) {
    std::string pattern;
    for (int i = 0; i < cfg.geo_token_count; ++i) {
        pattern += std::string("<") + geo_letter(i) + "_(\\d+)>";
    }
    for (int i = 0; i < cfg.rvq_levels; ++i) {
        pattern += std::string("<") + semantic_letter(i) + "_(\\d+)>";
    }
    pattern += std::string("<") + suffix_letter(cfg.rvq_levels) + "_(\\d+)>";
    return pattern;
}

int checked_token(const std::string& digits, int max_value, const char* kind) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(digits.c_str(), &end, 10);
    if (errno != 0 || end != digits.c_str() + digits.size() || v < 0 ||
        (max_value >= 0 && v > max_value)) {
        throw ValidationError(std::string(kind) + " token out of range: " + digits);
    }
    return static_cast<int>(v);
}

}  // namespace

void SidConfig::validate() const {
    if (geo_token_count < 1 || geo_token_count > 8) {
        throw ValidationError("geo_token_count must be in [1, 8]");
    }
    if (rvq_levels < 1 || rvq_levels > 11) {
        throw ValidationError("rvq_levels must be in [1, 11]");
    }
    if (rvq_codebook_size < 1) {
        throw ValidationError("rvq_codebook_size must be >= 1");
    }
}

std::vector<int> SpatialSemanticId::tokens() const {
    std::vector<int> out = geo;
    out.insert(out.end(), semantic.begin(), semantic.end());
    out.push_back(suffix);
    return out;
}

std::string render_sid(const SpatialSemanticId& sid) {
    std::string out;
    for (std::size_t i = 0; i < sid.geo.size(); ++i) {
        out += std::string("<") + geo_letter(static_cast<int>(i)) + "_" +
               std::to_string(sid.geo[i]) + ">";
    }
    for (std::size_t i = 0; i < sid.semantic.size(); ++i) {
        out += std::string("<") + semantic_letter(static_cast<int>(i)) + "_" +
               std::to_string(sid.semantic[i]) + ">";
    }
    out += std::string("<") + suffix_letter(static_cast<int>(sid.semantic.size())) +
           "_" + std::to_string(sid.suffix) + ">";
    return out;
}

SpatialSemanticId parse_sid(std::string_view text, const SidConfig& config) {
    config.validate();
    static thread_local std::map<std::string, std::regex> cache;
    const std::string pattern = grammar_pattern(config);
    auto it = cache.find(pattern);
    if (it == cache.end()) {
        it = cache.emplace(pattern, std::regex(pattern)).first;
    }
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(text.begin(), text.end(), m, it->second)) {
        throw ValidationError("no SID token run in text");
    }
    SpatialSemanticId sid;
    int group = 1;
    for (int i = 0; i < config.geo_token_count; ++i) {
        sid.geo.push_back(checked_token(m[group++].str(), 255, "geo"));
    }
    for (int i = 0; i < config.rvq_levels; ++i) {
        sid.semantic.push_back(
            checked_token(m[group++].str(), config.rvq_codebook_size - 1,
                          "semantic"));
    }
    sid.suffix = checked_token(m[group].str(), -1, "suffix");
    return sid;
}

std::string shared_hex_prefix(const std::vector<std::string>& hex_ids) {
    if (hex_ids.empty()) throw ValidationError("shared_hex_prefix: empty input");
    std::string prefix = hex_ids.front();
    for (const auto& h : hex_ids) {
        std::size_t len = 0;
        while (len < prefix.size() && len < h.size() && prefix[len] == h[len]) {
            ++len;
        }
        prefix.resize(len);
        if (prefix.empty()) break;
    }
    return prefix;
}

std::vector<int> geospatial_prefix(std::string_view hex_id, std::size_t lcp_len,
                                   int geo_token_count) {
    const std::size_t need = 2 * static_cast<std::size_t>(geo_token_count);
    if (lcp_len + need > hex_id.size()) {
        throw ValidationError(
            "geospatial prefix needs " + std::to_string(need) +
            " hex digits after a shared prefix of " + std::to_string(lcp_len) +
            " in a " + std::to_string(hex_id.size()) +
            "-digit id; use a shorter prefix scope or fewer geo tokens");
    }
    std::vector<int> tokens;
    tokens.reserve(static_cast<std::size_t>(geo_token_count));
    for (int t = 0; t < geo_token_count; ++t) {
        const std::size_t pos = lcp_len + 2 * static_cast<std::size_t>(t);
        int value = 0;
        for (int nibble = 0; nibble < 2; ++nibble) {
            const char c = hex_id[pos + static_cast<std::size_t>(nibble)];
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            else throw ValidationError("invalid hex digit in cell id");
            value = (value << 4) | d;
        }
        tokens.push_back(value);
    }
    return tokens;
}

std::map<std::string, int> assign_suffixes(
    const std::map<std::vector<int>, std::vector<std::string>>& classes,
    std::vector<std::string>* warnings) {
    std::map<std::string, int> out;
    for (const auto& [key, members] : classes) {
        std::vector<std::string> sorted = members;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            out[sorted[i]] = static_cast<int>(i);
        }
        if (sorted.size() > 8 && warnings) {
            warnings->push_back("suffix class of size " +
                                std::to_string(sorted.size()) +
                                " exceeds the 8 observed suffix types (poi " +
                                sorted.front() + ", ...)");
        }
    }
    return out;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    EmbeddingTable table;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cols = split_view(lines[i], '\t');
        if (cols.size() != 2) {
            throw ValidationError(path + ":" + std::to_string(i + 1) +
                                  ": expected key<TAB>values");
        }
        std::vector<double> values;
        for (auto part : split_view(cols[1], ',')) {
            char* end = nullptr;
            const std::string buf(part);
            const double v = std::strtod(buf.c_str(), &end);
            if (end != buf.c_str() + buf.size() || !std::isfinite(v)) {
                throw ValidationError(path + ":" + std::to_string(i + 1) +
                                      ": bad embedding value '" + buf + "'");
            }
            values.push_back(v);
        }
        if (table.dim == 0) table.dim = static_cast<int>(values.size());
        if (static_cast<int>(values.size()) != table.dim) {
            throw ValidationError(path + ":" + std::to_string(i + 1) +
                                  ": inconsistent embedding dimension");
        }
        table.rows[std::string(cols[0])] = std::move(values);
    }
    return table;
}

SidRegistry::SidRegistry(SidConfig config, std::string lcp,
                         std::vector<RegistryEntry> entries)
    : config_(std::move(config)), lcp_(std::move(lcp)),
      entries_(std::move(entries)) {
    config_.validate();
    std::sort(entries_.begin(), entries_.end(),
              [](const RegistryEntry& a, const RegistryEntry& b) {
                  return a.poi_id < b.poi_id;
              });
    index_entries();
}

void SidRegistry::index_entries() {
    by_poi_.clear();
    by_tokens_.clear();
    trie_.assign(1, TrieNode{});
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!by_poi_.emplace(e.poi_id, i).second) {
            throw ValidationError("registry bijectivity violated: duplicate poi " +
                                  e.poi_id);
        }
        const auto tokens = e.sid.tokens();
        if (!by_tokens_.emplace(tokens, i).second) {
            throw ValidationError("registry bijectivity violated: duplicate SID " +
                                  render_sid(e.sid));
        }
        std::size_t node = 0;
        for (int token : tokens) {
            auto it = trie_[node].children.find(token);
            if (it == trie_[node].children.end()) {
                trie_.push_back(TrieNode{});
                it = trie_[node].children.emplace(token, trie_.size() - 1).first;
            }
            node = it->second;
        }
    }
}

const SpatialSemanticId* SidRegistry::find_by_poi(const std::string& poi_id) const {
    const auto it = by_poi_.find(poi_id);
    return it == by_poi_.end() ? nullptr : &entries_[it->second].sid;
}

const std::string* SidRegistry::find_poi(const SpatialSemanticId& sid) const {
    const auto it = by_tokens_.find(sid.tokens());
    return it == by_tokens_.end() ? nullptr : &entries_[it->second].poi_id;
}

std::string SidRegistry::surface_for_poi(const std::string& poi_id) const {
    const auto* sid = find_by_poi(poi_id);
    if (!sid) throw ValidationError("poi not in registry: " + poi_id);
    return render_sid(*sid);
}

std::optional<GeoPoint> SidRegistry::coordinates(
    const SpatialSemanticId& sid) const {
    const auto it = by_tokens_.find(sid.tokens());
    if (it == by_tokens_.end()) return std::nullopt;
    return CellId::from_hex(entries_[it->second].hex_cell_id).to_point();
}

std::set<int> SidRegistry::valid_next_tokens(std::span<const int> prefix) const {
    std::size_t node = 0;
    for (int token : prefix) {
        const auto it = trie_[node].children.find(token);
        if (it == trie_[node].children.end()) return {};
        node = it->second;
    }
    std::set<int> out;
    for (const auto& [token, child] : trie_[node].children) out.insert(token);
    return out;
}

namespace {

nlohmann::json config_to_json(const SidConfig& cfg) {
    return {
        {"geo_token_count", cfg.geo_token_count},
        {"rvq_levels", cfg.rvq_levels},
        {"rvq_codebook_size", cfg.rvq_codebook_size},
        {"lcp_scope", cfg.lcp_scope == SidConfig::LcpScope::per_dataset
                          ? "per_dataset"
                          : "union"},
        {"rng_seed", cfg.rng_seed},
        {"embedding_key", cfg.embedding_key == SidConfig::EmbeddingKey::category
                              ? "category"
                              : "poi"},
    };
}

SidConfig config_from_json(const nlohmann::json& j) {
    SidConfig cfg;
    cfg.geo_token_count = j.value("geo_token_count", cfg.geo_token_count);
    cfg.rvq_levels = j.value("rvq_levels", cfg.rvq_levels);
    cfg.rvq_codebook_size = j.value("rvq_codebook_size", cfg.rvq_codebook_size);
    cfg.lcp_scope = j.value("lcp_scope", "per_dataset") == std::string("union")
                        ? SidConfig::LcpScope::cross_dataset_union
                        : SidConfig::LcpScope::per_dataset;
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    cfg.embedding_key = j.value("embedding_key", "category") == std::string("poi")
                            ? SidConfig::EmbeddingKey::poi
                            : SidConfig::EmbeddingKey::category;
    return cfg;
}

}  // namespace

void SidRegistry::save(const std::string& path) const {
    std::vector<nlohmann::json> records;
    records.reserve(entries_.size() + 1);
    records.push_back({{"lcp", lcp_},
                       {"config", config_to_json(config_)},
                       {"seed", config_.rng_seed}});
    for (const auto& e : entries_) {
        records.push_back({{"poi_id", e.poi_id},
                           {"g", e.sid.geo},
                           {"s", e.sid.semantic},
                           {"u", e.sid.suffix},
                           {"surface", render_sid(e.sid)},
                           {"hex_cell_id", e.hex_cell_id}});
    }
    write_jsonl(path, records);
}

SidRegistry SidRegistry::load(const std::string& path) {
    const auto records = read_jsonl(path);
    if (records.empty()) throw ValidationError(path + ": empty registry file");
    const auto& header = records.front();
    if (!header.contains("config")) {
        throw ValidationError(path + ": first line must be the registry header");
    }
    SidConfig cfg = config_from_json(header["config"]);
    std::vector<RegistryEntry> entries;
    entries.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        RegistryEntry e;
        e.poi_id = r.at("poi_id").get<std::string>();
        e.sid.geo = r.at("g").get<std::vector<int>>();
        e.sid.semantic = r.at("s").get<std::vector<int>>();
        e.sid.suffix = r.at("u").get<int>();
        e.hex_cell_id = r.at("hex_cell_id").get<std::string>();
        entries.push_back(std::move(e));
    }
    return SidRegistry(cfg, header.value("lcp", ""), std::move(entries));
}

SidRegistry build_registry(const PoiCatalog& catalog,
                           const EmbeddingTable& embeddings,
                           const SidConfig& config,
                           std::vector<std::string>* warnings,
                           const std::vector<std::string>& extra_lcp_hex) {
    config.validate();
    if (catalog.empty()) throw ValidationError("build_registry: empty catalog");

    std::map<std::string, std::string> hex_by_poi;
    std::vector<std::string> all_hex = extra_lcp_hex;
    all_hex.reserve(all_hex.size() + catalog.size());
    for (const auto& [poi_id, info] : catalog) {
        const std::string hex = CellId::from_point({info.lat, info.lng}).to_hex();
        hex_by_poi[poi_id] = hex;
        all_hex.push_back(hex);
    }
    // Degenerate catalogs (one POI, or POIs inside one tiny cell) can share
    // almost the whole id; cap the stripped prefix so 2*B digits remain.
    std::string lcp = shared_hex_prefix(all_hex);
    const std::size_t max_lcp = 16 - 2 * static_cast<std::size_t>(
                                         config.geo_token_count);
    if (lcp.size() > max_lcp) {
        if (warnings) {
            warnings->push_back("shared prefix of length " +
                                std::to_string(lcp.size()) + " capped at " +
                                std::to_string(max_lcp) +
                                " to leave room for the geo tokens");
        }
        lcp.resize(max_lcp);
    }

    // One embedding row per key; identical categories share a vector, so the
    // quantizer sees each distinct key once.
    const auto key_of = [&](const PoiInfo& info) {
        return config.embedding_key == SidConfig::EmbeddingKey::category
                   ? info.category_name
                   : info.poi_id;
    };
    std::map<std::string, std::vector<double>> key_vectors;
    for (const auto& [poi_id, info] : catalog) {
        const std::string key = key_of(info);
        const auto it = embeddings.rows.find(key);
        if (it == embeddings.rows.end()) {
            throw ValidationError("missing embedding row for key '" + key + "'");
        }
        key_vectors.emplace(key, it->second);
    }
    std::vector<std::vector<double>> matrix;
    matrix.reserve(key_vectors.size());
    for (const auto& [key, vec] : key_vectors) matrix.push_back(vec);

    RvqConfig rvq_cfg;
    rvq_cfg.levels = config.rvq_levels;
    rvq_cfg.codebook_size = config.rvq_codebook_size;
    rvq_cfg.seed = config.rng_seed;
    const RvqModel model = train_rvq(matrix, rvq_cfg);

    std::map<std::string, std::vector<int>> codes_by_key;
    for (const auto& [key, vec] : key_vectors) {
        codes_by_key[key] = encode_semantic(vec, model);
    }

    std::map<std::vector<int>, std::vector<std::string>> classes;
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> parts;
    for (const auto& [poi_id, info] : catalog) {
        auto g = geospatial_prefix(hex_by_poi[poi_id], lcp.size(),
                                   config.geo_token_count);
        auto s = codes_by_key[key_of(info)];
        std::vector<int> class_key = g;
        class_key.insert(class_key.end(), s.begin(), s.end());
        classes[class_key].push_back(poi_id);
        parts[poi_id] = {std::move(g), std::move(s)};
    }
    const auto suffixes = assign_suffixes(classes, warnings);

    std::vector<RegistryEntry> entries;
    entries.reserve(catalog.size());
    for (const auto& [poi_id, info] : catalog) {
        RegistryEntry e;
        e.poi_id = poi_id;
        e.sid.geo = parts[poi_id].first;
        e.sid.semantic = parts[poi_id].second;
        e.sid.suffix = suffixes.at(poi_id);
        e.hex_cell_id = hex_by_poi[poi_id];
        entries.push_back(std::move(e));
    }
    return SidRegistry(config, lcp, std::move(entries));
}

}  // namespace geosid

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geosid/rvq.hpp"
#include "geosid/types.hpp"

namespace geosid {

struct SidConfig {
    int geo_token_count = 2;  // B byte-valued locality tokens
    int rvq_levels = 2;
    int rvq_codebook_size = 28;
    enum class LcpScope { per_dataset, cross_dataset_union };
    LcpScope lcp_scope = LcpScope::per_dataset;
    std::uint64_t rng_seed = 0;
    enum class EmbeddingKey { category, poi };
    EmbeddingKey embedding_key = EmbeddingKey::category;

    void validate() const;
};

// Compositional POI code: geospatial prefix, semantic anchor, differentiating
// suffix. Surface form for the default config: <m_161><n_17><a_21><b_8><c_0>.
struct SpatialSemanticId {
    std::vector<int> geo;       // B values in [0, 255]
    std::vector<int> semantic;  // L values in [0, codebook_size)
    int suffix = 0;

    bool operator==(const SpatialSemanticId&) const = default;
    auto operator<=>(const SpatialSemanticId&) const = default;

    std::vector<int> tokens() const;  // geo + semantic + suffix, flattened
};

std::string render_sid(const SpatialSemanticId& sid);

// Extracts the first token run matching the SID grammar from text, validating
// token ranges against the config. Throws ValidationError when no run matches
// or the first run carries out-of-range values.
SpatialSemanticId parse_sid(std::string_view text, const SidConfig& config = {});

// Longest common prefix over 16-digit hex cell ids.
std::string shared_hex_prefix(const std::vector<std::string>& hex_ids);

// The 2*B hex digits following the stripped prefix, grouped pairwise into
// byte values. Throws when fewer than 2*B digits remain.
std::vector<int> geospatial_prefix(std::string_view hex_id, std::size_t lcp_len,
                                   int geo_token_count);

// Sequential suffix assignment within each (g, s) class, ordered by poi_id.
// Classes larger than 8 produce a warning string (observational cap, not
// enforced).
std::map<std::string, int> assign_suffixes(
    const std::map<std::vector<int>, std::vector<std::string>>& classes,
    std::vector<std::string>* warnings = nullptr);

struct EmbeddingTable {
    int dim = 0;
    std::map<std::string, std::vector<double>> rows;

    static EmbeddingTable load(const std::string& path);
};

struct RegistryEntry {
    std::string poi_id;
    SpatialSemanticId sid;
    std::string hex_cell_id;  // level-30 cell, resolves coordinates
};

class SidRegistry {
public:
    SidRegistry() = default;
    SidRegistry(SidConfig config, std::string lcp,
                std::vector<RegistryEntry> entries);

    const SidConfig& config() const { return config_; }
    const std::string& stripped_lcp() const { return lcp_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<RegistryEntry>& entries() const { return entries_; }

    const SpatialSemanticId* find_by_poi(const std::string& poi_id) const;
    const std::string* find_poi(const SpatialSemanticId& sid) const;
    std::string surface_for_poi(const std::string& poi_id) const;

    // Level-30 cell center for a registered SID; nullopt when unregistered.
    std::optional<GeoPoint> coordinates(const SpatialSemanticId& sid) const;

    // Tokens extending the given trie prefix toward at least one registered
    // SID. Unknown prefixes yield the empty set.
    std::set<int> valid_next_tokens(std::span<const int> prefix) const;

    void save(const std::string& path) const;
    static SidRegistry load(const std::string& path);

private:
    struct TrieNode {
        std::map<int, std::size_t> children;
    };
    void index_entries();

    SidConfig config_;
    std::string lcp_;
    std::vector<RegistryEntry> entries_;  // sorted by poi_id
    std::map<std::string, std::size_t> by_poi_;
    std::map<std::vector<int>, std::size_t> by_tokens_;
    std::vector<TrieNode> trie_;  // node 0 = root
};

// Composes cell ids, prefix stripping, residual quantization of category
// embeddings, and suffix assignment into a bijective registry. extra_lcp_hex
// widens the shared-prefix computation for cross-dataset token vocabularies.
SidRegistry build_registry(const PoiCatalog& catalog,
                           const EmbeddingTable& embeddings,
                           const SidConfig& config,
                           std::vector<std::string>* warnings = nullptr,
                           const std::vector<std::string>& extra_lcp_hex = {});

}  // namespace geosid

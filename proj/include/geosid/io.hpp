#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace geosid {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::vector<std::string> read_lines(const std::string& path);

// Line-delimited JSON. Readers throw ValidationError with the offending line
// number; writers emit one compact object per line, keys sorted.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path,
                 const std::vector<nlohmann::json>& records);

std::vector<std::string_view> split_view(std::string_view text, char sep);

// FNV-1a 64-bit, used for golden output hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
std::string file_hash(const std::string& path);

}  // namespace geosid

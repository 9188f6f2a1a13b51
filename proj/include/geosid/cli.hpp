#pragma once

#include <string>
#include <vector>

namespace geosid::cli {

// Runs one subcommand: ingest, geocode, build-sid, emit-prompts, score,
// advantages, evaluate, stats. Returns the process exit status: 0 success,
// 1 validation error, 2 I/O or transport error, 64 usage error.
int run(const std::vector<std::string>& args);

}  // namespace geosid::cli

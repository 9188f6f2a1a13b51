#pragma once

#include <cstdint>
#include <vector>

#include "geosid/types.hpp"

namespace geosid {

struct RvqConfig {
    int levels = 2;
    int codebook_size = 28;
    std::uint64_t seed = 0;
    int max_iterations = 100;
    double rel_tolerance = 1e-6;
};

// Per-level codebooks from residual k-means. Codebooks may hold fewer than
// codebook_size centroids when the data has fewer distinct points.
struct RvqModel {
    int dim = 0;
    std::vector<std::vector<std::vector<double>>> codebooks;  // level -> k -> dim
    std::vector<std::vector<double>> error_trace;  // level -> per-iteration SSE
};

// Trains one k-means codebook per level on the residuals of the previous
// level. k-means++ seeding from the config seed; Lloyd iterations stop after
// max_iterations or when the relative SSE change drops below rel_tolerance.
RvqModel train_rvq(const std::vector<std::vector<double>>& vectors,
                   const RvqConfig& config);

// Greedy nearest-centroid per level on successive residuals. Ties break to
// the lowest centroid index.
std::vector<int> encode_semantic(const std::vector<double>& v,
                                 const RvqModel& model);

// Total squared reconstruction error of the model over a vector set, after
// quantizing through the given number of levels.
double reconstruction_error(const std::vector<std::vector<double>>& vectors,
                            const RvqModel& model, int levels);

}  // namespace geosid

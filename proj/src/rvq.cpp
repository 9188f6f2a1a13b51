#include "geosid/rvq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geosid {

namespace {

// splitmix64: portable deterministic RNG; avoids the implementation-defined
// behavior of std distributions so fixed seeds give byte-identical models
// everywhere.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double u01() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }
};

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

int nearest_centroid(const std::vector<double>& v,
                     const std::vector<std::vector<double>>& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centroids.size(); ++k) {
        const double d = sq_distance(v, centroids[k]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

struct KmeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignments;
    std::vector<double> sse_trace;
};

// k-means++ seeding. Stops early when every remaining point has zero distance
// to a chosen center, so duplicate-heavy data yields a smaller codebook.
std::vector<std::vector<double>> seed_centroids(
    const std::vector<std::vector<double>>& points, int k, SplitMix64& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));

    std::size_t first = static_cast<std::size_t>(rng.u01() * static_cast<double>(n));
    if (first >= n) first = n - 1;
    centroids.push_back(points[first]);

    std::vector<double> min_d(n);
    for (std::size_t i = 0; i < n; ++i) min_d[i] = sq_distance(points[i], centroids[0]);

    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0;
        for (double d : min_d) total += d;
        if (total <= 0) break;
        const double r = rng.u01() * total;
        double cum = 0;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            cum += min_d[i];
            if (cum > r) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points[chosen]);
        for (std::size_t i = 0; i < n; ++i) {
            min_d[i] = std::min(min_d[i], sq_distance(points[i], centroids.back()));
        }
    }
    return centroids;
}

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    SplitMix64& rng, int max_iterations, double rel_tolerance) {
    KmeansResult result;
    result.centroids = seed_centroids(points, k, rng);
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    result.assignments.assign(n, 0);

    double prev_sse = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iterations; ++iter) {
        double sse = 0;
        for (std::size_t i = 0; i < n; ++i) {
            result.assignments[i] = nearest_centroid(points[i], result.centroids);
            sse += sq_distance(points[i], result.centroids[static_cast<std::size_t>(
                                              result.assignments[i])]);
        }
        result.sse_trace.push_back(sse);

        // Revive empty clusters with the worst-fit point before updating means.
        std::vector<std::size_t> counts(result.centroids.size(), 0);
        for (int a : result.assignments) ++counts[static_cast<std::size_t>(a)];
        for (std::size_t kk = 0; kk < result.centroids.size(); ++kk) {
            if (counts[kk] > 0) continue;
            double worst = -1;
            std::size_t worst_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t a = static_cast<std::size_t>(result.assignments[i]);
                if (counts[a] <= 1) continue;  // do not empty another cluster
                const double d = sq_distance(points[i], result.centroids[a]);
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            if (worst < 0) continue;
            --counts[static_cast<std::size_t>(result.assignments[worst_i])];
            result.assignments[worst_i] = static_cast<int>(kk);
            ++counts[kk];
        }

        std::vector<std::vector<double>> sums(result.centroids.size(),
                                              std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = static_cast<std::size_t>(result.assignments[i]);
            for (std::size_t d = 0; d < dim; ++d) sums[a][d] += points[i][d];
        }
        for (std::size_t kk = 0; kk < result.centroids.size(); ++kk) {
            if (counts[kk] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d) {
                result.centroids[kk][d] =
                    sums[kk][d] / static_cast<double>(counts[kk]);
            }
        }

        if (std::isfinite(prev_sse)) {
            const double denom = std::max(prev_sse, 1e-300);
            if (std::fabs(prev_sse - sse) / denom < rel_tolerance) break;
        }
        if (sse == 0) break;
        prev_sse = sse;
    }

    // Final assignment against the updated means, so downstream encodes see
    // exactly the SSE implied by the returned centroids.
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        result.assignments[i] = nearest_centroid(points[i], result.centroids);
        sse += sq_distance(points[i], result.centroids[static_cast<std::size_t>(
                                          result.assignments[i])]);
    }
    result.sse_trace.push_back(sse);
    return result;
}

}  // namespace

RvqModel train_rvq(const std::vector<std::vector<double>>& vectors,
                   const RvqConfig& config) {
    if (vectors.empty()) throw ValidationError("train_rvq: no vectors");
    if (config.levels < 1 || config.codebook_size < 1) {
        throw ValidationError("train_rvq: levels and codebook_size must be >= 1");
    }
    const std::size_t dim = vectors[0].size();
    for (const auto& v : vectors) {
        if (v.size() != dim) throw ValidationError("train_rvq: ragged dimensions");
        for (double x : v) {
            if (!std::isfinite(x)) throw ValidationError("train_rvq: non-finite input");
        }
    }

    RvqModel model;
    model.dim = static_cast<int>(dim);
    SplitMix64 rng(config.seed);

    std::vector<std::vector<double>> residuals = vectors;
    for (int level = 0; level < config.levels; ++level) {
        KmeansResult km = kmeans(residuals, config.codebook_size, rng,
                                 config.max_iterations, config.rel_tolerance);
        for (std::size_t i = 0; i < residuals.size(); ++i) {
            const auto& c = km.centroids[static_cast<std::size_t>(km.assignments[i])];
            for (std::size_t d = 0; d < dim; ++d) residuals[i][d] -= c[d];
        }
        model.codebooks.push_back(std::move(km.centroids));
        model.error_trace.push_back(std::move(km.sse_trace));
    }
    return model;
}

std::vector<int> encode_semantic(const std::vector<double>& v,
                                 const RvqModel& model) {
    if (static_cast<int>(v.size()) != model.dim) {
        throw ValidationError("encode_semantic: dimension mismatch");
    }
    std::vector<int> codes;
    codes.reserve(model.codebooks.size());
    std::vector<double> residual = v;
    for (const auto& codebook : model.codebooks) {
        const int k = nearest_centroid(residual, codebook);
        codes.push_back(k);
        const auto& c = codebook[static_cast<std::size_t>(k)];
        for (std::size_t d = 0; d < residual.size(); ++d) residual[d] -= c[d];
    }
    return codes;
}

double reconstruction_error(const std::vector<std::vector<double>>& vectors,
                            const RvqModel& model, int levels) {
    double total = 0;
    for (const auto& v : vectors) {
        std::vector<double> residual = v;
        for (int level = 0; level < levels; ++level) {
            const auto& codebook = model.codebooks[static_cast<std::size_t>(level)];
            const int k = nearest_centroid(residual, codebook);
            const auto& c = codebook[static_cast<std::size_t>(k)];
            for (std::size_t d = 0; d < residual.size(); ++d) residual[d] -= c[d];
        }
        for (double x : residual) total += x * x;
    }
    return total;
}

}  // namespace geosid

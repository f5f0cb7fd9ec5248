#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "slidemil/rng.hpp"
#include "slidemil/tensor.hpp"
#include "slidemil/tiles.hpp"

namespace slidemil {

// 5x sampling rule: keep everything up to `limit` tiles, otherwise a uniform
// sample (without replacement) of ceil(frac * count). Output keeps the
// (row, col) ordering of the input.
inline std::vector<TileRef> sample_level5(const std::vector<TileRef>& tiles, double frac,
                                          std::size_t limit, std::uint64_t seed) {
    if (frac <= 0.0 || frac > 1.0) throw ConfigError("sample fraction must be in (0,1]");
    if (tiles.size() <= limit) return tiles;
    const std::size_t keep = static_cast<std::size_t>(
        std::ceil(frac * static_cast<double>(tiles.size())));
    Rng rng(seed);
    auto idx = rng.sample_without_replacement(tiles.size(), keep);
    std::vector<TileRef> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(tiles[i]);
    return out;
}

struct KmeansResult {
    std::vector<std::size_t> assignments;  // point -> cluster
    Tensor2D centroids;                    // k x d
    std::size_t iterations = 0;
};

namespace detail {

inline double sq_distance(const Tensor2D& points, std::size_t i, const Tensor2D& centroids,
                          std::size_t c) {
    double d = 0.0;
    for (std::size_t j = 0; j < points.cols; ++j) {
        const double diff = points.at(i, j) - centroids.at(c, j);
        d += diff * diff;
    }
    return d;
}

// Index of the point farthest from its nearest centroid (ties -> lowest).
inline std::size_t farthest_point(const Tensor2D& points, const Tensor2D& centroids,
                                  std::size_t centroids_used) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < points.rows; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids_used; ++c)
            nearest = std::min(nearest, sq_distance(points, i, centroids, c));
        if (nearest > best_d) {
            best_d = nearest;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

namespace detail {

// One Lloyd run from a given first centroid, the remaining seeds at the
// farthest point from the chosen set. Empty clusters re-seed at the current
// farthest point. Stops at an assignment fixpoint or after max_iters.
inline KmeansResult lloyd_run(const Tensor2D& points, std::size_t k, std::size_t first,
                              std::size_t max_iters) {
    const std::size_t n = points.rows, d = points.cols;
    KmeansResult res;
    res.centroids = Tensor2D(k, d);
    for (std::size_t j = 0; j < d; ++j) res.centroids.at(0, j) = points.at(first, j);
    for (std::size_t c = 1; c < k; ++c) {
        std::size_t far = farthest_point(points, res.centroids, c);
        for (std::size_t j = 0; j < d; ++j) res.centroids.at(c, j) = points.at(far, j);
    }

    res.assignments.assign(n, 0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        res.iterations = iter + 1;
        bool changed = iter == 0;  // first sweep always assigns
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq_distance(points, i, res.centroids, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double dist = sq_distance(points, i, res.centroids, c);
                if (dist < best_d) {
                    best_d = dist;
                    best = c;
                }
            }
            if (res.assignments[i] != best) {
                res.assignments[i] = best;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<std::size_t> counts(k, 0);
        Tensor2D sums(k, d);
        for (std::size_t i = 0; i < n; ++i) {
            counts[res.assignments[i]] += 1;
            for (std::size_t j = 0; j < d; ++j) sums.at(res.assignments[i], j) += points.at(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed a starved centroid at the farthest point
                std::size_t far = farthest_point(points, res.centroids, k);
                for (std::size_t j = 0; j < d; ++j) res.centroids.at(c, j) = points.at(far, j);
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    res.centroids.at(c, j) = sums.at(c, j) / static_cast<double>(counts[c]);
            }
        }
    }
    return res;
}

}  // namespace detail

inline double kmeans_wcss(const Tensor2D& points, const KmeansResult& res);

// Lloyd's algorithm with farthest-point seeding and deterministic restarts:
// each restart starts from a different seeded point and the best fixpoint
// by within-cluster sum of squares wins. The result is always a local
// optimum (every point nearest its centroid, every centroid its cluster
// mean) when the run reaches a fixpoint before max_iters.
inline KmeansResult kmeans(const Tensor2D& points, std::size_t k, std::uint64_t seed,
                           std::size_t max_iters = 50, std::size_t restarts = 8) {
    if (k == 0 || k > points.rows) throw ConfigError("kmeans: need 1 <= k <= n");
    const std::size_t n = points.rows;
    Rng rng(seed);
    const std::size_t base = static_cast<std::size_t>(rng.below(n));

    KmeansResult best;
    double best_wcss = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(1, std::min(restarts, n)); ++r) {
        KmeansResult res = detail::lloyd_run(points, k, (base + r) % n, max_iters);
        const double wcss = kmeans_wcss(points, res);
        if (wcss < best_wcss) {
            best_wcss = wcss;
            best = std::move(res);
        }
    }
    return best;
}

inline double kmeans_wcss(const Tensor2D& points, const KmeansResult& res) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.rows; ++i)
        total += detail::sq_distance(points, i, res.centroids, res.assignments[i]);
    return total;
}

// Per cluster, up to n_per_cluster tiles sampled uniformly without
// replacement. Output ordered (row, col).
inline std::vector<TileRef> cluster_sample(const std::vector<TileRef>& tiles,
                                           const std::vector<std::size_t>& assignments,
                                           std::size_t n_clusters, std::size_t n_per_cluster,
                                           std::uint64_t seed) {
    if (tiles.size() != assignments.size()) throw ShapeError("cluster_sample: size mismatch");
    Rng rng(seed);
    std::vector<TileRef> out;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < tiles.size(); ++i)
            if (assignments[i] == c) members.push_back(i);
        if (members.empty()) continue;
        auto pick = rng.sample_without_replacement(members.size(),
                                                   std::min(n_per_cluster, members.size()));
        for (std::size_t p : pick) out.push_back(tiles[members[p]]);
    }
    std::sort(out.begin(), out.end(), [](const TileRef& a, const TileRef& b) {
        return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
    return out;
}

}  // namespace slidemil

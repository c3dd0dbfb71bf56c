#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tsclust/distances.hpp"
#include "tsclust/types.hpp"

namespace tsclust::clustering {

struct ClusteringResult {
    std::vector<std::size_t> assignment;  // series -> cluster id in [0, k)
    std::vector<std::size_t> medoids;     // k-medoids: series index of each cluster's medoid
    Matrix centers;                       // k-means: k x d center vectors
    double cost = 0.0;
    std::size_t iterations = 0;
    std::vector<double> cost_trace;       // cost after initialization and after every iteration
    std::uint64_t seed = 0;

    std::size_t k() const noexcept { return medoids.empty() ? centers.rows() : medoids.size(); }
};

/// Seed of restart r derived from a master seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Greedy PAM BUILD: the first medoid minimizes the total distance, every next
/// one maximizes the cost reduction. Ties go to the lowest index.
std::vector<std::size_t> pam_build(const distances::DistanceMatrix& d, std::size_t k);

/// PAM SWAP from the given medoids: repeatedly applies the best
/// (medoid, non-medoid) exchange until none lowers the cost.
ClusteringResult pam_swap(const distances::DistanceMatrix& d, std::vector<std::size_t> medoids);

/// Best of `restarts` PAM runs: run 0 starts from BUILD, run r > 0 from k
/// distinct points drawn with derive_seed(seed, r). Best by (cost, run).
ClusteringResult kmedoids(const distances::DistanceMatrix& d, std::size_t k, std::uint64_t seed,
                          std::size_t restarts = 10);

/// Nearest-medoid assignment and its total distance.
ClusteringResult assign_to_medoids(const distances::DistanceMatrix& d, std::vector<std::size_t> medoids);

/// Lloyd iterations from the given centers. Cost is the sum of squared
/// Euclidean distances. Empty clusters are re-seeded with the point farthest
/// from its center.
ClusteringResult lloyd(const Matrix& x, Matrix centers, std::size_t max_iterations = 300);

/// Seeded farthest-point initialization: a random first center, then the point
/// farthest from its nearest chosen center (ties: lowest index).
Matrix farthest_point_centers(const Matrix& x, std::size_t k, std::uint64_t seed);

/// Best of `restarts` Lloyd runs from farthest_point_centers(derive_seed(seed, r)).
ClusteringResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts = 10);

/// Multi-resolution k-means on Haar coefficients. Level j uses the first 2^j
/// coefficients; level 0 is seeded like kmeans, and each later level starts from
/// the previous centers with the new detail coordinates set to zero. `levels`
/// limits the depth (0 = all). The returned centers live in the finest space
/// used; cost is measured there.
ClusteringResult interactive_wavelet_kmeans(const Matrix& series, std::size_t k, std::uint64_t seed,
                                            std::size_t levels = 0, std::size_t max_iterations = 300);

/// Same, starting from precomputed coefficient rows (haar layout).
ClusteringResult interactive_wavelet_kmeans_coefficients(const Matrix& coefficients, std::size_t k,
                                                         std::uint64_t seed, std::size_t levels = 0,
                                                         std::size_t max_iterations = 300);

struct ElbowPoint {
    std::size_t k = 0;
    double cost = 0.0;
};

/// k-medoids cost for k in [k_min, k_max]. From the second k on, one extra
/// restart starts from the previous best medoids plus the point farthest from
/// its medoid, so the curve never increases.
std::vector<ElbowPoint> elbow_curve(const distances::DistanceMatrix& d, std::size_t k_min, std::size_t k_max,
                                    std::uint64_t seed, std::size_t restarts = 10);

/// k-means analogue (warm start: previous centers plus the worst-fit point).
std::vector<ElbowPoint> elbow_curve_kmeans(const Matrix& x, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                                           std::size_t restarts = 10);

/// k with the largest second difference cost(k-1) - 2 cost(k) + cost(k+1);
/// needs at least three points. Ties: smallest k.
std::size_t elbow_k(const std::vector<ElbowPoint>& curve);

}  // namespace tsclust::clustering

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tsclust/distances.hpp"

namespace tsclust::outliers {

/// Floor on the mean reachability distance, so duplicates give lrd = 1 / eps.
inline constexpr double kReachabilityFloor = 1e-12;

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;
};

/// k nearest neighbors per point, sorted by (distance, index); a point is never
/// its own neighbor.
struct NeighborGraph {
    std::size_t k = 0;
    std::vector<std::vector<Neighbor>> neighbors;
    std::vector<double> k_distance;  // distance to the k-th neighbor

    std::size_t size() const noexcept { return neighbors.size(); }
};

NeighborGraph knn_graph(const distances::DistanceMatrix& d, std::size_t k);

/// Inverse mean reachability distance of point i, where
/// reach(i, j) = max(k_distance(j), d(i, j)).
double lrd(const NeighborGraph& graph, std::size_t i);

struct LOFReport {
    std::size_t k = 0;
    std::vector<double> lrd;
    std::vector<double> lof;
    std::optional<double> quantile;   // set when flagged by quantile
    double threshold = 0.0;           // smallest flagged score (quantile rule) or the manual threshold
    std::vector<bool> flagged;

    std::size_t flagged_count() const;
};

/// lrd and LOF(i) = sum_{j in N(i)} lrd(j) / (k * lrd(i)); no flags yet.
LOFReport lof_scores(const distances::DistanceMatrix& d, std::size_t k);

/// Flags the ceil((1 - q) * N) highest scores; ties go to the lower index.
std::vector<bool> flag_outliers(const std::vector<double>& scores, double quantile = 0.95);

/// Flags scores strictly above `threshold`.
std::vector<bool> flag_above(const std::vector<double>& scores, double threshold);

/// Applies flag_outliers to a report and records the rule.
void apply_quantile(LOFReport& report, double quantile = 0.95);
void apply_threshold(LOFReport& report, double threshold);

}  // namespace tsclust::outliers

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tsclust/types.hpp"

namespace tsclust::evaluation {

/// Integer counts, classes x clusters.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::size_t clusters = 0;
    std::vector<std::size_t> counts;  // row-major

    std::size_t operator()(std::size_t c, std::size_t j) const { return counts[c * clusters + j]; }
    std::size_t& operator()(std::size_t c, std::size_t j) { return counts[c * clusters + j]; }
    std::size_t total() const;
    std::vector<std::size_t> row_sums() const;
    std::vector<std::size_t> column_sums() const;
};

/// Entry (c, j) counts series of class c assigned to cluster j. Sizes default
/// to max label + 1 and max cluster + 1.
ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& assignment, const std::vector<int>& labels,
                                 std::size_t classes = 0, std::size_t clusters = 0);

/// Best trace fraction over injective class -> cluster maps. Exhaustive search
/// over assignments (Hungarian-free; intended for a handful of classes).
double label_match_accuracy(const ConfusionMatrix& confusion);

/// The maximizing class -> cluster map of label_match_accuracy.
std::vector<std::size_t> best_label_match(const ConfusionMatrix& confusion);

struct ClusterStats {
    std::size_t size = 0;
    std::size_t outliers = 0;
    double std = 0.0;  // mean over time of the pointwise population std of members
};

/// Per-cluster size, flagged count and dispersion. Empty clusters report zeros
/// and add a line to `warnings` when given.
std::vector<ClusterStats> cluster_stats(const Matrix& series, const std::vector<std::size_t>& assignment,
                                        const std::vector<bool>& flagged, std::size_t clusters = 0,
                                        std::vector<std::string>* warnings = nullptr);

/// Coordinate-wise mean of each cluster's members (zeros when empty).
Matrix mean_centroids(const Matrix& series, const std::vector<std::size_t>& assignment, std::size_t clusters);
/// Rows of `series` at the medoid indices.
Matrix medoid_centroids(const Matrix& series, const std::vector<std::size_t>& medoids);

}  // namespace tsclust::evaluation

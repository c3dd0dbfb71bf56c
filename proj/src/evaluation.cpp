#include "tsclust/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsclust/error.hpp"

namespace tsclust::evaluation {

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::vector<std::size_t> ConfusionMatrix::row_sums() const {
    std::vector<std::size_t> s(classes, 0);
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t j = 0; j < clusters; ++j) s[c] += (*this)(c, j);
    return s;
}

std::vector<std::size_t> ConfusionMatrix::column_sums() const {
    std::vector<std::size_t> s(clusters, 0);
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t j = 0; j < clusters; ++j) s[j] += (*this)(c, j);
    return s;
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& assignment, const std::vector<int>& labels,
                                 std::size_t classes, std::size_t clusters) {
    if (assignment.size() != labels.size())
        throw DimensionError("confusion_matrix: " + std::to_string(assignment.size()) + " assignments vs " +
                             std::to_string(labels.size()) + " labels");
    for (int l : labels)
        if (l < 0) throw ParameterError("confusion_matrix: negative label");
    ConfusionMatrix m;
    m.classes = classes;
    m.clusters = clusters;
    for (int l : labels) m.classes = std::max(m.classes, static_cast<std::size_t>(l) + 1);
    for (std::size_t a : assignment) m.clusters = std::max(m.clusters, a + 1);
    m.counts.assign(m.classes * m.clusters, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) ++m(static_cast<std::size_t>(labels[i]), assignment[i]);
    return m;
}

namespace {

void search(const ConfusionMatrix& m, std::size_t c, std::vector<bool>& used, std::vector<std::size_t>& current,
            std::size_t score, std::size_t& best, std::vector<std::size_t>& best_map) {
    if (c == m.classes) {
        if (score > best || best_map.empty()) {
            best = score;
            best_map = current;
        }
        return;
    }
    for (std::size_t j = 0; j < m.clusters; ++j) {
        if (used[j]) continue;
        used[j] = true;
        current[c] = j;
        search(m, c + 1, used, current, score + m(c, j), best, best_map);
        used[j] = false;
    }
}

}  // namespace

std::vector<std::size_t> best_label_match(const ConfusionMatrix& m) {
    if (m.clusters < m.classes)
        throw ParameterError("label_match_accuracy: needs at least as many clusters (" + std::to_string(m.clusters) +
                             ") as classes (" + std::to_string(m.classes) + ")");
    std::vector<bool> used(m.clusters, false);
    std::vector<std::size_t> current(m.classes), best_map;
    std::size_t best = 0;
    search(m, 0, used, current, 0, best, best_map);
    return best_map;
}

double label_match_accuracy(const ConfusionMatrix& m) {
    const std::size_t total = m.total();
    if (total == 0) return 0.0;
    const auto map = best_label_match(m);
    std::size_t hit = 0;
    for (std::size_t c = 0; c < m.classes; ++c) hit += m(c, map[c]);
    return static_cast<double>(hit) / static_cast<double>(total);
}

std::vector<ClusterStats> cluster_stats(const Matrix& series, const std::vector<std::size_t>& assignment,
                                        const std::vector<bool>& flagged, std::size_t clusters,
                                        std::vector<std::string>* warnings) {
    const std::size_t n = series.rows(), t_len = series.cols();
    if (assignment.size() != n || flagged.size() != n)
        throw DimensionError("cluster_stats: series, assignment and flags must have the same count");
    for (std::size_t a : assignment) clusters = std::max(clusters, a + 1);

    std::vector<ClusterStats> stats(clusters);
    Matrix sum_sq(clusters, t_len);
    Matrix mean = mean_centroids(series, assignment, clusters);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = stats[assignment[i]];
        ++s.size;
        if (flagged[i]) ++s.outliers;
        const auto mu = mean.row(assignment[i]);
        auto acc = sum_sq.row(assignment[i]);
        const auto x = series.row(i);
        for (std::size_t t = 0; t < t_len; ++t) acc[t] += (x[t] - mu[t]) * (x[t] - mu[t]);
    }
    for (std::size_t j = 0; j < clusters; ++j) {
        if (stats[j].size == 0) {
            if (warnings) warnings->push_back("cluster " + std::to_string(j) + " is empty; std reported as 0");
            continue;
        }
        if (t_len == 0) continue;
        double total = 0.0;
        for (double v : sum_sq.row(j)) total += std::sqrt(v / static_cast<double>(stats[j].size));
        stats[j].std = total / static_cast<double>(t_len);
    }
    return stats;
}

Matrix mean_centroids(const Matrix& series, const std::vector<std::size_t>& assignment, std::size_t clusters) {
    if (assignment.size() != series.rows()) throw DimensionError("mean_centroids: assignment size mismatch");
    Matrix c(clusters, series.cols());
    std::vector<std::size_t> count(clusters, 0);
    for (std::size_t i = 0; i < series.rows(); ++i) {
        if (assignment[i] >= clusters) throw ParameterError("mean_centroids: cluster id out of range");
        ++count[assignment[i]];
        auto row = c.row(assignment[i]);
        const auto x = series.row(i);
        for (std::size_t t = 0; t < x.size(); ++t) row[t] += x[t];
    }
    for (std::size_t j = 0; j < clusters; ++j)
        if (count[j] > 0)
            for (double& v : c.row(j)) v /= static_cast<double>(count[j]);
    return c;
}

Matrix medoid_centroids(const Matrix& series, const std::vector<std::size_t>& medoids) {
    Matrix c(medoids.size(), series.cols());
    for (std::size_t j = 0; j < medoids.size(); ++j) {
        if (medoids[j] >= series.rows()) throw ParameterError("medoid_centroids: medoid index out of range");
        std::copy(series.row(medoids[j]).begin(), series.row(medoids[j]).end(), c.row(j).begin());
    }
    return c;
}

}  // namespace tsclust::evaluation

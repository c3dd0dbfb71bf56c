#include "tsclust/outliers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsclust/error.hpp"

namespace tsclust::outliers {

NeighborGraph knn_graph(const distances::DistanceMatrix& d, std::size_t k) {
    const std::size_t n = d.size();
    if (k == 0 || k + 1 > n)
        throw ParameterError("knn_graph: k = " + std::to_string(k) + " outside [1, " +
                             std::to_string(n > 0 ? n - 1 : 0) + "]");
    NeighborGraph g;
    g.k = k;
    g.neighbors.resize(n);
    g.k_distance.resize(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        std::vector<Neighbor> all;
        all.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) all.push_back({j, d(i, j)});
        auto less = [](const Neighbor& a, const Neighbor& b) {
            return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
        };
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
        all.resize(k);
        g.k_distance[i] = all.back().distance;
        g.neighbors[i] = std::move(all);
    }
    return g;
}

double lrd(const NeighborGraph& graph, std::size_t i) {
    double total = 0.0;
    for (const auto& nb : graph.neighbors.at(i)) total += std::max(graph.k_distance[nb.index], nb.distance);
    const double mean = total / static_cast<double>(graph.k);
    return 1.0 / std::max(mean, kReachabilityFloor);
}

std::size_t LOFReport::flagged_count() const {
    return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

LOFReport lof_scores(const distances::DistanceMatrix& d, std::size_t k) {
    const auto graph = knn_graph(d, k);
    const std::size_t n = d.size();
    LOFReport r;
    r.k = k;
    r.lrd.resize(n);
    r.lof.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.lrd[i] = lrd(graph, i);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const auto& nb : graph.neighbors[i]) sum += r.lrd[nb.index];
        r.lof[i] = sum / (static_cast<double>(k) * r.lrd[i]);
    }
    r.flagged.assign(n, false);
    return r;
}

std::vector<bool> flag_outliers(const std::vector<double>& scores, double quantile) {
    if (!(quantile > 0.0 && quantile < 1.0))
        throw ParameterError("flag_outliers: quantile must lie in (0, 1), got " + std::to_string(quantile));
    const std::size_t n = scores.size();
    std::vector<bool> flags(n, false);
    if (n == 0) return flags;
    // Round away float noise in (1 - q) * N before taking the ceiling.
    const double raw = (1.0 - quantile) * static_cast<double>(n);
    const auto count = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(raw - 1e-9)), 1, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    for (std::size_t i = 0; i < count; ++i) flags[order[i]] = true;
    return flags;
}

std::vector<bool> flag_above(const std::vector<double>& scores, double threshold) {
    std::vector<bool> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > threshold;
    return flags;
}

void apply_quantile(LOFReport& report, double quantile) {
    report.flagged = flag_outliers(report.lof, quantile);
    report.quantile = quantile;
    double smallest = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < report.lof.size(); ++i)
        if (report.flagged[i] && (!any || report.lof[i] < smallest)) {
            smallest = report.lof[i];
            any = true;
        }
    report.threshold = smallest;
}

void apply_threshold(LOFReport& report, double threshold) {
    report.flagged = flag_above(report.lof, threshold);
    report.quantile.reset();
    report.threshold = threshold;
}

}  // namespace tsclust::outliers

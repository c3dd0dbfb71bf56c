#include "tsclust/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "tsclust/error.hpp"
#include "tsclust/transforms.hpp"

namespace tsclust::clustering {

using distances::DistanceMatrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_k(std::size_t k, std::size_t n, const char* who) {
    if (k == 0 || k > n)
        throw ParameterError(std::string(who) + ": k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
}

// Nearest and second-nearest medoid (by position) for every point. A medoid is
// always nearest to itself even when duplicates tie at distance zero.
struct MedoidDistances {
    std::vector<std::size_t> nearest;
    std::vector<double> near_dist;
    std::vector<double> second_dist;
    double cost = 0.0;
};

MedoidDistances medoid_distances(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
    const std::size_t n = d.size();
    MedoidDistances md;
    md.nearest.assign(n, 0);
    md.near_dist.assign(n, kInf);
    md.second_dist.assign(n, kInf);
    std::vector<std::ptrdiff_t> medoid_slot(n, -1);
    for (std::size_t i = 0; i < medoids.size(); ++i) medoid_slot[medoids[i]] = static_cast<std::ptrdiff_t>(i);
    for (std::size_t j = 0; j < n; ++j) {
        if (medoid_slot[j] >= 0) {
            md.nearest[j] = static_cast<std::size_t>(medoid_slot[j]);
            md.near_dist[j] = 0.0;
            for (std::size_t i = 0; i < medoids.size(); ++i)
                if (medoids[i] != j) md.second_dist[j] = std::min(md.second_dist[j], d(j, medoids[i]));
            continue;
        }
        for (std::size_t i = 0; i < medoids.size(); ++i) {
            const double dist = d(j, medoids[i]);
            if (dist < md.near_dist[j]) {
                md.second_dist[j] = md.near_dist[j];
                md.near_dist[j] = dist;
                md.nearest[j] = i;
            } else if (dist < md.second_dist[j]) {
                md.second_dist[j] = dist;
            }
        }
    }
    for (std::size_t j = 0; j < n; ++j) md.cost += md.near_dist[j];
    return md;
}

void check_medoids(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
    check_k(medoids.size(), d.size(), "pam");
    std::vector<char> seen(d.size(), 0);
    for (auto m : medoids) {
        if (m >= d.size()) throw ParameterError("pam: medoid index " + std::to_string(m) + " out of range");
        if (seen[m]) throw ParameterError("pam: duplicate medoid " + std::to_string(m));
        seen[m] = 1;
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc;
}

std::vector<std::size_t> nearest_centers(const Matrix& x, const Matrix& centers, std::vector<double>* dist = nullptr) {
    std::vector<std::size_t> a(x.rows(), 0);
    if (dist) dist->assign(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double best = kInf;
        for (std::size_t c = 0; c < centers.rows(); ++c) {
            const double s = squared_distance(x.row(i), centers.row(c));
            if (s < best) {
                best = s;
                a[i] = c;
            }
        }
        if (dist) (*dist)[i] = best;
    }
    return a;
}

double assignment_cost(const Matrix& x, const Matrix& centers, const std::vector<std::size_t>& a) {
    double cost = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) cost += squared_distance(x.row(i), centers.row(a[i]));
    return cost;
}

// Means of the current assignment; empty clusters take the point farthest from
// its own center (from a cluster that keeps at least one member).
Matrix update_centers(const Matrix& x, const Matrix& old_centers, std::vector<std::size_t>& a) {
    const std::size_t k = old_centers.rows();
    std::vector<std::size_t> counts(k, 0);
    for (auto c : a) ++counts[c];
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        std::size_t worst = x.rows();
        double worst_dist = -1.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (counts[a[i]] < 2) continue;
            const double s = squared_distance(x.row(i), old_centers.row(a[i]));
            if (s > worst_dist) {
                worst_dist = s;
                worst = i;
            }
        }
        if (worst == x.rows()) break;  // fewer distinct donors than clusters
        --counts[a[worst]];
        a[worst] = c;
        counts[c] = 1;
    }
    Matrix centers(k, x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) centers(a[i], j) += x(i, j);
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            std::copy(old_centers.row(c).begin(), old_centers.row(c).end(), centers.row(c).begin());
            continue;
        }
        for (std::size_t j = 0; j < x.cols(); ++j) centers(c, j) /= static_cast<double>(counts[c]);
    }
    return centers;
}

template <class Run>
ClusteringResult best_of(std::size_t restarts, Run&& run) {
    const std::size_t runs = std::max<std::size_t>(restarts, 1);
    std::vector<ClusteringResult> results(runs);
    std::vector<std::string> errors(runs);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(runs); ++r) {
        try {
            results[r] = run(static_cast<std::size_t>(r));
        } catch (const std::exception& e) {
            errors[r] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw ParameterError(e);
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs; ++r)
        if (results[r].cost < results[best].cost) best = r;
    return std::move(results[best]);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<std::size_t> pam_build(const DistanceMatrix& d, std::size_t k) {
    const std::size_t n = d.size();
    check_k(k, n, "pam_build");
    std::vector<std::size_t> medoids;
    std::vector<char> is_medoid(n, 0);
    std::vector<double> near(n, kInf);

    std::size_t first = 0;
    double best_total = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += d(i, j);
        if (total < best_total) {
            best_total = total;
            first = i;
        }
    }
    medoids.push_back(first);
    is_medoid[first] = 1;
    for (std::size_t j = 0; j < n; ++j) near[j] = d(j, first);

    while (medoids.size() < k) {
        std::size_t pick = n;
        double best_gain = -1.0;
        for (std::size_t h = 0; h < n; ++h) {
            if (is_medoid[h]) continue;
            double gain = 0.0;
            for (std::size_t j = 0; j < n; ++j) gain += std::max(near[j] - d(j, h), 0.0);
            if (gain > best_gain) {
                best_gain = gain;
                pick = h;
            }
        }
        medoids.push_back(pick);
        is_medoid[pick] = 1;
        for (std::size_t j = 0; j < n; ++j) near[j] = std::min(near[j], d(j, pick));
    }
    return medoids;
}

ClusteringResult assign_to_medoids(const DistanceMatrix& d, std::vector<std::size_t> medoids) {
    check_medoids(d, medoids);
    const auto md = medoid_distances(d, medoids);
    ClusteringResult r;
    r.assignment = md.nearest;
    r.cost = md.cost;
    r.medoids = std::move(medoids);
    return r;
}

ClusteringResult pam_swap(const DistanceMatrix& d, std::vector<std::size_t> medoids) {
    check_medoids(d, medoids);
    const std::size_t n = d.size();
    const std::size_t k = medoids.size();
    std::vector<char> is_medoid(n, 0);
    for (auto m : medoids) is_medoid[m] = 1;

    auto md = medoid_distances(d, medoids);
    ClusteringResult r;
    r.cost_trace.push_back(md.cost);
    std::vector<double> removal(k);

    for (;;) {
        const double tolerance = 1e-12 * std::max(1.0, md.cost);
        double best_delta = -tolerance;
        std::size_t best_slot = k;
        std::size_t best_h = n;
        for (std::size_t h = 0; h < n; ++h) {
            if (is_medoid[h]) continue;
            // Change in cost when medoid slot i is replaced by h:
            //   shared + removal[i], where shared is the gain from h for points
            //   that keep their medoid and removal[i] corrects the points of slot i.
            double shared = 0.0;
            std::fill(removal.begin(), removal.end(), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                const double djh = d(j, h);
                const double dn = md.near_dist[j];
                const double keep = std::min(djh - dn, 0.0);
                shared += keep;
                removal[md.nearest[j]] += (std::min(djh, md.second_dist[j]) - dn) - keep;
            }
            for (std::size_t i = 0; i < k; ++i) {
                const double delta = shared + removal[i];
                if (delta < best_delta) {
                    best_delta = delta;
                    best_slot = i;
                    best_h = h;
                }
            }
        }
        if (best_slot == k) break;
        is_medoid[medoids[best_slot]] = 0;
        medoids[best_slot] = best_h;
        is_medoid[best_h] = 1;
        const double previous = md.cost;
        md = medoid_distances(d, medoids);
        r.cost_trace.push_back(md.cost);
        ++r.iterations;
        if (!(md.cost < previous)) break;  // rounding guard; a real improvement always lowers the sum
    }
    r.assignment = md.nearest;
    r.cost = md.cost;
    r.medoids = std::move(medoids);
    return r;
}

ClusteringResult kmedoids(const DistanceMatrix& d, std::size_t k, std::uint64_t seed, std::size_t restarts) {
    check_k(k, d.size(), "kmedoids");
    auto result = best_of(restarts, [&](std::size_t run) {
        std::vector<std::size_t> init;
        if (run == 0) {
            init = pam_build(d, k);
        } else {
            std::mt19937_64 rng(derive_seed(seed, run));
            std::vector<std::size_t> pool(d.size());
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            for (std::size_t i = 0; i < k; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            init.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        }
        return pam_swap(d, std::move(init));
    });
    result.seed = seed;
    return result;
}

Matrix farthest_point_centers(const Matrix& x, std::size_t k, std::uint64_t seed) {
    check_k(k, x.rows(), "kmeans");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.rows() - 1);
    std::vector<std::size_t> chosen{pick(rng)};
    std::vector<double> near(x.rows(), kInf);
    while (chosen.size() < k) {
        const auto last = chosen.back();
        std::size_t far = 0;
        double far_dist = -1.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            near[i] = std::min(near[i], squared_distance(x.row(i), x.row(last)));
            if (near[i] > far_dist) {
                far_dist = near[i];
                far = i;
            }
        }
        chosen.push_back(far);
    }
    Matrix centers(k, x.cols());
    for (std::size_t c = 0; c < k; ++c) std::copy(x.row(chosen[c]).begin(), x.row(chosen[c]).end(), centers.row(c).begin());
    return centers;
}

ClusteringResult lloyd(const Matrix& x, Matrix centers, std::size_t max_iterations) {
    check_k(centers.rows(), x.rows(), "kmeans");
    if (centers.cols() != x.cols()) throw DimensionError("kmeans: center dimension differs from data");
    ClusteringResult r;
    auto a = nearest_centers(x, centers);
    r.cost_trace.push_back(assignment_cost(x, centers, a));
    for (std::size_t it = 0; it < max_iterations; ++it) {
        centers = update_centers(x, centers, a);
        auto next = nearest_centers(x, centers);
        r.cost_trace.push_back(assignment_cost(x, centers, next));
        ++r.iterations;
        const bool stable = next == a;
        a = std::move(next);
        if (stable) break;
    }
    r.assignment = std::move(a);
    r.cost = r.cost_trace.back();
    r.centers = std::move(centers);
    return r;
}

ClusteringResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts) {
    check_k(k, x.rows(), "kmeans");
    auto result = best_of(restarts, [&](std::size_t run) {
        return lloyd(x, farthest_point_centers(x, k, derive_seed(seed, run)));
    });
    result.seed = seed;
    return result;
}

namespace {

Matrix leading_columns(const Matrix& x, std::size_t cols) {
    Matrix out(x.rows(), cols);
    for (std::size_t i = 0; i < x.rows(); ++i) std::copy_n(x.row(i).begin(), cols, out.row(i).begin());
    return out;
}

}  // namespace

ClusteringResult interactive_wavelet_kmeans_coefficients(const Matrix& coefficients, std::size_t k,
                                                         std::uint64_t seed, std::size_t levels,
                                                         std::size_t max_iterations) {
    check_k(k, coefficients.rows(), "interactive_wavelet_kmeans");
    const std::size_t width = coefficients.cols();
    if (width == 0 || (width & (width - 1)) != 0)
        throw DimensionError("interactive_wavelet_kmeans: coefficient count must be a power of two");
    std::size_t available = 1;
    while ((std::size_t{1} << (available - 1)) < width) ++available;
    const std::size_t depth = levels == 0 ? available : std::min(levels, available);

    ClusteringResult r;
    Matrix centers;
    std::vector<double> trace;
    std::size_t iterations = 0;
    for (std::size_t level = 0; level < depth; ++level) {
        const std::size_t cols = std::size_t{1} << level;
        const Matrix x = leading_columns(coefficients, cols);
        if (level == 0) {
            centers = farthest_point_centers(x, k, derive_seed(seed, 0));
        } else {
            Matrix extended(k, cols);
            for (std::size_t c = 0; c < k; ++c)
                std::copy(centers.row(c).begin(), centers.row(c).end(), extended.row(c).begin());
            centers = std::move(extended);
        }
        r = lloyd(x, std::move(centers), max_iterations);
        centers = r.centers;
        iterations += r.iterations;
        trace.insert(trace.end(), r.cost_trace.begin(), r.cost_trace.end());
    }
    r.iterations = iterations;
    r.cost_trace = std::move(trace);
    r.seed = seed;
    return r;
}

ClusteringResult interactive_wavelet_kmeans(const Matrix& series, std::size_t k, std::uint64_t seed,
                                            std::size_t levels, std::size_t max_iterations) {
    return interactive_wavelet_kmeans_coefficients(transforms::haar_dwt_rows(series), k, seed, levels, max_iterations);
}

std::vector<ElbowPoint> elbow_curve(const DistanceMatrix& d, std::size_t k_min, std::size_t k_max,
                                    std::uint64_t seed, std::size_t restarts) {
    if (k_min == 0 || k_min > k_max || k_max > d.size())
        throw ParameterError("elbow_curve: invalid k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                             "] for N = " + std::to_string(d.size()));
    std::vector<ElbowPoint> curve;
    ClusteringResult previous;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        auto best = kmedoids(d, k, derive_seed(seed, k), restarts);
        if (!previous.medoids.empty()) {
            std::vector<char> is_medoid(d.size(), 0);
            for (auto m : previous.medoids) is_medoid[m] = 1;
            std::size_t far = d.size();
            double far_dist = -1.0;
            for (std::size_t j = 0; j < d.size(); ++j) {
                if (is_medoid[j]) continue;
                const double dist = d(j, previous.medoids[previous.assignment[j]]);
                if (dist > far_dist) {
                    far_dist = dist;
                    far = j;
                }
            }
            auto warm = previous.medoids;
            warm.push_back(far);
            auto warm_result = pam_swap(d, std::move(warm));
            if (warm_result.cost < best.cost) best = std::move(warm_result);
        }
        curve.push_back({k, best.cost});
        previous = std::move(best);
    }
    return curve;
}

std::vector<ElbowPoint> elbow_curve_kmeans(const Matrix& x, std::size_t k_min, std::size_t k_max,
                                           std::uint64_t seed, std::size_t restarts) {
    if (k_min == 0 || k_min > k_max || k_max > x.rows())
        throw ParameterError("elbow_curve: invalid k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                             "] for N = " + std::to_string(x.rows()));
    std::vector<ElbowPoint> curve;
    ClusteringResult previous;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        auto best = kmeans(x, k, derive_seed(seed, k), restarts);
        if (previous.centers.rows() > 0) {
            std::vector<double> dist;
            nearest_centers(x, previous.centers, &dist);
            const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            Matrix warm(k, x.cols());
            for (std::size_t c = 0; c + 1 < k; ++c)
                std::copy(previous.centers.row(c).begin(), previous.centers.row(c).end(), warm.row(c).begin());
            std::copy(x.row(far).begin(), x.row(far).end(), warm.row(k - 1).begin());
            auto warm_result = lloyd(x, std::move(warm));
            if (warm_result.cost < best.cost) best = std::move(warm_result);
        }
        curve.push_back({k, best.cost});
        previous = std::move(best);
    }
    return curve;
}

std::size_t elbow_k(const std::vector<ElbowPoint>& curve) {
    if (curve.size() < 3) throw ParameterError("elbow_k: need at least three curve points");
    std::size_t best = 1;
    double best_value = -kInf;
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const double second = curve[i - 1].cost - 2.0 * curve[i].cost + curve[i + 1].cost;
        if (second > best_value) {
            best_value = second;
            best = i;
        }
    }
    return curve[best].k;
}

}  // namespace tsclust::clustering

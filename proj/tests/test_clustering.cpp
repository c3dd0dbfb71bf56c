#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "oracles.hpp"
#include "support.hpp"
#include "tsclust/clustering.hpp"
#include "tsclust/error.hpp"
#include "tsclust/transforms.hpp"

using namespace tsclust;
using namespace tsclust::clustering;
using distances::DistanceMatrix;
using oracles::brute_force_pair;
using oracles::medoid_cost;
using oracles::non_increasing;

namespace {

DistanceMatrix line_distances(const std::vector<double>& pts) {
    DistanceMatrix d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d.set(i, j, std::abs(pts[i] - pts[j]));
    return d;
}

DistanceMatrix random_distances(std::mt19937_64& rng, std::size_t n, std::size_t dim = 2) {
    return distances::distance_matrix(testing::random_matrix(rng, n, dim, -5.0, 5.0), distances::Metric{});
}

double sq(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

// Minimum within-cluster sum of squares over all 2-partitions.
double brute_force_two_means(const Matrix& x) {
    const std::size_t n = x.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
        double cost = 0.0;
        for (int side = 0; side < 2; ++side) {
            std::vector<double> mean(x.cols(), 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (((mask >> i) & 1U) == static_cast<std::size_t>(side)) {
                    for (std::size_t j = 0; j < x.cols(); ++j) mean[j] += x(i, j);
                    ++count;
                }
            for (auto& m : mean) m /= static_cast<double>(count);
            for (std::size_t i = 0; i < n; ++i)
                if (((mask >> i) & 1U) == static_cast<std::size_t>(side)) cost += sq(x.row(i), mean);
        }
        best = std::min(best, cost);
    }
    return best;
}

void check_result(const DistanceMatrix& d, const ClusteringResult& r) {
    const std::size_t k = r.medoids.size();
    for (auto a : r.assignment) CHECK(a < k);
    for (std::size_t c = 0; c < k; ++c) CHECK(r.assignment[r.medoids[c]] == c);
    double cost = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) cost += d(j, r.medoids[r.assignment[j]]);
    CHECK(std::abs(cost - r.cost) < 1e-9);
    CHECK(std::abs(medoid_cost(d, r.medoids) - r.cost) < 1e-9);
}

}  // namespace

TEST_CASE("derive_seed separates streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 100; ++s) seen.insert(derive_seed(7, s));
    CHECK(seen.size() == 100);
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
    CHECK(derive_seed(7, 3) != derive_seed(8, 3));
}

TEST_CASE("kmedoids examples") {
    std::mt19937_64 rng(1);
    const auto d = random_distances(rng, 9);
    const auto all = kmedoids(d, 9, 0);
    CHECK(all.cost == 0.0);
    std::vector<std::size_t> medoids = all.medoids;
    std::sort(medoids.begin(), medoids.end());
    for (std::size_t i = 0; i < 9; ++i) CHECK(medoids[i] == i);

    const auto pairs = line_distances({0.0, 0.1, 10.0, 10.1});
    const auto r = kmedoids(pairs, 2, 3);
    CHECK(r.cost == doctest::Approx(brute_force_pair(pairs)));
    CHECK(r.cost == doctest::Approx(0.2));
    CHECK(r.assignment[0] == r.assignment[1]);
    CHECK(r.assignment[2] == r.assignment[3]);
    CHECK(r.assignment[0] != r.assignment[2]);

    CHECK_THROWS_AS(kmedoids(d, 0, 0), ParameterError);
    CHECK_THROWS_AS(kmedoids(d, 10, 0), ParameterError);
    CHECK_THROWS_AS(pam_swap(d, {1, 1}), ParameterError);
    CHECK_THROWS_AS(pam_swap(d, {1, 42}), ParameterError);
}

TEST_CASE("pam from every start reaches the brute-force optimum") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> size(3, 8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto d = random_distances(rng, size(rng), 1 + trial % 3);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < d.size(); ++a)
            for (std::size_t b = 0; b < d.size(); ++b) {
                if (a == b) continue;
                const auto r = pam_swap(d, {a, b});
                CHECK(non_increasing(r.cost_trace));
                check_result(d, r);
                best = std::min(best, r.cost);
            }
        CHECK(std::abs(best - brute_force_pair(d)) < 1e-12);
    }
}

TEST_CASE("pam build and swap on larger instances") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = random_distances(rng, 40);
        const std::size_t k = 2 + trial % 5;
        const auto build = pam_build(d, k);
        CHECK(std::set<std::size_t>(build.begin(), build.end()).size() == k);
        const auto r = pam_swap(d, build);
        CHECK(r.cost_trace.front() == doctest::Approx(medoid_cost(d, build)));
        CHECK(non_increasing(r.cost_trace));
        check_result(d, r);
        const auto best = kmedoids(d, k, 17, 6);
        CHECK(best.cost <= r.cost + 1e-12);
        check_result(d, best);
        const auto again = kmedoids(d, k, 17, 6);
        CHECK(again.assignment == best.assignment);
        CHECK(again.medoids == best.medoids);
        CHECK(again.cost == best.cost);
    }
}

TEST_CASE("assign_to_medoids breaks ties toward the first medoid") {
    const auto d = line_distances({0.0, 1.0, 2.0});
    const auto r = assign_to_medoids(d, {2, 0});
    CHECK(r.assignment == std::vector<std::size_t>{1, 0, 0});
    CHECK(r.cost == 1.0);
}

TEST_CASE("kmeans examples") {
    std::mt19937_64 rng(4);
    const auto x = testing::random_matrix(rng, 12, 3);
    const auto one = kmeans(x, 1, 5);
    double total = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 12; ++i) mean += x(i, j);
        mean /= 12.0;
        CHECK(one.centers(0, j) == doctest::Approx(mean).epsilon(1e-12));
        for (std::size_t i = 0; i < 12; ++i) total += (x(i, j) - mean) * (x(i, j) - mean);
    }
    CHECK(one.cost == doctest::Approx(total).epsilon(1e-12));

    CHECK_THROWS_AS(kmeans(x, 0, 0), ParameterError);
    CHECK_THROWS_AS(kmeans(x, 13, 0), ParameterError);
    CHECK_THROWS_AS(lloyd(x, Matrix(2, 2)), DimensionError);
}

TEST_CASE("kmeans on two blobs matches partition enumeration") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::uniform_int_distribution<std::size_t> size(4, 10);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = size(rng);
        Matrix x(n, 1);
        for (std::size_t i = 0; i < n; ++i) x(i, 0) = (i % 2 == 0 ? 0.0 : 5.0) + noise(rng);
        const auto r = kmeans(x, 2, static_cast<std::uint64_t>(trial));
        CHECK(r.cost == doctest::Approx(brute_force_two_means(x)).epsilon(1e-10));
        CHECK(non_increasing(r.cost_trace));
    }
}

TEST_CASE("lloyd invariants") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = testing::random_matrix(rng, 50, 4);
        const std::size_t k = 2 + trial % 6;
        const auto r = kmeans(x, k, 9, 3);
        CHECK(non_increasing(r.cost_trace));
        double cost = 0.0;
        for (std::size_t i = 0; i < 50; ++i) {
            CHECK(r.assignment[i] < k);
            const double own = sq(x.row(i), r.centers.row(r.assignment[i]));
            cost += own;
            for (std::size_t c = 0; c < k; ++c) {
                const double other = sq(x.row(i), r.centers.row(c));
                CHECK(own <= other);
                if (c < r.assignment[i]) CHECK(own < other);
            }
        }
        CHECK(std::abs(cost - r.cost) < 1e-9);
        const auto again = kmeans(x, k, 9, 3);
        CHECK(again.assignment == r.assignment);
        CHECK(again.centers == r.centers);
    }
}

TEST_CASE("kmeans re-seeds empty clusters") {
    Matrix x(4, 1, {0.0, 0.0, 0.0, 10.0});
    Matrix centers(3, 1, {0.0, 100.0, 200.0});
    const auto r = lloyd(x, centers);
    std::set<std::size_t> used(r.assignment.begin(), r.assignment.end());
    CHECK(used.size() == 2);
    CHECK(r.cost == 0.0);
}

TEST_CASE("interactive wavelet kmeans") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> level(-3.0, 3.0);
    Matrix constant(15, 8);
    for (std::size_t i = 0; i < 15; ++i) {
        const double c = level(rng);
        for (std::size_t t = 0; t < 8; ++t) constant(i, t) = c;
    }
    const auto coeffs = transforms::haar_dwt_rows(constant);
    const auto iw = interactive_wavelet_kmeans(constant, 3, 11);
    Matrix approx(15, 1);
    for (std::size_t i = 0; i < 15; ++i) approx(i, 0) = coeffs(i, 0);
    const auto plain = kmeans(approx, 3, 11, 1);
    CHECK(iw.assignment == plain.assignment);

    const auto x = testing::random_matrix(rng, 20, 8);
    const auto shallow = interactive_wavelet_kmeans(x, 3, 5, 1);
    const auto full = transforms::haar_dwt_rows(x);
    Matrix first(20, 1);
    for (std::size_t i = 0; i < 20; ++i) first(i, 0) = full(i, 0);
    const auto flat = kmeans(first, 3, 5, 1);
    CHECK(shallow.assignment == flat.assignment);
    CHECK(shallow.cost == flat.cost);

    const auto deep = interactive_wavelet_kmeans(x, 3, 5);
    CHECK(deep.centers.cols() == 8);
    CHECK(interactive_wavelet_kmeans(x, 3, 5).assignment == deep.assignment);
    CHECK_THROWS_AS(interactive_wavelet_kmeans_coefficients(Matrix(5, 6), 2, 0), DimensionError);
}

TEST_CASE("interactive wavelet kmeans is usually no worse than plain kmeans") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, 2);
    int wins = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        Matrix shapes = testing::random_matrix(rng, 3, 32, -2.0, 2.0);
        Matrix x(80, 32);
        for (std::size_t i = 0; i < 80; ++i) {
            const int c = cls(rng);
            for (std::size_t t = 0; t < 32; ++t) x(i, t) = shapes(static_cast<std::size_t>(c), t) + noise(rng);
        }
        const auto seed = static_cast<std::uint64_t>(trial);
        const auto iw = interactive_wavelet_kmeans(x, 3, seed);
        const auto plain = kmeans(transforms::haar_dwt_rows(x), 3, seed, 1);
        if (iw.cost <= plain.cost + 1e-9) ++wins;
    }
    MESSAGE("interactive no worse in " << wins << "/" << trials);
    CHECK(wins >= trials * 9 / 10);
}

TEST_CASE("elbow curves") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = testing::random_matrix(rng, 14, 2);
        const auto d = distances::distance_matrix(x, distances::Metric{});
        const auto curve = elbow_curve(d, 1, 14, static_cast<std::uint64_t>(trial), 3);
        CHECK(curve.size() == 14);
        CHECK(curve.back().cost == 0.0);
        for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].cost <= curve[i - 1].cost);
        const auto km = elbow_curve_kmeans(x, 1, 14, static_cast<std::uint64_t>(trial), 3);
        CHECK(km.back().cost == doctest::Approx(0.0));
        for (std::size_t i = 1; i < km.size(); ++i) CHECK(km[i].cost <= km[i - 1].cost);
    }

    Matrix blobs(30, 2);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (std::size_t i = 0; i < 30; ++i) {
        blobs(i, 0) = static_cast<double>(i % 3) * 10.0 + noise(rng);
        blobs(i, 1) = static_cast<double>(i % 3 == 1) * 10.0 + noise(rng);
    }
    const auto d = distances::distance_matrix(blobs, distances::Metric{});
    CHECK(elbow_k(elbow_curve(d, 1, 8, 0)) == 3);
    CHECK(elbow_k(elbow_curve_kmeans(blobs, 1, 8, 0)) == 3);

    CHECK_THROWS_AS(elbow_curve(d, 0, 3, 0), ParameterError);
    CHECK_THROWS_AS(elbow_curve(d, 4, 3, 0), ParameterError);
    CHECK_THROWS_AS(elbow_curve(d, 1, 31, 0), ParameterError);
    CHECK_THROWS_AS(elbow_k({{1, 3.0}, {2, 1.0}}), ParameterError);
    CHECK(elbow_k({{1, 10.0}, {2, 5.0}, {3, 1.0}, {4, 0.8}, {5, 0.7}}) == 3);
}

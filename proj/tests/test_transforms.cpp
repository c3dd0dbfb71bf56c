#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "tsclust/error.hpp"
#include "tsclust/transforms.hpp"

using namespace tsclust;
using namespace tsclust::transforms;
using oracles::svd_oracle;
using oracles::to_eigen;

namespace {

double energy(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

TEST_CASE("mean_normalize") {
    const auto a = mean_normalize(std::vector<double>{2.0, 4.0});
    CHECK(a[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    for (double v : mean_normalize(std::vector<double>(7, -3.5))) CHECK(v == 1.0);
    CHECK_THROWS_AS(mean_normalize(std::vector<double>{1.0, -1.0}), ParameterError);
    CHECK_THROWS_AS(mean_normalize(std::vector<double>{}), ParameterError);

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = testing::random_vector(rng, 1 + trial * 7, 0.1, 50.0);
        const auto y = mean_normalize(x);
        CHECK(y.size() == x.size());
        CHECK(std::abs(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size()) - 1.0) < 1e-12);
    }

    Matrix rows(2, 2, {1.0, 3.0, 0.0, 0.0});
    CHECK_THROWS_WITH_AS(mean_normalize_rows(rows), doctest::Contains("row 1"), ParameterError);
}

TEST_CASE("aggregate_daily") {
    CHECK(aggregate_daily(std::vector<double>(96, 1.0)) == std::vector<double>{48.0, 48.0});
    std::vector<double> day(48);
    std::iota(day.begin(), day.end(), 1.0);
    CHECK(aggregate_daily(day) == std::vector<double>{1176.0});
    CHECK(aggregate_daily(std::vector<double>(384 * 48, 0.5)).size() == 384);
    CHECK_THROWS_AS(aggregate_daily(std::vector<double>(95, 1.0)), DimensionError);
    CHECK_THROWS_AS(aggregate_daily(std::vector<double>(4, 1.0), 0), ParameterError);

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> q(0, 1 << 20);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s(48 * 30);
        for (auto& v : s) v = q(rng) / 1024.0;
        const auto d = aggregate_daily(s);
        CHECK(std::accumulate(d.begin(), d.end(), 0.0) == std::accumulate(s.begin(), s.end(), 0.0));
    }
}

TEST_CASE("symmetric_eigen against Eigen's solver") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 7;
        auto a = testing::random_matrix(rng, n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
        const auto mine = symmetric_eigen(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
        for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(mine.values[j] - es.eigenvalues()(n - 1 - j)) < 1e-10);
        for (std::size_t j = 0; j + 1 < n; ++j) CHECK(mine.values[j] >= mine.values[j + 1]);
    }
    CHECK_THROWS_AS(symmetric_eigen(Matrix(2, 3)), DimensionError);
}

TEST_CASE("pca of rank-one data") {
    Matrix x(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        const double t = static_cast<double>(i) - 2.0;
        x(i, 0) = 1.0 + 2.0 * t;
        x(i, 1) = -1.0 * t;
        x(i, 2) = 3.0 + 0.5 * t;
    }
    const auto model = pca_fit(x, 3);
    double total = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        double m = 0.0, s = 0.0;
        for (std::size_t i = 0; i < 6; ++i) m += x(i, j);
        m /= 6.0;
        for (std::size_t i = 0; i < 6; ++i) s += (x(i, j) - m) * (x(i, j) - m);
        total += s / 5.0;
    }
    CHECK(model.explained_variance[0] == doctest::Approx(total).epsilon(1e-12));
    CHECK(std::abs(model.explained_variance[1]) < 1e-12);
    CHECK(std::abs(model.explained_variance[2]) < 1e-12);

    const auto proj = pca_transform(model, x);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(proj(i, 1)) < 1e-10);
    const auto at_mean = pca_transform(model, Matrix(1, 3, model.mean));
    for (double v : at_mean.values()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("pca matches an SVD oracle on random 10x6 matrices") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 25; ++trial) {
        const auto x = testing::random_matrix(rng, 10, 6, -2.0, 2.0);
        const auto oracle = svd_oracle(x);
        const auto model = pca_fit(x, 6);

        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(model.mean[j] - oracle.mean(j)) < 1e-12);
        for (std::size_t c = 0; c < 6; ++c) {
            CHECK(std::abs(model.explained_variance[c] - oracle.variance(c)) < 1e-8);
            double dot = 0.0;
            for (std::size_t j = 0; j < 6; ++j) dot += model.components(c, j) * oracle.V(j, c);
            const double sign = dot < 0.0 ? -1.0 : 1.0;
            double worst = 0.0;
            for (std::size_t j = 0; j < 6; ++j)
                worst = std::max(worst, std::abs(sign * model.components(c, j) - oracle.V(j, c)));
            CHECK(worst < 1e-8);
        }
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = 0; b < 6; ++b) {
                double dot = 0.0;
                for (std::size_t j = 0; j < 6; ++j) dot += model.components(a, j) * model.components(b, j);
                CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-9);
            }
        for (std::size_t c = 0; c + 1 < 6; ++c) CHECK(model.explained_variance[c] >= model.explained_variance[c + 1]);
    }
}

TEST_CASE("truncated pca reconstruction is as good as truncated SVD") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = testing::random_matrix(rng, 10, 6);
        const std::size_t r = 1 + trial % 4;
        const auto model = pca_fit(x, r);
        const auto back = pca_reconstruct(model, pca_transform(model, x));
        double err = 0.0;
        for (std::size_t i = 0; i < x.values().size(); ++i)
            err += (x.values()[i] - back.values()[i]) * (x.values()[i] - back.values()[i]);

        const auto oracle = svd_oracle(x);
        double oracle_err = 0.0;
        for (Eigen::Index c = static_cast<Eigen::Index>(r); c < oracle.variance.size(); ++c)
            oracle_err += oracle.variance(c) * 9.0;
        CHECK(err <= oracle_err + 1e-9);

        double captured = 0.0, top = 0.0;
        for (std::size_t c = 0; c < r; ++c) {
            captured += model.explained_variance[c];
            top += oracle.variance(static_cast<Eigen::Index>(c));
        }
        CHECK(std::abs(captured - top) < 1e-8);
    }
}

TEST_CASE("pca argument checks") {
    CHECK_THROWS_AS(pca_fit(Matrix(1, 4), 1), ParameterError);
    CHECK_THROWS_AS(pca_fit(Matrix(5, 4), 5), ParameterError);
    CHECK_THROWS_AS(pca_fit(Matrix(5, 4), 0), ParameterError);
    const auto model = pca_fit(Matrix(5, 4, {1, 2, 3, 4, 2, 3, 4, 1, 3, 1, 2, 2, 0, 1, 0, 3, 5, 5, 1, 1}), 2);
    CHECK_THROWS_AS(pca_transform(model, Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(pca_reconstruct(model, Matrix(2, 3)), DimensionError);
}

TEST_CASE("haar examples") {
    const auto c = haar_dwt(std::vector<double>{3.0, 3.0});
    CHECK(c.coefficients[0] == doctest::Approx(3.0 * std::sqrt(2.0)));
    CHECK(c.coefficients[1] == 0.0);
    const auto d = haar_dwt(std::vector<double>{1.0, -1.0});
    CHECK(d.coefficients[0] == 0.0);
    CHECK(d.coefficients[1] == doctest::Approx(std::sqrt(2.0)));

    WaveletCoefficients z{std::vector<double>(8, 0.0), 6, 8};
    for (double v : haar_idwt(z)) CHECK(v == 0.0);
    CHECK(haar_idwt(z).size() == 6);

    WaveletCoefficients a{{5.0, 0.0, 0.0, 0.0}, 4, 4};
    for (double v : haar_idwt(a)) CHECK(v == doctest::Approx(2.5));

    const auto p = haar_dwt(std::vector<double>(384, 1.0));
    CHECK(p.padded_length == 512);
    CHECK(p.original_length == 384);
    CHECK(p.coefficients.size() == 512);
    CHECK(p.levels() == 10);
    CHECK(haar_dwt(std::vector<double>{7.0}).padded_length == 1);

    WaveletCoefficients bad{std::vector<double>(6, 0.0), 6, 6};
    CHECK_THROWS_AS(haar_idwt(bad), DimensionError);
    CHECK_THROWS_AS(haar_dwt(std::vector<double>{}), ParameterError);
}

TEST_CASE("haar preserves energy and round trips") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = testing::random_vector(rng, 1 + trial * 5, -10.0, 10.0);
        const auto c = haar_dwt(x);
        CHECK(c.padded_length >= x.size());
        CHECK((c.padded_length & (c.padded_length - 1)) == 0);
        CHECK(c.coefficients.size() == c.padded_length);
        CHECK(std::abs(energy(c.coefficients) - energy(x)) < 1e-10 * std::max(1.0, energy(x)));
        CHECK(testing::max_abs_diff(haar_idwt(c), x) < 1e-10);
    }
}

TEST_CASE("haar_dwt_rows") {
    std::mt19937_64 rng(7);
    const auto m = testing::random_matrix(rng, 3, 5);
    const auto rows = haar_dwt_rows(m);
    CHECK(rows.rows() == 3);
    CHECK(rows.cols() == 8);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto c = haar_dwt(m.row(i));
        CHECK(std::vector<double>(rows.row(i).begin(), rows.row(i).end()) == c.coefficients);
    }
}

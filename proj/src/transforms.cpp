#include "tsclust/transforms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Core>

#include "tsclust/error.hpp"

namespace tsclust::transforms {

std::vector<double> mean_normalize(std::span<const double> series) {
    if (series.empty()) throw ParameterError("mean_normalize: empty series");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
    if (mean == 0.0 || !std::isfinite(mean))
        throw ParameterError("mean_normalize: series mean is " + std::to_string(mean) + ", cannot normalize");
    std::vector<double> out(series.size());
    std::transform(series.begin(), series.end(), out.begin(), [mean](double v) { return v / mean; });
    return out;
}

Matrix mean_normalize_rows(const Matrix& series) {
    Matrix out(series.rows(), series.cols());
    for (std::size_t i = 0; i < series.rows(); ++i) {
        std::vector<double> row;
        try {
            row = mean_normalize(series.row(i));
        } catch (const ParameterError& e) {
            throw ParameterError("row " + std::to_string(i) + ": " + e.what());
        }
        std::copy(row.begin(), row.end(), out.row(i).begin());
    }
    return out;
}

std::vector<double> aggregate_daily(std::span<const double> samples, std::size_t samples_per_day) {
    if (samples_per_day == 0) throw ParameterError("aggregate_daily: samples_per_day must be >= 1");
    if (samples.size() % samples_per_day != 0) {
        throw DimensionError("aggregate_daily: " + std::to_string(samples.size()) +
                             " samples is not a whole number of days of " + std::to_string(samples_per_day));
    }
    std::vector<double> days(samples.size() / samples_per_day, 0.0);
    for (std::size_t d = 0; d < days.size(); ++d)
        for (std::size_t s = 0; s < samples_per_day; ++s) days[d] += samples[d * samples_per_day + s];
    return days;
}

SymmetricEigen symmetric_eigen(const Matrix& symmetric, double tolerance, std::size_t max_sweeps) {
    const std::size_t n = symmetric.rows();
    if (symmetric.cols() != n) throw DimensionError("symmetric_eigen: matrix is not square");
    Matrix a = symmetric;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double scale = 0.0;
    for (double x : a.values()) scale += x * x;
    const double threshold = tolerance * tolerance * std::max(scale, 1e-300);

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= threshold) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    SymmetricEigen result;
    result.values.resize(n);
    result.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        result.values[j] = a(order[j], order[j]);
        for (std::size_t k = 0; k < n; ++k) result.vectors(k, j) = v(k, order[j]);
    }
    return result;
}

PCAModel pca_fit(const Matrix& X, std::size_t n_components) {
    const std::size_t n = X.rows();
    const std::size_t dim = X.cols();
    if (n < 2) throw ParameterError("pca_fit: need at least 2 rows");
    if (n_components == 0 || n_components > std::min(n, dim)) {
        throw ParameterError("pca_fit: n_components " + std::to_string(n_components) + " not in [1, " +
                             std::to_string(std::min(n, dim)) + "]");
    }
    PCAModel model;
    model.mean.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) model.mean[j] += X(i, j);
    for (auto& m : model.mean) m /= static_cast<double>(n);

    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMatrix centered(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) centered(i, j) = X(i, j) - model.mean[j];
    Matrix cov(dim, dim);
    Eigen::Map<RowMatrix>(cov.values().data(), dim, dim).noalias() =
        (centered.transpose() * centered) / static_cast<double>(n - 1);

    const auto eig = symmetric_eigen(cov);
    model.components = Matrix(n_components, dim);
    model.explained_variance.resize(n_components);
    for (std::size_t c = 0; c < n_components; ++c) {
        model.explained_variance[c] = std::max(eig.values[c], 0.0);
        // Sign convention: the largest-magnitude entry is positive.
        std::size_t pivot = 0;
        for (std::size_t j = 1; j < dim; ++j)
            if (std::abs(eig.vectors(j, c)) > std::abs(eig.vectors(pivot, c))) pivot = j;
        const double sign = eig.vectors(pivot, c) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < dim; ++j) model.components(c, j) = sign * eig.vectors(j, c);
    }
    return model;
}

Matrix pca_transform(const PCAModel& model, const Matrix& X) {
    if (X.cols() != model.mean.size())
        throw DimensionError("pca_transform: " + std::to_string(X.cols()) + " columns, model has " +
                             std::to_string(model.mean.size()));
    Matrix out(X.rows(), model.n_components());
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t c = 0; c < model.n_components(); ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < X.cols(); ++j) acc += (X(i, j) - model.mean[j]) * model.components(c, j);
            out(i, c) = acc;
        }
    return out;
}

Matrix pca_reconstruct(const PCAModel& model, const Matrix& projection) {
    if (projection.cols() != model.n_components()) throw DimensionError("pca_reconstruct: component count mismatch");
    Matrix out(projection.rows(), model.mean.size());
    for (std::size_t i = 0; i < projection.rows(); ++i)
        for (std::size_t j = 0; j < model.mean.size(); ++j) {
            double acc = model.mean[j];
            for (std::size_t c = 0; c < model.n_components(); ++c) acc += projection(i, c) * model.components(c, j);
            out(i, j) = acc;
        }
    return out;
}

std::size_t WaveletCoefficients::levels() const {
    return padded_length == 0 ? 0 : static_cast<std::size_t>(std::countr_zero(padded_length)) + 1;
}

WaveletCoefficients haar_dwt(std::span<const double> series) {
    if (series.empty()) throw ParameterError("haar_dwt: empty series");
    WaveletCoefficients w;
    w.original_length = series.size();
    w.padded_length = std::bit_ceil(series.size());
    std::vector<double> work(w.padded_length, 0.0);
    std::copy(series.begin(), series.end(), work.begin());
    std::vector<double> tmp(w.padded_length);
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t len = w.padded_length; len > 1; len /= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            tmp[i] = (work[2 * i] + work[2 * i + 1]) * r;
            tmp[half + i] = (work[2 * i] - work[2 * i + 1]) * r;
        }
        std::copy_n(tmp.begin(), len, work.begin());
    }
    w.coefficients = std::move(work);
    return w;
}

std::vector<double> haar_idwt(const WaveletCoefficients& coeffs) {
    const std::size_t n = coeffs.padded_length;
    if (n == 0 || !std::has_single_bit(n) || coeffs.coefficients.size() != n || coeffs.original_length > n ||
        coeffs.original_length == 0) {
        throw DimensionError("haar_idwt: malformed coefficients (padded " + std::to_string(n) + ", count " +
                             std::to_string(coeffs.coefficients.size()) + ", original " +
                             std::to_string(coeffs.original_length) + ")");
    }
    std::vector<double> work = coeffs.coefficients;
    std::vector<double> tmp(n);
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t len = 2; len <= n; len *= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            tmp[2 * i] = (work[i] + work[half + i]) * r;
            tmp[2 * i + 1] = (work[i] - work[half + i]) * r;
        }
        std::copy_n(tmp.begin(), len, work.begin());
    }
    work.resize(coeffs.original_length);
    return work;
}

Matrix haar_dwt_rows(const Matrix& series) {
    if (series.rows() == 0) return {};
    const std::size_t padded = std::bit_ceil(series.cols());
    Matrix out(series.rows(), padded);
    for (std::size_t i = 0; i < series.rows(); ++i) {
        const auto w = haar_dwt(series.row(i));
        std::copy(w.coefficients.begin(), w.coefficients.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace tsclust::transforms

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsclust/types.hpp"

namespace tsclust::transforms {

/// Divides a series by its mean. Throws ParameterError when the mean is 0.
std::vector<double> mean_normalize(std::span<const double> series);

/// Row-wise mean_normalize.
Matrix mean_normalize_rows(const Matrix& series);

/// Sums each consecutive block of `samples_per_day` values. The length must be
/// a multiple of `samples_per_day`.
std::vector<double> aggregate_daily(std::span<const double> samples, std::size_t samples_per_day = 48);

struct PCAModel {
    std::vector<double> mean;                 // length T
    Matrix components;                        // n_components x T, orthonormal rows
    std::vector<double> explained_variance;   // non-increasing

    std::size_t n_components() const noexcept { return components.rows(); }
};

/// Top eigenvectors of the sample covariance (divisor N - 1) of the rows of X.
PCAModel pca_fit(const Matrix& X, std::size_t n_components = 20);
/// (X - mean) * components^T
Matrix pca_transform(const PCAModel& model, const Matrix& X);
/// mean + projection * components
Matrix pca_reconstruct(const PCAModel& model, const Matrix& projection);

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi rotations on a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& symmetric, double tolerance = 1e-15, std::size_t max_sweeps = 64);

/// Orthonormal Haar coefficients laid out as [approximation, coarsest detail,
/// next 2 details, next 4, ..., finest padded/2 details].
struct WaveletCoefficients {
    std::vector<double> coefficients;
    std::size_t original_length = 0;
    std::size_t padded_length = 0;

    /// Number of resolution levels, log2(padded_length) + 1. Level j spans the
    /// first 2^j coefficients.
    std::size_t levels() const;
};

/// Zero-pads to the next power of two and decomposes fully.
WaveletCoefficients haar_dwt(std::span<const double> series);
/// Inverse transform, truncated to the original length.
std::vector<double> haar_idwt(const WaveletCoefficients& coeffs);

/// Row-wise haar_dwt coefficients, padded_length columns.
Matrix haar_dwt_rows(const Matrix& series);

}  // namespace tsclust::transforms

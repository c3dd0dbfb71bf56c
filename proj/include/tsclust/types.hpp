#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsclust {

/// Row-major real matrix; rows are series or feature vectors.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// N series of common length T with optional class labels.
struct TimeSeriesDataset {
    std::vector<std::string> ids;
    Matrix series;                         // N x T
    std::vector<int> labels;               // empty when unlabeled
    std::vector<std::string> class_names;  // label value -> name

    std::size_t size() const noexcept { return series.rows(); }
    std::size_t length() const noexcept { return series.cols(); }
    bool labeled() const noexcept { return !labels.empty(); }

    /// Throws if ids/labels disagree with the series count.
    void validate() const;
};

}  // namespace tsclust

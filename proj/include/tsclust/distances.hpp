#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsclust/types.hpp"

namespace tsclust::distances {

double euclidean(std::span<const double> x, std::span<const double> y);

/// Dynamic time warping with squared local cost (x_i - y_j)^2 and steps
/// {(1,0), (0,1), (1,1)}. The optional Sakoe-Chiba band restricts |i - j| to
/// `window`, which must be at least |len(x) - len(y)|. Returns the optimal
/// cumulative cost (no square root).
double dtw(std::span<const double> x, std::span<const double> y, std::optional<std::size_t> window = std::nullopt);

enum class MetricKind : std::uint32_t { euclidean = 0, dtw = 1 };

struct Metric {
    MetricKind kind = MetricKind::euclidean;
    std::optional<std::size_t> window;  // dtw only

    double operator()(std::span<const double> x, std::span<const double> y) const;
    std::string name() const;
    static Metric parse(const std::string& name, std::optional<std::size_t> window = std::nullopt);
};

/// Symmetric N x N matrix with zero diagonal, stored as the strict upper
/// triangle in row-major order.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), upper_(n * (n > 0 ? n - 1 : 0) / 2, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        return i < j ? upper_[index(i, j)] : upper_[index(j, i)];
    }
    void set(std::size_t i, std::size_t j, double d) { upper_[i < j ? index(i, j) : index(j, i)] = d; }

    const std::vector<double>& condensed() const noexcept { return upper_; }
    std::vector<double>& condensed() noexcept { return upper_; }

    /// Throws unless every entry is finite and nonnegative.
    void validate() const;

    bool operator==(const DistanceMatrix&) const = default;

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_ - i * (i + 1) / 2 + (j - i - 1); }

    std::size_t n_ = 0;
    std::vector<double> upper_;
};

/// All pairwise distances between rows; rows are processed in parallel.
DistanceMatrix distance_matrix(const Matrix& rows, const Metric& metric);

namespace reference {
/// Serial double loop over pairs.
DistanceMatrix distance_matrix(const Matrix& rows, const Metric& metric);
}  // namespace reference

// Cache file layout (little-endian):
//   8 bytes  magic "TSDMAT01"
//   u64      N
//   u32      metric tag (0 euclidean, 1 dtw)
//   i64      dtw window, -1 when unbanded
//   32 bytes SHA-256 of the input rows (row-major binary64), guards stale caches
//   doubles  strict upper triangle, row-major
void save_distance_matrix(const std::filesystem::path& path, const DistanceMatrix& d, const Metric& metric,
                          const Matrix& source);

/// Returns the cached matrix when the file exists and matches the metric and
/// source rows; std::nullopt otherwise.
std::optional<DistanceMatrix> load_distance_matrix(const std::filesystem::path& path, const Metric& metric,
                                                   const Matrix& source);

/// Cached-or-computed distance matrix; writes the cache on a miss.
DistanceMatrix cached_distance_matrix(const std::filesystem::path& path, const Matrix& rows, const Metric& metric,
                                      bool* cache_hit = nullptr);

}  // namespace tsclust::distances

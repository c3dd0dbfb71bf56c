#include "tsclust/distances.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "tsclust/error.hpp"
#include "tsclust/hash.hpp"

namespace tsclust::distances {

double euclidean(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw DimensionError("euclidean: lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(acc);
}

double dtw(std::span<const double> x, std::span<const double> y, std::optional<std::size_t> window) {
    if (x.empty() || y.empty()) throw ParameterError("dtw: empty series");
    const std::size_t n = x.size();
    const std::size_t m = y.size();
    const std::size_t gap = n > m ? n - m : m - n;
    if (window && *window < gap)
        throw ParameterError("dtw: window " + std::to_string(*window) + " cannot align lengths " + std::to_string(n) +
                             " and " + std::to_string(m));
    const std::size_t w = window ? *window : std::max(n, m);
    constexpr double inf = std::numeric_limits<double>::infinity();

    // prev/cur hold D[i-1][*] and D[i][*], with column 0 the boundary.
    std::vector<double> prev(m + 1, inf);
    std::vector<double> cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        const std::size_t lo = i > w ? i - w : 1;
        const std::size_t hi = std::min(m, i + w);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double d = x[i - 1] - y[j - 1];
            const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
            cur[j] = d * d + best;
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double Metric::operator()(std::span<const double> x, std::span<const double> y) const {
    return kind == MetricKind::dtw ? dtw(x, y, window) : euclidean(x, y);
}

std::string Metric::name() const {
    if (kind == MetricKind::euclidean) return "euclidean";
    return window ? "dtw(window=" + std::to_string(*window) + ")" : "dtw";
}

Metric Metric::parse(const std::string& name, std::optional<std::size_t> window) {
    if (name == "euclidean") return {MetricKind::euclidean, std::nullopt};
    if (name == "dtw") return {MetricKind::dtw, window};
    throw ParameterError("unknown metric '" + name + "'");
}

void DistanceMatrix::validate() const {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double d = upper_[index(i, j)];
            if (!std::isfinite(d) || d < 0.0)
                throw DimensionError("distance (" + std::to_string(i) + ", " + std::to_string(j) + ") = " +
                                     std::to_string(d) + " is not a finite nonnegative value");
        }
}

namespace {

double checked_distance(const Metric& metric, const Matrix& rows, std::size_t i, std::size_t j) {
    double v = 0.0;
    try {
        v = metric(rows.row(i), rows.row(j));
    } catch (const std::exception& e) {
        throw ParameterError("distance (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
    }
    if (!std::isfinite(v))
        throw ParameterError("distance (" + std::to_string(i) + ", " + std::to_string(j) + ") is not finite");
    return v;
}

}  // namespace

DistanceMatrix distance_matrix(const Matrix& rows, const Metric& metric) {
    const std::size_t n = rows.rows();
    DistanceMatrix d(n);
    if (n < 2) return d;
    std::string failure;
    // Row i writes only entries (i, j > i); dynamic scheduling balances the triangle.
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n - 1); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i + 1; j < n; ++j) {
            try {
                d.set(i, j, checked_distance(metric, rows, i, j));
            } catch (const std::exception& e) {
#pragma omp critical(tsclust_distance_failure)
                if (failure.empty()) failure = e.what();
            }
        }
    }
    if (!failure.empty()) throw ParameterError(failure);
    return d;
}

namespace reference {

DistanceMatrix distance_matrix(const Matrix& rows, const Metric& metric) {
    const std::size_t n = rows.rows();
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, checked_distance(metric, rows, i, j));
    return d;
}

}  // namespace reference

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'S', 'D', 'M', 'A', 'T', '0', '1'};

template <class U>
void write_le(std::ostream& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.put(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <class U>
bool read_le(std::istream& in, U& value) {
    value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) return false;
        value |= static_cast<U>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return true;
}

std::int64_t window_tag(const Metric& metric) {
    return metric.kind == MetricKind::dtw && metric.window ? static_cast<std::int64_t>(*metric.window) : -1;
}

}  // namespace

void save_distance_matrix(const std::filesystem::path& path, const DistanceMatrix& d, const Metric& metric,
                          const Matrix& source) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic.data(), kMagic.size());
    write_le<std::uint64_t>(out, d.size());
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(metric.kind));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(window_tag(metric)));
    const auto digest = sha256_of_doubles(source.values());
    out.write(reinterpret_cast<const char*>(digest.data()), digest.size());
    for (double v : d.condensed()) write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw IoError("write failed: " + path.string());
}

std::optional<DistanceMatrix> load_distance_matrix(const std::filesystem::path& path, const Metric& metric,
                                                   const Matrix& source) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) return std::nullopt;
    std::uint64_t n = 0;
    std::uint32_t tag = 0;
    std::uint64_t window = 0;
    if (!read_le(in, n) || !read_le(in, tag) || !read_le(in, window)) return std::nullopt;
    if (n != source.rows() || tag != static_cast<std::uint32_t>(metric.kind) ||
        static_cast<std::int64_t>(window) != window_tag(metric))
        return std::nullopt;
    Sha256 digest{};
    if (!in.read(reinterpret_cast<char*>(digest.data()), digest.size())) return std::nullopt;
    if (digest != sha256_of_doubles(source.values())) return std::nullopt;
    DistanceMatrix d(n);
    for (auto& v : d.condensed()) {
        std::uint64_t bits = 0;
        if (!read_le(in, bits)) return std::nullopt;
        v = std::bit_cast<double>(bits);
    }
    return d;
}

DistanceMatrix cached_distance_matrix(const std::filesystem::path& path, const Matrix& rows, const Metric& metric,
                                      bool* cache_hit) {
    if (auto cached = load_distance_matrix(path, metric, rows)) {
        if (cache_hit) *cache_hit = true;
        return std::move(*cached);
    }
    if (cache_hit) *cache_hit = false;
    auto d = distance_matrix(rows, metric);
    save_distance_matrix(path, d, metric, rows);
    return d;
}

}  // namespace tsclust::distances

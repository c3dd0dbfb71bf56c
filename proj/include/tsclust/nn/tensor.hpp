#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tsclust::nn {

/// Dense batch x channels x length array of doubles, row-major.
///
/// A single time series is a (1, 1, T) tensor; a dense-layer activation is
/// (batch, features, 1). Flatten and reshape only change the channel/length
/// split, never the storage order.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t batch, std::size_t channels, std::size_t length, double fill = 0.0);
    Tensor(std::size_t batch, std::size_t channels, std::size_t length, std::vector<double> values);

    std::size_t batch() const noexcept { return batch_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t length() const noexcept { return length_; }
    std::size_t features() const noexcept { return channels_ * length_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(std::size_t b, std::size_t c, std::size_t l) {
        return values_[(b * channels_ + c) * length_ + l];
    }
    const double& operator()(std::size_t b, std::size_t c, std::size_t l) const {
        return values_[(b * channels_ + c) * length_ + l];
    }

    std::span<double> sample(std::size_t b) { return {values_.data() + b * features(), features()}; }
    std::span<const double> sample(std::size_t b) const {
        return {values_.data() + b * features(), features()};
    }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }

    /// Reinterprets the per-sample layout; the element count must not change.
    void reshape(std::size_t channels, std::size_t length);

    bool same_shape(const Tensor& other) const noexcept {
        return batch_ == other.batch_ && channels_ == other.channels_ && length_ == other.length_;
    }

private:
    std::size_t batch_ = 0;
    std::size_t channels_ = 0;
    std::size_t length_ = 0;
    std::vector<double> values_;
};

}  // namespace tsclust::nn

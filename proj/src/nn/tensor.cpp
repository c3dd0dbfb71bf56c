#include "tsclust/nn/tensor.hpp"

#include <string>

#include "tsclust/error.hpp"

namespace tsclust::nn {

Tensor::Tensor(std::size_t batch, std::size_t channels, std::size_t length, double fill)
    : batch_(batch), channels_(channels), length_(length), values_(batch * channels * length, fill) {}

Tensor::Tensor(std::size_t batch, std::size_t channels, std::size_t length, std::vector<double> values)
    : batch_(batch), channels_(channels), length_(length), values_(std::move(values)) {
    if (values_.size() != batch * channels * length) {
        throw DimensionError("tensor: " + std::to_string(values_.size()) + " values for shape (" +
                             std::to_string(batch) + ", " + std::to_string(channels) + ", " +
                             std::to_string(length) + ")");
    }
}

void Tensor::reshape(std::size_t channels, std::size_t length) {
    if (channels * length != features()) {
        throw DimensionError("tensor reshape: " + std::to_string(features()) + " features into (" +
                             std::to_string(channels) + ", " + std::to_string(length) + ")");
    }
    channels_ = channels;
    length_ = length;
}

}  // namespace tsclust::nn

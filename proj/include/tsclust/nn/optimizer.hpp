#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tsclust/nn/layer.hpp"
#include "tsclust/nn/network.hpp"

namespace tsclust::nn {

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double l2 = 1e-4;  // weight of the squared-weight penalty in the loss
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    Gradients first_moment;   // adam only, lazily shaped on the first step
    Gradients second_moment;

    void validate() const;
};

/// One parameter update. Batchnorm running statistics are not touched.
void optimizer_step(OptimizerState& state, std::vector<LayerParams>& params, const Gradients& grads);

}  // namespace tsclust::nn

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "tsclust/nn/kernels.hpp"
#include "tsclust/nn/layer.hpp"
#include "tsclust/nn/tensor.hpp"

namespace tsclust::nn {

/// Activations recorded during a forward pass, needed by `Network::backward`.
struct ForwardTrace {
    Mode mode = Mode::train;
    std::vector<Tensor> inputs;              // input of layer i
    std::vector<Tensor> outputs;             // output of layer i (after activation)
    std::vector<BatchNormCache> batchnorm;   // indexed by layer; empty for other kinds
};

/// Gradients with the same layout as the network's parameters.
using Gradients = std::vector<LayerParams>;

/// An ordered stack of layers together with their parameters.
class Network {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    Network() = default;
    Network(FeatureShape input, std::vector<LayerSpec> layers);

    /// Fan-in scaled uniform weights U(-sqrt(3 / fan_in), sqrt(3 / fan_in)),
    /// zero biases, identity batchnorm.
    void initialize(std::uint64_t seed);

    FeatureShape input_shape() const noexcept { return input_; }
    FeatureShape output_shape() const { return shapes_.back(); }
    /// Output shape of layer i.
    FeatureShape layer_output_shape(std::size_t i) const { return shapes_.at(i + 1); }
    std::size_t size() const noexcept { return layers_.size(); }

    const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
    const std::vector<LayerParams>& params() const noexcept { return params_; }
    std::vector<LayerParams>& params() noexcept { return params_; }

    /// Runs layers [0, stop) (all when stop == npos). A trace, when given,
    /// records what `backward` needs.
    Tensor forward(const Tensor& x, Mode mode, ForwardTrace* trace = nullptr, std::size_t stop = npos) const;

    /// Reverse-mode pass. `grad_output` is dLoss/dOutput of the traced forward.
    /// Returns parameter gradients; the input gradient is written when asked.
    Gradients backward(const ForwardTrace& trace, const Tensor& grad_output, Tensor* grad_input = nullptr) const;

    /// Folds the batch statistics of a train-mode trace into the running
    /// statistics: running = momentum * running + (1 - momentum) * batch.
    void update_running_stats(const ForwardTrace& trace, double momentum = kBatchNormMomentum);

    Gradients zero_gradients() const;
    std::size_t parameter_count() const;

private:
    FeatureShape input_{};
    std::vector<LayerSpec> layers_;
    std::vector<FeatureShape> shapes_;  // shapes_[i] = input of layer i; back() = output
    std::vector<LayerParams> params_;
};

/// Mean squared error over all elements.
double mean_squared_error(const Tensor& target, const Tensor& output);
/// Sum of squared dense/conv/deconv weights (biases and batchnorm excluded).
double weight_penalty(const std::vector<LayerParams>& params);
/// MSE plus l2 * weight_penalty.
double reconstruction_loss(const Tensor& target, const Tensor& output, const std::vector<LayerParams>& params,
                           double l2);

struct LossAndGradients {
    double loss = 0.0;
    double mse = 0.0;
    Tensor output;
    Gradients gradients;
    ForwardTrace trace;
};

/// Forward, loss, and exact gradients of reconstruction_loss(target, net(x)).
LossAndGradients loss_and_gradients(const Network& net, const Tensor& x, const Tensor& target, double l2,
                                    Mode mode = Mode::train);

}  // namespace tsclust::nn

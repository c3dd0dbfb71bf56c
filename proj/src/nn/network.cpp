#include "tsclust/nn/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "tsclust/error.hpp"

namespace tsclust::nn {

namespace {

void apply_activation(Activation act, Tensor& t) {
    if (act == Activation::linear) return;
    auto& v = t.values();
    const auto n = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) v[i] = activate(act, v[i]);
}

// grad <- grad * act'(.) given the activation output.
Tensor activation_backward(Activation act, const Tensor& output, const Tensor& grad) {
    Tensor g = grad;
    if (act == Activation::linear) return g;
    auto& gv = g.values();
    const auto& ov = output.values();
    const auto n = static_cast<std::ptrdiff_t>(gv.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) gv[i] *= activation_slope_from_output(act, ov[i]);
    return g;
}

}  // namespace

Network::Network(FeatureShape input, std::vector<LayerSpec> layers) : input_(input), layers_(std::move(layers)) {
    shapes_.reserve(layers_.size() + 1);
    shapes_.push_back(input_);
    for (const auto& spec : layers_) {
        params_.push_back(allocate_params(spec, shapes_.back()));
        shapes_.push_back(nn::output_shape(spec, shapes_.back()));
    }
}

void Network::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& spec = layers_[i];
        auto& p = params_[i];
        p = allocate_params(spec, shapes_[i]);
        if (p.weight.empty()) continue;
        const std::size_t fan_in = p.weight.size() / p.bias.size();
        const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (auto& w : p.weight) w = dist(rng);
    }
}

Tensor Network::forward(const Tensor& x, Mode mode, ForwardTrace* trace, std::size_t stop) const {
    if (x.features() != input_.size()) {
        throw DimensionError("network input has " + std::to_string(x.features()) + " features, expected " +
                             std::to_string(input_.size()));
    }
    const std::size_t end = std::min(stop, layers_.size());
    if (trace) {
        trace->mode = mode;
        trace->inputs.assign(end, Tensor{});
        trace->outputs.assign(end, Tensor{});
        trace->batchnorm.assign(end, BatchNormCache{});
    }
    Tensor cur = x;
    cur.reshape(input_.channels, input_.length);
    for (std::size_t i = 0; i < end; ++i) {
        const auto& spec = layers_[i];
        const auto& p = params_[i];
        Tensor out;
        switch (spec.kind) {
            case LayerKind::dense:
                out = kernels::dense_forward(cur, p.weight, p.bias, spec.units);
                break;
            case LayerKind::conv1d:
                out = kernels::conv1d_forward(cur, p.weight, p.bias, spec.filters, spec.kernel, spec.stride);
                break;
            case LayerKind::deconv1d:
                out = kernels::deconv1d_forward(cur, p.weight, p.bias, spec.filters, spec.kernel, spec.upsample);
                break;
            case LayerKind::batchnorm:
                if (mode == Mode::train) {
                    if (cur.batch() == 0) throw DimensionError("batchnorm: empty batch in train mode");
                    BatchNormCache local;
                    auto& cache = trace ? trace->batchnorm[i] : local;
                    out = kernels::batchnorm_forward_train(cur, p.gamma, p.beta, p.eps, cache);
                } else {
                    out = kernels::batchnorm_forward_infer(cur, p.gamma, p.beta, p.running_mean, p.running_var,
                                                           p.eps);
                }
                break;
            case LayerKind::flatten:
            case LayerKind::reshape:
                out = cur;
                out.reshape(shapes_[i + 1].channels, shapes_[i + 1].length);
                break;
        }
        apply_activation(spec.activation, out);
        if (trace) {
            trace->inputs[i] = std::move(cur);
            trace->outputs[i] = out;
        }
        cur = std::move(out);
    }
    return cur;
}

Gradients Network::zero_gradients() const {
    Gradients g;
    g.reserve(params_.size());
    for (const auto& p : params_) {
        LayerParams z;
        z.weight.assign(p.weight.size(), 0.0);
        z.bias.assign(p.bias.size(), 0.0);
        z.gamma.assign(p.gamma.size(), 0.0);
        z.beta.assign(p.beta.size(), 0.0);
        g.push_back(std::move(z));
    }
    return g;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.weight.size() + p.bias.size() + p.gamma.size() + p.beta.size();
    return n;
}

Gradients Network::backward(const ForwardTrace& trace, const Tensor& grad_output, Tensor* grad_input) const {
    const std::size_t end = trace.outputs.size();
    if (end == 0) throw DimensionError("backward: empty trace");
    if (!grad_output.same_shape(trace.outputs.back())) throw DimensionError("backward: gradient shape mismatch");
    Gradients grads = zero_gradients();
    Tensor g = grad_output;
    for (std::size_t idx = end; idx-- > 0;) {
        const auto& spec = layers_[idx];
        const auto& p = params_[idx];
        auto& gp = grads[idx];
        const Tensor& in = trace.inputs[idx];
        Tensor pre = activation_backward(spec.activation, trace.outputs[idx], g);
        const bool need_input = idx > 0 || grad_input != nullptr;
        Tensor dx;
        switch (spec.kind) {
            case LayerKind::dense:
                kernels::dense_backward(in, p.weight, pre, gp.weight, gp.bias, need_input ? &dx : nullptr);
                break;
            case LayerKind::conv1d:
                kernels::conv1d_backward(in, p.weight, pre, spec.kernel, spec.stride, gp.weight, gp.bias,
                                         need_input ? &dx : nullptr);
                break;
            case LayerKind::deconv1d:
                kernels::deconv1d_backward(in, p.weight, pre, spec.kernel, spec.upsample, gp.weight, gp.bias,
                                           need_input ? &dx : nullptr);
                break;
            case LayerKind::batchnorm:
                if (trace.mode == Mode::train) {
                    kernels::batchnorm_backward_train(trace.batchnorm[idx], p.gamma, pre, gp.gamma, gp.beta, dx);
                } else {
                    // Running statistics are constants in inference mode.
                    dx = pre;
                    for (std::size_t c = 0; c < pre.channels(); ++c) {
                        const double inv_std = 1.0 / std::sqrt(p.running_var[c] + p.eps);
                        double sg = 0.0;
                        double sgn = 0.0;
                        for (std::size_t b = 0; b < pre.batch(); ++b)
                            for (std::size_t l = 0; l < pre.length(); ++l) {
                                sg += pre(b, c, l);
                                sgn += pre(b, c, l) * (in(b, c, l) - p.running_mean[c]) * inv_std;
                                dx(b, c, l) = pre(b, c, l) * p.gamma[c] * inv_std;
                            }
                        gp.gamma[c] = sgn;
                        gp.beta[c] = sg;
                    }
                }
                break;
            case LayerKind::flatten:
            case LayerKind::reshape:
                dx = std::move(pre);
                dx.reshape(in.channels(), in.length());
                break;
        }
        g = std::move(dx);
    }
    if (grad_input) *grad_input = std::move(g);
    return grads;
}

void Network::update_running_stats(const ForwardTrace& trace, double momentum) {
    if (trace.mode != Mode::train) return;
    for (std::size_t i = 0; i < trace.batchnorm.size(); ++i) {
        if (layers_[i].kind != LayerKind::batchnorm) continue;
        const auto& cache = trace.batchnorm[i];
        auto& p = params_[i];
        for (std::size_t c = 0; c < p.running_mean.size(); ++c) {
            p.running_mean[c] = momentum * p.running_mean[c] + (1.0 - momentum) * cache.mean[c];
            p.running_var[c] = momentum * p.running_var[c] + (1.0 - momentum) * cache.var[c];
        }
    }
}

double mean_squared_error(const Tensor& target, const Tensor& output) {
    if (target.size() != output.size()) throw DimensionError("loss: target and output sizes differ");
    if (target.size() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = output.values()[i] - target.values()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(target.size());
}

double weight_penalty(const std::vector<LayerParams>& params) {
    double acc = 0.0;
    for (const auto& p : params)
        for (double w : p.weight) acc += w * w;
    return acc;
}

double reconstruction_loss(const Tensor& target, const Tensor& output, const std::vector<LayerParams>& params,
                           double l2) {
    const double mse = mean_squared_error(target, output);
    return l2 > 0.0 ? mse + l2 * weight_penalty(params) : mse;
}

LossAndGradients loss_and_gradients(const Network& net, const Tensor& x, const Tensor& target, double l2,
                                    Mode mode) {
    LossAndGradients r;
    r.output = net.forward(x, mode, &r.trace);
    Tensor t = target;
    if (t.size() != r.output.size()) throw DimensionError("loss: target and output sizes differ");
    t.reshape(r.output.channels(), r.output.length());
    r.mse = mean_squared_error(t, r.output);
    r.loss = l2 > 0.0 ? r.mse + l2 * weight_penalty(net.params()) : r.mse;

    Tensor grad(r.output.batch(), r.output.channels(), r.output.length());
    const double scale = 2.0 / static_cast<double>(r.output.size());
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad.values()[i] = scale * (r.output.values()[i] - t.values()[i]);
    r.gradients = net.backward(r.trace, grad);
    if (l2 > 0.0) {
        for (std::size_t i = 0; i < r.gradients.size(); ++i) {
            auto& gw = r.gradients[i].weight;
            const auto& w = net.params()[i].weight;
            for (std::size_t j = 0; j < w.size(); ++j) gw[j] += 2.0 * l2 * w[j];
        }
    }
    return r;
}

}  // namespace tsclust::nn

#include "tsclust/nn/optimizer.hpp"

#include <cmath>
#include <string>

#include "tsclust/error.hpp"

namespace tsclust::nn {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    throw ParameterError("unknown optimizer '" + std::string(name) + "'");
}

void OptimizerState::validate() const {
    if (!(learning_rate > 0.0)) throw ParameterError("optimizer: learning rate must be > 0");
    if (!(l2 >= 0.0)) throw ParameterError("optimizer: l2 coefficient must be >= 0");
}

namespace {

template <class Fn>
void for_each_slot(std::vector<LayerParams>& params, const Gradients& grads, Fn&& fn) {
    if (params.size() != grads.size()) throw DimensionError("optimizer: gradient layer count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const auto& g = grads[i];
        if (p.weight.size() != g.weight.size() || p.bias.size() != g.bias.size() ||
            p.gamma.size() != g.gamma.size() || p.beta.size() != g.beta.size()) {
            throw DimensionError("optimizer: gradient shape mismatch at layer " + std::to_string(i));
        }
        fn(i, 0, p.weight, g.weight);
        fn(i, 1, p.bias, g.bias);
        fn(i, 2, p.gamma, g.gamma);
        fn(i, 3, p.beta, g.beta);
    }
}

std::vector<double>& slot(LayerParams& p, int which) {
    switch (which) {
        case 0: return p.weight;
        case 1: return p.bias;
        case 2: return p.gamma;
        default: return p.beta;
    }
}

Gradients zeros_like(const Gradients& g) {
    Gradients z(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        z[i].weight.assign(g[i].weight.size(), 0.0);
        z[i].bias.assign(g[i].bias.size(), 0.0);
        z[i].gamma.assign(g[i].gamma.size(), 0.0);
        z[i].beta.assign(g[i].beta.size(), 0.0);
    }
    return z;
}

}  // namespace

void optimizer_step(OptimizerState& state, std::vector<LayerParams>& params, const Gradients& grads) {
    state.validate();
    ++state.step;
    if (state.kind == OptimizerKind::sgd) {
        for_each_slot(params, grads, [&](std::size_t, int, std::vector<double>& p, const std::vector<double>& g) {
            for (std::size_t j = 0; j < p.size(); ++j) p[j] -= state.learning_rate * g[j];
        });
        return;
    }
    if (state.first_moment.size() != grads.size()) {
        state.first_moment = zeros_like(grads);
        state.second_moment = zeros_like(grads);
    }
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for_each_slot(params, grads, [&](std::size_t i, int which, std::vector<double>& p, const std::vector<double>& g) {
        auto& m = slot(state.first_moment[i], which);
        auto& v = slot(state.second_moment[i], which);
        if (m.size() != p.size()) throw DimensionError("optimizer: moment shape mismatch");
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double mhat = m[j] / correction1;
            const double vhat = v[j] / correction2;
            p[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    });
}

}  // namespace tsclust::nn

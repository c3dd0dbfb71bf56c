#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tsclust/nn/network.hpp"
#include "tsclust/types.hpp"

namespace testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline tsclust::Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                     double hi = 1.0) {
    return tsclust::Matrix(rows, cols, random_vector(rng, rows * cols, lo, hi));
}

inline tsclust::nn::Tensor random_tensor(std::mt19937_64& rng, std::size_t b, std::size_t c, std::size_t l) {
    return tsclust::nn::Tensor(b, c, l, random_vector(rng, b * c * l));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = a.size() == b.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// ||a - b|| / max(||a||, ||b||, floor); 0 when all three vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 0.0) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::max(std::sqrt(std::max(na, nb)), floor);
    return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

struct GradCheck {
    double worst = 0.0;
    std::string where;
};

/// Central finite differences of reconstruction_loss(target, net(x)) against
/// the analytic gradients of every parameter tensor and of the input.
/// BatchNorm layers are evaluated in train mode (batch statistics).
inline GradCheck check_gradients(const tsclust::nn::Network& net0, const tsclust::nn::Tensor& x0,
                                 const tsclust::nn::Tensor& target, double l2, double step = 2e-6) {
    using namespace tsclust::nn;
    Network net = net0;
    Tensor x = x0;
    auto loss_at = [&]() {
        const Tensor y = net.forward(x, Mode::train);
        return reconstruction_loss(target, y, net.params(), l2);
    };
    auto analytic = loss_and_gradients(net, x, target, l2, Mode::train);
    Tensor dx;
    {
        const Tensor y = net.forward(x, Mode::train, &analytic.trace);
        Tensor dy(y.batch(), y.channels(), y.length());
        const double scale = 2.0 / static_cast<double>(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) dy.values()[i] = scale * (y.values()[i] - target.values()[i]);
        net.backward(analytic.trace, dy, &dx);
    }

    GradCheck out;
    auto compare = [&](std::vector<double>& param, const std::vector<double>& grad, const std::string& name) {
        if (param.empty()) return;
        std::vector<double> numeric(param.size());
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double keep = param[i];
            param[i] = keep + step;
            const double up = loss_at();
            param[i] = keep - step;
            const double down = loss_at();
            param[i] = keep;
            numeric[i] = (up - down) / (2.0 * step);
        }
        // a bias feeding batchnorm has an exactly zero gradient; only difference noise remains
        const double err = relative_error(grad, numeric, 1e-4);
        if (err > out.worst) {
            out.worst = err;
            out.where = name;
        }
    };
    for (std::size_t li = 0; li < net.size(); ++li) {
        auto& p = net.params()[li];
        const auto& g = analytic.gradients[li];
        const std::string tag = "layer " + std::to_string(li) + " (" + std::string(to_string(net.layers()[li].kind)) + ")";
        compare(p.weight, g.weight, tag + " weight");
        compare(p.bias, g.bias, tag + " bias");
        compare(p.gamma, g.gamma, tag + " gamma");
        compare(p.beta, g.beta, tag + " beta");
    }
    compare(x.values(), dx.values(), "input");
    return out;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("tsclust_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing

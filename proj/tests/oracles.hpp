#pragma once

// Slow, direct implementations used as references by the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "support.hpp"
#include "tsclust/distances.hpp"
#include "tsclust/nn/network.hpp"
#include "tsclust/types.hpp"

namespace oracles {

using tsclust::Matrix;
using tsclust::distances::DistanceMatrix;

// Walks every monotone path from (0,0) to (n-1,m-1) with steps (1,0), (0,1), (1,1).
inline double enumerate_paths(const std::vector<double>& x, const std::vector<double>& y, std::size_t i, std::size_t j,
                              double acc, std::optional<std::size_t> window) {
    if (window && (i > j ? i - j : j - i) > *window) return std::numeric_limits<double>::infinity();
    acc += (x[i] - y[j]) * (x[i] - y[j]);
    if (i + 1 == x.size() && j + 1 == y.size()) return acc;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < x.size()) best = std::min(best, enumerate_paths(x, y, i + 1, j, acc, window));
    if (j + 1 < y.size()) best = std::min(best, enumerate_paths(x, y, i, j + 1, acc, window));
    if (i + 1 < x.size() && j + 1 < y.size()) best = std::min(best, enumerate_paths(x, y, i + 1, j + 1, acc, window));
    return best;
}

inline double brute_dtw(const std::vector<double>& x, const std::vector<double>& y,
                        std::optional<std::size_t> window = std::nullopt) {
    return enumerate_paths(x, y, 0, 0, 0.0, window);
}

struct BruteLOF {
    std::vector<double> lrd, lof;
};

// Plain O(N^2 log N) evaluation straight from the definitions.
inline BruteLOF brute_lof(const DistanceMatrix& d, std::size_t k, double floor = 1e-12) {
    const std::size_t n = d.size();
    std::vector<std::vector<std::size_t>> nbrs(n);
    std::vector<double> kdist(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> order;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return d(i, a) != d(i, b) ? d(i, a) < d(i, b) : a < b;
        });
        order.resize(k);
        kdist[i] = d(i, order.back());
        nbrs[i] = order;
    }
    BruteLOF out{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double reach = 0.0;
        for (auto j : nbrs[i]) reach += std::max(kdist[j], d(i, j));
        out.lrd[i] = 1.0 / std::max(reach / static_cast<double>(k), floor);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (auto j : nbrs[i]) s += out.lrd[j] / out.lrd[i];
        out.lof[i] = s / static_cast<double>(k);
    }
    return out;
}

inline double medoid_cost(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (auto m : medoids) best = std::min(best, d(j, m));
        cost += best;
    }
    return cost;
}

// Optimal 2-medoid cost over every pair.
inline double brute_force_pair(const DistanceMatrix& d) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < d.size(); ++a)
        for (std::size_t b = a + 1; b < d.size(); ++b) best = std::min(best, medoid_cost(d, {a, b}));
    return best;
}

inline bool non_increasing(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1] + 1e-9 * std::max(1.0, std::abs(trace[i - 1]))) return false;
    return true;
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

struct SvdOracle {
    Eigen::RowVectorXd mean;
    Eigen::MatrixXd V;          // columns are principal directions
    Eigen::VectorXd variance;   // singular^2 / (N - 1)
};

inline SvdOracle svd_oracle(const Matrix& x) {
    Eigen::MatrixXd X = to_eigen(x);
    SvdOracle o;
    o.mean = X.colwise().mean();
    X.rowwise() -= o.mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
    o.V = svd.matrixV();
    o.variance = svd.singularValues().array().square() / static_cast<double>(x.rows() - 1);
    return o;
}

// Largest |component - oracle direction| after sign alignment, over all components.
inline double pca_direction_error(const Matrix& components, const SvdOracle& o) {
    double worst = 0.0;
    for (std::size_t c = 0; c < components.rows(); ++c) {
        double dot = 0.0;
        for (std::size_t j = 0; j < components.cols(); ++j) dot += components(c, j) * o.V(j, c);
        const double sign = dot < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < components.cols(); ++j)
            worst = std::max(worst, std::abs(sign * components(c, j) - o.V(j, c)));
    }
    return worst;
}

struct RandomNet {
    tsclust::nn::Network net;
    tsclust::nn::Tensor x, target;
};

/// Small network mixing every layer kind and activation, with a matching
/// random input batch and reconstruction target.
inline RandomNet random_network(std::mt19937_64& rng) {
    using namespace tsclust::nn;
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    const Activation acts[] = {Activation::linear, Activation::elu, Activation::tanh};
    auto act = [&] { return acts[pick(0, 2)]; };

    const FeatureShape in{pick(1, 3), pick(3, 9)};
    std::vector<LayerSpec> specs;
    FeatureShape shape = in;
    for (std::size_t n = pick(1, 3); n > 0; --n) {
        switch (pick(0, 2)) {
            case 0: specs.push_back(LayerSpec::conv1d(pick(1, 3), pick(1, std::min<std::size_t>(5, shape.length)), pick(1, 2), act())); break;
            case 1: specs.push_back(LayerSpec::deconv1d(pick(1, 3), pick(1, 4), pick(1, 2), act())); break;
            default: specs.push_back(LayerSpec::batchnorm()); break;
        }
        shape = output_shape(specs.back(), shape);
    }
    if (pick(0, 1)) {
        specs.push_back(LayerSpec::flatten());
        const std::size_t units = pick(2, 6);
        specs.push_back(LayerSpec::dense(units, act()));
        if (pick(0, 1)) {
            specs.push_back(LayerSpec::reshape(units, 1));
            specs.push_back(LayerSpec::deconv1d(pick(1, 2), pick(1, 3), pick(1, 3), act()));
        }
    }
    RandomNet r{Network(in, specs), {}, {}};
    r.net.initialize(rng());
    // zero biases put elu exactly on its kink wherever a deconv tap sees no input
    for (auto& p : r.net.params())
        if (!p.bias.empty()) p.bias = testing::random_vector(rng, p.bias.size(), -0.5, 0.5);
    const std::size_t batch = pick(2, 4);
    const auto out = r.net.output_shape();
    r.x = testing::random_tensor(rng, batch, in.channels, in.length);
    r.target = testing::random_tensor(rng, batch, out.channels, out.length);
    return r;
}

}  // namespace oracles

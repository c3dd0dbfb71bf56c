#include "tsclust/cae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tsclust/error.hpp"
#include "tsclust/nn/checkpoint.hpp"

namespace tsclust::cae {

using nn::Activation;
using nn::LayerSpec;

void CAEConfig::validate() const {
    if (length == 0 || length % 4 != 0)
        throw ParameterError("cae: series length " + std::to_string(length) + " must be a positive multiple of 4");
    if (latent == 0 || latent >= length) throw ParameterError("cae: latent size must satisfy 0 < m < T");
    if (epochs == 0) throw ParameterError("cae: epochs must be >= 1");
    if (batch_size == 0) throw ParameterError("cae: batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw ParameterError("cae: learning rate must be > 0");
    if (!(l2 >= 0.0)) throw ParameterError("cae: l2 must be >= 0");
}

ScalingMap ScalingMap::fit(const Matrix& data, double lo, double hi) {
    ScalingMap s;
    s.lo = lo;
    s.hi = hi;
    if (data.empty()) return s;
    const auto [mn, mx] = std::minmax_element(data.values().begin(), data.values().end());
    s.min = *mn;
    s.max = *mx;
    return s;
}

double ScalingMap::apply(double v) const {
    if (max <= min) return 0.5 * (lo + hi);
    return lo + (v - min) * (hi - lo) / (max - min);
}

double ScalingMap::invert(double s) const {
    if (max <= min) return min;
    return min + (s - lo) * (max - min) / (hi - lo);
}

Matrix ScalingMap::apply(const Matrix& m) const {
    Matrix out = m;
    for (auto& v : out.values()) v = apply(v);
    return out;
}

Matrix ScalingMap::invert(const Matrix& m) const {
    Matrix out = m;
    for (auto& v : out.values()) v = invert(v);
    return out;
}

std::size_t TrainedCAE::encoder_layers() const { return kLatentLayer + 1; }

std::vector<LayerSpec> build_paper_architecture(std::size_t length, std::size_t latent) {
    if (length == 0 || length % 4 != 0)
        throw ParameterError("cae: series length " + std::to_string(length) + " must be a positive multiple of 4");
    if (latent == 0) throw ParameterError("cae: latent size must be >= 1");
    const std::size_t reduced = length / 4;
    return {
        LayerSpec::conv1d(64, 3, 2, Activation::elu),
        LayerSpec::batchnorm(),
        LayerSpec::conv1d(128, 5, 2, Activation::elu),
        LayerSpec::batchnorm(),
        LayerSpec::flatten(),
        LayerSpec::dense(100, Activation::elu),
        LayerSpec::dense(latent, Activation::linear),
        LayerSpec::dense(128 * reduced, Activation::elu),
        LayerSpec::batchnorm(),
        LayerSpec::reshape(128, reduced),
        LayerSpec::deconv1d(128, 5, 2, Activation::elu),
        LayerSpec::batchnorm(),
        LayerSpec::deconv1d(64, 3, 2, Activation::elu),
        LayerSpec::conv1d(1, 3, 1, Activation::tanh),
    };
}

namespace {

nn::Tensor gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
    nn::Tensor t(rows.size(), 1, m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy(m.row(rows[i]).begin(), m.row(rows[i]).end(), t.sample(i).begin());
    return t;
}

void check_series(const Matrix& series, std::size_t length) {
    if (series.cols() != length)
        throw DimensionError("cae: series length " + std::to_string(series.cols()) + " but model expects " +
                             std::to_string(length));
}

// Applies `fn(i, output)` to every row pushed through layers [0, stop) alone.
template <class Fn>
void per_series_forward(const nn::Network& net, const Matrix& scaled, std::size_t stop, Fn&& fn) {
    const auto n = static_cast<std::ptrdiff_t>(scaled.rows());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        nn::Tensor x(1, 1, scaled.cols(), std::vector<double>(scaled.row(row).begin(), scaled.row(row).end()));
        fn(row, net.forward(x, nn::Mode::infer, nullptr, stop));
    }
}

}  // namespace

TrainedCAE train(const Matrix& series, const CAEConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    check_series(series, config.length);
    if (series.rows() == 0) throw DimensionError("cae: empty training set");

    TrainedCAE model;
    model.config = config;
    model.scaling = ScalingMap::fit(series);
    model.network = nn::Network({1, config.length}, build_paper_architecture(config.length, config.latent));
    model.network.initialize(config.seed);
    const Matrix scaled = model.scaling.apply(series);

    nn::OptimizerState opt;
    opt.kind = config.optimizer;
    opt.learning_rate = config.learning_rate;
    opt.l2 = config.l2;

    std::mt19937_64 shuffle_rng(config.seed ^ 0x5DEECE66DULL);
    std::vector<std::size_t> order(series.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t n = order.size();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double weighted = 0.0;
        std::size_t start = 0;
        while (start < n) {
            std::size_t stop = std::min(n, start + config.batch_size);
            // A lone trailing sample would give degenerate batch statistics.
            if (n - stop == 1) stop = n;
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            const nn::Tensor x = gather_rows(scaled, rows);
            auto step = nn::loss_and_gradients(model.network, x, x, opt.l2, nn::Mode::train);
            if (!std::isfinite(step.loss)) {
                std::ostringstream msg;
                msg << "cae: non-finite loss at epoch " << epoch + 1 << " (learning rate " << opt.learning_rate
                    << "); lower the learning rate or check the input scaling";
                throw TrainingError(msg.str());
            }
            model.network.update_running_stats(step.trace);
            nn::optimizer_step(opt, model.network.params(), step.gradients);
            weighted += step.loss * static_cast<double>(rows.size());
            start = stop;
        }
        model.loss_history.push_back(weighted / static_cast<double>(n));
        if (on_epoch) on_epoch(epoch + 1, model.loss_history.back());
    }
    return model;
}

Matrix encode(const TrainedCAE& model, const Matrix& series) {
    check_series(series, model.config.length);
    const Matrix scaled = model.scaling.apply(series);
    Matrix latent(series.rows(), model.config.latent);
    per_series_forward(model.network, scaled, model.encoder_layers(), [&](std::size_t i, const nn::Tensor& out) {
        std::copy(out.values().begin(), out.values().end(), latent.row(i).begin());
    });
    return latent;
}

Matrix reconstruct(const TrainedCAE& model, const Matrix& series) {
    check_series(series, model.config.length);
    const Matrix scaled = model.scaling.apply(series);
    Matrix out(series.rows(), series.cols());
    per_series_forward(model.network, scaled, nn::Network::npos, [&](std::size_t i, const nn::Tensor& y) {
        std::copy(y.values().begin(), y.values().end(), out.row(i).begin());
    });
    return model.scaling.invert(out);
}

double reconstruction_mse(const TrainedCAE& model, const Matrix& series) {
    check_series(series, model.config.length);
    if (series.rows() == 0) return 0.0;
    const Matrix scaled = model.scaling.apply(series);
    std::vector<double> per_row(series.rows());
    per_series_forward(model.network, scaled, nn::Network::npos, [&](std::size_t i, const nn::Tensor& y) {
        double acc = 0.0;
        for (std::size_t t = 0; t < y.size(); ++t) {
            const double d = y.values()[t] - scaled(i, t);
            acc += d * d;
        }
        per_row[i] = acc;
    });
    return std::accumulate(per_row.begin(), per_row.end(), 0.0) / static_cast<double>(scaled.values().size());
}

Matrix normalize_latent(const Matrix& latent) {
    Matrix out(latent.rows(), latent.cols());
    const std::size_t n = latent.rows();
    if (n == 0) return out;
    for (std::size_t j = 0; j < latent.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += latent(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (latent(i, j) - mean) * (latent(i, j) - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) continue;  // column stays zero
        for (std::size_t i = 0; i < n; ++i) out(i, j) = (latent(i, j) - mean) / sd;
    }
    return out;
}

namespace {

nlohmann::json config_to_json(const CAEConfig& c) {
    return {{"length", c.length},         {"latent", c.latent}, {"epochs", c.epochs},
            {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
            {"l2", c.l2},                 {"optimizer", std::string(nn::to_string(c.optimizer))},
            {"seed", c.seed}};
}

CAEConfig config_from_json(const nlohmann::json& j) {
    CAEConfig c;
    c.length = j.at("length").get<std::size_t>();
    c.latent = j.at("latent").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.l2 = j.at("l2").get<double>();
    c.optimizer = nn::parse_optimizer(j.at("optimizer").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_model(const std::filesystem::path& stem, const TrainedCAE& model) {
    nlohmann::json meta;
    meta["config"] = config_to_json(model.config);
    meta["scaling"] = {{"min", model.scaling.min}, {"max", model.scaling.max}, {"lo", model.scaling.lo},
                       {"hi", model.scaling.hi}};
    meta["loss_history"] = model.loss_history;
    meta["latent_layer"] = kLatentLayer;
    nn::save_network(with_suffix(stem, ".ckpt"), model.network, {{"model", "cae"}});
    std::ofstream side(with_suffix(stem, ".json"));
    if (!side) throw IoError("cannot write " + with_suffix(stem, ".json").string());
    side << meta.dump(2) << '\n';
}

TrainedCAE load_model(const std::filesystem::path& stem) {
    const auto side_path = with_suffix(stem, ".json");
    std::ifstream side(side_path);
    if (!side) throw IoError("cannot open " + side_path.string());
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(side);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(side_path.string() + ": " + e.what());
    }
    TrainedCAE model;
    model.config = config_from_json(meta.at("config"));
    const auto& s = meta.at("scaling");
    model.scaling = {s.at("min").get<double>(), s.at("max").get<double>(), s.at("lo").get<double>(),
                     s.at("hi").get<double>()};
    model.loss_history = meta.at("loss_history").get<std::vector<double>>();
    model.network = nn::load_network(with_suffix(stem, ".ckpt")).network;
    if (model.network.input_shape().length != model.config.length)
        throw IoError(stem.string() + ": checkpoint input length disagrees with sidecar");
    return model;
}

}  // namespace tsclust::cae

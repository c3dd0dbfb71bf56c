#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "tsclust/nn/network.hpp"
#include "tsclust/nn/optimizer.hpp"
#include "tsclust/types.hpp"

namespace tsclust::cae {

struct CAEConfig {
    std::size_t length = 384;   // T, divisible by 4
    std::size_t latent = 20;    // m < T
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double l2 = 1e-4;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Affine map of the data range [min, max] onto [lo, hi] inside the tanh range.
struct ScalingMap {
    double min = 0.0;
    double max = 1.0;
    double lo = -0.9;
    double hi = 0.9;

    static ScalingMap fit(const Matrix& data, double lo = -0.9, double hi = 0.9);
    double apply(double v) const;
    double invert(double s) const;
    Matrix apply(const Matrix& m) const;
    Matrix invert(const Matrix& m) const;
};

struct TrainedCAE {
    CAEConfig config;
    nn::Network network;
    ScalingMap scaling;
    std::vector<double> loss_history;  // mean training loss per epoch

    /// Number of leading layers forming the encoder (through the latent layer).
    std::size_t encoder_layers() const;
};

/// Conv(64,k3,s2,elu) BN Conv(128,k5,s2,elu) BN Flatten Dense(100,elu)
/// Dense(m,linear) Dense(128*T/4,elu) BN Reshape(128,T/4) DeConv(128,k5,x2,elu)
/// BN DeConv(64,k3,x2,elu) Conv(1,k3,s1,tanh).
std::vector<nn::LayerSpec> build_paper_architecture(std::size_t length, std::size_t latent);

/// Index of the latent Dense(m) layer in build_paper_architecture's output.
inline constexpr std::size_t kLatentLayer = 6;

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Minibatch training on the reconstruction objective. The data are mapped
/// into [-0.9, 0.9] first (global min/max); the map is kept in the result.
TrainedCAE train(const Matrix& series, const CAEConfig& config, const EpochCallback& on_epoch = {});

/// N x m latent matrix. Inference-mode batchnorm; each series is encoded on
/// its own, so rows never depend on batch composition.
Matrix encode(const TrainedCAE& model, const Matrix& series);

/// Decoder(encoder(x)) mapped back to the data scale.
Matrix reconstruct(const TrainedCAE& model, const Matrix& series);

/// Inference-mode MSE between scaled inputs and network outputs.
double reconstruction_mse(const TrainedCAE& model, const Matrix& series);

/// Column-wise population z-score; columns with (numerically) zero spread map
/// to zeros.
Matrix normalize_latent(const Matrix& latent);

/// Writes `<stem>.ckpt` (network checkpoint) and `<stem>.json` (sidecar:
/// config, scaling map, loss history).
void save_model(const std::filesystem::path& stem, const TrainedCAE& model);
TrainedCAE load_model(const std::filesystem::path& stem);

}  // namespace tsclust::cae

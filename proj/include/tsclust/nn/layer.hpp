#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tsclust::nn {

enum class Activation { linear, elu, tanh };
enum class LayerKind { dense, conv1d, deconv1d, batchnorm, flatten, reshape };
enum class Mode { train, infer };

std::string_view to_string(Activation a);
std::string_view to_string(LayerKind k);
Activation parse_activation(std::string_view name);
LayerKind parse_layer_kind(std::string_view name);

/// Per-sample feature-map shape: channels x length.
struct FeatureShape {
    std::size_t channels = 0;
    std::size_t length = 0;

    std::size_t size() const noexcept { return channels * length; }
    bool operator==(const FeatureShape&) const = default;
};

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::size_t units = 0;     // dense
    std::size_t filters = 0;   // conv1d, deconv1d
    std::size_t kernel = 1;    // conv1d, deconv1d
    std::size_t stride = 1;    // conv1d
    std::size_t upsample = 1;  // deconv1d
    FeatureShape target{};     // reshape
    Activation activation = Activation::linear;

    static LayerSpec dense(std::size_t units, Activation act);
    static LayerSpec conv1d(std::size_t filters, std::size_t kernel, std::size_t stride, Activation act);
    static LayerSpec deconv1d(std::size_t filters, std::size_t kernel, std::size_t upsample, Activation act);
    static LayerSpec batchnorm();
    static LayerSpec flatten();
    static LayerSpec reshape(std::size_t channels, std::size_t length);

    bool operator==(const LayerSpec&) const = default;
};

/// Learnable state of one layer. Unused members stay empty.
///
/// conv1d/deconv1d weights are stored [filter][in_channel][tap]; dense weights
/// [out][in]. Only `weight` enters the l2 penalty.
struct LayerParams {
    std::vector<double> weight;
    std::vector<double> bias;
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double eps = 1e-5;
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kEluAlpha = 1.0;

/// Validates `spec` against its input and returns the output shape.
FeatureShape output_shape(const LayerSpec& spec, FeatureShape input);

/// Allocates parameters of the right shapes, all zero (batchnorm: gamma = 1,
/// running_var = 1).
LayerParams allocate_params(const LayerSpec& spec, FeatureShape input);

/// Same-padding geometry for a strided convolution.
///
/// Output length is ceil(length / stride); the total padding
/// max((out - 1) * stride + kernel - length, 0) is split with the smaller half
/// on the left.
struct ConvGeometry {
    std::size_t in_length = 0;
    std::size_t out_length = 0;
    std::size_t kernel = 1;
    std::size_t stride = 1;
    std::size_t pad_left = 0;
};

ConvGeometry conv_geometry(std::size_t in_length, std::size_t kernel, std::size_t stride);

double activate(Activation a, double x);
/// Derivative expressed through the activation output y = activate(a, x).
double activation_slope_from_output(Activation a, double y);

}  // namespace tsclust::nn

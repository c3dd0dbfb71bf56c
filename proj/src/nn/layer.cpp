#include "tsclust/nn/layer.hpp"

#include <cmath>
#include <string>

#include "tsclust/error.hpp"

namespace tsclust::nn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::elu: return "elu";
        case Activation::tanh: return "tanh";
    }
    return "?";
}

std::string_view to_string(LayerKind k) {
    switch (k) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::deconv1d: return "deconv1d";
        case LayerKind::batchnorm: return "batchnorm";
        case LayerKind::flatten: return "flatten";
        case LayerKind::reshape: return "reshape";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    for (auto a : {Activation::linear, Activation::elu, Activation::tanh}) {
        if (to_string(a) == name) return a;
    }
    throw ParameterError("unknown activation '" + std::string(name) + "'");
}

LayerKind parse_layer_kind(std::string_view name) {
    for (auto k : {LayerKind::dense, LayerKind::conv1d, LayerKind::deconv1d, LayerKind::batchnorm,
                   LayerKind::flatten, LayerKind::reshape}) {
        if (to_string(k) == name) return k;
    }
    throw ParameterError("unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::dense(std::size_t units, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.units = units;
    s.activation = act;
    return s;
}

LayerSpec LayerSpec::conv1d(std::size_t filters, std::size_t kernel, std::size_t stride, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::conv1d;
    s.filters = filters;
    s.kernel = kernel;
    s.stride = stride;
    s.activation = act;
    return s;
}

LayerSpec LayerSpec::deconv1d(std::size_t filters, std::size_t kernel, std::size_t upsample, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::deconv1d;
    s.filters = filters;
    s.kernel = kernel;
    s.upsample = upsample;
    s.activation = act;
    return s;
}

LayerSpec LayerSpec::batchnorm() {
    LayerSpec s;
    s.kind = LayerKind::batchnorm;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}

LayerSpec LayerSpec::reshape(std::size_t channels, std::size_t length) {
    LayerSpec s;
    s.kind = LayerKind::reshape;
    s.target = {channels, length};
    return s;
}

ConvGeometry conv_geometry(std::size_t in_length, std::size_t kernel, std::size_t stride) {
    if (stride == 0) throw ParameterError("conv1d: stride must be >= 1");
    if (kernel == 0) throw ParameterError("conv1d: kernel length must be >= 1");
    if (in_length == 0) throw DimensionError("conv1d: empty input");
    ConvGeometry g;
    g.in_length = in_length;
    g.kernel = kernel;
    g.stride = stride;
    g.out_length = (in_length + stride - 1) / stride;
    const std::size_t span = (g.out_length - 1) * stride + kernel;
    const std::size_t pad_total = span > in_length ? span - in_length : 0;
    g.pad_left = pad_total / 2;
    if (kernel > in_length + pad_total) throw DimensionError("conv1d: kernel longer than padded input");
    return g;
}

FeatureShape output_shape(const LayerSpec& spec, FeatureShape in) {
    if (in.size() == 0) throw DimensionError(std::string(to_string(spec.kind)) + ": empty input shape");
    switch (spec.kind) {
        case LayerKind::dense:
            if (spec.units == 0) throw ParameterError("dense: units must be >= 1");
            return {spec.units, 1};
        case LayerKind::conv1d: {
            if (spec.filters == 0) throw ParameterError("conv1d: filters must be >= 1");
            const auto g = conv_geometry(in.length, spec.kernel, spec.stride);
            return {spec.filters, g.out_length};
        }
        case LayerKind::deconv1d:
            if (spec.filters == 0) throw ParameterError("deconv1d: filters must be >= 1");
            if (spec.upsample == 0) throw ParameterError("deconv1d: upsample must be >= 1");
            if (spec.kernel == 0) throw ParameterError("deconv1d: kernel length must be >= 1");
            return {spec.filters, in.length * spec.upsample};
        case LayerKind::batchnorm:
            return in;
        case LayerKind::flatten:
            return {in.size(), 1};
        case LayerKind::reshape:
            if (spec.target.size() != in.size()) {
                throw DimensionError("reshape: " + std::to_string(in.size()) + " features into (" +
                                     std::to_string(spec.target.channels) + ", " +
                                     std::to_string(spec.target.length) + ")");
            }
            return spec.target;
    }
    return in;
}

LayerParams allocate_params(const LayerSpec& spec, FeatureShape in) {
    LayerParams p;
    switch (spec.kind) {
        case LayerKind::dense:
            p.weight.assign(spec.units * in.size(), 0.0);
            p.bias.assign(spec.units, 0.0);
            break;
        case LayerKind::conv1d:
        case LayerKind::deconv1d:
            p.weight.assign(spec.filters * in.channels * spec.kernel, 0.0);
            p.bias.assign(spec.filters, 0.0);
            break;
        case LayerKind::batchnorm:
            p.gamma.assign(in.channels, 1.0);
            p.beta.assign(in.channels, 0.0);
            p.running_mean.assign(in.channels, 0.0);
            p.running_var.assign(in.channels, 1.0);
            p.eps = kBatchNormEps;
            break;
        case LayerKind::flatten:
        case LayerKind::reshape:
            break;
    }
    return p;
}

double activate(Activation a, double x) {
    switch (a) {
        case Activation::linear: return x;
        case Activation::elu: return x > 0.0 ? x : kEluAlpha * std::expm1(x);
        case Activation::tanh: return std::tanh(x);
    }
    return x;
}

double activation_slope_from_output(Activation a, double y) {
    switch (a) {
        case Activation::linear: return 1.0;
        case Activation::elu: return y > 0.0 ? 1.0 : y + kEluAlpha;
        case Activation::tanh: return 1.0 - y * y;
    }
    return 1.0;
}

}  // namespace tsclust::nn

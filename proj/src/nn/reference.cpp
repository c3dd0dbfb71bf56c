#include <algorithm>
#include <cmath>
#include <string>

#include "tsclust/error.hpp"
#include "tsclust/nn/kernels.hpp"
#include "tsclust/nn/layer.hpp"

namespace tsclust::nn::reference {

namespace {

void check_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(want) + " values, got " +
                             std::to_string(got));
    }
}

// Zero-inserted copy: u[i * upsample] = x[i].
Tensor upsample_zero_insert(const Tensor& x, std::size_t upsample) {
    Tensor u(x.batch(), x.channels(), x.length() * upsample);
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t c = 0; c < x.channels(); ++c)
            for (std::size_t i = 0; i < x.length(); ++i) u(b, c, i * upsample) = x(b, c, i);
    return u;
}

Tensor downsample_take(const Tensor& du, std::size_t upsample) {
    Tensor dx(du.batch(), du.channels(), du.length() / upsample);
    for (std::size_t b = 0; b < dx.batch(); ++b)
        for (std::size_t c = 0; c < dx.channels(); ++c)
            for (std::size_t i = 0; i < dx.length(); ++i) dx(b, c, i) = du(b, c, i * upsample);
    return dx;
}

}  // namespace

Tensor dense_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                     std::size_t units) {
    const std::size_t in = x.features();
    check_size(weight.size(), units * in, "dense weight");
    check_size(bias.size(), units, "dense bias");
    Tensor y(x.batch(), units, 1);
    for (std::size_t b = 0; b < x.batch(); ++b) {
        const auto xs = x.sample(b);
        for (std::size_t o = 0; o < units; ++o) {
            double acc = bias[o];
            for (std::size_t i = 0; i < in; ++i) acc += weight[o * in + i] * xs[i];
            y(b, o, 0) = acc;
        }
    }
    return y;
}

void dense_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                    std::span<double> dweight, std::span<double> dbias, Tensor* dx) {
    const std::size_t in = x.features();
    const std::size_t units = dy.features();
    check_size(weight.size(), units * in, "dense weight");
    std::fill(dweight.begin(), dweight.end(), 0.0);
    std::fill(dbias.begin(), dbias.end(), 0.0);
    if (dx) *dx = Tensor(x.batch(), x.channels(), x.length());
    for (std::size_t b = 0; b < x.batch(); ++b) {
        const auto xs = x.sample(b);
        const auto g = dy.sample(b);
        for (std::size_t o = 0; o < units; ++o) {
            dbias[o] += g[o];
            for (std::size_t i = 0; i < in; ++i) {
                dweight[o * in + i] += g[o] * xs[i];
                if (dx) dx->sample(b)[i] += g[o] * weight[o * in + i];
            }
        }
    }
}

Tensor conv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                      std::size_t filters, std::size_t kernel, std::size_t stride) {
    const auto g = conv_geometry(x.length(), kernel, stride);
    const std::size_t channels = x.channels();
    check_size(weight.size(), filters * channels * kernel, "conv1d weight");
    check_size(bias.size(), filters, "conv1d bias");
    Tensor y(x.batch(), filters, g.out_length);
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t f = 0; f < filters; ++f)
            for (std::size_t t = 0; t < g.out_length; ++t) {
                double acc = bias[f];
                for (std::size_t c = 0; c < channels; ++c)
                    for (std::size_t r = 0; r < kernel; ++r) {
                        const auto pos = static_cast<std::ptrdiff_t>(t * stride + r) -
                                         static_cast<std::ptrdiff_t>(g.pad_left);
                        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(x.length())) continue;
                        acc += weight[(f * channels + c) * kernel + r] * x(b, c, static_cast<std::size_t>(pos));
                    }
                y(b, f, t) = acc;
            }
    return y;
}

void conv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy, std::size_t kernel,
                     std::size_t stride, std::span<double> dweight, std::span<double> dbias, Tensor* dx) {
    const auto g = conv_geometry(x.length(), kernel, stride);
    const std::size_t channels = x.channels();
    const std::size_t filters = dy.channels();
    check_size(weight.size(), filters * channels * kernel, "conv1d weight");
    std::fill(dweight.begin(), dweight.end(), 0.0);
    std::fill(dbias.begin(), dbias.end(), 0.0);
    if (dx) *dx = Tensor(x.batch(), channels, x.length());
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t f = 0; f < filters; ++f)
            for (std::size_t t = 0; t < g.out_length; ++t) {
                const double gy = dy(b, f, t);
                dbias[f] += gy;
                for (std::size_t c = 0; c < channels; ++c)
                    for (std::size_t r = 0; r < kernel; ++r) {
                        const auto pos = static_cast<std::ptrdiff_t>(t * stride + r) -
                                         static_cast<std::ptrdiff_t>(g.pad_left);
                        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(x.length())) continue;
                        const auto p = static_cast<std::size_t>(pos);
                        dweight[(f * channels + c) * kernel + r] += gy * x(b, c, p);
                        if (dx) (*dx)(b, c, p) += gy * weight[(f * channels + c) * kernel + r];
                    }
            }
}

Tensor deconv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                        std::size_t filters, std::size_t kernel, std::size_t upsample) {
    if (upsample == 0) throw ParameterError("deconv1d: upsample must be >= 1");
    return conv1d_forward(upsample_zero_insert(x, upsample), weight, bias, filters, kernel, 1);
}

void deconv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                       std::size_t kernel, std::size_t upsample, std::span<double> dweight,
                       std::span<double> dbias, Tensor* dx) {
    if (upsample == 0) throw ParameterError("deconv1d: upsample must be >= 1");
    const Tensor u = upsample_zero_insert(x, upsample);
    if (!dx) {
        conv1d_backward(u, weight, dy, kernel, 1, dweight, dbias, nullptr);
        return;
    }
    Tensor du;
    conv1d_backward(u, weight, dy, kernel, 1, dweight, dbias, &du);
    *dx = downsample_take(du, upsample);
}

Tensor batchnorm_forward_train(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               double eps, BatchNormCache& cache) {
    const std::size_t channels = x.channels();
    check_size(gamma.size(), channels, "batchnorm gamma");
    check_size(beta.size(), channels, "batchnorm beta");
    const double count = static_cast<double>(x.batch() * x.length());
    cache.mean.assign(channels, 0.0);
    cache.var.assign(channels, 0.0);
    cache.inv_std.assign(channels, 0.0);
    cache.normalized = Tensor(x.batch(), channels, x.length());
    Tensor y(x.batch(), channels, x.length());
    for (std::size_t c = 0; c < channels; ++c) {
        double sum = 0.0;
        for (std::size_t b = 0; b < x.batch(); ++b)
            for (std::size_t l = 0; l < x.length(); ++l) sum += x(b, c, l);
        const double mean = sum / count;
        double sq = 0.0;
        for (std::size_t b = 0; b < x.batch(); ++b)
            for (std::size_t l = 0; l < x.length(); ++l) sq += (x(b, c, l) - mean) * (x(b, c, l) - mean);
        const double var = sq / count;
        const double inv_std = 1.0 / std::sqrt(var + eps);
        cache.mean[c] = mean;
        cache.var[c] = var;
        cache.inv_std[c] = inv_std;
        for (std::size_t b = 0; b < x.batch(); ++b)
            for (std::size_t l = 0; l < x.length(); ++l) {
                const double n = (x(b, c, l) - mean) * inv_std;
                cache.normalized(b, c, l) = n;
                y(b, c, l) = gamma[c] * n + beta[c];
            }
    }
    return y;
}

Tensor batchnorm_forward_infer(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               std::span<const double> running_mean, std::span<const double> running_var,
                               double eps) {
    Tensor y(x.batch(), x.channels(), x.length());
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t c = 0; c < x.channels(); ++c)
            for (std::size_t l = 0; l < x.length(); ++l)
                y(b, c, l) = gamma[c] * (x(b, c, l) - running_mean[c]) / std::sqrt(running_var[c] + eps) + beta[c];
    return y;
}

void batchnorm_backward_train(const BatchNormCache& cache, std::span<const double> gamma, const Tensor& dy,
                              std::span<double> dgamma, std::span<double> dbeta, Tensor& dx) {
    const Tensor& n = cache.normalized;
    const double count = static_cast<double>(dy.batch() * dy.length());
    dx = Tensor(dy.batch(), dy.channels(), dy.length());
    for (std::size_t c = 0; c < dy.channels(); ++c) {
        double sum_dy = 0.0;
        double sum_dy_n = 0.0;
        for (std::size_t b = 0; b < dy.batch(); ++b)
            for (std::size_t l = 0; l < dy.length(); ++l) {
                sum_dy += dy(b, c, l);
                sum_dy_n += dy(b, c, l) * n(b, c, l);
            }
        dgamma[c] = sum_dy_n;
        dbeta[c] = sum_dy;
        const double scale = gamma[c] * cache.inv_std[c];
        for (std::size_t b = 0; b < dy.batch(); ++b)
            for (std::size_t l = 0; l < dy.length(); ++l)
                dx(b, c, l) = scale * (dy(b, c, l) - sum_dy / count - n(b, c, l) * sum_dy_n / count);
    }
}

}  // namespace tsclust::nn::reference

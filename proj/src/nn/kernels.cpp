#include "tsclust/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "tsclust/error.hpp"
#include "tsclust/nn/layer.hpp"

namespace tsclust::nn::kernels {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// Block widths are fixed (not derived from the thread count) so every output
// element is produced by the same GEMM call shape on every run.
constexpr std::size_t kColumnBlock = 256;
constexpr std::size_t kRowBlock = 16;

template <class Fn>
void for_each_block(std::size_t n, std::size_t block, Fn&& fn) {
    const auto count = static_cast<std::ptrdiff_t>((n + block - 1) / block);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto start = static_cast<std::size_t>(i) * block;
        fn(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(std::min(block, n - start)));
    }
}

template <class Fn>
void for_each_index(std::size_t n, Fn&& fn) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) fn(static_cast<std::size_t>(i));
}

void check_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(want) + " values, got " +
                             std::to_string(got));
    }
}

// Channel-major copy: out[c][b * L + l] = x[b][c][l].
RowMatrix to_channel_major(const Tensor& x) {
    const std::size_t L = x.length();
    RowMatrix out(x.channels(), x.batch() * L);
    for_each_index(x.batch(), [&](std::size_t b) {
        for (std::size_t c = 0; c < x.channels(); ++c)
            std::copy_n(&x(b, c, 0), L, &out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * L)));
    });
    return out;
}

// Signed input position read by output t through tap r.
inline std::ptrdiff_t conv_source(std::size_t t, std::size_t r, const ConvGeometry& g) {
    return static_cast<std::ptrdiff_t>(t * g.stride + r) - static_cast<std::ptrdiff_t>(g.pad_left);
}

// Unfolded conv input: cols[c * K + r][b * Lout + t] = x[b][c][t * s + r - pad].
RowMatrix im2col(const Tensor& x, const ConvGeometry& g) {
    const std::size_t K = g.kernel;
    const std::size_t Lout = g.out_length;
    const auto Lin = static_cast<std::ptrdiff_t>(x.length());
    RowMatrix cols = RowMatrix::Zero(x.channels() * K, x.batch() * Lout);
    for_each_index(x.batch(), [&](std::size_t b) {
        for (std::size_t c = 0; c < x.channels(); ++c)
            for (std::size_t r = 0; r < K; ++r) {
                double* row = &cols(static_cast<Eigen::Index>(c * K + r), static_cast<Eigen::Index>(b * Lout));
                for (std::size_t t = 0; t < Lout; ++t) {
                    const auto pos = conv_source(t, r, g);
                    if (pos >= 0 && pos < Lin) row[t] = x(b, c, static_cast<std::size_t>(pos));
                }
            }
    });
    return cols;
}

// Adjoint of im2col: accumulate unfolded gradients back onto input positions.
void col2im(const RowMatrix& dcols, const ConvGeometry& g, Tensor& dx) {
    const std::size_t K = g.kernel;
    const std::size_t Lout = g.out_length;
    const auto Lin = static_cast<std::ptrdiff_t>(dx.length());
    for_each_index(dx.batch(), [&](std::size_t b) {
        for (std::size_t c = 0; c < dx.channels(); ++c)
            for (std::size_t r = 0; r < K; ++r) {
                const double* row =
                    &dcols(static_cast<Eigen::Index>(c * K + r), static_cast<Eigen::Index>(b * Lout));
                for (std::size_t t = 0; t < Lout; ++t) {
                    const auto pos = conv_source(t, r, g);
                    if (pos >= 0 && pos < Lin) dx(b, c, static_cast<std::size_t>(pos)) += row[t];
                }
            }
    });
}

// [f][c][r] -> [f * K + r][c]
RowMatrix taps_by_channel(std::span<const double> weight, std::size_t filters, std::size_t channels,
                          std::size_t kernel) {
    RowMatrix out(filters * kernel, channels);
    for (std::size_t f = 0; f < filters; ++f)
        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t r = 0; r < kernel; ++r)
                out(static_cast<Eigen::Index>(f * kernel + r), static_cast<Eigen::Index>(c)) =
                    weight[(f * channels + c) * kernel + r];
    return out;
}

// For the upsampled convolution, input sample i contributes through tap r to
// output position i * upsample - r + pad (when that is inside the output).
inline std::ptrdiff_t deconv_target(std::size_t i, std::size_t r, std::size_t upsample, std::size_t pad) {
    return static_cast<std::ptrdiff_t>(i * upsample + pad) - static_cast<std::ptrdiff_t>(r);
}

}  // namespace

Tensor dense_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                     std::size_t units) {
    const std::size_t in = x.features();
    check_size(weight.size(), units * in, "dense weight");
    check_size(bias.size(), units, "dense bias");
    Tensor y(x.batch(), units, 1);
    const ConstMatrixMap X(x.data(), static_cast<Eigen::Index>(x.batch()), static_cast<Eigen::Index>(in));
    const ConstMatrixMap W(weight.data(), static_cast<Eigen::Index>(units), static_cast<Eigen::Index>(in));
    MatrixMap Y(y.data(), static_cast<Eigen::Index>(x.batch()), static_cast<Eigen::Index>(units));
    const Eigen::Map<const Eigen::RowVectorXd> B(bias.data(), static_cast<Eigen::Index>(units));
    for_each_block(units, kColumnBlock, [&](Eigen::Index start, Eigen::Index width) {
        Y.middleCols(start, width).noalias() = X * W.middleRows(start, width).transpose();
        Y.middleCols(start, width).rowwise() += B.segment(start, width);
    });
    return y;
}

void dense_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                    std::span<double> dweight, std::span<double> dbias, Tensor* dx) {
    const std::size_t in = x.features();
    const std::size_t units = dy.features();
    const auto rows = static_cast<Eigen::Index>(x.batch());
    check_size(weight.size(), units * in, "dense weight");
    check_size(dweight.size(), units * in, "dense weight gradient");
    const ConstMatrixMap X(x.data(), rows, static_cast<Eigen::Index>(in));
    const ConstMatrixMap W(weight.data(), static_cast<Eigen::Index>(units), static_cast<Eigen::Index>(in));
    const ConstMatrixMap G(dy.data(), rows, static_cast<Eigen::Index>(units));
    MatrixMap dW(dweight.data(), static_cast<Eigen::Index>(units), static_cast<Eigen::Index>(in));
    for_each_block(units, kRowBlock, [&](Eigen::Index start, Eigen::Index height) {
        dW.middleRows(start, height).noalias() = G.middleCols(start, height).transpose() * X;
    });
    std::fill(dbias.begin(), dbias.end(), 0.0);
    for (std::size_t b = 0; b < x.batch(); ++b) {
        const double* g = dy.data() + b * units;
        for (std::size_t u = 0; u < units; ++u) dbias[u] += g[u];
    }
    if (dx) {
        *dx = Tensor(x.batch(), x.channels(), x.length());
        MatrixMap dX(dx->data(), rows, static_cast<Eigen::Index>(in));
        for_each_block(in, kColumnBlock, [&](Eigen::Index start, Eigen::Index width) {
            dX.middleCols(start, width).noalias() = G * W.middleCols(start, width);
        });
    }
}

Tensor conv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                      std::size_t filters, std::size_t kernel, std::size_t stride) {
    const auto g = conv_geometry(x.length(), kernel, stride);
    const std::size_t channels = x.channels();
    check_size(weight.size(), filters * channels * kernel, "conv1d weight");
    check_size(bias.size(), filters, "conv1d bias");
    const RowMatrix cols = im2col(x, g);
    const ConstMatrixMap W(weight.data(), static_cast<Eigen::Index>(filters),
                           static_cast<Eigen::Index>(channels * kernel));
    RowMatrix out(filters, x.batch() * g.out_length);
    for_each_block(static_cast<std::size_t>(out.cols()), kColumnBlock, [&](Eigen::Index start, Eigen::Index width) {
        out.middleCols(start, width).noalias() = W * cols.middleCols(start, width);
    });
    Tensor y(x.batch(), filters, g.out_length);
    const std::size_t Lout = g.out_length;
    for_each_index(x.batch(), [&](std::size_t b) {
        for (std::size_t f = 0; f < filters; ++f) {
            const double* src = &out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(b * Lout));
            double* dst = &y(b, f, 0);
            for (std::size_t t = 0; t < Lout; ++t) dst[t] = src[t] + bias[f];
        }
    });
    return y;
}

void conv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy, std::size_t kernel,
                     std::size_t stride, std::span<double> dweight, std::span<double> dbias, Tensor* dx) {
    const auto g = conv_geometry(x.length(), kernel, stride);
    const std::size_t channels = x.channels();
    const std::size_t filters = dy.channels();
    check_size(weight.size(), filters * channels * kernel, "conv1d weight");
    check_size(dweight.size(), filters * channels * kernel, "conv1d weight gradient");
    if (dy.length() != g.out_length || dy.batch() != x.batch()) throw DimensionError("conv1d backward: dy shape");

    const RowMatrix cols = im2col(x, g);
    const RowMatrix G = to_channel_major(dy);
    MatrixMap dW(dweight.data(), static_cast<Eigen::Index>(filters), static_cast<Eigen::Index>(channels * kernel));
    for_each_block(filters, kRowBlock, [&](Eigen::Index start, Eigen::Index height) {
        dW.middleRows(start, height).noalias() = G.middleRows(start, height) * cols.transpose();
    });
    for (std::size_t f = 0; f < filters; ++f) dbias[f] = G.row(static_cast<Eigen::Index>(f)).sum();

    if (dx) {
        const ConstMatrixMap W(weight.data(), static_cast<Eigen::Index>(filters),
                               static_cast<Eigen::Index>(channels * kernel));
        RowMatrix dcols(channels * kernel, G.cols());
        for_each_block(static_cast<std::size_t>(G.cols()), kColumnBlock, [&](Eigen::Index start, Eigen::Index width) {
            dcols.middleCols(start, width).noalias() = W.transpose() * G.middleCols(start, width);
        });
        *dx = Tensor(x.batch(), channels, x.length());
        col2im(dcols, g, *dx);
    }
}

Tensor deconv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                        std::size_t filters, std::size_t kernel, std::size_t upsample) {
    if (upsample == 0) throw ParameterError("deconv1d: upsample must be >= 1");
    const std::size_t channels = x.channels();
    const std::size_t Lin = x.length();
    const std::size_t Lout = Lin * upsample;
    check_size(weight.size(), filters * channels * kernel, "deconv1d weight");
    check_size(bias.size(), filters, "deconv1d bias");
    const auto g = conv_geometry(Lout, kernel, 1);

    // Only the nonzero samples of the upsampled signal are multiplied:
    // Z[f * K + r][b * Lin + i] = sum_c W[f][c][r] x[b][c][i].
    const RowMatrix Wt = taps_by_channel(weight, filters, channels, kernel);
    const RowMatrix X = to_channel_major(x);
    RowMatrix Z(filters * kernel, X.cols());
    for_each_block(static_cast<std::size_t>(X.cols()), kColumnBlock, [&](Eigen::Index start, Eigen::Index width) {
        Z.middleCols(start, width).noalias() = Wt * X.middleCols(start, width);
    });

    Tensor y(x.batch(), filters, Lout);
    for_each_index(x.batch(), [&](std::size_t b) {
        for (std::size_t f = 0; f < filters; ++f) {
            double* dst = &y(b, f, 0);
            std::fill_n(dst, Lout, bias[f]);
            for (std::size_t r = 0; r < kernel; ++r) {
                const double* src = &Z(static_cast<Eigen::Index>(f * kernel + r), static_cast<Eigen::Index>(b * Lin));
                for (std::size_t i = 0; i < Lin; ++i) {
                    const auto t = deconv_target(i, r, upsample, g.pad_left);
                    if (t >= 0 && t < static_cast<std::ptrdiff_t>(Lout)) dst[t] += src[i];
                }
            }
        }
    });
    return y;
}

void deconv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                       std::size_t kernel, std::size_t upsample, std::span<double> dweight,
                       std::span<double> dbias, Tensor* dx) {
    if (upsample == 0) throw ParameterError("deconv1d: upsample must be >= 1");
    const std::size_t channels = x.channels();
    const std::size_t filters = dy.channels();
    const std::size_t Lin = x.length();
    const std::size_t Lout = Lin * upsample;
    check_size(weight.size(), filters * channels * kernel, "deconv1d weight");
    check_size(dweight.size(), filters * channels * kernel, "deconv1d weight gradient");
    if (dy.length() != Lout || dy.batch() != x.batch()) throw DimensionError("deconv1d backward: dy shape");
    const auto g = conv_geometry(Lout, kernel, 1);

    RowMatrix dZ = RowMatrix::Zero(filters * kernel, x.batch() * Lin);
    for_each_index(x.batch(), [&](std::size_t b) {
        for (std::size_t f = 0; f < filters; ++f) {
            const double* src = &dy(b, f, 0);
            for (std::size_t r = 0; r < kernel; ++r) {
                double* row = &dZ(static_cast<Eigen::Index>(f * kernel + r), static_cast<Eigen::Index>(b * Lin));
                for (std::size_t i = 0; i < Lin; ++i) {
                    const auto t = deconv_target(i, r, upsample, g.pad_left);
                    if (t >= 0 && t < static_cast<std::ptrdiff_t>(Lout)) row[i] = src[t];
                }
            }
        }
    });
    for (std::size_t f = 0; f < filters; ++f) {
        double acc = 0.0;
        for (std::size_t b = 0; b < dy.batch(); ++b)
            for (std::size_t t = 0; t < Lout; ++t) acc += dy(b, f, t);
        dbias[f] = acc;
    }

    const RowMatrix X = to_channel_major(x);
    RowMatrix dWt(filters * kernel, channels);
    for_each_block(filters * kernel, kRowBlock, [&](Eigen::Index start, Eigen::Index height) {
        dWt.middleRows(start, height).noalias() = dZ.middleRows(start, height) * X.transpose();
    });
    for (std::size_t f = 0; f < filters; ++f)
        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t r = 0; r < kernel; ++r)
                dweight[(f * channels + c) * kernel + r] =
                    dWt(static_cast<Eigen::Index>(f * kernel + r), static_cast<Eigen::Index>(c));

    if (dx) {
        const RowMatrix Wt = taps_by_channel(weight, filters, channels, kernel);
        RowMatrix dX(channels, dZ.cols());
        for_each_block(static_cast<std::size_t>(dZ.cols()), kColumnBlock, [&](Eigen::Index start, Eigen::Index width) {
            dX.middleCols(start, width).noalias() = Wt.transpose() * dZ.middleCols(start, width);
        });
        *dx = Tensor(x.batch(), channels, Lin);
        for_each_index(x.batch(), [&](std::size_t b) {
            for (std::size_t c = 0; c < channels; ++c)
                std::copy_n(&dX(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * Lin)), Lin, &(*dx)(b, c, 0));
        });
    }
}

Tensor batchnorm_forward_train(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               double eps, BatchNormCache& cache) {
    const std::size_t channels = x.channels();
    const std::size_t L = x.length();
    check_size(gamma.size(), channels, "batchnorm gamma");
    check_size(beta.size(), channels, "batchnorm beta");
    const double count = static_cast<double>(x.batch() * L);
    cache.mean.assign(channels, 0.0);
    cache.var.assign(channels, 0.0);
    cache.inv_std.assign(channels, 0.0);
    cache.normalized = Tensor(x.batch(), channels, L);
    Tensor y(x.batch(), channels, L);
    for_each_index(channels, [&](std::size_t c) {
        double sum = 0.0;
        for (std::size_t b = 0; b < x.batch(); ++b) {
            const double* row = &x(b, c, 0);
            for (std::size_t l = 0; l < L; ++l) sum += row[l];
        }
        const double mean = sum / count;
        double sq = 0.0;
        for (std::size_t b = 0; b < x.batch(); ++b) {
            const double* row = &x(b, c, 0);
            for (std::size_t l = 0; l < L; ++l) sq += (row[l] - mean) * (row[l] - mean);
        }
        const double var = sq / count;
        const double inv_std = 1.0 / std::sqrt(var + eps);
        cache.mean[c] = mean;
        cache.var[c] = var;
        cache.inv_std[c] = inv_std;
        for (std::size_t b = 0; b < x.batch(); ++b) {
            const double* row = &x(b, c, 0);
            double* n = &cache.normalized(b, c, 0);
            double* out = &y(b, c, 0);
            for (std::size_t l = 0; l < L; ++l) {
                n[l] = (row[l] - mean) * inv_std;
                out[l] = gamma[c] * n[l] + beta[c];
            }
        }
    });
    return y;
}

Tensor batchnorm_forward_infer(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               std::span<const double> running_mean, std::span<const double> running_var,
                               double eps) {
    const std::size_t channels = x.channels();
    check_size(gamma.size(), channels, "batchnorm gamma");
    check_size(running_mean.size(), channels, "batchnorm running mean");
    std::vector<double> scale(channels);
    std::vector<double> shift(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        scale[c] = gamma[c] / std::sqrt(running_var[c] + eps);
        shift[c] = beta[c] - scale[c] * running_mean[c];
    }
    Tensor y(x.batch(), channels, x.length());
    for_each_index(x.batch(), [&](std::size_t b) {
        for (std::size_t c = 0; c < channels; ++c) {
            const double* row = &x(b, c, 0);
            double* out = &y(b, c, 0);
            for (std::size_t l = 0; l < x.length(); ++l) out[l] = scale[c] * row[l] + shift[c];
        }
    });
    return y;
}

void batchnorm_backward_train(const BatchNormCache& cache, std::span<const double> gamma, const Tensor& dy,
                              std::span<double> dgamma, std::span<double> dbeta, Tensor& dx) {
    const Tensor& n = cache.normalized;
    const std::size_t L = dy.length();
    const double count = static_cast<double>(dy.batch() * L);
    dx = Tensor(dy.batch(), dy.channels(), L);
    for_each_index(dy.channels(), [&](std::size_t c) {
        double sum_dy = 0.0;
        double sum_dy_n = 0.0;
        for (std::size_t b = 0; b < dy.batch(); ++b) {
            const double* g = &dy(b, c, 0);
            const double* nr = &n(b, c, 0);
            for (std::size_t l = 0; l < L; ++l) {
                sum_dy += g[l];
                sum_dy_n += g[l] * nr[l];
            }
        }
        dgamma[c] = sum_dy_n;
        dbeta[c] = sum_dy;
        const double scale = gamma[c] * cache.inv_std[c];
        const double mean_dy = sum_dy / count;
        const double mean_dy_n = sum_dy_n / count;
        for (std::size_t b = 0; b < dy.batch(); ++b) {
            const double* g = &dy(b, c, 0);
            const double* nr = &n(b, c, 0);
            double* out = &dx(b, c, 0);
            for (std::size_t l = 0; l < L; ++l) out[l] = scale * (g[l] - mean_dy - nr[l] * mean_dy_n);
        }
    });
}

}  // namespace tsclust::nn::kernels

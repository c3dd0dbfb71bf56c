#pragma once

// Batched layer kernels. The functions in `kernels` are the production path
// (OpenMP over fixed-size blocks, Eigen GEMM inside each block); those in
// `reference` are straightforward serial loops over the defining formulas and
// exist for testing and benchmarking. Both namespaces expose the same
// signatures and agree to rounding.
//
// Activations are not applied here; callers add them on top of the affine
// result. Backward functions overwrite the gradient outputs.

#include <cstddef>
#include <span>
#include <vector>

#include "tsclust/nn/tensor.hpp"

namespace tsclust::nn {

struct BatchNormCache {
    std::vector<double> mean;
    std::vector<double> var;
    std::vector<double> inv_std;
    Tensor normalized;
};

namespace kernels {

Tensor dense_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                     std::size_t units);
void dense_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                    std::span<double> dweight, std::span<double> dbias, Tensor* dx);

/// Same-padded strided convolution, output length ceil(L / stride).
Tensor conv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                      std::size_t filters, std::size_t kernel, std::size_t stride);
void conv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy, std::size_t kernel,
                     std::size_t stride, std::span<double> dweight, std::span<double> dbias, Tensor* dx);

/// Zero-insertion upsampling (x[i] lands at i * upsample) followed by a
/// same-padded stride-1 convolution. Output length L * upsample.
Tensor deconv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                        std::size_t filters, std::size_t kernel, std::size_t upsample);
void deconv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                       std::size_t kernel, std::size_t upsample, std::span<double> dweight,
                       std::span<double> dbias, Tensor* dx);

/// Per-channel statistics over batch and length.
Tensor batchnorm_forward_train(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               double eps, BatchNormCache& cache);
Tensor batchnorm_forward_infer(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               std::span<const double> running_mean, std::span<const double> running_var,
                               double eps);
void batchnorm_backward_train(const BatchNormCache& cache, std::span<const double> gamma, const Tensor& dy,
                              std::span<double> dgamma, std::span<double> dbeta, Tensor& dx);

}  // namespace kernels

namespace reference {

Tensor dense_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                     std::size_t units);
void dense_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                    std::span<double> dweight, std::span<double> dbias, Tensor* dx);

Tensor conv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                      std::size_t filters, std::size_t kernel, std::size_t stride);
void conv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy, std::size_t kernel,
                     std::size_t stride, std::span<double> dweight, std::span<double> dbias, Tensor* dx);

Tensor deconv1d_forward(const Tensor& x, std::span<const double> weight, std::span<const double> bias,
                        std::size_t filters, std::size_t kernel, std::size_t upsample);
void deconv1d_backward(const Tensor& x, std::span<const double> weight, const Tensor& dy,
                       std::size_t kernel, std::size_t upsample, std::span<double> dweight,
                       std::span<double> dbias, Tensor* dx);

Tensor batchnorm_forward_train(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               double eps, BatchNormCache& cache);
Tensor batchnorm_forward_infer(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                               std::span<const double> running_mean, std::span<const double> running_var,
                               double eps);
void batchnorm_backward_train(const BatchNormCache& cache, std::span<const double> gamma, const Tensor& dy,
                              std::span<double> dgamma, std::span<double> dbeta, Tensor& dx);

}  // namespace reference

}  // namespace tsclust::nn

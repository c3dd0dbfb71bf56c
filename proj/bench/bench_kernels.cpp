#include <benchmark/benchmark.h>

#include <random>

#include "tsclust/distances.hpp"
#include "tsclust/nn/kernels.hpp"

using namespace tsclust;
using namespace tsclust::nn;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Second conv of the autoencoder: 64 -> 128 channels, kernel 5, stride 2, on 192 samples.
struct ConvCase {
    std::size_t batch = 32, in = 64, filters = 128, kernel = 5, stride = 2, length = 192;
    Tensor x{batch, in, length, noise(batch * in * length, 1)};
    std::vector<double> w = noise(filters * in * kernel, 2), b = noise(filters, 3);
};

template <auto Forward>
void conv_forward(benchmark::State& state) {
    ConvCase c;
    for (auto _ : state) benchmark::DoNotOptimize(Forward(c.x, c.w, c.b, c.filters, c.kernel, c.stride));
}

template <auto Forward, auto Backward>
void conv_backward(benchmark::State& state) {
    ConvCase c;
    const auto y = Forward(c.x, c.w, c.b, c.filters, c.kernel, c.stride);
    const Tensor dy(y.batch(), y.channels(), y.length(), noise(y.size(), 4));
    std::vector<double> dw(c.w.size()), db(c.b.size());
    Tensor dx;
    for (auto _ : state) {
        Backward(c.x, c.w, dy, c.kernel, c.stride, dw, db, &dx);
        benchmark::DoNotOptimize(dx.values().data());
    }
}

template <auto Forward>
void deconv_forward(benchmark::State& state) {
    const std::size_t batch = 32, in = 128, filters = 64, kernel = 5, length = 96;
    const Tensor x(batch, in, length, noise(batch * in * length, 5));
    const auto w = noise(filters * in * kernel, 6), b = noise(filters, 7);
    for (auto _ : state) benchmark::DoNotOptimize(Forward(x, w, b, filters, kernel, 2));
}

template <auto Forward>
void dense_forward(benchmark::State& state) {
    const std::size_t batch = 32, in = 100, units = 128 * 96;
    const Tensor x(batch, in, 1, noise(batch * in, 8));
    const auto w = noise(units * in, 9), b = noise(units, 10);
    for (auto _ : state) benchmark::DoNotOptimize(Forward(x, w, b, units));
}

Matrix series(std::size_t n, std::size_t t) { return Matrix(n, t, noise(n * t, 11)); }

void distances_parallel(benchmark::State& state) {
    const auto x = series(static_cast<std::size_t>(state.range(0)), 384);
    const distances::Metric m{distances::MetricKind::dtw, 10};
    for (auto _ : state) benchmark::DoNotOptimize(distances::distance_matrix(x, m));
}

void distances_serial(benchmark::State& state) {
    const auto x = series(static_cast<std::size_t>(state.range(0)), 384);
    const distances::Metric m{distances::MetricKind::dtw, 10};
    for (auto _ : state) benchmark::DoNotOptimize(distances::reference::distance_matrix(x, m));
}

}  // namespace

BENCHMARK(conv_forward<kernels::conv1d_forward>)->Name("conv1d_forward/kernels")->Unit(benchmark::kMillisecond);
BENCHMARK(conv_forward<reference::conv1d_forward>)->Name("conv1d_forward/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<kernels::conv1d_forward, kernels::conv1d_backward>)
    ->Name("conv1d_backward/kernels")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<reference::conv1d_forward, reference::conv1d_backward>)
    ->Name("conv1d_backward/reference")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(deconv_forward<kernels::deconv1d_forward>)->Name("deconv1d_forward/kernels")->Unit(benchmark::kMillisecond);
BENCHMARK(deconv_forward<reference::deconv1d_forward>)->Name("deconv1d_forward/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(dense_forward<kernels::dense_forward>)->Name("dense_forward/kernels")->Unit(benchmark::kMillisecond);
BENCHMARK(dense_forward<reference::dense_forward>)->Name("dense_forward/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(distances_parallel)->Name("dtw_matrix/parallel")->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(distances_serial)->Name("dtw_matrix/serial")->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

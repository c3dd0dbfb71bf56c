#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tsclust/cae.hpp"
#include "tsclust/error.hpp"

using namespace tsclust;

namespace {

Matrix smooth_series(std::mt19937_64& rng, std::size_t n, std::size_t len) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(n, len);
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = 6.28 * u(rng), amp = 0.2 + 0.5 * u(rng);
        for (std::size_t t = 0; t < len; ++t)
            m(i, t) = 1.0 + amp * std::sin(phase + 6.28 * static_cast<double>(t) / static_cast<double>(len));
    }
    return m;
}

}  // namespace

TEST_CASE("paper architecture shapes") {
    const auto layers = cae::build_paper_architecture(384, 20);
    REQUIRE(layers.size() == 14);
    nn::Network net({1, 384}, layers);
    CHECK(net.layer_output_shape(4).size() == 128 * 96);
    CHECK(net.layer_output_shape(cae::kLatentLayer).size() == 20);
    CHECK(layers[7].units == 12288);
    CHECK(net.output_shape() == nn::FeatureShape{1, 384});

    nn::Network tiny({1, 8}, cae::build_paper_architecture(8, 2));
    CHECK(tiny.output_shape() == nn::FeatureShape{1, 8});
    CHECK(tiny.layer_output_shape(cae::kLatentLayer).size() == 2);
    CHECK_THROWS_AS(cae::build_paper_architecture(10, 2), ParameterError);

    cae::CAEConfig bad;
    bad.latent = 384;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("scaling map covers the data range inside tanh") {
    Matrix m(2, 3, {0.0, 2.0, 4.0, 1.0, 3.0, -4.0});
    const auto s = cae::ScalingMap::fit(m);
    CHECK(s.apply(-4.0) == doctest::Approx(-0.9));
    CHECK(s.apply(4.0) == doctest::Approx(0.9));
    CHECK(s.invert(s.apply(1.25)) == doctest::Approx(1.25));
}

TEST_CASE("overfits ten copies of one series") {
    std::mt19937_64 rng(1);
    const auto base = smooth_series(rng, 1, 32);
    Matrix copies(10, 32);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t t = 0; t < 32; ++t) copies(i, t) = base(0, t);
    cae::CAEConfig cfg;
    cfg.length = 32;
    cfg.latent = 4;
    cfg.epochs = 200;
    cfg.seed = 3;
    const auto model = cae::train(copies, cfg);
    CHECK(model.loss_history.size() == 200);
    CHECK(cae::reconstruction_mse(model, copies) < 1e-3);
}

TEST_CASE("memorizes a dataset no larger than the latent size without penalty") {
    std::mt19937_64 rng(2);
    const auto x = smooth_series(rng, 4, 16);
    cae::CAEConfig cfg;
    cfg.length = 16;
    cfg.latent = 4;
    cfg.epochs = 300;
    cfg.l2 = 0.0;
    const auto model = cae::train(x, cfg);
    CHECK(cae::reconstruction_mse(model, x) < 1e-3);
}

TEST_CASE("training is deterministic and makes progress") {
    std::mt19937_64 rng(4);
    const auto x = smooth_series(rng, 40, 16);
    cae::CAEConfig cfg;
    cfg.length = 16;
    cfg.latent = 3;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    cfg.seed = 11;
    const auto a = cae::train(x, cfg);
    const auto b = cae::train(x, cfg);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.loss_history.back() < a.loss_history.front());
    for (std::size_t i = 0; i < a.network.size(); ++i) CHECK(a.network.params()[i].weight == b.network.params()[i].weight);
}

TEST_CASE("diverging training aborts with guidance") {
    std::mt19937_64 rng(4);
    const auto x = smooth_series(rng, 8, 16);
    cae::CAEConfig cfg;
    cfg.length = 16;
    cfg.latent = 3;
    cfg.epochs = 3;
    cfg.learning_rate = 1e200;
    cfg.optimizer = nn::OptimizerKind::sgd;
    CHECK_THROWS_AS(cae::train(x, cfg), TrainingError);
}

TEST_CASE("encode is per-series and batch independent") {
    std::mt19937_64 rng(5);
    auto x = smooth_series(rng, 6, 16);
    for (std::size_t t = 0; t < 16; ++t) x(4, t) = x(1, t);
    cae::CAEConfig cfg;
    cfg.length = 16;
    cfg.latent = 3;
    cfg.epochs = 2;
    const auto model = cae::train(x, cfg);
    const auto latent = cae::encode(model, x);
    CHECK(latent.rows() == 6);
    CHECK(latent.cols() == 3);
    CHECK(std::vector<double>(latent.row(1).begin(), latent.row(1).end()) ==
          std::vector<double>(latent.row(4).begin(), latent.row(4).end()));
    Matrix only(1, 16, std::vector<double>(x.row(2).begin(), x.row(2).end()));
    const auto single = cae::encode(model, only);
    CHECK(std::vector<double>(single.row(0).begin(), single.row(0).end()) ==
          std::vector<double>(latent.row(2).begin(), latent.row(2).end()));
    CHECK(cae::encode(model, only).values() == single.values());
    CHECK_THROWS_AS(cae::encode(model, Matrix(2, 8)), DimensionError);
}

TEST_CASE("normalize_latent") {
    const auto z = cae::normalize_latent(Matrix(2, 2, {1.0, 5.0, 3.0, 5.0}));
    CHECK(z(0, 0) == doctest::Approx(-1.0));
    CHECK(z(1, 0) == doctest::Approx(1.0));
    CHECK(z(0, 1) == 0.0);
    CHECK(z(1, 1) == 0.0);

    std::mt19937_64 rng(6);
    const auto m = testing::random_matrix(rng, 30, 5, -3.0, 7.0);
    const auto once = cae::normalize_latent(m);
    const auto twice = cae::normalize_latent(once);
    CHECK(testing::max_abs_diff(once.values(), twice.values()) < 1e-12);
    for (std::size_t j = 0; j < 5; ++j) {
        double mean = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < 30; ++i) mean += once(i, j);
        mean /= 30.0;
        for (std::size_t i = 0; i < 30; ++i) sq += (once(i, j) - mean) * (once(i, j) - mean);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(std::sqrt(sq / 30.0) - 1.0) < 1e-9);
    }
}

TEST_CASE("model save and load round trip") {
    std::mt19937_64 rng(7);
    const auto x = smooth_series(rng, 5, 16);
    cae::CAEConfig cfg;
    cfg.length = 16;
    cfg.latent = 3;
    cfg.epochs = 2;
    const auto model = cae::train(x, cfg);
    const auto dir = testing::scratch_dir("cae_model");
    cae::save_model(dir / "m", model);
    const auto back = cae::load_model(dir / "m");
    CHECK(back.loss_history == model.loss_history);
    CHECK(back.scaling.min == model.scaling.min);
    CHECK(back.scaling.max == model.scaling.max);
    CHECK(back.config.latent == 3);
    CHECK(cae::encode(back, x).values() == cae::encode(model, x).values());
    CHECK(cae::reconstruct(back, x).values() == cae::reconstruct(model, x).values());
}

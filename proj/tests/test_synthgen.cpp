#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "support.hpp"
#include "tsclust/csv.hpp"
#include "tsclust/error.hpp"
#include "tsclust/synthgen.hpp"
#include "tsclust/transforms.hpp"

using namespace tsclust;
using namespace tsclust::synthgen;

namespace {

const LabeledDataset& default_dataset() {
    static const LabeledDataset ds = generate(GeneratorConfig{});
    return ds;
}

std::size_t count_label(const TimeSeriesDataset& d, int label) {
    return static_cast<std::size_t>(std::count(d.labels.begin(), d.labels.end(), label));
}

}  // namespace

TEST_CASE("default benchmark shape") {
    const auto& ds = default_dataset();
    CHECK(ds.data.size() == 2000);
    CHECK(ds.data.length() == 384);
    CHECK(count_label(ds.data, residential) == 1470);
    CHECK(count_label(ds.data, sme) == 490);
    CHECK(count_label(ds.data, outlier) == 40);
    CHECK(ds.data.class_names == std::vector<std::string>{"residential", "sme", "outlier"});
    CHECK(ds.profiles.size() == 2000);
    for (double v : ds.data.series.values()) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
    CHECK(std::count(ds.profiles.begin(), ds.profiles.end(), Profile::secondary_home) > 0);
    CHECK(std::count(ds.profiles.begin(), ds.profiles.end(), Profile::random_values) > 0);
    for (std::size_t i = 0; i < ds.data.size(); ++i) {
        const bool out = ds.profiles[i] == Profile::secondary_home || ds.profiles[i] == Profile::random_values;
        CHECK(out == (ds.data.labels[i] == outlier));
    }
}

TEST_CASE("generation is deterministic per seed and thread count") {
    GeneratorConfig cfg;
    cfg.residential_count = 60;
    cfg.sme_count = 20;
    cfg.outlier_count = 6;
    cfg.seed = 42;
    const auto a = generate(cfg);
    const int threads = omp_get_max_threads();
    omp_set_num_threads(3);
    const auto b = generate(cfg);
    omp_set_num_threads(threads);
    CHECK(a.data.series == b.data.series);
    CHECK(a.data.labels == b.data.labels);
    CHECK(a.data.ids == b.data.ids);
    cfg.seed = 43;
    CHECK_FALSE(generate(cfg).data.series == a.data.series);
}

TEST_CASE("weekend contrast by class") {
    const auto& ds = default_dataset();
    for (int label : {residential, sme}) {
        double we = 0.0, wd = 0.0;
        std::size_t nwe = 0, nwd = 0;
        for (std::size_t i = 0; i < ds.data.size(); ++i) {
            if (ds.data.labels[i] != label) continue;
            for (std::size_t d = 0; d < 384; ++d) {
                if (is_weekend(d)) {
                    we += ds.data.series(i, d);
                    ++nwe;
                } else {
                    wd += ds.data.series(i, d);
                    ++nwd;
                }
            }
        }
        const double ratio = (we / static_cast<double>(nwe)) / (wd / static_cast<double>(nwd));
        if (label == residential)
            CHECK(ratio > 1.0);
        else
            CHECK(ratio < 1.0);
    }
    CHECK_FALSE(is_weekend(0));
    CHECK(is_weekend(5));
    CHECK(is_weekend(6));
    CHECK_FALSE(is_weekend(7));
}

TEST_CASE("residential consumption peaks in the winter window") {
    const auto& ds = default_dataset();
    const GeneratorConfig cfg;
    std::vector<double> mean(384, 0.0);
    std::size_t outside = 0, count = 0;
    for (std::size_t i = 0; i < ds.data.size(); ++i) {
        if (ds.data.labels[i] != residential) continue;
        const auto x = transforms::mean_normalize(ds.data.series.row(i));
        for (std::size_t d = 0; d < 384; ++d) mean[d] += x[d];
        std::vector<double> weekly(384 - 27, 0.0);
        for (std::size_t d = 0; d + 28 <= 384; ++d) weekly[d] = std::accumulate(x.begin() + d, x.begin() + d + 28, 0.0);
        const double centre = static_cast<double>(std::max_element(weekly.begin(), weekly.end()) - weekly.begin()) + 13.5;
        if (std::abs(centre - cfg.winter_peak_day) > cfg.winter_half_width) ++outside;
        ++count;
    }
    MESSAGE(outside << " of " << count << " residential series peak outside the window");
    CHECK(outside * 100 <= count);
    std::vector<double> smooth(384 - 27, 0.0);
    for (std::size_t d = 0; d + 28 <= 384; ++d) smooth[d] = std::accumulate(mean.begin() + d, mean.begin() + d + 28, 0.0);
    const double centre = static_cast<double>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin()) + 13.5;
    CHECK(std::abs(centre - cfg.winter_peak_day) <= cfg.winter_half_width);
}

TEST_CASE("secondary homes sit at the floor most days") {
    const auto& ds = default_dataset();
    std::size_t homes = 0;
    for (std::size_t i = 0; i < ds.data.size(); ++i) {
        if (ds.profiles[i] != Profile::secondary_home) continue;
        const auto row = ds.data.series.row(i);
        const double peak = *std::max_element(row.begin(), row.end());
        const auto low = std::count_if(row.begin(), row.end(), [&](double v) { return v < 0.1 * peak; });
        CHECK(static_cast<double>(low) > 0.6 * 384.0);
        ++homes;
    }
    CHECK(homes > 0);
}

TEST_CASE("generator config validation") {
    auto bad = [](auto edit) {
        GeneratorConfig c;
        edit(c);
        return c;
    };
    CHECK_NOTHROW(GeneratorConfig{}.validate());
    CHECK_THROWS_AS(bad([](auto& c) { c.sme_count = 0; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](auto& c) { c.length = 0; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](auto& c) { c.residential_weekend = {0.9, 1.2}; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](auto& c) { c.sme_weekend = {0.5, 1.0}; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](auto& c) { c.noise_sigma = -0.1; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](auto& c) { c.level = {3.0, 2.0}; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](auto& c) { c.random_hold_days = 0; }).validate(), ParameterError);
    CHECK_THROWS_AS(bad([](auto& c) { c.secondary_home_fraction = 1.5; }).validate(), ParameterError);
    CHECK_THROWS_AS(generate(bad([](auto& c) { c.outlier_count = 0; })), ParameterError);
}

TEST_CASE("csv round trip") {
    GeneratorConfig cfg;
    cfg.length = 20;
    cfg.residential_count = 7;
    cfg.sme_count = 4;
    cfg.outlier_count = 3;
    cfg.seed = 5;
    const auto ds = generate(cfg);
    const auto dir = testing::scratch_dir("synthgen");
    export_csv(ds.data, dir / "d.csv");
    const auto back = import_csv(dir / "d.csv");
    CHECK(back.series == ds.data.series);
    CHECK(back.labels == ds.data.labels);
    CHECK(back.ids == ds.data.ids);
    CHECK(back.class_names == ds.data.class_names);

    TimeSeriesDataset unlabeled;
    unlabeled.ids = {"a", "b"};
    unlabeled.series = Matrix(2, 3, {1e-300, -0.1, 1.0 / 3.0, 2.5, 1e300, 0.0});
    export_csv(unlabeled, dir / "u.csv");
    const auto u = import_csv(dir / "u.csv");
    CHECK(u.series == unlabeled.series);
    CHECK_FALSE(u.labeled());

    TimeSeriesDataset empty;
    export_csv(empty, dir / "e.csv");
    const auto e = import_csv(dir / "e.csv");
    CHECK(e.size() == 0);
    CHECK(csv::read_lines(dir / "e.csv").size() == 1);
}

TEST_CASE("csv errors name the row") {
    const auto dir = testing::scratch_dir("synthgen_errors");
    std::ofstream(dir / "short.csv") << "series_id,label,v_0,v_1\na,residential,1,2\nb,sme,3\n";
    CHECK_THROWS_WITH_AS(import_csv(dir / "short.csv"), doctest::Contains(":3:"), ParseError);
    std::ofstream(dir / "junk.csv") << "series_id,label,v_0\na,residential,1\nb,sme,x1\n";
    try {
        import_csv(dir / "junk.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::ofstream(dir / "header.csv") << "id,v_0\na,1\n";
    CHECK_THROWS_AS(import_csv(dir / "header.csv"), ParseError);
    std::ofstream(dir / "mixed.csv") << "series_id,label,v_0\na,residential,1\nb,,2\n";
    CHECK_THROWS_AS(import_csv(dir / "mixed.csv"), ParseError);
    std::ofstream(dir / "custom.csv") << "series_id,label,v_0\na,zeta,1\nb,alpha,2\nc,zeta,3\n";
    const auto custom = import_csv(dir / "custom.csv");
    CHECK(custom.class_names == std::vector<std::string>{"zeta", "alpha"});
    CHECK(custom.labels == std::vector<int>{0, 1, 0});
    CHECK_THROWS_AS(import_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("half-hourly expansion aggregates back") {
    std::mt19937_64 rng(3);
    const auto daily = testing::random_vector(rng, 30, 1.0, 40.0);
    const auto slots = expand_half_hourly(daily);
    CHECK(slots.size() == 30 * 48);
    const auto back = transforms::aggregate_daily(slots);
    for (std::size_t d = 0; d < 30; ++d) CHECK(back[d] == doctest::Approx(daily[d]).epsilon(1e-13));
    for (double s : slots) CHECK(s > 0.0);
    CHECK(expand_half_hourly(daily, 24).size() == 30 * 24);
    CHECK_THROWS_AS(expand_half_hourly(daily, 0), ParameterError);
}

#include "tsclust/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "tsclust/clustering.hpp"
#include "tsclust/csv.hpp"
#include "tsclust/error.hpp"

namespace tsclust::synthgen {

namespace {

void check_range(const Range& r, const char* name) {
    if (!(r.lo <= r.hi)) throw ParameterError(std::string("generator: empty range for ") + name);
}

double uniform(std::mt19937_64& rng, const Range& r) {
    return r.lo == r.hi ? r.lo : std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

std::size_t uniform_count(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, std::max(lo, hi))(rng);
}

struct SeriesBuilder {
    const GeneratorConfig& cfg;
    std::mt19937_64 rng;
    std::normal_distribution<double> normal{0.0, 1.0};

    double noise() { return std::exp(cfg.noise_sigma * normal(rng) - 0.5 * cfg.noise_sigma * cfg.noise_sigma); }

    double season(std::size_t day, double amplitude) const {
        return 1.0 + amplitude * std::cos(2.0 * std::numbers::pi * (static_cast<double>(day) - cfg.winter_peak_day) / 365.0);
    }

    // Marks `count` windows with lengths in [min_days, max_days].
    std::vector<bool> windows(std::size_t count, std::size_t min_days, std::size_t max_days) {
        std::vector<bool> mask(cfg.length, false);
        for (std::size_t w = 0; w < count; ++w) {
            const std::size_t len = std::min(cfg.length, uniform_count(rng, min_days, max_days));
            const std::size_t start = uniform_count(rng, 0, cfg.length - len);
            for (std::size_t d = start; d < start + len; ++d) mask[d] = true;
        }
        return mask;
    }

    std::vector<double> regular(double amplitude, double weekend, const std::vector<bool>& away, double level) {
        std::vector<double> v(cfg.length);
        for (std::size_t d = 0; d < cfg.length; ++d) {
            double x = level * season(d, amplitude) * (is_weekend(d) ? weekend : 1.0) * noise();
            if (away[d]) x *= cfg.vacation_floor;
            v[d] = x;
        }
        return v;
    }

    std::vector<double> residential() {
        const double level = uniform(rng, cfg.level);
        const double amplitude = uniform(rng, cfg.residential_amplitude);
        const double weekend = uniform(rng, cfg.residential_weekend);
        const auto away = windows(uniform_count(rng, cfg.residential_vacations_min, cfg.residential_vacations_max),
                                  cfg.vacation_min_days, cfg.vacation_max_days);
        return regular(amplitude, weekend, away, level);
    }

    std::vector<double> sme() {
        const double level = uniform(rng, cfg.level);
        const double amplitude = uniform(rng, cfg.sme_amplitude);
        const double weekend = uniform(rng, cfg.sme_weekend);
        const auto closed =
            windows(uniform_count(rng, 0, cfg.sme_closures_max), cfg.vacation_min_days, cfg.vacation_max_days);
        return regular(amplitude, weekend, closed, level);
    }

    std::vector<double> secondary_home() {
        const double level = uniform(rng, cfg.level);
        const double amplitude = uniform(rng, cfg.residential_amplitude);
        auto occupied = windows(uniform_count(rng, cfg.secondary_stays_min, cfg.secondary_stays_max),
                                cfg.secondary_stay_min_days, cfg.secondary_stay_max_days);
        std::bernoulli_distribution weekend_visit(cfg.secondary_weekend_occupancy);
        for (std::size_t week = 0; week * 7 < cfg.length; ++week) {
            if (!weekend_visit(rng)) continue;
            for (std::size_t d = week * 7 + 5; d < std::min(cfg.length, week * 7 + 7); ++d) occupied[d] = true;
        }
        std::vector<double> v(cfg.length);
        for (std::size_t d = 0; d < cfg.length; ++d)
            v[d] = level * (occupied[d] ? season(d, amplitude) : cfg.secondary_floor) * noise();
        return v;
    }

    std::vector<double> random_values() {
        const double level = uniform(rng, cfg.level);
        std::vector<double> v(cfg.length);
        for (std::size_t d = 0; d < v.size(); d += cfg.random_hold_days) {
            const bool on = std::bernoulli_distribution(cfg.random_active)(rng);
            const double x = level * (on ? uniform(rng, cfg.random_range) : cfg.secondary_floor);
            for (std::size_t t = d; t < std::min(v.size(), d + cfg.random_hold_days); ++t) v[t] = x * noise();
        }
        return v;
    }
};

std::string series_id(std::size_t i, std::size_t width) {
    std::string digits = std::to_string(i);
    return "s" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

bool is_weekend(std::size_t day) { return day % 7 >= 5; }

std::vector<std::string> class_names() { return {"residential", "sme", "outlier"}; }

void GeneratorConfig::validate() const {
    if (length == 0) throw ParameterError("generator: length must be >= 1");
    if (residential_count == 0 || sme_count == 0 || outlier_count == 0)
        throw ParameterError("generator: class counts must be positive");
    for (auto [r, name] : {std::pair{residential_amplitude, "residential_amplitude"}, {sme_amplitude, "sme_amplitude"},
                           {residential_weekend, "residential_weekend"}, {sme_weekend, "sme_weekend"},
                           {level, "level"}, {random_range, "random_range"}})
        check_range(r, name);
    if (!(residential_weekend.lo > 1.0) || !(sme_weekend.hi < 1.0))
        throw ParameterError("generator: weekend multipliers must satisfy residential > 1 > sme");
    if (random_hold_days == 0) throw ParameterError("generator: random_hold_days must be >= 1");
    if (!(noise_sigma >= 0.0)) throw ParameterError("generator: noise scale must be >= 0");
    if (!(level.lo > 0.0) || !(random_range.lo >= 0.0) || !(random_active > 0.0 && random_active <= 1.0) || !(vacation_floor >= 0.0) || !(secondary_floor >= 0.0))
        throw ParameterError("generator: levels and floors must be nonnegative");
    if (!(secondary_home_fraction >= 0.0 && secondary_home_fraction <= 1.0))
        throw ParameterError("generator: secondary_home_fraction must lie in [0, 1]");
    if (residential_amplitude.hi >= 1.0 || sme_amplitude.hi >= 1.0)
        throw ParameterError("generator: seasonal amplitude must be < 1 to keep consumption positive");
    if (vacation_min_days == 0 || vacation_min_days > vacation_max_days || secondary_stay_min_days == 0 ||
        secondary_stay_min_days > secondary_stay_max_days)
        throw ParameterError("generator: invalid window length range");
}

LabeledDataset generate(const GeneratorConfig& config) {
    config.validate();
    const std::size_t n = config.total();
    const auto secondary = static_cast<std::size_t>(
        std::llround(config.secondary_home_fraction * static_cast<double>(config.outlier_count)));

    std::vector<Profile> profiles;
    profiles.insert(profiles.end(), config.residential_count, Profile::residential);
    profiles.insert(profiles.end(), config.sme_count, Profile::sme);
    profiles.insert(profiles.end(), secondary, Profile::secondary_home);
    profiles.insert(profiles.end(), config.outlier_count - secondary, Profile::random_values);
    std::mt19937_64 master(config.seed);
    std::shuffle(profiles.begin(), profiles.end(), master);

    LabeledDataset out;
    out.profiles = profiles;
    out.data.class_names = class_names();
    out.data.series = Matrix(n, config.length);
    out.data.labels.resize(n);
    out.data.ids.resize(n);
    const std::size_t width = std::to_string(n - 1).size();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        SeriesBuilder b{config, std::mt19937_64(clustering::derive_seed(config.seed, i))};
        std::vector<double> v;
        switch (profiles[i]) {
            case Profile::residential:
                v = b.residential();
                out.data.labels[i] = residential;
                break;
            case Profile::sme:
                v = b.sme();
                out.data.labels[i] = sme;
                break;
            case Profile::secondary_home:
                v = b.secondary_home();
                out.data.labels[i] = outlier;
                break;
            case Profile::random_values:
                v = b.random_values();
                out.data.labels[i] = outlier;
                break;
        }
        std::copy(v.begin(), v.end(), out.data.series.row(i).begin());
        out.data.ids[i] = series_id(i, width);
    }
    return out;
}

void export_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    std::ostringstream os;
    os << "series_id,label";
    for (std::size_t t = 0; t < dataset.length(); ++t) os << ",v_" << t;
    os << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        os << dataset.ids[i] << ',';
        if (dataset.labeled()) os << dataset.class_names[static_cast<std::size_t>(dataset.labels[i])];
        for (double v : dataset.series.row(i)) os << ',' << csv::format_double(v);
        os << '\n';
    }
    csv::write_text(path, os.str());
}

TimeSeriesDataset import_csv(const std::filesystem::path& path) {
    const std::string source = path.string();
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw ParseError(source, 1, "missing header row");
    const auto header = csv::split(lines[0]);
    if (header.size() < 2 || header[0] != "series_id" || header[1] != "label")
        throw ParseError(source, 1, "header must start with series_id,label");
    const std::size_t length = header.size() - 2;

    TimeSeriesDataset ds;
    std::vector<std::string> raw_labels;
    std::vector<double> values;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto fields = csv::split(lines[ln]);
        if (fields.size() != length + 2)
            throw ParseError(source, ln + 1,
                             "row has " + std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(length + 2));
        if (fields[0].empty()) throw ParseError(source, ln + 1, "empty series_id");
        ds.ids.emplace_back(fields[0]);
        raw_labels.emplace_back(fields[1]);
        for (std::size_t t = 0; t < length; ++t) {
            try {
                values.push_back(csv::parse_double(fields[t + 2]));
            } catch (const std::invalid_argument& e) {
                throw ParseError(source, ln + 1, "column v_" + std::to_string(t) + ": " + e.what());
            }
        }
    }
    ds.series = Matrix(ds.ids.size(), length, std::move(values));

    const bool any_label = std::any_of(raw_labels.begin(), raw_labels.end(), [](const auto& s) { return !s.empty(); });
    if (any_label) {
        const auto canonical = class_names();
        const bool all_canonical = std::all_of(raw_labels.begin(), raw_labels.end(), [&](const auto& s) {
            return std::find(canonical.begin(), canonical.end(), s) != canonical.end();
        });
        ds.class_names = all_canonical ? canonical : std::vector<std::string>{};
        for (std::size_t i = 0; i < raw_labels.size(); ++i) {
            if (raw_labels[i].empty()) throw ParseError(source, i + 2, "missing label in a labeled file");
            auto it = std::find(ds.class_names.begin(), ds.class_names.end(), raw_labels[i]);
            if (it == ds.class_names.end()) {
                ds.class_names.push_back(raw_labels[i]);
                it = ds.class_names.end() - 1;
            }
            ds.labels.push_back(static_cast<int>(it - ds.class_names.begin()));
        }
    }
    return ds;
}

std::vector<double> expand_half_hourly(std::span<const double> daily, std::size_t samples_per_day) {
    if (samples_per_day == 0) throw ParameterError("expand_half_hourly: samples_per_day must be >= 1");
    // Two-peak domestic shape (morning and evening), normalized to sum 1.
    std::vector<double> shape(samples_per_day);
    for (std::size_t s = 0; s < samples_per_day; ++s) {
        const double hour = 24.0 * (static_cast<double>(s) + 0.5) / static_cast<double>(samples_per_day);
        shape[s] = 0.4 + std::exp(-0.5 * std::pow((hour - 8.0) / 1.5, 2)) + 1.5 * std::exp(-0.5 * std::pow((hour - 19.0) / 2.0, 2));
    }
    const double total = std::accumulate(shape.begin(), shape.end(), 0.0);
    for (auto& s : shape) s /= total;
    std::vector<double> out;
    out.reserve(daily.size() * samples_per_day);
    for (double d : daily)
        for (double s : shape) out.push_back(d * s);
    return out;
}

void export_cer_long(const TimeSeriesDataset& daily, const std::filesystem::path& path, std::size_t samples_per_day) {
    std::ostringstream os;
    os << "client_id,timestamp_slot,value\n";
    for (std::size_t i = 0; i < daily.size(); ++i) {
        const auto slots = expand_half_hourly(daily.series.row(i), samples_per_day);
        for (std::size_t s = 0; s < slots.size(); ++s) os << daily.ids[i] << ',' << s << ',' << csv::format_double(slots[s]) << '\n';
    }
    csv::write_text(path, os.str());
}

}  // namespace tsclust::synthgen

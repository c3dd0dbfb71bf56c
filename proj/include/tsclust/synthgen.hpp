#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "tsclust/types.hpp"

namespace tsclust::synthgen {

enum Label : int { residential = 0, sme = 1, outlier = 2 };

/// Finer outlier breakdown; not part of the ground-truth labels.
enum class Profile { residential, sme, secondary_home, random_values };

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Daily consumption model. Day 0 is a Monday; the seasonal factor is
/// 1 + amplitude * cos(2 pi (day - winter_peak_day) / 365).
struct GeneratorConfig {
    std::size_t length = 384;
    std::size_t residential_count = 1470;
    std::size_t sme_count = 490;
    std::size_t outlier_count = 40;

    double winter_peak_day = 198.0;
    double winter_half_width = 45.0;  // winter window = peak +- half width
    Range residential_amplitude{0.33, 0.37};
    Range sme_amplitude{0.05, 0.15};
    Range residential_weekend{1.18, 1.22};  // weekend / weekday ratio, > 1
    Range sme_weekend{0.20, 0.40};          // < 1

    Range level{5.0, 30.0};                 // mean daily consumption scale
    double noise_sigma = 0.10;              // log-normal multiplicative noise

    std::size_t residential_vacations_min = 1;
    std::size_t residential_vacations_max = 2;
    std::size_t vacation_min_days = 7;
    std::size_t vacation_max_days = 16;
    double vacation_floor = 0.30;           // consumption multiplier while away
    std::size_t sme_closures_max = 1;

    double secondary_home_fraction = 0.85;  // remaining outliers are random-valued
    double secondary_floor = 0.02;          // unoccupied level relative to occupied
    double secondary_weekend_occupancy = 0.8;
    std::size_t secondary_stays_min = 1;
    std::size_t secondary_stays_max = 3;
    std::size_t secondary_stay_min_days = 7;
    std::size_t secondary_stay_max_days = 21;
    Range random_range{0.0, 2.0};           // random outliers: uniform multiple of level
    std::size_t random_hold_days = 1;       // consecutive days sharing one draw
    double random_active = 1.0;             // share of draws above the floor

    std::uint64_t seed = 0;

    std::size_t total() const noexcept { return residential_count + sme_count + outlier_count; }
    void validate() const;
};

struct LabeledDataset {
    TimeSeriesDataset data;         // labels: residential / sme / outlier
    std::vector<Profile> profiles;  // generating profile per series
};

/// Seeded generation; each series draws from its own stream derived from the
/// master seed, and the class order is shuffled with the master stream.
LabeledDataset generate(const GeneratorConfig& config);

bool is_weekend(std::size_t day);
std::vector<std::string> class_names();

/// `series_id,label,v_0,...,v_{T-1}`; labels by name, empty when unlabeled.
void export_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path);
TimeSeriesDataset import_csv(const std::filesystem::path& path);

/// Spreads each daily total over `samples_per_day` slots with a fixed intraday
/// shape (slot weights sum to 1), so aggregate_daily inverts it.
std::vector<double> expand_half_hourly(std::span<const double> daily, std::size_t samples_per_day = 48);

/// Long-format `client_id,timestamp_slot,value` file of the expanded series.
void export_cer_long(const TimeSeriesDataset& daily, const std::filesystem::path& path,
                     std::size_t samples_per_day = 48);

}  // namespace tsclust::synthgen

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsclust/cae.hpp"
#include "tsclust/clustering.hpp"
#include "tsclust/evaluation.hpp"
#include "tsclust/outliers.hpp"
#include "tsclust/synthgen.hpp"
#include "tsclust/types.hpp"

namespace tsclust::pipeline {

enum class Method { raw_kmedoids, pca_kmedoids, haar_ikmeans, dtw_kmedoids, cae_kmedoids };

std::string to_string(Method m);
Method parse_method(const std::string& name);
std::vector<std::string> method_names();

enum class Stage { config, ingest, preprocess, features, cluster, lof, evaluate, report };

std::string to_string(Stage s);
/// Process exit code for a failure in the given stage (distinct, nonzero).
int exit_code(Stage s);

/// Failure tagged with the stage it happened in.
class StageError : public std::runtime_error {
public:
    StageError(Stage stage, const std::string& what);
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

struct ExperimentConfig {
    // input: exactly one of a generator config or a CSV path
    std::optional<synthgen::GeneratorConfig> synthetic;
    std::optional<std::filesystem::path> input_csv;

    // preprocessing
    bool aggregate_daily = false;
    std::size_t samples_per_day = 48;
    bool mean_normalize = true;
    std::optional<std::size_t> max_days;

    Method method = Method::cae_kmedoids;
    std::size_t pca_components = 20;
    std::optional<std::size_t> dtw_window;
    std::size_t haar_levels = 0;  // 0 = all levels
    cae::CAEConfig cae;           // seed is overridden by the master seed
    std::optional<std::filesystem::path> cae_checkpoint;  // model stem; trains when absent
    std::optional<std::filesystem::path> distance_cache;  // dtw; defaults to <out>/distances.bin

    std::optional<std::size_t> k = 3;  // absent: picked from the elbow curve
    std::size_t k_min = 2;
    std::size_t k_max = 10;
    std::size_t restarts = 10;
    std::size_t elbow_restarts = 2;

    std::size_t lof_k = 20;
    double lof_quantile = 0.95;

    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;

    /// Throws ParameterError describing the first violated constraint.
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected. Relative paths
/// resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const synthgen::GeneratorConfig& g);
synthgen::GeneratorConfig generator_from_json(const nlohmann::json& j);
nlohmann::json to_json(const cae::CAEConfig& c);
cae::CAEConfig cae_config_from_json(const nlohmann::json& j);

/// Stream seeds derived from the master seed.
enum class SeedStream : std::uint64_t { generator = 1, training = 2, clustering = 3 };
std::uint64_t stage_seed(std::uint64_t master, SeedStream stream);

struct EvaluationReport {
    std::size_t k = 0;
    std::vector<std::string> class_names;
    std::optional<evaluation::ConfusionMatrix> confusion;
    std::optional<double> label_match_accuracy;
    std::optional<double> outlier_capture;  // best share of the "outlier" class held by one cluster
    std::vector<evaluation::ClusterStats> cluster_stats;
    Matrix centroids;
    std::vector<clustering::ElbowPoint> elbow;
    std::optional<std::size_t> elbow_k;
    std::vector<std::string> warnings;
};

struct ExperimentResult {
    TimeSeriesDataset dataset;  // preprocessed series
    Matrix features;            // per-method feature rows (empty for dtw)
    clustering::ClusteringResult clustering;
    outliers::LOFReport lof;
    EvaluationReport report;
    std::vector<std::string> artifacts;  // file names written into the output directory
};

using Logger = std::function<void(const std::string&)>;

/// ingest -> preprocess -> features -> cluster -> LOF -> evaluate, writing every
/// artifact and manifest.json into config.output_dir. Failures throw StageError;
/// files written before the failure are left in place.
ExperimentResult run_experiment(const ExperimentConfig& config, const Logger& log = {});

// Artifact writers shared with the command-line tool.
void write_assignment(const std::filesystem::path& path, const TimeSeriesDataset& dataset,
                      const std::vector<std::size_t>& assignment);
std::vector<std::size_t> read_assignment(const std::filesystem::path& path, std::vector<std::string>* ids = nullptr);
void write_confusion(const std::filesystem::path& path, const evaluation::ConfusionMatrix& m,
                     const std::vector<std::string>& class_names);
void write_cluster_stats(const std::filesystem::path& path, const std::vector<evaluation::ClusterStats>& stats);
void write_lof(const std::filesystem::path& path, const std::vector<std::string>& ids, const outliers::LOFReport& r);
void write_elbow(const std::filesystem::path& path, const std::vector<clustering::ElbowPoint>& curve);
void write_centroids(const std::filesystem::path& path, const Matrix& centroids);

/// Writes manifest.json: config snapshot, seed and SHA-256 of each artifact.
void write_manifest(const std::filesystem::path& dir, const nlohmann::json& config, std::uint64_t seed,
                    const std::vector<std::string>& artifacts);

}  // namespace tsclust::pipeline

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsclust/cae.hpp"
#include "tsclust/clustering.hpp"
#include "tsclust/csv.hpp"
#include "tsclust/distances.hpp"
#include "tsclust/error.hpp"
#include "tsclust/evaluation.hpp"
#include "tsclust/outliers.hpp"
#include "tsclust/pipeline.hpp"
#include "tsclust/synthgen.hpp"
#include "tsclust/transforms.hpp"

namespace fs = std::filesystem;
using namespace tsclust;
using pipeline::Stage;

namespace {

void log_line(const std::string& s) { std::cerr << s << '\n'; }

// A dataset file (`series_id,label,...`) or a plain matrix file (`id,f_0,...`).
TimeSeriesDataset load_rows(const fs::path& path) {
    const auto lines = csv::read_lines(path);
    if (!lines.empty()) {
        const auto header = csv::split(lines[0]);
        if (header.size() >= 2 && header[1] == "label") return synthgen::import_csv(path);
    }
    TimeSeriesDataset ds;
    ds.series = csv::read_matrix(path, &ds.ids);
    return ds;
}

std::vector<bool> read_flags(const fs::path& path, std::size_t n) {
    const auto lines = csv::read_lines(path);
    std::vector<bool> flags;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto f = csv::split(lines[ln]);
        if (f.size() != 4) throw ParseError(path.string(), ln + 1, "expected series_id,lrd,lof,flagged");
        flags.push_back(f[3] == "1");
    }
    if (flags.size() != n)
        throw DimensionError(path.string() + " has " + std::to_string(flags.size()) + " rows, expected " +
                             std::to_string(n));
    return flags;
}

distances::Metric metric_from(const std::string& name, std::optional<std::size_t> window) {
    return distances::Metric::parse(name, window);
}

template <class F>
int guarded(Stage stage, F&& f) {
    try {
        f();
        return 0;
    } catch (const pipeline::StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pipeline::exit_code(e.stage());
    } catch (const std::exception& e) {
        std::cerr << "error (" << pipeline::to_string(stage) << "): " << e.what() << '\n';
        return pipeline::exit_code(stage);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Whole time series clustering: autoencoder features, k-medoids, LOF outliers"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write the synthetic residential/SME/outlier benchmark");
    std::string gen_config, gen_out = "dataset.csv", gen_long;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--config", gen_config, "Generator settings (JSON)")->check(CLI::ExistingFile);
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--out", gen_out, "Output CSV (series_id,label,v_0,...)");
    gen->add_option("--cer-long", gen_long, "Also write a half-hourly client_id,timestamp_slot,value file");

    // train
    auto* tr = app.add_subcommand("train", "Train the convolutional autoencoder");
    std::string tr_in, tr_out = "model";
    cae::CAEConfig tr_cfg;
    bool tr_raw = false;
    tr->add_option("--input", tr_in, "Dataset CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--out", tr_out, "Model stem (<stem>.ckpt, <stem>.json)");
    tr->add_option("--epochs", tr_cfg.epochs);
    tr->add_option("--batch-size", tr_cfg.batch_size);
    tr->add_option("--lr", tr_cfg.learning_rate);
    tr->add_option("--l2", tr_cfg.l2);
    tr->add_option("--latent", tr_cfg.latent);
    tr->add_option("--seed", tr_cfg.seed);
    tr->add_flag("--no-normalize", tr_raw, "Skip per-series mean normalization");

    // encode
    auto* en = app.add_subcommand("encode", "Latent vectors of a dataset");
    std::string en_model, en_in, en_out = "latent.csv";
    bool en_raw = false, en_keep = false;
    en->add_option("--model", en_model, "Model stem")->required();
    en->add_option("--input", en_in, "Dataset CSV")->required()->check(CLI::ExistingFile);
    en->add_option("--out", en_out);
    en->add_flag("--no-normalize", en_raw, "Skip per-series mean normalization of the input");
    en->add_flag("--unscaled", en_keep, "Write latent vectors without column z-scoring");

    // cluster
    auto* cl = app.add_subcommand("cluster", "Cluster feature rows");
    std::string cl_in, cl_out = "assignment.csv", cl_algo = "kmedoids", cl_metric = "euclidean";
    std::size_t cl_k = 3, cl_restarts = 10;
    std::uint64_t cl_seed = 0;
    std::optional<std::size_t> cl_window;
    cl->add_option("--input", cl_in, "Feature or dataset CSV")->required()->check(CLI::ExistingFile);
    cl->add_option("--out", cl_out);
    cl->add_option("--k", cl_k);
    cl->add_option("--seed", cl_seed);
    cl->add_option("--restarts", cl_restarts);
    cl->add_option("--method", cl_algo, "kmedoids | kmeans | ikmeans")
        ->check(CLI::IsMember({"kmedoids", "kmeans", "ikmeans"}));
    cl->add_option("--metric", cl_metric, "euclidean | dtw (kmedoids only)")->check(CLI::IsMember({"euclidean", "dtw"}));
    cl->add_option("--window", cl_window, "DTW band half-width");

    // lof
    auto* lo = app.add_subcommand("lof", "Local outlier factor scores and flags");
    std::string lo_in, lo_out = "lof.csv";
    std::size_t lo_k = 20;
    double lo_q = 0.95;
    std::optional<double> lo_threshold;
    lo->add_option("--input", lo_in)->required()->check(CLI::ExistingFile);
    lo->add_option("--out", lo_out);
    lo->add_option("--k", lo_k);
    lo->add_option("--quantile", lo_q);
    lo->add_option("--threshold", lo_threshold, "Flag LOF > threshold instead of the quantile rule");

    // elbow
    auto* el = app.add_subcommand("elbow", "Cost against k");
    std::string el_in, el_out = "elbow.csv", el_algo = "kmedoids";
    std::size_t el_min = 1, el_max = 10, el_restarts = 2;
    std::uint64_t el_seed = 0;
    el->add_option("--input", el_in)->required()->check(CLI::ExistingFile);
    el->add_option("--out", el_out);
    el->add_option("--k-min", el_min);
    el->add_option("--k-max", el_max);
    el->add_option("--seed", el_seed);
    el->add_option("--restarts", el_restarts);
    el->add_option("--method", el_algo)->check(CLI::IsMember({"kmedoids", "kmeans"}));

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Confusion matrix and per-cluster report");
    std::string ev_data, ev_assign, ev_lof, ev_out = ".";
    ev->add_option("--dataset", ev_data, "Series used for dispersion and centroids")->required()->check(CLI::ExistingFile);
    ev->add_option("--assignment", ev_assign)->required()->check(CLI::ExistingFile);
    ev->add_option("--lof", ev_lof, "lof.csv with flags")->check(CLI::ExistingFile);
    ev->add_option("--out", ev_out, "Output directory");

    // run
    auto* rn = app.add_subcommand("run", "Full experiment from a config file");
    std::string rn_config, rn_method;
    std::optional<std::string> rn_out;
    std::optional<std::uint64_t> rn_seed;
    std::optional<std::size_t> rn_k;
    rn->add_option("--config", rn_config)->required()->check(CLI::ExistingFile);
    rn->add_option("--seed", rn_seed);
    rn->add_option("--out", rn_out);
    rn->add_option("--method", rn_method)->check(CLI::IsMember(pipeline::method_names()));
    rn->add_option("--k", rn_k);

    CLI11_PARSE(app, argc, argv);

    if (*gen) {
        return guarded(Stage::ingest, [&] {
            synthgen::GeneratorConfig g;
            if (!gen_config.empty()) {
                std::ifstream in(gen_config);
                g = pipeline::generator_from_json(nlohmann::json::parse(in));
            }
            if (gen_seed) g.seed = *gen_seed;
            const auto ds = synthgen::generate(g);
            synthgen::export_csv(ds.data, gen_out);
            if (!gen_long.empty()) synthgen::export_cer_long(ds.data, gen_long);
            std::cerr << "wrote " << ds.data.size() << " series of length " << ds.data.length() << " to " << gen_out
                      << '\n';
        });
    }
    if (*tr) {
        return guarded(Stage::features, [&] {
            auto ds = load_rows(tr_in);
            const Matrix x = tr_raw ? ds.series : transforms::mean_normalize_rows(ds.series);
            tr_cfg.length = x.cols();
            const auto model = cae::train(x, tr_cfg, [&](std::size_t e, double loss) {
                std::cerr << "epoch " << e << "/" << tr_cfg.epochs << " loss " << loss << '\n';
            });
            cae::save_model(tr_out, model);
            std::cerr << "reconstruction mse " << cae::reconstruction_mse(model, x) << '\n';
        });
    }
    if (*en) {
        return guarded(Stage::features, [&] {
            const auto model = cae::load_model(en_model);
            auto ds = load_rows(en_in);
            const Matrix x = en_raw ? ds.series : transforms::mean_normalize_rows(ds.series);
            Matrix latent = cae::encode(model, x);
            if (!en_keep) latent = cae::normalize_latent(latent);
            csv::write_matrix(en_out, latent, ds.ids);
        });
    }
    if (*cl) {
        return guarded(Stage::cluster, [&] {
            auto ds = load_rows(cl_in);
            clustering::ClusteringResult r;
            if (cl_algo == "kmedoids") {
                const auto d = distances::distance_matrix(ds.series, metric_from(cl_metric, cl_window));
                r = clustering::kmedoids(d, cl_k, cl_seed, cl_restarts);
            } else if (cl_algo == "kmeans") {
                r = clustering::kmeans(ds.series, cl_k, cl_seed, cl_restarts);
            } else {
                r = clustering::interactive_wavelet_kmeans(ds.series, cl_k, cl_seed);
            }
            pipeline::write_assignment(cl_out, ds, r.assignment);
            std::cerr << "cost " << r.cost << " after " << r.iterations << " iteration(s)\n";
        });
    }
    if (*lo) {
        return guarded(Stage::lof, [&] {
            auto ds = load_rows(lo_in);
            auto rep = outliers::lof_scores(distances::distance_matrix(ds.series, distances::Metric{}), lo_k);
            if (lo_threshold)
                outliers::apply_threshold(rep, *lo_threshold);
            else
                outliers::apply_quantile(rep, lo_q);
            pipeline::write_lof(lo_out, ds.ids, rep);
            std::cerr << rep.flagged_count() << " flagged, threshold " << rep.threshold << '\n';
        });
    }
    if (*el) {
        return guarded(Stage::cluster, [&] {
            auto ds = load_rows(el_in);
            const auto curve =
                el_algo == "kmedoids"
                    ? clustering::elbow_curve(distances::distance_matrix(ds.series, distances::Metric{}), el_min,
                                              el_max, el_seed, el_restarts)
                    : clustering::elbow_curve_kmeans(ds.series, el_min, el_max, el_seed, el_restarts);
            pipeline::write_elbow(el_out, curve);
            if (curve.size() >= 3) std::cout << "elbow k = " << clustering::elbow_k(curve) << '\n';
        });
    }
    if (*ev) {
        return guarded(Stage::evaluate, [&] {
            auto ds = load_rows(ev_data);
            std::vector<std::string> ids;
            const auto assignment = pipeline::read_assignment(ev_assign, &ids);
            if (ids != ds.ids) throw DimensionError("assignment ids do not match the dataset rows");
            std::size_t k = 0;
            for (auto a : assignment) k = std::max(k, a + 1);
            const auto flags = ev_lof.empty() ? std::vector<bool>(ds.size(), false) : read_flags(ev_lof, ds.size());
            std::vector<std::string> warnings;
            fs::create_directories(ev_out);
            const auto stats = evaluation::cluster_stats(ds.series, assignment, flags, k, &warnings);
            pipeline::write_cluster_stats(fs::path(ev_out) / "cluster_stats.csv", stats);
            pipeline::write_centroids(fs::path(ev_out) / "centroids.csv",
                                      evaluation::mean_centroids(ds.series, assignment, k));
            for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
            if (ds.labeled()) {
                const auto cm = evaluation::confusion_matrix(assignment, ds.labels, ds.class_names.size(), k);
                pipeline::write_confusion(fs::path(ev_out) / "confusion.csv", cm, ds.class_names);
                if (k >= cm.classes) std::cout << "label match accuracy " << evaluation::label_match_accuracy(cm) << '\n';
            }
        });
    }
    if (*rn) {
        pipeline::ExperimentConfig cfg;
        try {
            cfg = pipeline::load_config(rn_config);
            if (rn_seed) cfg.seed = *rn_seed;
            if (rn_out) cfg.output_dir = *rn_out;
            if (!rn_method.empty()) cfg.method = pipeline::parse_method(rn_method);
            if (rn_k) cfg.k = *rn_k;
        } catch (const std::exception& e) {
            std::cerr << "error (config): " << e.what() << '\n';
            return pipeline::exit_code(Stage::config);
        }
        return guarded(Stage::config, [&] {
            const auto res = pipeline::run_experiment(cfg, log_line);
            const auto& rep = res.report;
            std::cout << "method " << pipeline::to_string(cfg.method) << ", k = " << rep.k << ", "
                      << res.lof.flagged_count() << " LOF outliers\n";
            if (rep.label_match_accuracy) std::cout << "label match accuracy " << *rep.label_match_accuracy << '\n';
            if (rep.outlier_capture) std::cout << "outlier capture " << *rep.outlier_capture << '\n';
            std::cout << "artifacts in " << cfg.output_dir.string() << '\n';
        });
    }
    return 0;
}

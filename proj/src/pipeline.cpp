#include "tsclust/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tsclust/csv.hpp"
#include "tsclust/distances.hpp"
#include "tsclust/error.hpp"
#include "tsclust/hash.hpp"
#include "tsclust/ingest.hpp"
#include "tsclust/transforms.hpp"

namespace tsclust::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::pair<Method, std::string>> kMethods = {
    {Method::raw_kmedoids, "raw-kmedoids"}, {Method::pca_kmedoids, "pca-kmedoids"},
    {Method::haar_ikmeans, "haar-ikmeans"}, {Method::dtw_kmedoids, "dtw-kmedoids"},
    {Method::cae_kmedoids, "cae-kmedoids"}};

const std::vector<std::pair<Stage, std::string>> kStages = {
    {Stage::config, "config"},   {Stage::ingest, "ingest"}, {Stage::preprocess, "preprocess"},
    {Stage::features, "features"}, {Stage::cluster, "cluster"}, {Stage::lof, "lof"},
    {Stage::evaluate, "evaluate"}, {Stage::report, "report"}};

// Reads known keys into existing defaults and rejects anything else.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw ParameterError(where_ + ": expected a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ParameterError(where_ + "." + key + ": " + e.what());
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        if (it->is_null()) {
            out.reset();
            return;
        }
        T v{};
        get(key, v);
        out = v;
    }

    void range(const char* key, synthgen::Range& r) {
        std::optional<std::vector<double>> v;
        get(key, v);
        if (!v) return;
        if (v->size() != 2) throw ParameterError(where_ + "." + key + ": expected [lo, hi]");
        r = {(*v)[0], (*v)[1]};
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ParameterError(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json range_json(const synthgen::Range& r) { return json::array({r.lo, r.hi}); }

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() || base.empty() ? p : base / p; }

template <class F>
auto in_stage(Stage stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::string dtw_cache_name(const ExperimentConfig& c) {
    return c.distance_cache ? c.distance_cache->string() : (c.output_dir / "distances.bin").string();
}

bool uses_medoids(Method m) { return m != Method::haar_ikmeans; }

}  // namespace

std::string to_string(Method m) {
    for (const auto& [k, v] : kMethods)
        if (k == m) return v;
    return "unknown";
}

Method parse_method(const std::string& name) {
    for (const auto& [k, v] : kMethods)
        if (v == name) return k;
    std::string all;
    for (const auto& n : method_names()) all += (all.empty() ? "" : ", ") + n;
    throw ParameterError("unknown method '" + name + "' (expected one of: " + all + ")");
}

std::vector<std::string> method_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : kMethods) out.push_back(v);
    return out;
}

std::string to_string(Stage s) {
    for (const auto& [k, v] : kStages)
        if (k == s) return v;
    return "unknown";
}

int exit_code(Stage s) { return 10 + static_cast<int>(s); }

StageError::StageError(Stage stage, const std::string& what)
    : std::runtime_error(to_string(stage) + " stage failed: " + what), stage_(stage) {}

std::uint64_t stage_seed(std::uint64_t master, SeedStream stream) {
    return clustering::derive_seed(master, static_cast<std::uint64_t>(stream));
}

void ExperimentConfig::validate() const {
    if (synthetic.has_value() == input_csv.has_value())
        throw ParameterError("config: exactly one of input.synthetic or input.csv is required");
    if (synthetic) synthetic->validate();
    if (input_csv && !fs::exists(*input_csv)) throw ParameterError("config: input file not found: " + input_csv->string());
    if (samples_per_day == 0) throw ParameterError("config: samples_per_day must be >= 1");
    if (max_days && *max_days == 0) throw ParameterError("config: max_days must be >= 1");
    if (pca_components == 0) throw ParameterError("config: pca_components must be >= 1");
    if (k && *k == 0) throw ParameterError("config: k must be >= 1");
    if (k_min == 0 || k_min > k_max) throw ParameterError("config: need 1 <= k_min <= k_max");
    if (!k && k_max < k_min + 2) throw ParameterError("config: choosing k by elbow needs at least three k values");
    if (restarts == 0 || elbow_restarts == 0) throw ParameterError("config: restarts must be >= 1");
    if (lof_k == 0) throw ParameterError("config: lof.k must be >= 1");
    if (!(lof_quantile > 0.0 && lof_quantile < 1.0)) throw ParameterError("config: lof.quantile must lie in (0, 1)");
    if (cae_checkpoint && !fs::exists(cae_checkpoint->string() + ".ckpt"))
        throw ParameterError("config: checkpoint not found: " + cae_checkpoint->string() + ".ckpt");
    if (method == Method::cae_kmedoids && !cae_checkpoint) cae.validate();
    if (output_dir.empty()) throw ParameterError("config: output directory is empty");
}

json to_json(const synthgen::GeneratorConfig& g) {
    return {{"length", g.length},
            {"residential_count", g.residential_count},
            {"sme_count", g.sme_count},
            {"outlier_count", g.outlier_count},
            {"winter_peak_day", g.winter_peak_day},
            {"winter_half_width", g.winter_half_width},
            {"residential_amplitude", range_json(g.residential_amplitude)},
            {"sme_amplitude", range_json(g.sme_amplitude)},
            {"residential_weekend", range_json(g.residential_weekend)},
            {"sme_weekend", range_json(g.sme_weekend)},
            {"level", range_json(g.level)},
            {"noise_sigma", g.noise_sigma},
            {"residential_vacations_min", g.residential_vacations_min},
            {"residential_vacations_max", g.residential_vacations_max},
            {"vacation_min_days", g.vacation_min_days},
            {"vacation_max_days", g.vacation_max_days},
            {"vacation_floor", g.vacation_floor},
            {"sme_closures_max", g.sme_closures_max},
            {"secondary_home_fraction", g.secondary_home_fraction},
            {"secondary_floor", g.secondary_floor},
            {"secondary_weekend_occupancy", g.secondary_weekend_occupancy},
            {"secondary_stays_min", g.secondary_stays_min},
            {"secondary_stays_max", g.secondary_stays_max},
            {"secondary_stay_min_days", g.secondary_stay_min_days},
            {"secondary_stay_max_days", g.secondary_stay_max_days},
            {"random_range", range_json(g.random_range)},
            {"random_hold_days", g.random_hold_days},
            {"random_active", g.random_active},
            {"seed", g.seed}};
}

synthgen::GeneratorConfig generator_from_json(const json& j) {
    synthgen::GeneratorConfig g;
    Reader r(j, "synthetic");
    r.get("length", g.length);
    r.get("residential_count", g.residential_count);
    r.get("sme_count", g.sme_count);
    r.get("outlier_count", g.outlier_count);
    r.get("winter_peak_day", g.winter_peak_day);
    r.get("winter_half_width", g.winter_half_width);
    r.range("residential_amplitude", g.residential_amplitude);
    r.range("sme_amplitude", g.sme_amplitude);
    r.range("residential_weekend", g.residential_weekend);
    r.range("sme_weekend", g.sme_weekend);
    r.range("level", g.level);
    r.get("noise_sigma", g.noise_sigma);
    r.get("residential_vacations_min", g.residential_vacations_min);
    r.get("residential_vacations_max", g.residential_vacations_max);
    r.get("vacation_min_days", g.vacation_min_days);
    r.get("vacation_max_days", g.vacation_max_days);
    r.get("vacation_floor", g.vacation_floor);
    r.get("sme_closures_max", g.sme_closures_max);
    r.get("secondary_home_fraction", g.secondary_home_fraction);
    r.get("secondary_floor", g.secondary_floor);
    r.get("secondary_weekend_occupancy", g.secondary_weekend_occupancy);
    r.get("secondary_stays_min", g.secondary_stays_min);
    r.get("secondary_stays_max", g.secondary_stays_max);
    r.get("secondary_stay_min_days", g.secondary_stay_min_days);
    r.get("secondary_stay_max_days", g.secondary_stay_max_days);
    r.range("random_range", g.random_range);
    r.get("random_hold_days", g.random_hold_days);
    r.get("random_active", g.random_active);
    r.get("seed", g.seed);
    r.finish();
    return g;
}

json to_json(const cae::CAEConfig& c) {
    return {{"length", c.length},       {"latent", c.latent},
            {"epochs", c.epochs},       {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate}, {"l2", c.l2},
            {"optimizer", std::string(nn::to_string(c.optimizer))}, {"seed", c.seed}};
}

cae::CAEConfig cae_config_from_json(const json& j) {
    cae::CAEConfig c;
    Reader r(j, "cae");
    r.get("length", c.length);
    r.get("latent", c.latent);
    r.get("epochs", c.epochs);
    r.get("batch_size", c.batch_size);
    r.get("learning_rate", c.learning_rate);
    r.get("l2", c.l2);
    std::string opt(nn::to_string(c.optimizer));
    r.get("optimizer", opt);
    c.optimizer = nn::parse_optimizer(opt);
    r.get("seed", c.seed);
    r.finish();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json input;
    if (c.synthetic) input["synthetic"] = to_json(*c.synthetic);
    if (c.input_csv) input["csv"] = c.input_csv->string();
    json j;
    j["input"] = input;
    j["preprocess"] = {{"aggregate_daily", c.aggregate_daily},
                       {"samples_per_day", c.samples_per_day},
                       {"mean_normalize", c.mean_normalize},
                       {"max_days", c.max_days ? json(*c.max_days) : json(nullptr)}};
    j["method"] = to_string(c.method);
    json params = {{"pca_components", c.pca_components},
                   {"dtw_window", c.dtw_window ? json(*c.dtw_window) : json(nullptr)},
                   {"haar_levels", c.haar_levels},
                   {"cae", to_json(c.cae)},
                   {"cae_checkpoint", c.cae_checkpoint ? json(c.cae_checkpoint->string()) : json(nullptr)},
                   {"distance_cache", c.distance_cache ? json(c.distance_cache->string()) : json(nullptr)}};
    j["method_params"] = params;
    j["k"] = c.k ? json(*c.k) : json(nullptr);
    j["k_min"] = c.k_min;
    j["k_max"] = c.k_max;
    j["restarts"] = c.restarts;
    j["elbow_restarts"] = c.elbow_restarts;
    j["lof"] = {{"k", c.lof_k}, {"quantile", c.lof_quantile}};
    j["output_dir"] = c.output_dir.string();
    j["seed"] = c.seed;
    return j;
}

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
    ExperimentConfig c;
    Reader r(j, "config");
    if (const json* in = r.child("input")) {
        Reader ri(*in, "input");
        if (const json* s = ri.child("synthetic")) c.synthetic = generator_from_json(*s);
        std::optional<std::string> csv_path;
        ri.get("csv", csv_path);
        if (csv_path) c.input_csv = resolve(*csv_path, base_dir);
        ri.finish();
    }
    if (const json* p = r.child("preprocess")) {
        Reader rp(*p, "preprocess");
        rp.get("aggregate_daily", c.aggregate_daily);
        rp.get("samples_per_day", c.samples_per_day);
        rp.get("mean_normalize", c.mean_normalize);
        rp.get("max_days", c.max_days);
        rp.finish();
    }
    std::string method = to_string(c.method);
    r.get("method", method);
    c.method = parse_method(method);
    if (const json* p = r.child("method_params")) {
        Reader rm(*p, "method_params");
        rm.get("pca_components", c.pca_components);
        rm.get("dtw_window", c.dtw_window);
        rm.get("haar_levels", c.haar_levels);
        if (const json* cj = rm.child("cae")) c.cae = cae_config_from_json(*cj);
        std::optional<std::string> ckpt, cache;
        rm.get("cae_checkpoint", ckpt);
        rm.get("distance_cache", cache);
        if (ckpt) c.cae_checkpoint = resolve(*ckpt, base_dir);
        if (cache) c.distance_cache = resolve(*cache, base_dir);
        rm.finish();
    }
    if (auto it = j.find("k"); it != j.end() && it->is_null()) c.k.reset();
    r.get("k", c.k);
    r.get("k_min", c.k_min);
    r.get("k_max", c.k_max);
    r.get("restarts", c.restarts);
    r.get("elbow_restarts", c.elbow_restarts);
    if (const json* l = r.child("lof")) {
        Reader rl(*l, "lof");
        rl.get("k", c.lof_k);
        rl.get("quantile", c.lof_quantile);
        rl.finish();
    }
    std::string out = c.output_dir.string();
    r.get("output_dir", out);
    c.output_dir = resolve(out, base_dir);
    r.get("seed", c.seed);
    r.finish();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParameterError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

void write_assignment(const fs::path& path, const TimeSeriesDataset& ds, const std::vector<std::size_t>& assignment) {
    if (assignment.size() != ds.size()) throw DimensionError("write_assignment: size mismatch");
    std::ostringstream os;
    os << "series_id,cluster" << (ds.labeled() ? ",label" : "") << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        os << ds.ids[i] << ',' << assignment[i];
        if (ds.labeled()) os << ',' << ds.class_names[static_cast<std::size_t>(ds.labels[i])];
        os << '\n';
    }
    csv::write_text(path, os.str());
}

std::vector<std::size_t> read_assignment(const fs::path& path, std::vector<std::string>* ids) {
    const auto lines = csv::read_lines(path);
    const std::string source = path.string();
    if (lines.empty()) throw ParseError(source, 1, "missing header row");
    const auto header = csv::split(lines[0]);
    if (header.size() < 2 || header[0] != "series_id" || header[1] != "cluster")
        throw ParseError(source, 1, "header must start with series_id,cluster");
    std::vector<std::size_t> out;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto f = csv::split(lines[ln]);
        if (f.size() != header.size()) throw ParseError(source, ln + 1, "wrong number of fields");
        try {
            out.push_back(csv::parse_index(f[1]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, ln + 1, std::string("bad cluster id: ") + e.what());
        }
        if (ids) ids->emplace_back(f[0]);
    }
    return out;
}

void write_confusion(const fs::path& path, const evaluation::ConfusionMatrix& m,
                     const std::vector<std::string>& class_names) {
    std::ostringstream os;
    os << "class";
    for (std::size_t j = 0; j < m.clusters; ++j) os << ",cluster_" << j;
    os << '\n';
    for (std::size_t c = 0; c < m.classes; ++c) {
        os << (c < class_names.size() ? class_names[c] : std::to_string(c));
        for (std::size_t j = 0; j < m.clusters; ++j) os << ',' << m(c, j);
        os << '\n';
    }
    csv::write_text(path, os.str());
}

void write_cluster_stats(const fs::path& path, const std::vector<evaluation::ClusterStats>& stats) {
    std::ostringstream os;
    os << "cluster,size,outliers,std\n";
    for (std::size_t j = 0; j < stats.size(); ++j)
        os << j << ',' << stats[j].size << ',' << stats[j].outliers << ',' << csv::format_double(stats[j].std) << '\n';
    csv::write_text(path, os.str());
}

void write_lof(const fs::path& path, const std::vector<std::string>& ids, const outliers::LOFReport& r) {
    if (ids.size() != r.lof.size()) throw DimensionError("write_lof: size mismatch");
    std::ostringstream os;
    os << "series_id,lrd,lof,flagged\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        os << ids[i] << ',' << csv::format_double(r.lrd[i]) << ',' << csv::format_double(r.lof[i]) << ','
           << (r.flagged.empty() ? 0 : static_cast<int>(r.flagged[i])) << '\n';
    csv::write_text(path, os.str());
}

void write_elbow(const fs::path& path, const std::vector<clustering::ElbowPoint>& curve) {
    std::ostringstream os;
    os << "k,cost\n";
    for (const auto& p : curve) os << p.k << ',' << csv::format_double(p.cost) << '\n';
    csv::write_text(path, os.str());
}

void write_centroids(const fs::path& path, const Matrix& centroids) {
    std::vector<std::string> ids(centroids.rows());
    for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = std::to_string(j);
    std::ostringstream os;
    os << "cluster";
    for (std::size_t t = 0; t < centroids.cols(); ++t) os << ",v_" << t;
    os << '\n';
    for (std::size_t j = 0; j < centroids.rows(); ++j) {
        os << j;
        for (double v : centroids.row(j)) os << ',' << csv::format_double(v);
        os << '\n';
    }
    csv::write_text(path, os.str());
}

void write_manifest(const fs::path& dir, const json& config, std::uint64_t seed,
                    const std::vector<std::string>& artifacts) {
    json hashes = json::object();
    for (const auto& name : artifacts) hashes[name] = sha256_file_hex(dir / name);
    json m = {{"config", config}, {"seed", seed}, {"artifacts", hashes}};
    csv::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Logger& log) {
    using clock = std::chrono::steady_clock;
    auto say = [&](const std::string& msg) {
        if (log) log(msg);
    };
    auto timed = [&](Stage stage, auto&& f) {
        const auto t0 = clock::now();
        say(to_string(stage) + "...");
        in_stage(stage, f);
        say(to_string(stage) + " done in " +
            std::to_string(std::chrono::duration<double>(clock::now() - t0).count()) + " s");
    };

    in_stage(Stage::config, [&] { config.validate(); });
    const fs::path out = config.output_dir;
    in_stage(Stage::config, [&] { fs::create_directories(out); });

    ExperimentResult res;
    auto& artifacts = res.artifacts;
    json config_json = to_json(config);
    csv::write_text(out / "config.json", config_json.dump(2) + "\n");
    artifacts.push_back("config.json");

    // ingest
    Matrix daily;
    timed(Stage::ingest, [&] {
        if (config.synthetic) {
            auto gen = *config.synthetic;
            if (gen.seed == 0) gen.seed = stage_seed(config.seed, SeedStream::generator);
            auto labeled = synthgen::generate(gen);
            synthgen::export_csv(labeled.data, out / "dataset.csv");
            artifacts.push_back("dataset.csv");
            res.dataset = std::move(labeled.data);
            daily = res.dataset.series;
        } else {
            ingest::IngestOptions opt;
            opt.samples_per_day = config.samples_per_day;
            opt.aggregate_daily = config.aggregate_daily;
            opt.mean_normalize = false;
            opt.max_days = config.max_days;
            auto ing = ingest::ingest_cer_like(*config.input_csv, opt);
            ingest::write_rejection_log(out / "rejections.csv", ing.rejected);
            artifacts.push_back("rejections.csv");
            if (!ing.rejected.empty()) say(std::to_string(ing.rejected.size()) + " client(s) rejected, see rejections.csv");
            res.dataset = std::move(ing.dataset);
            daily = std::move(ing.daily);
        }
        if (res.dataset.size() == 0) throw ParameterError("no usable series");
    });

    // preprocess
    timed(Stage::preprocess, [&] {
        if (!config.mean_normalize) return;
        std::vector<std::string> ids;
        std::vector<int> labels;
        std::vector<double> values;
        std::vector<ingest::Rejection> rejected;
        for (std::size_t i = 0; i < res.dataset.size(); ++i) {
            const auto row = daily.row(i);
            double mean = 0.0;
            for (double v : row) mean += v;
            if (row.empty() || mean == 0.0 || !std::isfinite(mean)) {
                rejected.push_back({res.dataset.ids[i], "zero mean consumption"});
                continue;
            }
            auto norm = transforms::mean_normalize(row);
            values.insert(values.end(), norm.begin(), norm.end());
            ids.push_back(res.dataset.ids[i]);
            if (res.dataset.labeled()) labels.push_back(res.dataset.labels[i]);
        }
        if (!rejected.empty()) {
            say(std::to_string(rejected.size()) + " series with zero mean dropped");
            if (config.input_csv) {
                auto lines = csv::read_lines(out / "rejections.csv");
                std::string text;
                for (const auto& l : lines) text += l + '\n';
                for (const auto& r : rejected) text += r.client_id + ',' + r.reason + '\n';
                csv::write_text(out / "rejections.csv", text);
            }
        }
        const std::size_t t_len = daily.cols();
        res.dataset.series = Matrix(ids.size(), t_len, std::move(values));
        res.dataset.ids = std::move(ids);
        res.dataset.labels = std::move(labels);
        if (res.dataset.size() == 0) throw ParameterError("no series left after normalization");
    });

    const Matrix& x = res.dataset.series;
    const std::size_t n = x.rows();
    const std::uint64_t cluster_seed = stage_seed(config.seed, SeedStream::clustering);

    // features
    distances::DistanceMatrix dm;
    timed(Stage::features, [&] {
        switch (config.method) {
            case Method::raw_kmedoids:
                res.features = x;
                dm = distances::distance_matrix(x, distances::Metric{});
                break;
            case Method::pca_kmedoids: {
                const auto model = transforms::pca_fit(x, std::min(config.pca_components, x.cols()));
                res.features = transforms::pca_transform(model, x);
                dm = distances::distance_matrix(res.features, distances::Metric{});
                break;
            }
            case Method::haar_ikmeans:
                res.features = transforms::haar_dwt_rows(x);
                break;
            case Method::dtw_kmedoids: {
                bool hit = false;
                const distances::Metric metric{distances::MetricKind::dtw, config.dtw_window};
                dm = distances::cached_distance_matrix(dtw_cache_name(config), x, metric, &hit);
                say(hit ? "dtw distance matrix loaded from cache" : "dtw distance matrix computed and cached");
                break;
            }
            case Method::cae_kmedoids: {
                cae::TrainedCAE model;
                if (config.cae_checkpoint) {
                    model = cae::load_model(*config.cae_checkpoint);
                    if (model.config.length != x.cols())
                        throw DimensionError("checkpoint expects length " + std::to_string(model.config.length) +
                                             ", data has " + std::to_string(x.cols()));
                } else {
                    auto cc = config.cae;
                    cc.length = x.cols();
                    cc.seed = stage_seed(config.seed, SeedStream::training);
                    model = cae::train(x, cc, [&](std::size_t epoch, double loss) {
                        std::ostringstream os;
                        os << "  epoch " << epoch << "/" << cc.epochs << " loss " << loss;
                        say(os.str());
                    });
                    cae::save_model(out / "model", model);
                    artifacts.push_back("model.ckpt");
                    artifacts.push_back("model.json");
                }
                res.features = cae::normalize_latent(cae::encode(model, x));
                dm = distances::distance_matrix(res.features, distances::Metric{});
                break;
            }
        }
        if (!res.features.empty()) {
            csv::write_matrix(out / "features.csv", res.features, res.dataset.ids);
            artifacts.push_back("features.csv");
        }
    });

    // cluster (and the elbow curve over the same representation)
    timed(Stage::cluster, [&] {
        const std::size_t k_hi = std::min(config.k_max, n);
        const std::size_t k_lo = std::min(config.k_min, k_hi);
        if (uses_medoids(config.method))
            res.report.elbow = clustering::elbow_curve(dm, k_lo, k_hi, cluster_seed, config.elbow_restarts);
        else
            res.report.elbow = clustering::elbow_curve_kmeans(res.features, k_lo, k_hi, cluster_seed, config.elbow_restarts);
        if (res.report.elbow.size() >= 3) res.report.elbow_k = clustering::elbow_k(res.report.elbow);
        const std::size_t k = config.k ? *config.k : *res.report.elbow_k;
        if (k > n) throw ParameterError("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " series");
        if (config.method == Method::haar_ikmeans)
            res.clustering = clustering::interactive_wavelet_kmeans_coefficients(res.features, k, cluster_seed,
                                                                                  config.haar_levels);
        else
            res.clustering = clustering::kmedoids(dm, k, cluster_seed, config.restarts);
        res.report.k = k;
        write_elbow(out / "elbow.csv", res.report.elbow);
        artifacts.push_back("elbow.csv");
        write_assignment(out / "assignment.csv", res.dataset, res.clustering.assignment);
        artifacts.push_back("assignment.csv");
        json side = {{"method", to_string(config.method)},
                     {"k", k},
                     {"cost", res.clustering.cost},
                     {"iterations", res.clustering.iterations},
                     {"seed", res.clustering.seed},
                     {"medoids", res.clustering.medoids},
                     {"cost_trace", res.clustering.cost_trace}};
        csv::write_text(out / "assignment.json", side.dump(2) + "\n");
        artifacts.push_back("assignment.json");
    });

    // LOF on the Euclidean geometry of the normalized series
    timed(Stage::lof, [&] {
        if (config.lof_k >= n)
            throw ParameterError("lof.k = " + std::to_string(config.lof_k) + " needs more than " + std::to_string(n) +
                                 " series");
        const auto euclid = config.method == Method::raw_kmedoids ? dm : distances::distance_matrix(x, distances::Metric{});
        res.lof = outliers::lof_scores(euclid, config.lof_k);
        outliers::apply_quantile(res.lof, config.lof_quantile);
        write_lof(out / "lof.csv", res.dataset.ids, res.lof);
        artifacts.push_back("lof.csv");
    });

    // evaluate
    timed(Stage::evaluate, [&] {
        auto& rep = res.report;
        const std::size_t k = rep.k;
        rep.class_names = res.dataset.class_names;
        rep.cluster_stats =
            evaluation::cluster_stats(x, res.clustering.assignment, res.lof.flagged, k, &rep.warnings);
        rep.centroids = uses_medoids(config.method)
                            ? evaluation::medoid_centroids(x, res.clustering.medoids)
                            : evaluation::mean_centroids(x, res.clustering.assignment, k);
        write_cluster_stats(out / "cluster_stats.csv", rep.cluster_stats);
        artifacts.push_back("cluster_stats.csv");
        write_centroids(out / "centroids.csv", rep.centroids);
        artifacts.push_back("centroids.csv");
        if (res.dataset.labeled()) {
            rep.confusion = evaluation::confusion_matrix(res.clustering.assignment, res.dataset.labels,
                                                         res.dataset.class_names.size(), k);
            write_confusion(out / "confusion.csv", *rep.confusion, rep.class_names);
            artifacts.push_back("confusion.csv");
            if (k >= rep.confusion->classes) rep.label_match_accuracy = evaluation::label_match_accuracy(*rep.confusion);
            const auto it = std::find(rep.class_names.begin(), rep.class_names.end(), "outlier");
            if (it != rep.class_names.end()) {
                const auto c = static_cast<std::size_t>(it - rep.class_names.begin());
                const std::size_t total = rep.confusion->row_sums()[c];
                std::size_t best = 0;
                for (std::size_t j = 0; j < k; ++j) best = std::max(best, (*rep.confusion)(c, j));
                if (total > 0) rep.outlier_capture = static_cast<double>(best) / static_cast<double>(total);
            }
        }
        for (const auto& w : rep.warnings) say("warning: " + w);
    });

    timed(Stage::report, [&] {
        const auto& rep = res.report;
        json summary = {{"method", to_string(config.method)},
                        {"n", n},
                        {"length", x.cols()},
                        {"k", rep.k},
                        {"cost", res.clustering.cost},
                        {"elbow_k", rep.elbow_k ? json(*rep.elbow_k) : json(nullptr)},
                        {"flagged_outliers", res.lof.flagged_count()},
                        {"lof_threshold", res.lof.threshold},
                        {"label_match_accuracy", rep.label_match_accuracy ? json(*rep.label_match_accuracy) : json(nullptr)},
                        {"outlier_capture", rep.outlier_capture ? json(*rep.outlier_capture) : json(nullptr)},
                        {"warnings", rep.warnings}};
        csv::write_text(out / "summary.json", summary.dump(2) + "\n");
        artifacts.push_back("summary.json");
        write_manifest(out, config_json, config.seed, artifacts);
    });
    return res;
}

}  // namespace tsclust::pipeline

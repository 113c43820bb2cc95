#include "windcast/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <vector>

#include <json.hpp>

#include "windcast/analysis.hpp"
#include "windcast/embedding.hpp"
#include "windcast/error.hpp"
#include "windcast/forecast.hpp"
#include "windcast/forest.hpp"
#include "windcast/numio.hpp"
#include "windcast/synthetic.hpp"
#include "windcast/timeseries.hpp"

namespace windcast {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Removes every tracked output unless the run completed, so a failed
// command never leaves partial files behind.
class OutputGuard {
public:
    explicit OutputGuard(const fs::path& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error("cannot create output directory " + dir.string());
    }
    ~OutputGuard() {
        if (released_) return;
        for (const auto& p : tracked_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
    fs::path track(const std::string& filename) {
        tracked_.push_back(dir_ / filename);
        return tracked_.back();
    }
    void release() { released_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> tracked_;
    bool released_ = false;
};

json config_to_json(const RunConfig& c) {
    return json{
        {"subcommand", c.subcommand},
        {"input", c.input},
        {"model", c.model},
        {"output_dir", c.output_dir},
        {"timestamp_format", c.timestamp_format},
        {"interval_s", c.interval_s},
        {"max_gap", c.max_gap},
        {"m", c.m},
        {"bins", c.bins},
        {"max_delay", c.max_delay},
        {"threshold_fraction", c.threshold_fraction},
        {"lag_rule", c.lag_rule},
        {"n_trees", c.n_trees},
        {"mtry", c.mtry},
        {"min_leaf", c.min_leaf},
        {"max_depth", c.max_depth},
        {"bootstrap", c.bootstrap},
        {"subsample_fraction", c.subsample_fraction},
        {"seed", c.seed},
        {"n_train", c.n_train},
        {"n_validation", c.n_validation},
        {"stride", c.stride},
        {"block_len", c.block_len},
        {"horizon_steps", c.horizon_steps},
        {"first_test_index", c.first_test_index},
        {"origin", c.origin},
        {"gen_kind", c.gen_kind},
        {"gen_length", c.gen_length},
        {"gen_phi1", c.gen_phi1},
        {"gen_phi2", c.gen_phi2},
        {"gen_sigma", c.gen_sigma},
        {"gen_period", c.gen_period},
        {"gen_amplitude", c.gen_amplitude},
        {"gen_level", c.gen_level},
        {"gen_low", c.gen_low},
        {"gen_high", c.gen_high},
        {"gen_seed", c.gen_seed},
        {"threads", c.threads},
        {"dump_embedding", c.dump_embedding},
    };
}

void config_from_json(RunConfig& c, const json& j, const std::string& source) {
    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("subcommand", c.subcommand);
    get("input", c.input);
    get("model", c.model);
    get("output_dir", c.output_dir);
    get("timestamp_format", c.timestamp_format);
    get("interval_s", c.interval_s);
    get("max_gap", c.max_gap);
    get("m", c.m);
    get("bins", c.bins);
    get("max_delay", c.max_delay);
    get("threshold_fraction", c.threshold_fraction);
    get("lag_rule", c.lag_rule);
    get("n_trees", c.n_trees);
    get("mtry", c.mtry);
    get("min_leaf", c.min_leaf);
    get("max_depth", c.max_depth);
    get("bootstrap", c.bootstrap);
    get("subsample_fraction", c.subsample_fraction);
    get("seed", c.seed);
    get("n_train", c.n_train);
    get("n_validation", c.n_validation);
    get("stride", c.stride);
    get("block_len", c.block_len);
    get("horizon_steps", c.horizon_steps);
    get("first_test_index", c.first_test_index);
    get("origin", c.origin);
    get("gen_kind", c.gen_kind);
    get("gen_length", c.gen_length);
    get("gen_phi1", c.gen_phi1);
    get("gen_phi2", c.gen_phi2);
    get("gen_sigma", c.gen_sigma);
    get("gen_period", c.gen_period);
    get("gen_amplitude", c.gen_amplitude);
    get("gen_level", c.gen_level);
    get("gen_low", c.gen_low);
    get("gen_high", c.gen_high);
    get("gen_seed", c.gen_seed);
    get("threads", c.threads);
    get("dump_embedding", c.dump_embedding);

    const json known = config_to_json(RunConfig{});
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw Error("unknown config key \"" + key + "\" in " + source);
}

void write_json_file(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

void write_run_config(const RunConfig& config, OutputGuard& guard) {
    write_json_file(config_to_json(config), guard.track("run_config.json"));
}

IngestOptions ingest_options(const RunConfig& config) {
    IngestOptions opts;
    if (config.timestamp_format == "iso8601")
        opts.timestamp_format = TimestampFormat::kIso8601;
    else if (config.timestamp_format == "epoch")
        opts.timestamp_format = TimestampFormat::kEpochSeconds;
    else
        throw Error("unknown timestamp_format \"" + config.timestamp_format +
                    "\" (expected iso8601 or epoch)");
    opts.interval_s = config.interval_s;
    opts.max_gap = config.max_gap;
    return opts;
}

WindSeries load_input_series(const RunConfig& config) {
    if (config.input.empty()) throw Error("missing --input series CSV");
    return parse_csv(config.input, ingest_options(config)).series;
}

RandomForestModel load_input_model(const RunConfig& config) {
    if (config.model.empty()) throw Error("missing --model file");
    return load_model(config.model);
}

ForestConfig forest_config(const RunConfig& config) {
    ForestConfig fc;
    fc.n_trees = config.n_trees;
    fc.mtry = config.mtry;
    fc.min_leaf = config.min_leaf;
    fc.max_depth = config.max_depth;
    fc.bootstrap = bootstrap_mode_from_string(config.bootstrap);
    fc.subsample_fraction = config.subsample_fraction;
    fc.seed = config.seed;
    return fc;
}

double dataset_rmse(const RandomForestModel& model, const EmbeddingDataset& ds) {
    std::vector<double> predictions(ds.rows());
    for (std::size_t i = 0; i < ds.rows(); ++i) predictions[i] = predict(model, ds.row(i));
    return rmse(ds.targets, predictions);
}

std::size_t resolve_first_test_index(const RunConfig& config) {
    return config.first_test_index != 0
               ? config.first_test_index
               : config.m + config.n_train + config.n_validation;
}

} // namespace

RunConfig load_config_file(const fs::path& path) {
    RunConfig config;
    apply_config_file(config, path);
    return config;
}

void apply_config_file(RunConfig& config, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("malformed config file " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Error("config file must hold a JSON object: " + path.string());
    try {
        config_from_json(config, j, path.string());
    } catch (const json::exception& e) {
        throw Error("malformed config file " + path.string() + ": " + e.what());
    }
}

void run_gen(const RunConfig& config) {
    OutputGuard guard(config.output_dir);
    write_run_config(config, guard);

    WindSeries series;
    if (config.gen_kind == "noise")
        series = gen_noise(config.gen_length, config.gen_low, config.gen_high, config.gen_seed);
    else if (config.gen_kind == "ar2")
        series = gen_ar2(config.gen_length, config.gen_phi1, config.gen_phi2,
                         config.gen_sigma, config.gen_level, config.gen_seed);
    else if (config.gen_kind == "sine")
        series = gen_sine(config.gen_length, config.gen_period, config.gen_amplitude,
                          config.gen_sigma, config.gen_level, config.gen_seed);
    else
        throw Error("unknown generator kind \"" + config.gen_kind +
                    "\" (expected noise, ar2, or sine)");

    const fs::path out = guard.track("series.csv");
    write_csv(series, out);
    guard.release();
    std::cout << "wrote " << out.string() << " (" << series.size() << " samples)\n";
}

void run_analyze(const RunConfig& config) {
    OutputGuard guard(config.output_dir);
    write_run_config(config, guard);

    const WindSeries series = load_input_series(config);
    DelayProfile profile = mi_profile(series, config.max_delay, config.bins,
                                      config.threshold_fraction, config.threads);
    if (config.lag_rule == "first_minimum") {
        const LagSelection sel = select_embedding_lag_first_minimum(profile.mi_bits);
        profile.selected_lag = sel.lag;
        profile.lag_converged = sel.converged;
    } else if (config.lag_rule != "threshold") {
        throw Error("unknown lag_rule \"" + config.lag_rule +
                    "\" (expected threshold or first_minimum)");
    }

    {
        const fs::path out = guard.track("profile.csv");
        std::ofstream csv(out);
        if (!csv) throw Error("cannot open output file: " + out.string());
        csv << "lag,acf,mi_bits\n";
        csv << "0," << format_double(profile.acf[0]) << ",\n";
        for (std::size_t d = 1; d <= profile.max_delay; ++d)
            csv << d << ',' << format_double(profile.acf[d]) << ','
                << format_double(profile.mi_bits[d - 1]) << '\n';
        if (!csv) throw Error("failed writing " + out.string());
    }

    write_json_file(json{{"selected_lag", profile.selected_lag},
                         {"lag_converged", profile.lag_converged},
                         {"lag_rule", config.lag_rule},
                         {"threshold_fraction", config.threshold_fraction},
                         {"bins", config.bins},
                         {"max_delay", config.max_delay},
                         {"n_samples", series.size()}},
                    guard.track("analyze_summary.json"));
    guard.release();
    if (!profile.lag_converged)
        std::cerr << "warning: MI never crossed the selection threshold within max_delay\n";
    std::cout << "selected_lag=" << profile.selected_lag << '\n';
}

void run_embed(const RunConfig& config) {
    OutputGuard guard(config.output_dir);
    write_run_config(config, guard);

    const WindSeries series = load_input_series(config);
    const EmbeddingDataset ds = embed(series, config.m);

    if (config.dump_embedding) {
        const fs::path out = guard.track("embedding.csv");
        std::ofstream csv(out);
        if (!csv) throw Error("cannot open output file: " + out.string());
        for (std::size_t j = 0; j < ds.m; ++j) csv << 'x' << j << ',';
        csv << "target\n";
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            for (const double v : ds.row(i)) csv << format_double(v) << ',';
            csv << format_double(ds.targets[i]) << '\n';
        }
        if (!csv) throw Error("failed writing " + out.string());
    }

    write_json_file(json{{"m", ds.m}, {"rows", ds.rows()}, {"origin_index", ds.origin_index}},
                    guard.track("embed_summary.json"));
    guard.release();
    std::cout << "rows=" << ds.rows() << " m=" << ds.m << '\n';
}

void run_train(const RunConfig& config) {
    OutputGuard guard(config.output_dir);
    write_run_config(config, guard);

    const WindSeries series = load_input_series(config);
    const SplitPlan plan = plan_split(series, config.m, config.n_train, config.n_validation);
    const RandomForestModel model = train_forest(plan.train, forest_config(config), config.threads);

    const double train_rmse = dataset_rmse(model, plan.train);
    std::optional<double> validation_rmse;
    if (plan.validation.rows() > 0) validation_rmse = dataset_rmse(model, plan.validation);

    save_model(model, guard.track("model.json"));

    char fingerprint[17];
    std::snprintf(fingerprint, sizeof fingerprint, "%016llx",
                  static_cast<unsigned long long>(model.train_fingerprint));
    const json summary{{"m", model.m},
                       {"mtry", model.config.mtry},
                       {"n_trees", model.config.n_trees},
                       {"train_rows", plan.train.rows()},
                       {"validation_rows", plan.validation.rows()},
                       {"test_start_index", plan.test_start_index},
                       {"train_rmse", train_rmse},
                       {"validation_rmse", validation_rmse ? json(*validation_rmse) : json(nullptr)},
                       {"oob_rmse", model.oob_rmse ? json(*model.oob_rmse) : json(nullptr)},
                       {"train_fingerprint", fingerprint}};
    write_json_file(summary, guard.track("train_summary.json"));
    guard.release();
    std::cout << summary.dump() << '\n';
}

void run_forecast(const RunConfig& config) {
    OutputGuard guard(config.output_dir);
    write_run_config(config, guard);

    const RandomForestModel model = load_input_model(config);
    const WindSeries series = load_input_series(config);
    const std::size_t origin = config.origin != 0 ? config.origin : series.size();
    if (origin < model.m)
        throw Error("forecast origin " + std::to_string(origin) + " needs at least m = " +
                    std::to_string(model.m) + " samples before it");
    if (origin > series.size())
        throw Error("forecast origin " + std::to_string(origin) + " lies beyond the series (" +
                    std::to_string(series.size()) + " samples)");

    const std::span<const double> window(series.values.data() + (origin - model.m), model.m);
    const std::vector<double> predictions =
        predict_horizon(model, window, config.horizon_steps);

    const fs::path out = guard.track("forecast.csv");
    std::ofstream csv(out);
    if (!csv) throw Error("cannot open output file: " + out.string());
    csv << "step,predicted_ms\n";
    for (std::size_t s = 0; s < predictions.size(); ++s)
        csv << (s + 1) << ',' << format_double(predictions[s]) << '\n';
    if (!csv) throw Error("failed writing " + out.string());
    guard.release();
    std::cout << "wrote " << out.string() << " (" << predictions.size()
              << " steps from origin " << origin << ")\n";
}

void run_evaluate(const RunConfig& config) {
    OutputGuard guard(config.output_dir);
    write_run_config(config, guard);

    const RandomForestModel model = load_input_model(config);
    const WindSeries series = load_input_series(config);
    const std::size_t first_test = resolve_first_test_index(config);
    const EvalReport report = rolling_evaluate(model, series, first_test, config.stride,
                                               config.horizon_steps, config.block_len,
                                               config.threads);

    {
        const fs::path out = guard.track("blocks.csv");
        std::ofstream csv(out);
        if (!csv) throw Error("cannot open output file: " + out.string());
        csv << "block_index,test_start_index,horizon_steps,rmse\n";
        for (const auto& w : report.windows)
            csv << w.block_index << ',' << w.test_start_index << ',' << w.horizon_steps << ','
                << format_double(w.rmse) << '\n';
        if (!csv) throw Error("failed writing " + out.string());
    }
    {
        const fs::path out = guard.track("steps.csv");
        std::ofstream csv(out);
        if (!csv) throw Error("cannot open output file: " + out.string());
        csv << "block_index,step,rmse\n";
        for (const auto& w : report.windows)
            for (std::size_t h = 0; h < w.step_rmse.size(); ++h)
                csv << w.block_index << ',' << (h + 1) << ',' << format_double(w.step_rmse[h])
                    << '\n';
        if (!csv) throw Error("failed writing " + out.string());
    }

    write_json_file(json{{"average_rmse", report.average_rmse},
                         {"slope", report.trend.slope},
                         {"intercept", report.trend.intercept},
                         {"n_blocks", report.windows.size()},
                         {"horizon_steps", config.horizon_steps},
                         {"first_test_index", first_test}},
                    guard.track("evaluate_summary.json"));
    guard.release();
    std::cout << "average_rmse=" << format_double(report.average_rmse)
              << " slope=" << format_double(report.trend.slope) << '\n';
}

int run(const RunConfig& config) {
    if (config.subcommand == "gen") run_gen(config);
    else if (config.subcommand == "analyze") run_analyze(config);
    else if (config.subcommand == "embed") run_embed(config);
    else if (config.subcommand == "train") run_train(config);
    else if (config.subcommand == "forecast") run_forecast(config);
    else if (config.subcommand == "evaluate") run_evaluate(config);
    else throw Error("unknown subcommand \"" + config.subcommand + "\"");
    return 0;
}

} // namespace windcast

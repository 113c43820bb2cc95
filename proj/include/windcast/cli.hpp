#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace windcast {

/// Resolved configuration of one CLI run. Serializes to/from a JSON
/// config file whose keys mirror these field names exactly; every
/// command echoes the resolved config into its output directory as
/// run_config.json, so a run is reproducible from its outputs alone.
struct RunConfig {
    std::string subcommand;
    std::string input;              // series CSV
    std::string model;              // model JSON (forecast / evaluate)
    std::string output_dir = ".";

    // ingest
    std::string timestamp_format = "iso8601"; // iso8601 | epoch
    std::int64_t interval_s = 600;
    std::size_t max_gap = 6;

    // analysis
    std::size_t m = 72;
    std::size_t bins = 16;
    std::size_t max_delay = 144;
    double threshold_fraction = 0.05;
    std::string lag_rule = "threshold"; // threshold | first_minimum

    // forest
    std::size_t n_trees = 100;
    std::size_t mtry = 0;   // 0 = ceil(m / 3)
    std::size_t min_leaf = 5;
    std::size_t max_depth = 0; // 0 = unlimited
    std::string bootstrap = "with_replacement"; // with_replacement | subsample | off
    double subsample_fraction = 2.0 / 3.0;
    std::uint64_t seed = 1;

    // train/validation split
    std::size_t n_train = 2016;
    std::size_t n_validation = 2016;

    // evaluation & forecasting
    std::size_t stride = 2016;
    std::size_t block_len = 2016;
    std::size_t horizon_steps = 6;
    std::size_t first_test_index = 0; // 0 = m + n_train + n_validation
    std::size_t origin = 0;           // 0 = forecast past the series end

    // synthetic generator
    std::string gen_kind = "ar2"; // noise | ar2 | sine
    std::size_t gen_length = 20000;
    double gen_phi1 = 1.2;
    double gen_phi2 = -0.3;
    double gen_sigma = 0.5;
    double gen_period = 144.0;
    double gen_amplitude = 3.0;
    double gen_level = 8.0;
    double gen_low = 0.0;
    double gen_high = 10.0;
    std::uint64_t gen_seed = 1;

    // runtime
    std::size_t threads = 0; // 0 = hardware concurrency
    bool dump_embedding = false;
};

/// Reads a JSON config file over the defaults. Unknown keys are an error.
RunConfig load_config_file(const std::filesystem::path& path);

/// Applies a config file on top of `config` (keeps fields the file omits).
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Subcommands. Each writes its outputs plus run_config.json under
// config.output_dir, printing a one-line summary to stdout. On error the
// partially written outputs are removed and an Error propagates.
void run_gen(const RunConfig& config);
void run_analyze(const RunConfig& config);
void run_embed(const RunConfig& config);
void run_train(const RunConfig& config);
void run_forecast(const RunConfig& config);
void run_evaluate(const RunConfig& config);

/// Dispatch on config.subcommand; returns the process exit status.
int run(const RunConfig& config);

} // namespace windcast

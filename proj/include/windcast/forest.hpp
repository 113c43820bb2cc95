#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "windcast/embedding.hpp"

namespace windcast {

enum class BootstrapMode {
    kWithReplacement, // n draws with replacement (standard bagging)
    kSubsample,       // floor(subsample_fraction * n) distinct rows
    kOff,             // every tree sees all rows
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t mtry = 0;     // candidate features per split; 0 = ceil(m / 3)
    std::size_t min_leaf = 5; // minimum in-bag samples per leaf
    std::size_t max_depth = 0; // 0 = unlimited
    BootstrapMode bootstrap = BootstrapMode::kWithReplacement;
    double subsample_fraction = 2.0 / 3.0; // used by kSubsample only
    std::uint64_t seed = 0;
};

/// Node of a regression tree in a flat array. feature == -1 marks a leaf,
/// whose value is the arithmetic mean of the in-bag targets routed to it.
/// Internal nodes route value <= threshold to the left child.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;        // nodes[0] is the root
    std::vector<std::uint32_t> in_bag;  // per training row: times drawn into the bag

    double predict(std::span<const double> x) const {
        std::uint32_t k = 0;
        while (nodes[k].feature >= 0)
            k = x[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold
                    ? nodes[k].left
                    : nodes[k].right;
        return nodes[k].value;
    }
};

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0; // weighted variance reduction, > 0
};

/// Best split over the candidate features for the node holding `rows`
/// (a multiset of dataset row indices). Maximizes
///   Var(parent) - (nL/n) Var(L) - (nR/n) Var(R)
/// over thresholds placed midway between consecutive distinct sorted
/// feature values, keeping at least min_leaf samples on each side.
/// Ties break toward the lowest feature index, then lowest threshold, so
/// the result does not depend on candidate order. Returns nothing when no
/// split has positive gain.
std::optional<SplitCandidate> best_split(const EmbeddingDataset& dataset,
                                         std::span<const std::uint32_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_leaf);

/// Grows one CART regression tree on the given in-bag multiset. At each
/// node a fresh subset of config.mtry features (drawn without replacement
/// from the tree's SplitMix64 stream, nodes visited depth first, left
/// before right) is offered to best_split. Growth stops at pure targets,
/// min_leaf, max_depth, or when no split has positive gain. Expects
/// config.mtry already resolved (nonzero).
RegressionTree train_tree(const EmbeddingDataset& dataset,
                          std::vector<std::uint32_t> in_bag_rows,
                          const ForestConfig& config, std::uint64_t tree_seed);

struct RandomForestModel {
    std::vector<RegressionTree> trees;
    ForestConfig config; // as trained, with mtry resolved
    std::size_t m = 0;
    std::optional<double> oob_rmse; // m/s; set when bootstrapping was on
    std::uint64_t train_fingerprint = 0;
};

/// Trains config.n_trees trees, each on its own bootstrap draw (per
/// config.bootstrap). All per-tree randomness derives from
/// substream_seed(config.seed, tree_index), so predictions are a pure
/// function of (dataset, config) no matter how many threads run.
RandomForestModel train_forest(const EmbeddingDataset& dataset, const ForestConfig& config,
                               std::size_t threads = 0);

/// Unweighted mean of the per-tree outputs for one input window.
double predict(const RandomForestModel& model, std::span<const double> window);

/// Out-of-bag RMSE: every row with at least one tree that never drew it is
/// predicted by averaging only those trees. Requires bootstrapping on and
/// at least one qualifying row.
double oob_error(const RandomForestModel& model, const EmbeddingDataset& dataset);

/// 64-bit FNV-1a over the dataset shape and raw sample bytes; recorded in
/// the model so a file can be matched to its training data.
std::uint64_t dataset_fingerprint(const EmbeddingDataset& dataset);

/// JSON model file, written with round-trip numeric precision: a loaded
/// model predicts bitwise identically to the saved one.
void save_model(const RandomForestModel& model, const std::filesystem::path& path);
RandomForestModel load_model(const std::filesystem::path& path);

const char* to_string(BootstrapMode mode);
BootstrapMode bootstrap_mode_from_string(const std::string& text);

} // namespace windcast

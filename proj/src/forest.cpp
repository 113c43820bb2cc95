#include "windcast/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "windcast/error.hpp"
#include "windcast/parallel.hpp"
#include "windcast/rng.hpp"

namespace windcast {

namespace {

struct SplitScratch {
    std::vector<std::pair<double, double>> samples; // (feature value, target)
    std::vector<double> cum_y;
    std::vector<double> cum_y2;
};

std::optional<SplitCandidate> best_split_impl(const EmbeddingDataset& dataset,
                                              std::span<const std::uint32_t> rows,
                                              std::span<const std::size_t> candidate_features,
                                              std::size_t min_leaf, SplitScratch& scratch) {
    min_leaf = std::max<std::size_t>(min_leaf, 1);
    const std::size_t n = rows.size();
    if (n < 2 * min_leaf || candidate_features.empty()) return std::nullopt;

    // A pure node cannot gain from any split; checking targets directly
    // also keeps floating-point cancellation from manufacturing a bogus
    // positive gain on constant targets.
    const double first_target = dataset.targets[rows[0]];
    bool pure = true;
    for (std::uint32_t r : rows)
        if (dataset.targets[r] != first_target) {
            pure = false;
            break;
        }
    if (pure) return std::nullopt;

    auto& samples = scratch.samples;
    auto& cum_y = scratch.cum_y;
    auto& cum_y2 = scratch.cum_y2;

    std::optional<SplitCandidate> best;
    double parent_sse = 0.0;
    bool have_parent_sse = false;

    for (const std::size_t f : candidate_features) {
        samples.clear();
        for (std::uint32_t r : rows)
            samples.emplace_back(dataset.inputs[r * dataset.m + f], dataset.targets[r]);
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        cum_y.assign(n + 1, 0.0);
        cum_y2.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            cum_y[i + 1] = cum_y[i] + samples[i].second;
            cum_y2[i + 1] = cum_y2[i] + samples[i].second * samples[i].second;
        }
        if (!have_parent_sse) {
            parent_sse = cum_y2[n] - cum_y[n] * cum_y[n] / static_cast<double>(n);
            have_parent_sse = true;
        }

        for (std::size_t p = min_leaf; p + min_leaf <= n; ++p) {
            const double lo = samples[p - 1].first;
            const double hi = samples[p].first;
            if (lo == hi) continue;
            const double threshold = (lo + hi) * 0.5;
            // Rounding can land the midpoint on the upper value, which
            // would route it left and empty the right child; such a cut
            // has no valid threshold.
            if (!(threshold < hi)) continue;

            const double nl = static_cast<double>(p);
            const double nr = static_cast<double>(n - p);
            const double sse_l = cum_y2[p] - cum_y[p] * cum_y[p] / nl;
            const double sum_r = cum_y[n] - cum_y[p];
            const double sse_r = (cum_y2[n] - cum_y2[p]) - sum_r * sum_r / nr;
            const double gain = (parent_sse - sse_l - sse_r) / static_cast<double>(n);
            if (gain <= 0.0) continue;

            const bool better =
                !best || gain > best->gain ||
                (gain == best->gain &&
                 (f < best->feature || (f == best->feature && threshold < best->threshold)));
            if (better) best = SplitCandidate{f, threshold, gain};
        }
    }
    return best;
}

double mean_target(const EmbeddingDataset& dataset, std::span<const std::uint32_t> rows) {
    double sum = 0.0;
    for (std::uint32_t r : rows) sum += dataset.targets[r];
    return sum / static_cast<double>(rows.size());
}

} // namespace

std::optional<SplitCandidate> best_split(const EmbeddingDataset& dataset,
                                         std::span<const std::uint32_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_leaf) {
    SplitScratch scratch;
    return best_split_impl(dataset, rows, candidate_features, min_leaf, scratch);
}

RegressionTree train_tree(const EmbeddingDataset& dataset,
                          std::vector<std::uint32_t> in_bag_rows,
                          const ForestConfig& config, std::uint64_t tree_seed) {
    if (in_bag_rows.empty()) throw Error("train_tree needs a nonempty in-bag sample");
    const std::size_t m = dataset.m;
    if (config.mtry < 1 || config.mtry > m)
        throw Error("train_tree needs a resolved mtry in [1, m]");

    RegressionTree tree;
    tree.in_bag.assign(dataset.rows(), 0);
    for (std::uint32_t r : in_bag_rows) ++tree.in_bag[r];

    SplitMix64 rng(tree_seed);
    std::vector<std::size_t> features(m);
    std::iota(features.begin(), features.end(), std::size_t{0});
    SplitScratch scratch;

    struct Frame {
        std::uint32_t node;
        std::vector<std::uint32_t> rows;
        std::size_t depth;
    };
    // Depth-first, left child on top of the stack, so the random feature
    // draws are consumed in a fixed preorder walk.
    std::vector<Frame> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(in_bag_rows), 0});

    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();
        TreeNode& node = tree.nodes[frame.node];

        std::optional<SplitCandidate> split;
        const bool depth_capped = config.max_depth > 0 && frame.depth >= config.max_depth;
        if (!depth_capped && frame.rows.size() >= 2 * config.min_leaf) {
            // Partial Fisher-Yates: the first mtry entries become a uniform
            // draw without replacement whatever permutation is left over
            // from earlier nodes.
            for (std::size_t i = 0; i < config.mtry; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
                std::swap(features[i], features[j]);
            }
            split = best_split_impl(dataset, frame.rows,
                                    std::span<const std::size_t>(features.data(), config.mtry),
                                    config.min_leaf, scratch);
        }

        if (!split) {
            node.feature = -1;
            node.value = mean_target(dataset, frame.rows);
            continue;
        }

        std::vector<std::uint32_t> left_rows, right_rows;
        left_rows.reserve(frame.rows.size());
        right_rows.reserve(frame.rows.size());
        for (std::uint32_t r : frame.rows) {
            if (dataset.inputs[r * m + split->feature] <= split->threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        const auto left_idx = static_cast<std::uint32_t>(tree.nodes.size());
        const auto right_idx = left_idx + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        // emplace_back may reallocate; re-address the node.
        TreeNode& parent = tree.nodes[frame.node];
        parent.feature = static_cast<std::int32_t>(split->feature);
        parent.threshold = split->threshold;
        parent.left = left_idx;
        parent.right = right_idx;

        stack.push_back({right_idx, std::move(right_rows), frame.depth + 1});
        stack.push_back({left_idx, std::move(left_rows), frame.depth + 1});
    }
    return tree;
}

namespace {

std::vector<std::uint32_t> draw_in_bag(const ForestConfig& config, std::size_t n,
                                       std::uint64_t sample_seed) {
    SplitMix64 rng(sample_seed);
    std::vector<std::uint32_t> rows;
    switch (config.bootstrap) {
        case BootstrapMode::kWithReplacement: {
            rows.resize(n);
            for (auto& r : rows) r = static_cast<std::uint32_t>(rng.below(n));
            break;
        }
        case BootstrapMode::kSubsample: {
            auto k = static_cast<std::size_t>(config.subsample_fraction * static_cast<double>(n));
            k = std::clamp<std::size_t>(k, 1, n);
            std::vector<std::uint32_t> pool(n);
            std::iota(pool.begin(), pool.end(), 0u);
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
                std::swap(pool[i], pool[j]);
            }
            rows.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
            break;
        }
        case BootstrapMode::kOff: {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), 0u);
            break;
        }
    }
    return rows;
}

std::optional<double> oob_rmse_impl(const RandomForestModel& model,
                                    const EmbeddingDataset& dataset) {
    double sq_sum = 0.0;
    std::size_t n_scored = 0;
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        double sum = 0.0;
        std::size_t n_trees = 0;
        for (const auto& tree : model.trees) {
            if (tree.in_bag[r] != 0) continue;
            sum += tree.predict(dataset.row(r));
            ++n_trees;
        }
        if (n_trees == 0) continue;
        const double err = sum / static_cast<double>(n_trees) - dataset.targets[r];
        sq_sum += err * err;
        ++n_scored;
    }
    if (n_scored == 0) return std::nullopt;
    return std::sqrt(sq_sum / static_cast<double>(n_scored));
}

} // namespace

RandomForestModel train_forest(const EmbeddingDataset& dataset, const ForestConfig& config,
                               std::size_t threads) {
    const std::size_t n = dataset.rows();
    const std::size_t m = dataset.m;
    if (n == 0) throw Error("train_forest needs a nonempty dataset");
    if (config.n_trees < 1) throw Error("n_trees must be at least 1");
    if (config.min_leaf < 1) throw Error("min_leaf must be at least 1");
    if (config.mtry > m)
        throw Error("mtry " + std::to_string(config.mtry) + " exceeds embedding length " +
                    std::to_string(m));
    if (config.bootstrap == BootstrapMode::kSubsample &&
        !(config.subsample_fraction > 0.0 && config.subsample_fraction <= 1.0))
        throw Error("subsample_fraction must lie in (0, 1]");

    RandomForestModel model;
    model.m = m;
    model.config = config;
    if (model.config.mtry == 0) model.config.mtry = (m + 2) / 3; // ceil(m / 3)
    model.train_fingerprint = dataset_fingerprint(dataset);
    model.trees.resize(config.n_trees);

    const ForestConfig& resolved = model.config;
    parallel_for(config.n_trees, threads, [&](std::size_t t) {
        // Even substreams feed the bootstrap draw, odd ones the split
        // search, so the two uses never share a stream.
        const std::uint64_t sample_seed = substream_seed(resolved.seed, 2 * t);
        const std::uint64_t node_seed = substream_seed(resolved.seed, 2 * t + 1);
        auto bag = draw_in_bag(resolved, n, sample_seed);
        model.trees[t] = train_tree(dataset, std::move(bag), resolved, node_seed);
    });

    if (resolved.bootstrap != BootstrapMode::kOff)
        model.oob_rmse = oob_rmse_impl(model, dataset);
    return model;
}

double predict(const RandomForestModel& model, std::span<const double> window) {
    if (window.size() != model.m)
        throw Error("prediction window has " + std::to_string(window.size()) +
                    " values; model expects m = " + std::to_string(model.m));
    for (double v : window)
        if (!std::isfinite(v)) throw Error("prediction window holds a non-finite value");
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(window);
    return sum / static_cast<double>(model.trees.size());
}

double oob_error(const RandomForestModel& model, const EmbeddingDataset& dataset) {
    if (model.config.bootstrap == BootstrapMode::kOff)
        throw Error("out-of-bag error is undefined when bootstrapping is off");
    if (dataset.rows() != model.trees.front().in_bag.size())
        throw Error("dataset row count does not match the model's in-bag masks");
    const auto rmse = oob_rmse_impl(model, dataset);
    if (!rmse) throw Error("no row is out-of-bag for any tree");
    return *rmse;
}

std::uint64_t dataset_fingerprint(const EmbeddingDataset& dataset) {
    std::uint64_t h = 1469598103934665603ull;
    const auto mix_bytes = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    const std::uint64_t m = dataset.m;
    const std::uint64_t rows = dataset.rows();
    mix_bytes(&m, sizeof m);
    mix_bytes(&rows, sizeof rows);
    mix_bytes(dataset.inputs.data(), dataset.inputs.size() * sizeof(double));
    mix_bytes(dataset.targets.data(), dataset.targets.size() * sizeof(double));
    return h;
}

const char* to_string(BootstrapMode mode) {
    switch (mode) {
        case BootstrapMode::kWithReplacement: return "with_replacement";
        case BootstrapMode::kSubsample: return "subsample";
        case BootstrapMode::kOff: return "off";
    }
    return "with_replacement";
}

BootstrapMode bootstrap_mode_from_string(const std::string& text) {
    if (text == "with_replacement") return BootstrapMode::kWithReplacement;
    if (text == "subsample") return BootstrapMode::kSubsample;
    if (text == "off") return BootstrapMode::kOff;
    throw Error("unknown bootstrap mode \"" + text +
                "\" (expected with_replacement, subsample, or off)");
}

namespace {

constexpr int kModelFormatVersion = 1;

std::string fingerprint_to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::uint64_t fingerprint_from_hex(const std::string& s) {
    if (s.size() != 16) throw Error("malformed train_fingerprint in model file");
    std::uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw Error("malformed train_fingerprint in model file");
    }
    return v;
}

} // namespace

void save_model(const RandomForestModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["m"] = model.m;
    j["config"] = {
        {"n_trees", model.config.n_trees},
        {"mtry", model.config.mtry},
        {"min_leaf", model.config.min_leaf},
        {"max_depth", model.config.max_depth},
        {"bootstrap", to_string(model.config.bootstrap)},
        {"subsample_fraction", model.config.subsample_fraction},
        {"seed", model.config.seed},
    };
    if (model.oob_rmse) j["oob_rmse"] = *model.oob_rmse;
    else j["oob_rmse"] = nullptr;
    j["train_fingerprint"] = fingerprint_to_hex(model.train_fingerprint);

    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        trees.push_back({{"nodes", std::move(nodes)}, {"in_bag", tree.in_bag}});
    }
    j["trees"] = std::move(trees);

    std::ofstream out(path);
    if (!out) throw Error("cannot open model file for writing: " + path.string());
    out << j.dump() << '\n';
    if (!out) throw Error("failed writing model file: " + path.string());
}

RandomForestModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("corrupted model file " + path.string() + ": " + e.what());
    }

    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw Error("model file " + path.string() + " has format version " +
                        std::to_string(version) + "; this build reads version " +
                        std::to_string(kModelFormatVersion));

        RandomForestModel model;
        model.m = j.at("m").get<std::size_t>();
        const auto& c = j.at("config");
        model.config.n_trees = c.at("n_trees").get<std::size_t>();
        model.config.mtry = c.at("mtry").get<std::size_t>();
        model.config.min_leaf = c.at("min_leaf").get<std::size_t>();
        model.config.max_depth = c.at("max_depth").get<std::size_t>();
        model.config.bootstrap = bootstrap_mode_from_string(c.at("bootstrap").get<std::string>());
        model.config.subsample_fraction = c.at("subsample_fraction").get<double>();
        model.config.seed = c.at("seed").get<std::uint64_t>();
        if (!j.at("oob_rmse").is_null()) model.oob_rmse = j.at("oob_rmse").get<double>();
        model.train_fingerprint = fingerprint_from_hex(j.at("train_fingerprint").get<std::string>());

        for (const auto& jt : j.at("trees")) {
            RegressionTree tree;
            for (const auto& jn : jt.at("nodes")) {
                if (!jn.is_array() || jn.size() != 5)
                    throw Error("corrupted model file " + path.string() + ": bad node record");
                TreeNode node;
                node.feature = jn[0].get<std::int32_t>();
                node.threshold = jn[1].get<double>();
                node.left = jn[2].get<std::uint32_t>();
                node.right = jn[3].get<std::uint32_t>();
                node.value = jn[4].get<double>();
                tree.nodes.push_back(node);
            }
            tree.in_bag = jt.at("in_bag").get<std::vector<std::uint32_t>>();
            if (tree.nodes.empty())
                throw Error("corrupted model file " + path.string() + ": empty tree");
            for (const auto& n : tree.nodes) {
                if (n.feature >= 0 &&
                    (static_cast<std::size_t>(n.feature) >= model.m ||
                     n.left >= tree.nodes.size() || n.right >= tree.nodes.size()))
                    throw Error("corrupted model file " + path.string() +
                                ": node index out of range");
            }
            model.trees.push_back(std::move(tree));
        }
        if (model.trees.empty())
            throw Error("corrupted model file " + path.string() + ": no trees");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error("corrupted model file " + path.string() + ": " + e.what());
    }
}

} // namespace windcast

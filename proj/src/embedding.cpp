#include "windcast/embedding.hpp"

#include "windcast/error.hpp"

namespace windcast {

namespace {

// Rows [first_row, first_row + n_rows) of the sliding-window embedding.
EmbeddingDataset embed_rows(const WindSeries& series, std::size_t m,
                            std::size_t first_row, std::size_t n_rows) {
    EmbeddingDataset ds;
    ds.m = m;
    ds.origin_index = first_row;
    ds.inputs.resize(n_rows * m);
    ds.targets.resize(n_rows);
    const auto& v = series.values;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const std::size_t base = first_row + i;
        for (std::size_t j = 0; j < m; ++j) ds.inputs[i * m + j] = v[base + j];
        ds.targets[i] = v[base + m];
    }
    return ds;
}

} // namespace

EmbeddingDataset embed(const WindSeries& series, std::size_t m) {
    if (m < 1) throw Error("embedding length m must be at least 1");
    if (series.size() <= m)
        throw Error("series of " + std::to_string(series.size()) +
                    " samples is too short to embed with m = " + std::to_string(m));
    return embed_rows(series, m, 0, series.size() - m);
}

SplitPlan plan_split(const WindSeries& series, std::size_t m,
                     std::size_t n_train, std::size_t n_validation) {
    if (m < 1) throw Error("embedding length m must be at least 1");
    if (n_train < 1) throw Error("plan_split needs at least one training row");
    const std::size_t needed = m + n_train + n_validation + 1;
    if (series.size() < needed)
        throw Error("plan_split needs " + std::to_string(needed) + " samples (m + n_train + " +
                    "n_validation + one test sample); series has " +
                    std::to_string(series.size()));

    SplitPlan plan;
    plan.train = embed_rows(series, m, 0, n_train);
    plan.validation = embed_rows(series, m, n_train, n_validation);
    plan.test_start_index = m + n_train + n_validation;
    return plan;
}

} // namespace windcast

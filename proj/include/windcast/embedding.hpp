#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "windcast/timeseries.hpp"

namespace windcast {

/// Delay-embedding regression dataset built from a scalar series with
/// maximally overlapping sliding windows: row i holds the m consecutive
/// samples starting at source index origin_index + i, and its target is
/// the sample immediately after them,
///   inputs[i][j] = source[origin_index + i + j]
///   targets[i]   = source[origin_index + i + m].
struct EmbeddingDataset {
    std::size_t m = 0;
    std::size_t origin_index = 0;
    std::vector<double> inputs; // row-major, rows() x m
    std::vector<double> targets;

    std::size_t rows() const { return targets.size(); }
    std::span<const double> row(std::size_t i) const {
        return {inputs.data() + i * m, m};
    }
};

/// Chronological train/validation carve-out. Train rows come first,
/// validation rows follow immediately, and test_start_index points at the
/// first source sample not covered by either (where test evaluation may
/// begin).
struct SplitPlan {
    EmbeddingDataset train;
    EmbeddingDataset validation;
    std::size_t test_start_index = 0;
};

/// Sliding-window dataset over the whole series; series must be longer
/// than m.
EmbeddingDataset embed(const WindSeries& series, std::size_t m);

/// First n_train embedding rows for training, the next n_validation for
/// validation. Requires the series to hold m + n_train + n_validation
/// samples plus at least one more for testing. n_validation may be 0.
SplitPlan plan_split(const WindSeries& series, std::size_t m,
                     std::size_t n_train, std::size_t n_validation);

} // namespace windcast

#include "windcast/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "windcast/error.hpp"
#include "windcast/parallel.hpp"

namespace windcast {

std::vector<double> autocorrelation(const WindSeries& series, std::size_t max_lag) {
    const auto& x = series.values;
    const std::size_t n = x.size();
    if (n == 0) throw Error("autocorrelation of an empty series");
    if (max_lag >= n)
        throw Error("max_lag " + std::to_string(max_lag) + " must be below series length " +
                    std::to_string(n));

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> r(max_lag + 1);
    double denom = 0.0;
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < n; ++t)
            num += (x[t] - mean) * (x[t + k] - mean);
        if (k == 0) {
            denom = num; // same summation order as the k=0 numerator, so r[0] == 1 exactly
            if (denom == 0.0) throw Error("autocorrelation of a zero-variance series");
        }
        r[k] = num / denom;
    }
    return r;
}

namespace {

// Bin index in [0, bins) for an equal-width partition of [lo, hi].
// The top edge folds into the last bin.
inline std::size_t bin_of(double v, double lo, double width, std::size_t bins) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    return b >= bins ? bins - 1 : b;
}

} // namespace

double mutual_information(const WindSeries& series, std::size_t delay, std::size_t bins) {
    const auto& x = series.values;
    const std::size_t n = x.size();
    if (delay < 1) throw Error("mutual information delay must be at least 1");
    if (bins < 1) throw Error("mutual information needs at least one bin");
    if (n < delay + 2)
        throw Error("delay " + std::to_string(delay) + " too large for series of " +
                    std::to_string(n) + " samples");

    const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *min_it;
    const double hi = *max_it;
    if (lo == hi) throw Error("mutual information of a degenerate (constant) series");
    const double width = (hi - lo) / static_cast<double>(bins);

    const std::size_t n_pairs = n - delay;
    std::vector<std::size_t> joint(bins * bins, 0);
    for (std::size_t t = 0; t < n_pairs; ++t) {
        const std::size_t i = bin_of(x[t], lo, width, bins);
        const std::size_t j = bin_of(x[t + delay], lo, width, bins);
        ++joint[i * bins + j];
    }

    std::vector<std::size_t> row(bins, 0), col(bins, 0);
    for (std::size_t i = 0; i < bins; ++i)
        for (std::size_t j = 0; j < bins; ++j) {
            row[i] += joint[i * bins + j];
            col[j] += joint[i * bins + j];
        }

    const double total = static_cast<double>(n_pairs);
    double mi = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        if (row[i] == 0) continue;
        for (std::size_t j = 0; j < bins; ++j) {
            const std::size_t c = joint[i * bins + j];
            if (c == 0) continue;
            const double p = static_cast<double>(c) / total;
            const double px = static_cast<double>(row[i]) / total;
            const double py = static_cast<double>(col[j]) / total;
            mi += p * std::log2(p / (px * py));
        }
    }
    return mi < 0.0 ? 0.0 : mi;
}

LagSelection select_embedding_lag(const std::vector<double>& mi_bits,
                                  double threshold_fraction) {
    if (mi_bits.empty()) throw Error("embedding lag selection needs a nonempty MI profile");
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
        throw Error("threshold_fraction must lie in (0, 1)");
    if (mi_bits[0] <= 0.0)
        throw Error("MI at delay 1 is zero; cannot select an embedding lag");

    const double cutoff = threshold_fraction * mi_bits[0];
    for (std::size_t d = 1; d <= mi_bits.size(); ++d)
        if (mi_bits[d - 1] < cutoff) return {d, true};
    return {mi_bits.size(), false};
}

LagSelection select_embedding_lag_first_minimum(const std::vector<double>& mi_bits) {
    if (mi_bits.empty()) throw Error("embedding lag selection needs a nonempty MI profile");
    for (std::size_t i = 1; i + 1 < mi_bits.size(); ++i)
        if (mi_bits[i] < mi_bits[i - 1] && mi_bits[i] < mi_bits[i + 1])
            return {i + 1, true};
    return {mi_bits.size(), false};
}

DelayProfile mi_profile(const WindSeries& series, std::size_t max_delay,
                        std::size_t bins, double threshold_fraction,
                        std::size_t threads) {
    if (max_delay < 1) throw Error("mi_profile needs max_delay >= 1");
    DelayProfile profile;
    profile.max_delay = max_delay;
    profile.acf = autocorrelation(series, max_delay);
    profile.mi_bits.resize(max_delay);
    parallel_for(max_delay, threads, [&](std::size_t i) {
        profile.mi_bits[i] = mutual_information(series, i + 1, bins);
    });
    const LagSelection sel = select_embedding_lag(profile.mi_bits, threshold_fraction);
    profile.selected_lag = sel.lag;
    profile.lag_converged = sel.converged;
    return profile;
}

} // namespace windcast

#pragma once

#include <cstddef>
#include <vector>

#include "windcast/timeseries.hpp"

namespace windcast {

/// Temporal-dependence summary of a series: autocorrelation and delayed
/// mutual information per lag, plus the embedding lag picked from the MI
/// curve.
struct DelayProfile {
    std::size_t max_delay = 0;
    std::vector<double> acf;     // lags 0..max_delay; acf[0] == 1 exactly
    std::vector<double> mi_bits; // delays 1..max_delay, clipped at 0
    std::size_t selected_lag = 0;
    bool lag_converged = false;  // false when no delay crossed the threshold
};

struct LagSelection {
    std::size_t lag = 0;
    bool converged = false;
};

/// Sample autocorrelation r(k) for k = 0..max_lag with the biased
/// (shared-denominator) normalization, which guarantees |r| <= 1:
///   r(k) = sum_t (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2
std::vector<double> autocorrelation(const WindSeries& series, std::size_t max_lag);

/// Mutual information, in bits, between the series and its delay-shifted
/// copy. Plug-in estimator on an equal-width bins x bins joint histogram
/// of the pairs (x_t, x_{t+delay}); both axes span [min, max] of the full
/// series and the marginals are the joint's row/column sums, so the
/// estimate is internally consistent. Empty cells contribute nothing and
/// the total is clipped at 0 against floating-point cancellation.
double mutual_information(const WindSeries& series, std::size_t delay, std::size_t bins);

/// Smallest delay whose MI drops below threshold_fraction * mi_bits[0]
/// (the MI at delay 1). When no delay qualifies, returns the largest delay
/// with converged = false.
LagSelection select_embedding_lag(const std::vector<double>& mi_bits,
                                  double threshold_fraction);

/// Alternative rule: first strict local minimum of the MI curve
/// (Fraser & Swinney). Returns the largest delay, not converged, when the
/// curve has none.
LagSelection select_embedding_lag_first_minimum(const std::vector<double>& mi_bits);

/// ACF and MI for every delay up to max_delay, with the embedding lag
/// selected by the threshold rule. Per-delay MI estimates run in parallel;
/// the profile is assembled in delay order so the result is independent of
/// scheduling.
DelayProfile mi_profile(const WindSeries& series, std::size_t max_delay,
                        std::size_t bins, double threshold_fraction,
                        std::size_t threads = 0);

} // namespace windcast

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "windcast/forest.hpp"
#include "windcast/timeseries.hpp"

namespace windcast {

/// Ordinary least-squares line y = slope * x + intercept.
struct TrendLine {
    double slope = 0.0;
    double intercept = 0.0;
};

/// One evaluation block: forecasts issued from every admissible origin
/// inside [test_start_index, test_start_index + block_len), scored at the
/// final step of the horizon.
struct EvalWindow {
    std::size_t block_index = 0;
    std::size_t test_start_index = 0;
    std::size_t horizon_steps = 0;
    double rmse = 0.0; // m/s, final-step forecasts only
    std::size_t n_forecasts = 0;
    std::vector<double> step_rmse; // diagnostics: RMSE per step 1..horizon
};

struct EvalReport {
    std::vector<EvalWindow> windows;
    double average_rmse = 0.0; // mean of the per-window rmse values
    TrendLine trend;           // OLS over (window ordinal, rmse); slope 0,
                               // intercept = rmse when only one window exists
};

/// One-step-ahead prediction; delegates to the forest.
double predict_one_step(const RandomForestModel& model, std::span<const double> window);

/// Iterated multi-step forecast: each step predicts one value, drops the
/// oldest window entry, and appends the prediction. Returns all `steps`
/// predictions in time order.
std::vector<double> predict_horizon(const RandomForestModel& model,
                                    std::span<const double> window, std::size_t steps);

/// Root mean square error between equal-length vectors.
double rmse(std::span<const double> actual, std::span<const double> predicted);

/// Least-squares line through (index, value) points; needs at least two
/// distinct indices.
TrendLine trend_fit(std::span<const std::pair<double, double>> points);

/// Baseline that repeats the window's last value for every step.
std::vector<double> persistence_forecast(std::span<const double> window, std::size_t steps);

/// Rolling evaluation across the test span. Blocks of block_len samples
/// start at first_test_index, first_test_index + stride, ... as long as a
/// whole block fits in the series. Every origin o inside a block issues an
/// iterated horizon_steps-ahead forecast from the m recorded values before
/// o (only a forecast's own iterated predictions are synthetic; windows
/// reset to actuals between origins). A block's RMSE scores the final step
/// of each forecast whose target actually exists; per-step RMSEs are kept
/// as diagnostics. The trend line is OLS over (block ordinal, rmse).
/// Blocks are evaluated in parallel; the report does not depend on the
/// thread count.
EvalReport rolling_evaluate(const RandomForestModel& model, const WindSeries& series,
                            std::size_t first_test_index, std::size_t stride,
                            std::size_t horizon_steps, std::size_t block_len,
                            std::size_t threads = 0);

} // namespace windcast

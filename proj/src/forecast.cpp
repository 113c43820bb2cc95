#include "windcast/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "windcast/error.hpp"
#include "windcast/parallel.hpp"

namespace windcast {

double predict_one_step(const RandomForestModel& model, std::span<const double> window) {
    return predict(model, window);
}

std::vector<double> predict_horizon(const RandomForestModel& model,
                                    std::span<const double> window, std::size_t steps) {
    if (steps < 1) throw Error("predict_horizon needs at least one step");
    std::vector<double> state(window.begin(), window.end());
    std::vector<double> out;
    out.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        const double next = predict(model, state);
        out.push_back(next);
        state.erase(state.begin());
        state.push_back(next);
    }
    return out;
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty()) throw Error("rmse of empty vectors");
    if (actual.size() != predicted.size())
        throw Error("rmse needs equal lengths; got " + std::to_string(actual.size()) +
                    " and " + std::to_string(predicted.size()));
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!std::isfinite(actual[i]) || !std::isfinite(predicted[i]))
            throw Error("rmse input holds a non-finite value");
        const double d = actual[i] - predicted[i];
        sq_sum += d * d;
    }
    return std::sqrt(sq_sum / static_cast<double>(actual.size()));
}

TrendLine trend_fit(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw Error("trend_fit needs at least two points");
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(points.size());
    mean_y /= static_cast<double>(points.size());

    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if (sxx == 0.0) throw Error("trend_fit needs at least two distinct indices");
    TrendLine line;
    line.slope = sxy / sxx;
    line.intercept = mean_y - line.slope * mean_x;
    return line;
}

std::vector<double> persistence_forecast(std::span<const double> window, std::size_t steps) {
    if (window.empty()) throw Error("persistence forecast needs a nonempty window");
    if (steps < 1) throw Error("persistence forecast needs at least one step");
    return std::vector<double>(steps, window.back());
}

EvalReport rolling_evaluate(const RandomForestModel& model, const WindSeries& series,
                            std::size_t first_test_index, std::size_t stride,
                            std::size_t horizon_steps, std::size_t block_len,
                            std::size_t threads) {
    const std::size_t n = series.size();
    const std::size_t m = model.m;
    if (first_test_index < m)
        throw Error("first_test_index must be at least m = " + std::to_string(m) +
                    " so a full input window precedes it");
    if (stride < 1) throw Error("stride must be at least 1");
    if (horizon_steps < 1) throw Error("horizon_steps must be at least 1");
    if (block_len < 1) throw Error("block_len must be at least 1");
    if (first_test_index + block_len > n)
        throw Error("series of " + std::to_string(n) +
                    " samples has no room for one test block of " + std::to_string(block_len) +
                    " samples at index " + std::to_string(first_test_index));

    std::vector<std::size_t> block_starts;
    for (std::size_t s = first_test_index; s + block_len <= n; s += stride)
        block_starts.push_back(s);

    std::vector<EvalWindow> windows(block_starts.size());
    parallel_for(block_starts.size(), threads, [&](std::size_t b) {
        const std::size_t start = block_starts[b];
        EvalWindow w;
        w.block_index = b;
        w.test_start_index = start;
        w.horizon_steps = horizon_steps;

        std::vector<double> sq_sum(horizon_steps, 0.0);
        std::vector<std::size_t> counts(horizon_steps, 0);
        for (std::size_t origin = start; origin < start + block_len; ++origin) {
            if (origin + horizon_steps - 1 >= n) break; // final-step target must exist
            const std::span<const double> window(series.values.data() + (origin - m), m);
            const auto preds = predict_horizon(model, window, horizon_steps);
            for (std::size_t h = 0; h < horizon_steps; ++h) {
                const double err = preds[h] - series.values[origin + h];
                sq_sum[h] += err * err;
                ++counts[h];
            }
        }

        w.n_forecasts = counts[horizon_steps - 1];
        if (w.n_forecasts > 0) {
            w.step_rmse.resize(horizon_steps);
            for (std::size_t h = 0; h < horizon_steps; ++h)
                w.step_rmse[h] = std::sqrt(sq_sum[h] / static_cast<double>(counts[h]));
            w.rmse = w.step_rmse[horizon_steps - 1];
        }
        windows[b] = std::move(w);
    });

    EvalReport report;
    for (auto& w : windows)
        if (w.n_forecasts > 0) report.windows.push_back(std::move(w));
    if (report.windows.empty())
        throw Error("no admissible forecast origins in any block");
    // Re-number in case tail blocks were dropped for having no origins.
    for (std::size_t i = 0; i < report.windows.size(); ++i) report.windows[i].block_index = i;

    double sum = 0.0;
    for (const auto& w : report.windows) sum += w.rmse;
    report.average_rmse = sum / static_cast<double>(report.windows.size());

    if (report.windows.size() >= 2) {
        std::vector<std::pair<double, double>> points;
        points.reserve(report.windows.size());
        for (const auto& w : report.windows)
            points.emplace_back(static_cast<double>(w.block_index), w.rmse);
        report.trend = trend_fit(points);
    } else {
        report.trend = {0.0, report.windows.front().rmse};
    }
    return report;
}

} // namespace windcast

#pragma once

#include <cstdint>

#include "windcast/timeseries.hpp"

namespace windcast {

// Synthetic series for dataset-free pipeline runs and testing. All
// generators emit a 10-minute grid starting 2004-01-01T00:00:00Z, are
// fully determined by their seed, and clip at 0 so the output is a valid
// wind-speed series.

inline constexpr std::int64_t kSyntheticStartEpoch = 1072915200; // 2004-01-01T00:00:00Z
inline constexpr std::int64_t kSyntheticIntervalS = 600;

/// True when an AR(2) process with these coefficients is stationary
/// (both characteristic roots inside the unit circle).
bool ar2_is_stationary(double phi1, double phi2);

/// I.i.d. uniform values on [low, high).
WindSeries gen_noise(std::size_t length, double low, double high, std::uint64_t seed);

/// AR(2) deviations around `level`:
///   x_t = phi1 * x_{t-1} + phi2 * x_{t-2} + N(0, sigma^2),
/// emitted as max(0, level + x_t) after a burn-in long enough to forget
/// the zero initial state. Throws on non-stationary coefficients.
WindSeries gen_ar2(std::size_t length, double phi1, double phi2, double sigma,
                   double level, std::uint64_t seed);

/// level + amplitude * sin(2 pi k / period) + N(0, sigma^2), clipped at 0.
WindSeries gen_sine(std::size_t length, double period, double amplitude,
                    double sigma, double level, std::uint64_t seed);

} // namespace windcast

#include "windcast/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "windcast/error.hpp"
#include "windcast/numio.hpp"
#include "windcast/rng.hpp"

namespace windcast {

namespace {

WindSeries make_series(std::size_t length) {
    if (length < 1) throw Error("generator length must be at least 1");
    WindSeries s;
    s.start_epoch = kSyntheticStartEpoch;
    s.interval_s = kSyntheticIntervalS;
    s.values.resize(length);
    return s;
}

} // namespace

bool ar2_is_stationary(double phi1, double phi2) {
    // Stationarity triangle for AR(2).
    return phi1 + phi2 < 1.0 && phi2 - phi1 < 1.0 && std::abs(phi2) < 1.0;
}

WindSeries gen_noise(std::size_t length, double low, double high, std::uint64_t seed) {
    if (!(low < high)) throw Error("noise generator needs low < high");
    if (low < 0.0) throw Error("noise generator low bound must be nonnegative");
    WindSeries s = make_series(length);
    SplitMix64 rng(seed);
    for (auto& v : s.values) v = low + (high - low) * rng.uniform01();
    return s;
}

WindSeries gen_ar2(std::size_t length, double phi1, double phi2, double sigma,
                   double level, std::uint64_t seed) {
    if (!ar2_is_stationary(phi1, phi2))
        throw Error("unstable AR(2) coefficients (phi1 = " + format_double(phi1) +
                    ", phi2 = " + format_double(phi2) +
                    "): need phi1 + phi2 < 1, phi2 - phi1 < 1, |phi2| < 1");
    if (sigma < 0.0) throw Error("noise sigma must be nonnegative");
    if (level < 0.0) throw Error("level must be nonnegative");

    constexpr std::size_t kBurnIn = 1000;
    WindSeries s = make_series(length);
    SplitMix64 rng(seed);
    double prev1 = 0.0, prev2 = 0.0;
    for (std::size_t t = 0; t < kBurnIn + length; ++t) {
        const double x = phi1 * prev1 + phi2 * prev2 + sigma * rng.normal();
        prev2 = prev1;
        prev1 = x;
        if (t >= kBurnIn) s.values[t - kBurnIn] = std::max(0.0, level + x);
    }
    return s;
}

WindSeries gen_sine(std::size_t length, double period, double amplitude,
                    double sigma, double level, std::uint64_t seed) {
    if (!(period > 0.0)) throw Error("sine period must be positive");
    if (sigma < 0.0) throw Error("noise sigma must be nonnegative");
    constexpr double two_pi = 6.283185307179586476925286766559;
    WindSeries s = make_series(length);
    SplitMix64 rng(seed);
    for (std::size_t k = 0; k < length; ++k) {
        const double v = level + amplitude * std::sin(two_pi * static_cast<double>(k) / period) +
                         sigma * rng.normal();
        s.values[k] = std::max(0.0, v);
    }
    return s;
}

} // namespace windcast

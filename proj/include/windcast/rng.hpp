#pragma once

#include <cmath>
#include <cstdint>

namespace windcast {

// SplitMix64 (Steele, Lea & Vigna). Counter-based: the whole state is one
// 64-bit word advanced by a fixed increment, so seeding is cheap, there is
// no warm-up, and independent substreams can be derived by hashing
// (master_seed, stream_index). All randomness in windcast flows through
// this generator; results are therefore reproducible from the seeds alone
// and independent of thread scheduling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, bound), bound >= 1.
    /// Lemire's multiply-shift rejection scheme.
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t t = (0 - bound) % bound;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal deviate via Box-Muller; consumes two draws per call.
    double normal() {
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
};

/// Seed for substream `index` of a master seed: both words are pushed
/// through the SplitMix64 finalizer so neighbouring indices give
/// uncorrelated streams.
inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index) {
    SplitMix64 g(master_seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    return g.next();
}

} // namespace windcast

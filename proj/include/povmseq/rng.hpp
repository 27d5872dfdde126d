#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace povmseq {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Splittable counter-based generator: substream k of a seed is a SplitMix64
/// sequence with its own stream-derived odd increment. Substreams depend only
/// on (seed, stream), never on draw order elsewhere, so per-shot work can be
/// partitioned across workers with results independent of the partition.
class ShotRng {
public:
    ShotRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix64(seed ^ mix64(stream))),
          gamma_(mix64(stream ^ 0xb5ad4eceda1ce2a9ull) | 1ull) {}

    std::uint64_t next() {
        ++draws_;
        state_ += gamma_;
        return mix64(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal pair (Box-Muller).
    std::pair<double, double> gaussian_pair() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    /// Number of raw draws consumed so far.
    std::uint64_t draws() const { return draws_; }

private:
    std::uint64_t state_;
    std::uint64_t gamma_;
    std::uint64_t draws_ = 0;
};

} // namespace povmseq

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "seqnav/angles.hpp"

namespace seqnav {

// Stream identity domains. Every random draw in the project comes from a
// stream keyed by (seed, domain, indices...), so any draw can be reproduced
// without carrying generator state around.
enum RngDomain : std::uint64_t {
    kRngEpisode = 0x01,   // per-episode reset sampling (friction, init state)
    kRngSequence = 0x02,  // goal sequence draws, indexed by sequence counter
    kRngObsNoise = 0x03,  // per-step observation noise
    kRngAction = 0x04,    // policy exploration noise, per rollout step
    kRngShuffle = 0x05,   // minibatch permutations
    kRngEval = 0x06,      // benchmark episode randomization
    kRngInit = 0x07,      // network weight init
    kRngTest = 0xFF,      // test-local streams
};

/// Counter-based pseudo-random stream (SplitMix64 core). Identical key yields
/// an identical draw sequence on every platform; streams with distinct keys
/// are statistically independent.
class RngStream {
public:
    explicit RngStream(std::initializer_list<std::uint64_t> key) {
        std::uint64_t h = 0x9E3779B97F4A7C15ULL;
        for (std::uint64_t k : key) {
            h = mix64(h ^ mix64(k + 0xBF58476D1CE4E5B9ULL));
        }
        state_ = h;
    }

    RngStream(std::uint64_t seed, std::uint64_t domain) : RngStream({seed, domain}) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the index ranges used here.
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

    /// Standard normal via Box-Muller; the paired value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        // Guard the log against u1 == 0.
        double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-64));
        double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace seqnav

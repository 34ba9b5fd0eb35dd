#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fairvol {

// SplitMix64: tiny, fast, full-period 64-bit generator. Used both as the
// stream generator and as the hash that derives independent sub-stream seeds
// from one user seed, so every consumer of randomness in the library is a
// pure function of (seed, stream id, draw index).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on (0,1): 53 mantissa bits, nudged away from 0 so logs are safe.
    double next_uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

private:
    std::uint64_t state_;
};

// Derives the seed of a named sub-stream. Feeding the (seed, id) pair through
// one SplitMix64 step decorrelates even adjacent ids; distinct ids give
// independent streams for all practical purposes.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
    SplitMix64 g(seed ^ (0x6A09E667F3BCC909ull + stream_id * 0x9E3779B97F4A7C15ull));
    std::uint64_t a = g.next();
    std::uint64_t b = g.next();
    return a ^ (b << 1) ^ stream_id;
}

// Standard normal draws via Box-Muller on SplitMix64 uniforms. Deterministic
// given the seed; no library distribution object is involved, so the byte
// stream never depends on the standard library implementation.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) noexcept : rng_(seed) {}

    double next() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = rng_.next_uniform();
        double u2 = rng_.next_uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Fixed stream ids so the draw layout is stable across versions and across
// thread counts. Per-path streams offset from PathBase by the path index.
namespace stream_id {
inline constexpr std::uint64_t kNoise = 1;        // driving noise of a single path
inline constexpr std::uint64_t kHurstPath = 2;    // H(t) sampler (MPRE)
inline constexpr std::uint64_t kNuPath = 3;       // nu(t) sampler (MPRE)
inline constexpr std::uint64_t kPathBase = 1000;  // path p uses kPathBase + p
}  // namespace stream_id

}  // namespace fairvol

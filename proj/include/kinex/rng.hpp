#pragma once

#include <cstdint>
#include <random>

namespace kinex {

// splitmix64 step: the standard 64-bit finalizing mixer. Used both as a tiny
// counter-based generator for the batched diffusion kernels and to derive
// independent per-trial seeds from (master seed, trial index).
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic per-trial stream: mixing the trial index through splitmix64
// decorrelates neighboring trials regardless of how trials are distributed
// over workers. Identical (seed, trial) always yields an identical stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) noexcept {
    std::uint64_t s = seed ^ (trial * 0x9e3779b97f4a7c15ull);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
    return std::mt19937_64(mix_seed(seed, trial));
}

// Uniform double in [0,1): 53 random bits, portable across standard libraries
// (std::uniform_real_distribution is implementation-defined; this is not).
inline double u01(std::mt19937_64& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0,1], safe as a log() argument.
inline double u01_pos(std::mt19937_64& rng) noexcept {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Exponential(rate) by inversion.
double exp_rand(std::mt19937_64& rng, double rate);

// Standard normal (portable transform, Boost ziggurat-free path).
double normal_rand(std::mt19937_64& rng);

// Gamma(shape, rate = 1). Portable for any shape > 0.
double gamma_rand(std::mt19937_64& rng, double shape);

// Beta(a, b). Exact order-statistic sampler when a, b are small integers
// (the a-th smallest of a+b-1 uniforms), gamma ratio otherwise.
double beta_rand(std::mt19937_64& rng, double a, double b);

} // namespace kinex

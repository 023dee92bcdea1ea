#pragma once

// Constants shared verbatim by the scalar and AVX2 kernel translation units.
// Both sides must use exactly these values for the bitwise-equality contract.

#include <cstdint>

namespace kinex::kernels::detail {

// splitmix64
inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
inline constexpr std::uint64_t kMix1 = 0xbf58476d1ce4e5b9ull;
inline constexpr std::uint64_t kMix2 = 0x94d049bb133111ebull;

// uint -> unit-interval scales
inline constexpr double kScale51 = 0x1.0p-51; // for (x >> 13) + 1, value in (0,1]
inline constexpr double kScale52 = 0x1.0p-52; // for  x >> 12,     value in [0,1)

inline constexpr double kLn2 = 0x1.62e42fefa39efp-1;
inline constexpr double kSqrtHalf = 0.70710678118654752440;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// atanh series for log(m), m in [sqrt(1/2), sqrt(2)):
// log(m) = 2 t (1 + t^2/3 + ... + t^14/15), t = (m-1)/(m+1)
inline constexpr double kLogC[8] = {
    1.0,
    1.0 / 3.0,
    1.0 / 5.0,
    1.0 / 7.0,
    1.0 / 9.0,
    1.0 / 11.0,
    1.0 / 13.0,
    1.0 / 15.0,
};

// Taylor kernels on [-pi/4, pi/4], both in g = y^2:
// cos(y) = 1 + g (kCosC[1] + g (kCosC[2] + ...)), sin(y) = y * (1 + g (...))
inline constexpr double kCosC[8] = {
    1.0,
    -1.0 / 2.0,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
};
inline constexpr double kSinC[8] = {
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
};

} // namespace kinex::kernels::detail

#include <cmath>
#include <cstring>

#include "kinex/kernels.hpp"

#include "kernels_common.hpp"

// Scalar reference implementation. The AVX2 variant in kernels_avx2.cpp mirrors
// these exact operation sequences lane-wise; do not "simplify" an expression
// here without making the same change there.

namespace kinex::kernels {

using namespace detail;

namespace {

inline std::uint64_t advance(std::uint64_t& s) noexcept {
    s += kGamma;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * kMix1;
    z = (z ^ (z >> 27)) * kMix2;
    return z ^ (z >> 31);
}

} // namespace

double poly_log(double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    int e = static_cast<int>((bits >> 52) & 0x7ff) - 1022; // x = m * 2^e, m in [0.5, 1)
    bits = (bits & 0x000fffffffffffffull) | 0x3fe0000000000000ull;
    double m;
    std::memcpy(&m, &bits, sizeof m);
    if (m < kSqrtHalf) {
        m = m * 2.0;
        e = e - 1;
    }
    const double t = (m - 1.0) / (m + 1.0);
    const double t2 = t * t;
    double p = kLogC[7];
    p = p * t2 + kLogC[6];
    p = p * t2 + kLogC[5];
    p = p * t2 + kLogC[4];
    p = p * t2 + kLogC[3];
    p = p * t2 + kLogC[2];
    p = p * t2 + kLogC[1];
    p = p * t2 + kLogC[0];
    const double logm = (2.0 * t) * p;
    return static_cast<double>(e) * kLn2 + logm;
}

double poly_cos_twopi(double u) {
    const double q = std::nearbyint(4.0 * u); // quadrant, 0..4
    const double f = u - q * 0.25;            // in [-1/8, 1/8], exact
    const double y = kTwoPi * f;
    const double g = y * y;

    double c = kCosC[7];
    c = c * g + kCosC[6];
    c = c * g + kCosC[5];
    c = c * g + kCosC[4];
    c = c * g + kCosC[3];
    c = c * g + kCosC[2];
    c = c * g + kCosC[1];
    c = c * g + kCosC[0];

    double s = kSinC[7];
    s = s * g + kSinC[6];
    s = s * g + kSinC[5];
    s = s * g + kSinC[4];
    s = s * g + kSinC[3];
    s = s * g + kSinC[2];
    s = s * g + kSinC[1];
    s = s * g + kSinC[0];
    s = s * y;

    const double odd = std::fabs(q - 2.0 * std::nearbyint(q * 0.5));
    const double qm4 = q - 4.0 * std::floor(q * 0.25);
    double v = (odd == 1.0) ? s : c;
    if (qm4 >= 0.5 && qm4 <= 2.5) v = -v;
    return v;
}

void seed_streams(std::uint64_t seed, std::uint64_t first_path,
                  std::uint64_t* states, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t s = seed ^ ((first_path + i) * kGamma);
        std::uint64_t a = advance(s);
        std::uint64_t b = advance(s);
        states[i] = a ^ (b << 1);
    }
}

namespace scalar {

void uniform_fill(std::uint64_t* states, double* u, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t a = advance(states[i]);
        u[i] = static_cast<double>(a >> 12) * kScale52;
    }
}

void normal_fill(std::uint64_t* states, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t a = advance(states[i]);
        const std::uint64_t b = advance(states[i]);
        const double u1 = static_cast<double>((a >> 13) + 1) * kScale51; // (0,1]
        const double u2 = static_cast<double>(b >> 12) * kScale52;      // [0,1)
        const double radius = std::sqrt(-2.0 * poly_log(u1));
        z[i] = radius * poly_cos_twopi(u2);
    }
}

namespace {

// Boundary policy shared by both step kernels: cushion-clamp by default,
// exact absorption when the side is flagged absorbing; 0/1 are fixed points.
inline double apply_boundary(double rn, double r, double eps_b, double hi_thresh,
                             bool absorb_lo, bool absorb_hi) noexcept {
    if (rn <= eps_b) rn = absorb_lo ? 0.0 : eps_b;
    if (rn >= hi_thresh) rn = absorb_hi ? 1.0 : hi_thresh;
    if (r == 0.0 || r == 1.0) rn = r;
    return rn;
}

} // namespace

void em_step_linear(double* r, const double* z, std::size_t n, double drift_a,
                    double drift_b, double dt, double eps_b, bool absorb_lo,
                    bool absorb_hi) {
    const double twodt = 2.0 * dt;
    const double hi_thresh = 1.0 - eps_b;
    for (std::size_t i = 0; i < n; ++i) {
        const double ri = r[i];
        const double drift = drift_a + drift_b * ri;
        const double incr = drift * dt;
        const double v = ri * (1.0 - ri);
        const double vc = v > 0.0 ? v : 0.0;
        const double sig = std::sqrt(vc * twodt);
        double rn = (ri + incr) + sig * z[i];
        r[i] = apply_boundary(rn, ri, eps_b, hi_thresh, absorb_lo, absorb_hi);
    }
}

void em_step_table(double* r, const double* z, std::size_t n,
                   const double* drift_table, std::size_t table_n, double dt,
                   double eps_b, bool absorb_lo, bool absorb_hi) {
    const double twodt = 2.0 * dt;
    const double hi_thresh = 1.0 - eps_b;
    const double scale = static_cast<double>(table_n - 1);
    const int imax = static_cast<int>(table_n) - 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double ri = r[i];
        double pos = ri * scale;
        pos = pos > 0.0 ? pos : 0.0;
        int idx = static_cast<int>(pos);
        if (idx > imax) idx = imax;
        const double frac = pos - static_cast<double>(idx);
        const double d0 = drift_table[idx];
        const double d1 = drift_table[idx + 1];
        const double drift = d0 + frac * (d1 - d0);
        const double incr = drift * dt;
        const double v = ri * (1.0 - ri);
        const double vc = v > 0.0 ? v : 0.0;
        const double sig = std::sqrt(vc * twodt);
        double rn = (ri + incr) + sig * z[i];
        r[i] = apply_boundary(rn, ri, eps_b, hi_thresh, absorb_lo, absorb_hi);
    }
}

void power_sums(const double* x, std::size_t n, double out[4]) {
    double acc[4][4] = {};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int l = 0; l < 4; ++l) {
            const double v = x[i + l];
            const double v2 = v * v;
            const double v3 = v2 * v;
            const double v4 = v2 * v2;
            acc[0][l] += v;
            acc[1][l] += v2;
            acc[2][l] += v3;
            acc[3][l] += v4;
        }
    }
    for (; i < n; ++i) {
        const int l = static_cast<int>(i & 3);
        const double v = x[i];
        const double v2 = v * v;
        const double v3 = v2 * v;
        const double v4 = v2 * v2;
        acc[0][l] += v;
        acc[1][l] += v2;
        acc[2][l] += v3;
        acc[3][l] += v4;
    }
    for (int k = 0; k < 4; ++k) {
        out[k] += (acc[k][0] + acc[k][1]) + (acc[k][2] + acc[k][3]);
    }
}

} // namespace scalar

} // namespace kinex::kernels

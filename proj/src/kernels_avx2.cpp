#include <immintrin.h>

#include <cstdint>

#include "kinex/kernels.hpp"

#include "kernels_common.hpp"

// AVX2 implementation. Mirrors kernels_scalar.cpp operation-for-operation; the
// two must stay in lockstep for the bitwise-equality contract (see kernels.hpp).

namespace kinex::kernels::avx2 {

using namespace detail;

bool available() noexcept {
    return __builtin_cpu_supports("avx2");
}

namespace {

// 64x64 -> low 64 multiply per lane (AVX2 has no _mm256_mullo_epi64).
inline __m256i mullo64(__m256i a, __m256i b) {
    const __m256i lo = _mm256_mul_epu32(a, b);
    const __m256i ahi = _mm256_srli_epi64(a, 32);
    const __m256i bhi = _mm256_srli_epi64(b, 32);
    const __m256i cross =
        _mm256_add_epi64(_mm256_mul_epu32(ahi, b), _mm256_mul_epu32(a, bhi));
    return _mm256_add_epi64(lo, _mm256_slli_epi64(cross, 32));
}

inline __m256i advance(__m256i& s) {
    s = _mm256_add_epi64(s, _mm256_set1_epi64x(static_cast<long long>(kGamma)));
    __m256i z = s;
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
    z = mullo64(z, _mm256_set1_epi64x(static_cast<long long>(kMix1)));
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
    z = mullo64(z, _mm256_set1_epi64x(static_cast<long long>(kMix2)));
    return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

// Exact u64 -> double for values < 2^52 (magic-constant trick).
inline __m256d u64_to_double(__m256i x) {
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
    const __m256d shifted = _mm256_castsi256_pd(_mm256_or_si256(x, magic));
    return _mm256_sub_pd(shifted, _mm256_set1_pd(0x1.0p52));
}

inline __m256d poly_log_v(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    // Raw exponent as a double via the same magic trick (values < 2048).
    const __m256i eraw = _mm256_and_si256(_mm256_srli_epi64(bits, 52),
                                          _mm256_set1_epi64x(0x7ff));
    __m256d e = _mm256_sub_pd(u64_to_double(eraw), _mm256_set1_pd(1022.0));
    __m256i mbits = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffll)),
        _mm256_set1_epi64x(0x3fe0000000000000ll));
    __m256d m = _mm256_castsi256_pd(mbits);
    const __m256d need = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrtHalf), _CMP_LT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(2.0)), need);
    e = _mm256_sub_pd(e, _mm256_and_pd(need, _mm256_set1_pd(1.0)));

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d t =
        _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d t2 = _mm256_mul_pd(t, t);
    __m256d p = _mm256_set1_pd(kLogC[7]);
    for (int k = 6; k >= 0; --k) {
        p = _mm256_add_pd(_mm256_mul_pd(p, t2), _mm256_set1_pd(kLogC[k]));
    }
    const __m256d logm =
        _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), t), p);
    return _mm256_add_pd(_mm256_mul_pd(e, _mm256_set1_pd(kLn2)), logm);
}

inline __m256d poly_cos_twopi_v(__m256d u) {
    const __m256d q = _mm256_round_pd(
        _mm256_mul_pd(_mm256_set1_pd(4.0), u),
        _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d f =
        _mm256_sub_pd(u, _mm256_mul_pd(q, _mm256_set1_pd(0.25)));
    const __m256d y = _mm256_mul_pd(_mm256_set1_pd(kTwoPi), f);
    const __m256d g = _mm256_mul_pd(y, y);

    __m256d c = _mm256_set1_pd(kCosC[7]);
    for (int k = 6; k >= 0; --k) {
        c = _mm256_add_pd(_mm256_mul_pd(c, g), _mm256_set1_pd(kCosC[k]));
    }
    __m256d s = _mm256_set1_pd(kSinC[7]);
    for (int k = 6; k >= 0; --k) {
        s = _mm256_add_pd(_mm256_mul_pd(s, g), _mm256_set1_pd(kSinC[k]));
    }
    s = _mm256_mul_pd(s, y);

    const __m256d signmask = _mm256_set1_pd(-0.0);
    const __m256d two_rq = _mm256_mul_pd(
        _mm256_set1_pd(2.0),
        _mm256_round_pd(_mm256_mul_pd(q, _mm256_set1_pd(0.5)),
                        _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC));
    const __m256d odd =
        _mm256_andnot_pd(signmask, _mm256_sub_pd(q, two_rq));
    const __m256d mask_sin = _mm256_cmp_pd(odd, _mm256_set1_pd(1.0), _CMP_EQ_OQ);

    const __m256d qm4 = _mm256_sub_pd(
        q, _mm256_mul_pd(_mm256_set1_pd(4.0),
                         _mm256_floor_pd(_mm256_mul_pd(q, _mm256_set1_pd(0.25)))));
    const __m256d neg = _mm256_and_pd(
        _mm256_cmp_pd(qm4, _mm256_set1_pd(0.5), _CMP_GE_OQ),
        _mm256_cmp_pd(qm4, _mm256_set1_pd(2.5), _CMP_LE_OQ));

    __m256d v = _mm256_blendv_pd(c, s, mask_sin);
    return _mm256_xor_pd(v, _mm256_and_pd(neg, signmask));
}

inline __m256d apply_boundary_v(__m256d rn, __m256d r, double eps_b,
                                double hi_thresh, bool absorb_lo,
                                bool absorb_hi) {
    const __m256d lo_val = _mm256_set1_pd(absorb_lo ? 0.0 : eps_b);
    const __m256d hi_val = _mm256_set1_pd(absorb_hi ? 1.0 : hi_thresh);
    const __m256d lo_mask =
        _mm256_cmp_pd(rn, _mm256_set1_pd(eps_b), _CMP_LE_OQ);
    const __m256d hi_mask =
        _mm256_cmp_pd(rn, _mm256_set1_pd(hi_thresh), _CMP_GE_OQ);
    rn = _mm256_blendv_pd(rn, lo_val, lo_mask);
    rn = _mm256_blendv_pd(rn, hi_val, hi_mask);
    const __m256d frozen = _mm256_or_pd(
        _mm256_cmp_pd(r, _mm256_setzero_pd(), _CMP_EQ_OQ),
        _mm256_cmp_pd(r, _mm256_set1_pd(1.0), _CMP_EQ_OQ));
    return _mm256_blendv_pd(rn, r, frozen);
}

} // namespace

void uniform_fill(std::uint64_t* states, double* u, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i s = _mm256_loadu_si256(reinterpret_cast<__m256i*>(states + i));
        const __m256i a = advance(s);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(states + i), s);
        const __m256d ud = _mm256_mul_pd(u64_to_double(_mm256_srli_epi64(a, 12)),
                                         _mm256_set1_pd(kScale52));
        _mm256_storeu_pd(u + i, ud);
    }
    if (i < n) scalar::uniform_fill(states + i, u + i, n - i);
}

void normal_fill(std::uint64_t* states, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i s = _mm256_loadu_si256(reinterpret_cast<__m256i*>(states + i));
        const __m256i a = advance(s);
        const __m256i b = advance(s);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(states + i), s);
        const __m256d u1 = _mm256_mul_pd(
            u64_to_double(_mm256_add_epi64(_mm256_srli_epi64(a, 13),
                                           _mm256_set1_epi64x(1))),
            _mm256_set1_pd(kScale51));
        const __m256d u2 = _mm256_mul_pd(u64_to_double(_mm256_srli_epi64(b, 12)),
                                         _mm256_set1_pd(kScale52));
        const __m256d radius = _mm256_sqrt_pd(
            _mm256_mul_pd(_mm256_set1_pd(-2.0), poly_log_v(u1)));
        _mm256_storeu_pd(z + i, _mm256_mul_pd(radius, poly_cos_twopi_v(u2)));
    }
    if (i < n) scalar::normal_fill(states + i, z + i, n - i);
}

void em_step_linear(double* r, const double* z, std::size_t n, double drift_a,
                    double drift_b, double dt, double eps_b, bool absorb_lo,
                    bool absorb_hi) {
    const double twodt = 2.0 * dt;
    const double hi_thresh = 1.0 - eps_b;
    const __m256d va = _mm256_set1_pd(drift_a);
    const __m256d vb = _mm256_set1_pd(drift_b);
    const __m256d vdt = _mm256_set1_pd(dt);
    const __m256d vtwodt = _mm256_set1_pd(twodt);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ri = _mm256_loadu_pd(r + i);
        const __m256d drift = _mm256_add_pd(va, _mm256_mul_pd(vb, ri));
        const __m256d incr = _mm256_mul_pd(drift, vdt);
        const __m256d v = _mm256_mul_pd(ri, _mm256_sub_pd(one, ri));
        const __m256d vc = _mm256_max_pd(v, _mm256_setzero_pd());
        const __m256d sig = _mm256_sqrt_pd(_mm256_mul_pd(vc, vtwodt));
        __m256d rn = _mm256_add_pd(_mm256_add_pd(ri, incr),
                                   _mm256_mul_pd(sig, _mm256_loadu_pd(z + i)));
        rn = apply_boundary_v(rn, ri, eps_b, hi_thresh, absorb_lo, absorb_hi);
        _mm256_storeu_pd(r + i, rn);
    }
    if (i < n) {
        scalar::em_step_linear(r + i, z + i, n - i, drift_a, drift_b, dt, eps_b,
                               absorb_lo, absorb_hi);
    }
}

void em_step_table(double* r, const double* z, std::size_t n,
                   const double* drift_table, std::size_t table_n, double dt,
                   double eps_b, bool absorb_lo, bool absorb_hi) {
    const double twodt = 2.0 * dt;
    const double hi_thresh = 1.0 - eps_b;
    const __m256d vscale = _mm256_set1_pd(static_cast<double>(table_n - 1));
    const __m128i vimax = _mm_set1_epi32(static_cast<int>(table_n) - 2);
    const __m256d vdt = _mm256_set1_pd(dt);
    const __m256d vtwodt = _mm256_set1_pd(twodt);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ri = _mm256_loadu_pd(r + i);
        __m256d pos = _mm256_mul_pd(ri, vscale);
        pos = _mm256_max_pd(pos, _mm256_setzero_pd());
        __m128i idx = _mm256_cvttpd_epi32(pos);
        idx = _mm_min_epi32(idx, vimax);
        const __m256d frac = _mm256_sub_pd(pos, _mm256_cvtepi32_pd(idx));
        const __m256d d0 = _mm256_i32gather_pd(drift_table, idx, 8);
        const __m256d d1 = _mm256_i32gather_pd(
            drift_table, _mm_add_epi32(idx, _mm_set1_epi32(1)), 8);
        const __m256d drift =
            _mm256_add_pd(d0, _mm256_mul_pd(frac, _mm256_sub_pd(d1, d0)));
        const __m256d incr = _mm256_mul_pd(drift, vdt);
        const __m256d v = _mm256_mul_pd(ri, _mm256_sub_pd(one, ri));
        const __m256d vc = _mm256_max_pd(v, _mm256_setzero_pd());
        const __m256d sig = _mm256_sqrt_pd(_mm256_mul_pd(vc, vtwodt));
        __m256d rn = _mm256_add_pd(_mm256_add_pd(ri, incr),
                                   _mm256_mul_pd(sig, _mm256_loadu_pd(z + i)));
        rn = apply_boundary_v(rn, ri, eps_b, hi_thresh, absorb_lo, absorb_hi);
        _mm256_storeu_pd(r + i, rn);
    }
    if (i < n) {
        scalar::em_step_table(r + i, z + i, n - i, drift_table, table_n, dt,
                              eps_b, absorb_lo, absorb_hi);
    }
}

void power_sums(const double* x, std::size_t n, double out[4]) {
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    __m256d a4 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d v2 = _mm256_mul_pd(v, v);
        const __m256d v3 = _mm256_mul_pd(v2, v);
        const __m256d v4 = _mm256_mul_pd(v2, v2);
        a1 = _mm256_add_pd(a1, v);
        a2 = _mm256_add_pd(a2, v2);
        a3 = _mm256_add_pd(a3, v3);
        a4 = _mm256_add_pd(a4, v4);
    }
    double acc[4][4];
    _mm256_storeu_pd(acc[0], a1);
    _mm256_storeu_pd(acc[1], a2);
    _mm256_storeu_pd(acc[2], a3);
    _mm256_storeu_pd(acc[3], a4);
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

} // namespace kinex::kernels::avx2

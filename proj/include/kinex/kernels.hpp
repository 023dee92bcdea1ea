#pragma once

#include <cstddef>
#include <cstdint>

// Batched inner loops for the diffusion simulator and moment reductions,
// provided in two interchangeable implementations: a scalar reference and an
// AVX2 variant, selected at runtime. Contract: both implementations produce
// BITWISE-identical output for identical input. This holds because
//   - transcendentals (log, cos) go through the shared polynomial routines
//     below, evaluated with plain rounded mul/add (their translation units are
//     built with -ffp-contract=off and without FMA),
//   - sqrt, +, -, *, / are correctly rounded in both scalar and vector form,
//   - reductions use a fixed lane-structured summation order.
// The equivalence is enforced by tests, not assumed.

namespace kinex::kernels {

enum class isa { scalar, avx2 };

const char* isa_name(isa i) noexcept;

// Active implementation: KINEX_SIMD=scalar|avx2 environment override, else
// runtime CPU detection. Resolved once per process; an avx2 request on a CPU
// without AVX2 falls back to scalar.
isa active_isa();

// Per-path counter streams (splitmix64). Path p of a run gets the stream keyed
// by (seed, first_path + p): a path's randomness depends only on its global
// index, so results are independent of batch size and thread partitioning.
void seed_streams(std::uint64_t seed, std::uint64_t first_path,
                  std::uint64_t* states, std::size_t n);

// ---- dispatched entry points ------------------------------------------------

// One uniform [0,1) draw per stream (one state advance each).
void uniform_fill(std::uint64_t* states, double* u, std::size_t n);

// One standard-normal draw per stream (two state advances each); Box-Muller
// cosine branch: z = sqrt(-2 ln u1) * cos(2 pi u2).
void normal_fill(std::uint64_t* states, double* z, std::size_t n);

// One Euler-Maruyama step of dr = (a + b r) dt + sqrt(2 r (1-r)) dW for every
// path. On crossing below eps_b (resp. above 1 - eps_b) the path is set to
// exactly 0 (resp. 1) when the side is absorbing, else clamped to the cushion.
// Paths at exactly 0 or 1 never move again.
void em_step_linear(double* r, const double* z, std::size_t n, double drift_a,
                    double drift_b, double dt, double eps_b, bool absorb_lo,
                    bool absorb_hi);

// Same step with the drift read from a uniform-grid table over [0,1]
// (linear interpolation between the table_n nodes).
void em_step_table(double* r, const double* z, std::size_t n,
                   const double* drift_table, std::size_t table_n, double dt,
                   double eps_b, bool absorb_lo, bool absorb_hi);

// out[k-1] += sum_i x[i]^k for k = 1..4, fixed lane-structured order.
void power_sums(const double* x, std::size_t n, double out[4]);

// ---- both implementations, directly callable (equivalence tests) ------------

namespace scalar {
void uniform_fill(std::uint64_t* states, double* u, std::size_t n);
void normal_fill(std::uint64_t* states, double* z, std::size_t n);
void em_step_linear(double* r, const double* z, std::size_t n, double drift_a,
                    double drift_b, double dt, double eps_b, bool absorb_lo,
                    bool absorb_hi);
void em_step_table(double* r, const double* z, std::size_t n,
                   const double* drift_table, std::size_t table_n, double dt,
                   double eps_b, bool absorb_lo, bool absorb_hi);
void power_sums(const double* x, std::size_t n, double out[4]);
} // namespace scalar

namespace avx2 {
bool available() noexcept;
void uniform_fill(std::uint64_t* states, double* u, std::size_t n);
void normal_fill(std::uint64_t* states, double* z, std::size_t n);
void em_step_linear(double* r, const double* z, std::size_t n, double drift_a,
                    double drift_b, double dt, double eps_b, bool absorb_lo,
                    bool absorb_hi);
void em_step_table(double* r, const double* z, std::size_t n,
                   const double* drift_table, std::size_t table_n, double dt,
                   double eps_b, bool absorb_lo, bool absorb_hi);
void power_sums(const double* x, std::size_t n, double out[4]);
} // namespace avx2

// ---- shared polynomial math --------------------------------------------------

// Natural log for x in (0, 1]: exponent extraction plus an atanh series on the
// mantissa; absolute error < 2e-14 over the domain.
double poly_log(double x);

// cos(2 pi u) for u in [0, 1): quadrant reduction in turns plus degree-14
// Taylor kernels; absolute error < 1e-14.
double poly_cos_twopi(double u);

} // namespace kinex::kernels

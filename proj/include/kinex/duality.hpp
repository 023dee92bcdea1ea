#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "kinex/exchange.hpp"
#include "kinex/measures.hpp"
#include "kinex/stats.hpp"

namespace kinex {

// Dual particle counts at the two sites. The energy dual conserves n + m; the
// wealth dual never increases it.
struct DualState {
    int n = 0;
    int m = 0;

    int total() const { return n + m; }
    friend auto operator<=>(const DualState&, const DualState&) = default;
};

// Moment coefficients of a reference law: c(n,m) = E[x^n y^m] for the energy
// dual, alpha_n = E[eps_inf^n] (plus its (i,j) binomial expansions) for the
// wealth dual. Immutable after construction.
class MomentTable {
  public:
    // Product of two exponential(1) marginals: c(n,m) = n! m!.
    static MomentTable ProductExponential(int max_level);

    // Product of two Gamma(shape, rate 1) marginals:
    // c(n,m) = rising(shape, n) * rising(shape, m), exact.
    static MomentTable ProductGamma(double shape, int max_level);

    // Monte Carlo c(n,m) under an arbitrary pair sampler, with standard
    // errors.
    static MomentTable FromSampler(
        const std::function<WealthPair(std::mt19937_64&)>& sampler, long trials,
        int max_level, std::mt19937_64& rng);

    // Wealth-model table: alpha_n = E[eps_inf^n] for n <= n_max, from the
    // moment recursion.
    static MomentTable WealthAlpha(double lambda,
                                   const RedistributionMeasure& measure,
                                   int n_max);

    int max_level() const { return max_level_; }
    bool has_c() const { return has_c_; }
    bool has_alpha() const { return has_alpha_; }

    double c(int n, int m) const;
    double c_se(int n, int m) const; // 0 for the analytic constructions
    double alpha(int n) const;
    double alpha_joint(int i, int j) const; // E[r^i (1-r)^j]

  private:
    MomentTable() = default;

    int max_level_ = 0;
    bool has_c_ = false;
    bool has_alpha_ = false;
    std::vector<double> c_;    // (max_level_+1)^2, row-major (n, m)
    std::vector<double> c_se_; // same layout
    std::vector<double> alpha_;
};

// Action of the energy generator on the monomial x^n y^m, expressed over the
// level n + m: coefficient C(n+m, k) * nu_nm on each (k, n+m-k), with the
// diagonal entry (n, m) carrying an extra -1.
std::map<DualState, double> energy_generator_coeffs(
    const RedistributionMeasure& measure, int n, int m);

struct DualTransition {
    DualState target;
    double rate = 0.0;
};

// Off-diagonal jump rates of a dual chain, keyed by source state.
struct DualRateTable {
    int level = 0; // conserved total (energy) or maximal total (wealth)
    std::map<DualState, std::vector<DualTransition>> rates;

    const std::vector<DualTransition>& at(const DualState& s) const;
    double exit_rate(const DualState& s) const;
};

// Energy dual on the level set {(k, level-k)}: rate(state -> target) =
// coeff(state -> target) * c(target) / c(state). For the uniform measure with
// exponential reference every rate is 1/(level+1).
DualRateTable energy_dual_rates(const RedistributionMeasure& measure,
                                const MomentTable& ctable, int level);

// D(n, m; x, y) = x^n y^m / c(n, m).
double duality_fn_energy(const MomentTable& ctable, int n, int m, double x,
                         double y);

// One-index wealth dual: rates for jumps n -> k, k < n:
//   rate = (alpha_k / alpha_n) C(n,k) lambda^k (1-lambda)^{n-k} m_{n-k},
// with m_j the j-th moment of the measure. Total exit rate is 1 - lambda^n.
std::map<int, double> wealth_dual_rates_r(double lambda,
                                          const RedistributionMeasure& measure,
                                          const MomentTable& alpha, int n);

// Two-index wealth dual: rates for jumps (n1,n2) -> (k1,k2), k1 <= n1,
// k2 <= n2, (k1,k2) != (n1,n2):
//   A = C(n1,k1) C(n2,k2) lambda^(k1+k2) (1-lambda)^(n1+n2-k1-k2)
//       * nu_{n1-k1, n2-k2},
//   rate = A * alpha(k1,k2) / alpha(n1,n2).
// Total exit rate is 1 - lambda^(n1+n2).
std::map<DualState, double> wealth_dual_rates_2d(
    double lambda, const RedistributionMeasure& measure, const MomentTable& alpha,
    const DualState& from);

// All wealth-dual rates for states with total <= max_total.
DualRateTable wealth_dual_rate_table(double lambda,
                                     const RedistributionMeasure& measure,
                                     const MomentTable& alpha, int max_total);

// D(n1, n2; x, y) = x^n1 y^n2 / alpha(n1, n2); defined on the simplex
// x + y = 1 (throws unnormalized_total otherwise, tolerance 1e-12).
double duality_fn_wealth(const MomentTable& alpha, int n1, int n2, double x,
                         double y);

// CTMC trajectory of a dual chain: at each state one exponential clock per
// enabled transition, the earliest fires. Trajectory starts with (0, initial)
// and ends with (t_end, final).
std::vector<std::pair<double, DualState>> simulate_dual(
    const DualRateTable& table, const DualState& initial, double t_end,
    std::mt19937_64& rng);

// States of one dual trajectory at the given ascending times
// (right-continuous observation).
std::vector<DualState> simulate_dual_at_times(const DualRateTable& table,
                                              const DualState& initial,
                                              const std::vector<double>& times,
                                              std::mt19937_64& rng);

// Two-sided Monte Carlo comparison of E[D(n, m; X_t, Y_t)] (forward run from
// (x, y)) against E[D(N_t, M_t; x, y)] (dual run from (n, m)).
struct DualityCheckResult {
    int n = 0;
    int m = 0;
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double se_lhs = 0.0;
    double se_rhs = 0.0;
    bool pass = false; // |lhs - rhs| <= 3 (se_lhs + se_rhs)
};

DualityCheckResult duality_check_energy(const RedistributionMeasure& measure,
                                        const MomentTable& ctable, double x,
                                        double y, int n, int m, double t,
                                        long trials, std::mt19937_64& rng);

DualityCheckResult duality_check_wealth(double lambda,
                                        const RedistributionMeasure& measure,
                                        const MomentTable& alpha, double x,
                                        double y, int n1, int n2, double t,
                                        long trials, std::mt19937_64& rng);

// Batched sweeps over every dual state with total <= max_level (energy:
// states on each level; wealth: all pairs with total <= max_total) and every
// observation time, sharing forward trajectories across states and times.
// Deterministic for fixed seed independent of the thread count.
std::vector<DualityCheckResult> duality_sweep_energy(
    const RedistributionMeasure& measure, const MomentTable& ctable, double x,
    double y, int max_level, const std::vector<double>& times, long trials,
    std::uint64_t seed, int threads);

std::vector<DualityCheckResult> duality_sweep_wealth(
    double lambda, const RedistributionMeasure& measure, const MomentTable& alpha,
    double x, double y, int max_total, const std::vector<double>& times,
    long trials, std::uint64_t seed, int threads);

// Ratio profile E_mu[x^n y^m] / c(n, m) across one level, estimated from
// `trials` draws of the sampler (shared across the level's states).
struct ProfileEntry {
    DualState state;
    Estimate ratio;
};

std::vector<ProfileEntry> harmonic_profile(
    const std::function<WealthPair(std::mt19937_64&)>& sampler,
    const MomentTable& ctable, int level, long trials, std::mt19937_64& rng);

} // namespace kinex

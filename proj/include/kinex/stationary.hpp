#pragma once

#include <functional>
#include <random>
#include <vector>

#include "kinex/exchange.hpp"
#include "kinex/measures.hpp"

namespace kinex {

// Truncation control for the stationary-fraction series
//   r_inf = sum_{n>=0} (1-lambda) lambda^n eps_n.
// The series is cut at depth N with lambda^N <= tol and completed with one
// extra eps-draw carrying the whole remaining weight lambda^N, which keeps the
// value in [0,1], keeps the mean exact, and couples the truncated sample to
// the full series within lambda^N <= tol pathwise. The two-propensity series
// uses the same rule with q = max(lambda1, lambda2), the uniform bound on the
// per-term contraction factor lambda1 + (lambda2-lambda1) eps.
struct SeriesTruncation {
    double tol = 1e-12;

    // Smallest N with lambda^N <= tol (N >= 1). Throws degenerate_lambda for
    // lambda >= 1 and config_error for tol outside (0, 1).
    int depth(double lambda) const;
};

// One draw of the stationary fraction eps_inf for propensity lambda in [0,1)
// and an s-independent measure (throws s_dependent_measure otherwise). At
// lambda = 0 this is a single draw from the measure.
double sample_eps_infinity(double lambda, const RedistributionMeasure& measure,
                           const SeriesTruncation& trunc, std::mt19937_64& rng);

// Moments alpha_n = E[eps_inf^n], n = 0..n_max, from the stationarity of the
// recursion r' = lambda r + (1-lambda) eps:
//   alpha_n (1 - lambda^n) =
//     sum_{k<n} C(n,k) lambda^k (1-lambda)^{n-k} m_{n-k} alpha_k,
// with m_j the j-th moment of the measure. Throws degenerate_lambda at
// lambda = 1 (every alpha_n is then unconstrained).
std::vector<double> alpha_moments(double lambda,
                                  const RedistributionMeasure& measure,
                                  int n_max);

// Mixed moments alpha(i,j) = E[eps_inf^i (1-eps_inf)^j] by binomial expansion
// over a precomputed alpha vector (needs entries up to i+j).
double alpha_joint(const std::vector<double>& alpha, int i, int j);
double alpha_joint(double lambda, const RedistributionMeasure& measure, int i,
                   int j);

// One draw (eps s, (1-eps) s) with eps ~ measure at total s: the stationary
// law of the full-redistribution process given the conserved total.
WealthPair sample_canonical_energy(double s, const RedistributionMeasure& measure,
                                   std::mt19937_64& rng);

// One draw (r_inf s, (1-r_inf) s): the stationary law of the saving model at
// propensity lambda and conserved total s. lambda = 0 reduces to
// sample_canonical_energy pathwise.
WealthPair sample_stationary_wealth(double s, double lambda,
                                    const RedistributionMeasure& measure,
                                    const SeriesTruncation& trunc,
                                    std::mt19937_64& rng);

// Stationary fraction of the two-propensity model,
//   r_inf = sum_k (1-l2) eps_k prod_{i<k} (l1 + (l2-l1) eps_i),
// truncated and completed as above. Throws truncation_overflow when
// max(l1, l2) >= 1 (the tail bound is vacuous).
double sample_two_prop_r(double l1, double l2, const RedistributionMeasure& measure,
                         const SeriesTruncation& trunc, std::mt19937_64& rng);

WealthPair sample_two_prop(double s, double l1, double l2,
                           const RedistributionMeasure& measure,
                           const SeriesTruncation& trunc, std::mt19937_64& rng);

// Law of the randomized total S for grand-canonical sampling.
struct GrandCanonicalSpec {
    enum class kind_t { point_mass, gamma, custom };

    kind_t kind = kind_t::point_mass;
    double s = 1.0;     // point mass
    double shape = 1.0; // gamma
    double rate = 1.0;  // gamma
    std::function<double(std::mt19937_64&)> sampler;

    static GrandCanonicalSpec PointMass(double s);
    static GrandCanonicalSpec Gamma(double shape, double rate);
    static GrandCanonicalSpec Custom(std::function<double(std::mt19937_64&)> fn);

    // One draw of S; custom samplers returning a negative value raise
    // non_admissible.
    double draw(std::mt19937_64& rng) const;
};

// Draws S, then the stationary pair at total S (canonical at lambda = 0).
// S = 0 yields (0, 0).
WealthPair sample_grand_canonical(const GrandCanonicalSpec& spec, double lambda,
                                  const RedistributionMeasure& measure,
                                  const SeriesTruncation& trunc,
                                  std::mt19937_64& rng);

// Sup over the (s, a) grid of
//   | measure(s, a) - mu(a s) mu((1-a) s) / int_0^1 mu(alpha s) mu((1-alpha) s) d alpha |,
// the defect of the measure/marginal pair in the product-invariance identity.
// Empty grids select the defaults: s in {0.5, 1, 2, 5, 10} and 101 equispaced
// interior points for a.
double verify_product_invariance(const Density1D& mu,
                                 const RedistributionMeasure& measure,
                                 std::vector<double> s_grid = {},
                                 std::vector<double> a_grid = {});

} // namespace kinex

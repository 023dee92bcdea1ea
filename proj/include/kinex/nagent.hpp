#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "kinex/measures.hpp"
#include "kinex/stats.hpp"

namespace kinex {

// Symmetric, row-stochastic jump matrix of the rate-one random walk that
// carries the exchange events.
struct WalkKernel {
    int size = 0;
    std::vector<double> p; // row-major size x size

    double at(int i, int j) const {
        return p[static_cast<std::size_t>(i) * size + j];
    }
};

// Validates symmetry (tolerance 1e-12 -> asymmetric_kernel), unit row sums
// (tolerance 1e-12 -> row_sum_violation) and nonnegativity (non_admissible).
WalkKernel build_walk(const std::vector<std::vector<double>>& weights);

// Nearest-neighbour ring: p(i, i+-1) = 1/2 (the two halves merge for n = 2).
WalkKernel ring_walk(int n);

// Complete graph: p(i, j) = 1/(n-1) off the diagonal.
WalkKernel complete_walk(int n);

// Event-driven N-agent exchange: each unordered pair {i, j} carries an
// exponential clock of rate 2 p(i, j); when it fires, (x_i, x_j) undergoes the
// lambda-weighted redistribution with eps drawn from the measure, the eps
// share going to the lower-indexed agent. Implemented with one global clock of
// rate sum 2 p(i,j) and categorical pair selection (same law). Requires an
// s-independent measure with mean 1/2 (tolerance 1e-10 -> asymmetric_mean).
// Returns the configuration at each requested ascending time
// (right-continuous observation).
std::vector<std::vector<double>> simulate_nagent_at_times(
    const std::vector<double>& x0, double lambda,
    const RedistributionMeasure& measure, const WalkKernel& kernel,
    const std::vector<double>& times, std::mt19937_64& rng);

std::vector<double> simulate_nagent_endpoint(const std::vector<double>& x0,
                                             double lambda,
                                             const RedistributionMeasure& measure,
                                             const WalkKernel& kernel,
                                             double t_end, std::mt19937_64& rng);

// Heat kernel p_t = exp(t (P - I)) of the rate-one walk, by uniformization
// (Poisson-weighted powers of P) to absolute tolerance 1e-12. Row-major.
std::vector<double> heat_kernel(const WalkKernel& kernel, double t);

// Monte Carlo mean wealth per agent at time t against the analytic value
// sum_j p_{(1-lambda) t}(i, j) x0_j.
struct WealthCheckRow {
    int agent = 0;
    double mc_mean = 0.0;
    double analytic = 0.0;
    double se = 0.0;
    bool pass = false; // |mc_mean - analytic| <= 3 se
};

std::vector<WealthCheckRow> expected_wealth_check(
    const std::vector<double>& x0, double lambda,
    const RedistributionMeasure& measure, const WalkKernel& kernel, double t,
    long trials, std::uint64_t seed, int threads);

// Same check for several observation times at once, sharing trajectories:
// result[k] is the per-agent table at times[k].
std::vector<std::vector<WealthCheckRow>> expected_wealth_check_at_times(
    const std::vector<double>& x0, double lambda,
    const RedistributionMeasure& measure, const WalkKernel& kernel,
    const std::vector<double>& times, long trials, std::uint64_t seed,
    int threads);

// Residual P rho - rho of the mean-wealth vector rho_i = E[x_i] under a
// sampled law, with per-component standard errors (the residual is linear in
// the configuration, so each trial contributes one residual sample).
std::vector<Estimate> harmonicity_check(
    const std::function<std::vector<double>(std::mt19937_64&)>& sampler,
    const WalkKernel& kernel, long trials, std::mt19937_64& rng);

} // namespace kinex

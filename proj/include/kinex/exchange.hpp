#pragma once

#include <optional>
#include <random>
#include <vector>

#include "kinex/measures.hpp"

namespace kinex {

// Wealth (or energy) of the two agents. The dynamics conserve x + y.
struct WealthPair {
    double x = 0.0;
    double y = 0.0;

    double total() const { return x + y; }
};

// Parameters of the two-agent jump process: saving propensities and the
// exponential event rate. With lambda2 set, the two agents keep different
// fractions of their own wealth at each exchange.
struct ModelParams {
    double lambda = 0.0;
    std::optional<double> lambda2;
    double jump_rate = 1.0;
};

// Throws config_error unless 0 <= lambda (and lambda2) < 1 and jump_rate > 0.
void validate(const ModelParams& params);

// Full redistribution: (x, y) -> (eps (x+y), (1-eps)(x+y)). The second
// coordinate is computed as total - first, so the sum is preserved exactly in
// floating point.
WealthPair apply_T(double eps, const WealthPair& p);

// Partial redistribution: lambda (x, y) + (1-lambda) T_eps(x, y). lambda = 0
// is apply_T (bitwise); lambda = 1 is the identity (bitwise).
WealthPair apply_T_lambda(double lambda, double eps, const WealthPair& p);

// Agent-dependent propensities: each agent contributes the non-saved part of
// its wealth to a common pool, split eps / (1-eps):
//   x' = l1 x + eps * pool,  y' = l2 y + (1-eps) * pool,
//   pool = (1-l1) x + (1-l2) y.
// l1 = l2 reduces to apply_T_lambda bitwise. The fraction r = x/(x+y) obeys
// r' = r (l1 + (l2-l1) eps) + (1-l2) eps.
WealthPair apply_T_two_prop(double l1, double l2, double eps, const WealthPair& p);

// One exchange event: draws eps from measure at s = x + y and applies the map
// selected by params (two-propensity if lambda2 is set, else the
// lambda-weighted map, which at lambda = 0 is the full redistribution). A state
// with total 0 is returned unchanged without consuming randomness (every map
// fixes it). If eps_out is non-null it receives the drawn eps (NaN when no
// draw happened).
WealthPair jump(const WealthPair& state, const ModelParams& params,
                const RedistributionMeasure& measure, std::mt19937_64& rng,
                double* eps_out = nullptr);

struct TrajectoryPoint {
    double t = 0.0;
    WealthPair state;
};

// Event-driven simulation on [0, t_end]: i.i.d. exponential waiting times with
// rate params.jump_rate, piecewise-constant path. The trajectory starts with
// (0, initial) and, for t_end > 0, ends with (t_end, final state).
std::vector<TrajectoryPoint> simulate(const WealthPair& initial,
                                      const ModelParams& params,
                                      const RedistributionMeasure& measure,
                                      double t_end, std::mt19937_64& rng);

// As simulate, but returns only the state at t_end (no trajectory storage).
WealthPair simulate_endpoint(const WealthPair& initial, const ModelParams& params,
                             const RedistributionMeasure& measure, double t_end,
                             std::mt19937_64& rng);

// States of one trajectory observed at the given times (ascending, >= 0). The
// path is right-continuous: an observation coinciding with a jump sees the
// post-jump state. Shares one stream of randomness across all observation
// times, so estimates at different times are coupled.
std::vector<WealthPair> simulate_at_times(const WealthPair& initial,
                                          const ModelParams& params,
                                          const RedistributionMeasure& measure,
                                          const std::vector<double>& times,
                                          std::mt19937_64& rng);

// Fraction/total coordinates: r = x/(x+y), s = x+y.
struct RS {
    double r = 0.0;
    double s = 0.0;
};

// Throws zero_total when x + y = 0 (r undefined).
RS to_rs(const WealthPair& p);

WealthPair from_rs(double r, double s);

} // namespace kinex

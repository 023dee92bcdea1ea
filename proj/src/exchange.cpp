#include "kinex/exchange.hpp"

#include <cmath>
#include <limits>

#include "kinex/error.hpp"
#include "kinex/rng.hpp"

namespace kinex {

void validate(const ModelParams& params) {
    if (!(params.lambda >= 0.0 && params.lambda < 1.0)) {
        throw error(errc::config_error, "lambda must lie in [0, 1)");
    }
    if (params.lambda2 && !(*params.lambda2 >= 0.0 && *params.lambda2 < 1.0)) {
        throw error(errc::config_error, "lambda2 must lie in [0, 1)");
    }
    if (!(params.jump_rate > 0.0)) {
        throw error(errc::config_error, "jump_rate must be positive");
    }
}

WealthPair apply_T(double eps, const WealthPair& p) {
    const double total = p.x + p.y;
    const double xp = eps * total;
    return {xp, total - xp};
}

WealthPair apply_T_two_prop(double l1, double l2, double eps, const WealthPair& p) {
    if (l1 == 1.0 && l2 == 1.0) return p;
    const double pool = (1.0 - l1) * p.x + (1.0 - l2) * p.y;
    const double total = p.x + p.y;
    const double xp = l1 * p.x + eps * pool;
    return {xp, total - xp};
}

WealthPair apply_T_lambda(double lambda, double eps, const WealthPair& p) {
    return apply_T_two_prop(lambda, lambda, eps, p);
}

WealthPair jump(const WealthPair& state, const ModelParams& params,
                const RedistributionMeasure& measure, std::mt19937_64& rng,
                double* eps_out) {
    const double s = state.x + state.y;
    if (s == 0.0) {
        if (eps_out) *eps_out = std::numeric_limits<double>::quiet_NaN();
        return state;
    }
    const double eps = measure.sample(s, rng);
    if (eps_out) *eps_out = eps;
    if (params.lambda2) {
        return apply_T_two_prop(params.lambda, *params.lambda2, eps, state);
    }
    if (params.lambda == 0.0) return apply_T(eps, state);
    return apply_T_lambda(params.lambda, eps, state);
}

std::vector<TrajectoryPoint> simulate(const WealthPair& initial,
                                      const ModelParams& params,
                                      const RedistributionMeasure& measure,
                                      double t_end, std::mt19937_64& rng) {
    validate(params);
    if (t_end < 0.0) {
        throw error(errc::config_error, "t_end must be nonnegative");
    }
    std::vector<TrajectoryPoint> traj;
    traj.push_back({0.0, initial});
    if (t_end == 0.0) return traj;

    WealthPair state = initial;
    double t = exp_rand(rng, params.jump_rate);
    while (t < t_end) {
        state = jump(state, params, measure, rng);
        traj.push_back({t, state});
        t += exp_rand(rng, params.jump_rate);
    }
    traj.push_back({t_end, state});
    return traj;
}

WealthPair simulate_endpoint(const WealthPair& initial, const ModelParams& params,
                             const RedistributionMeasure& measure, double t_end,
                             std::mt19937_64& rng) {
    validate(params);
    if (t_end < 0.0) {
        throw error(errc::config_error, "t_end must be nonnegative");
    }
    WealthPair state = initial;
    if (t_end == 0.0) return state;
    double t = exp_rand(rng, params.jump_rate);
    while (t < t_end) {
        state = jump(state, params, measure, rng);
        t += exp_rand(rng, params.jump_rate);
    }
    return state;
}

std::vector<WealthPair> simulate_at_times(const WealthPair& initial,
                                          const ModelParams& params,
                                          const RedistributionMeasure& measure,
                                          const std::vector<double>& times,
                                          std::mt19937_64& rng) {
    validate(params);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
            throw error(errc::config_error,
                        "observation times must be ascending and nonnegative");
        }
    }
    std::vector<WealthPair> out;
    out.reserve(times.size());
    WealthPair state = initial;
    std::size_t i = 0;
    double t_jump = exp_rand(rng, params.jump_rate);
    while (i < times.size()) {
        while (i < times.size() && times[i] < t_jump) {
            out.push_back(state);
            ++i;
        }
        if (i == times.size()) break;
        state = jump(state, params, measure, rng);
        t_jump += exp_rand(rng, params.jump_rate);
    }
    return out;
}

RS to_rs(const WealthPair& p) {
    const double s = p.x + p.y;
    if (s == 0.0) {
        throw error(errc::zero_total, "fraction r undefined at total 0");
    }
    return {p.x / s, s};
}

WealthPair from_rs(double r, double s) {
    const double xp = r * s;
    return {xp, s - xp};
}

} // namespace kinex

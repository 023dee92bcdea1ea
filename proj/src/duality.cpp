#include "kinex/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kinex/error.hpp"
#include "kinex/parallel.hpp"
#include "kinex/rng.hpp"
#include "kinex/special.hpp"
#include "kinex/stationary.hpp"

namespace kinex {

namespace {

constexpr long kBlockSize = 8192;

double pow_int(double x, int k) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x;
    return p;
}

void require_s_independent(const RedistributionMeasure& measure) {
    if (measure.s_dependent()) {
        throw error(errc::s_dependent_measure,
                    measure.describe() + ": an s-independent measure is required");
    }
}

void check_level(const MomentTable& table, int n, int m) {
    if (n < 0 || m < 0 || n + m > table.max_level()) {
        throw error(errc::config_error,
                    "moment table does not cover the requested dual state");
    }
}

void check_simplex(double x, double y) {
    if (!(std::fabs(x + y - 1.0) <= 1e-12)) {
        throw error(errc::unnormalized_total,
                    "wealth duality function requires x + y = 1");
    }
}

// Sum and sum of squares -> (mean, se); divisor rescales both.
Estimate reduce(double sum, double sumsq, long n, double divisor) {
    Estimate e;
    const double mean = sum / static_cast<double>(n);
    e.value = mean / divisor;
    if (n > 1) {
        const double var =
            std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                              static_cast<double>(n - 1));
        e.se = std::sqrt(var / static_cast<double>(n)) / std::fabs(divisor);
    }
    return e;
}

bool within_3sigma(const Estimate& lhs, const Estimate& rhs) {
    return std::fabs(lhs.value - rhs.value) <= 3.0 * (lhs.se + rhs.se);
}

void check_times(const std::vector<double>& times) {
    if (times.empty()) {
        throw error(errc::config_error, "at least one observation time required");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
            throw error(errc::config_error,
                        "observation times must be ascending and nonnegative");
        }
    }
}

} // namespace

// ---------------------------------------------------------------------------
// MomentTable

MomentTable MomentTable::ProductExponential(int max_level) {
    return ProductGamma(1.0, max_level);
}

MomentTable MomentTable::ProductGamma(double shape, int max_level) {
    if (!(shape > 0.0) || max_level < 0) {
        throw error(errc::config_error,
                    "product-gamma table requires positive shape and level >= 0");
    }
    MomentTable t;
    t.max_level_ = max_level;
    t.has_c_ = true;
    const int w = max_level + 1;
    t.c_.assign(static_cast<std::size_t>(w) * w, 0.0);
    t.c_se_.assign(t.c_.size(), 0.0);
    for (int n = 0; n <= max_level; ++n) {
        for (int m = 0; m <= max_level; ++m) {
            t.c_[static_cast<std::size_t>(n) * w + m] =
                rising_factorial(shape, n) * rising_factorial(shape, m);
        }
    }
    return t;
}

MomentTable MomentTable::FromSampler(
    const std::function<WealthPair(std::mt19937_64&)>& sampler, long trials,
    int max_level, std::mt19937_64& rng) {
    if (trials < 2 || max_level < 0) {
        throw error(errc::config_error,
                    "sampled moment table requires trials >= 2 and level >= 0");
    }
    MomentTable t;
    t.max_level_ = max_level;
    t.has_c_ = true;
    const int w = max_level + 1;
    std::vector<double> sum(static_cast<std::size_t>(w) * w, 0.0);
    std::vector<double> sumsq(sum.size(), 0.0);
    std::vector<double> px(w), py(w);
    for (long i = 0; i < trials; ++i) {
        const WealthPair p = sampler(rng);
        px[0] = py[0] = 1.0;
        for (int k = 1; k <= max_level; ++k) {
            px[k] = px[k - 1] * p.x;
            py[k] = py[k - 1] * p.y;
        }
        for (int n = 0; n <= max_level; ++n) {
            for (int m = 0; m <= max_level; ++m) {
                const double v = px[n] * py[m];
                sum[static_cast<std::size_t>(n) * w + m] += v;
                sumsq[static_cast<std::size_t>(n) * w + m] += v * v;
            }
        }
    }
    t.c_.resize(sum.size());
    t.c_se_.resize(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        const Estimate e = reduce(sum[i], sumsq[i], trials, 1.0);
        t.c_[i] = e.value;
        t.c_se_[i] = e.se;
    }
    return t;
}

MomentTable MomentTable::WealthAlpha(double lambda,
                                     const RedistributionMeasure& measure,
                                     int n_max) {
    MomentTable t;
    t.max_level_ = n_max;
    t.has_alpha_ = true;
    t.alpha_ = alpha_moments(lambda, measure, n_max);
    return t;
}

double MomentTable::c(int n, int m) const {
    if (!has_c_) {
        throw error(errc::config_error, "moment table holds no c coefficients");
    }
    check_level(*this, n, m);
    return c_[static_cast<std::size_t>(n) * (max_level_ + 1) + m];
}

double MomentTable::c_se(int n, int m) const {
    if (!has_c_) {
        throw error(errc::config_error, "moment table holds no c coefficients");
    }
    check_level(*this, n, m);
    return c_se_[static_cast<std::size_t>(n) * (max_level_ + 1) + m];
}

double MomentTable::alpha(int n) const {
    if (!has_alpha_) {
        throw error(errc::config_error, "moment table holds no alpha moments");
    }
    if (n < 0 || n > max_level_) {
        throw error(errc::config_error, "alpha moment order out of range");
    }
    return alpha_[static_cast<std::size_t>(n)];
}

double MomentTable::alpha_joint(int i, int j) const {
    if (!has_alpha_) {
        throw error(errc::config_error, "moment table holds no alpha moments");
    }
    return kinex::alpha_joint(alpha_, i, j);
}

// ---------------------------------------------------------------------------
// Energy dual

std::map<DualState, double> energy_generator_coeffs(
    const RedistributionMeasure& measure, int n, int m) {
    require_s_independent(measure);
    if (n < 0 || m < 0) {
        throw error(errc::config_error, "dual state must be nonnegative");
    }
    std::map<DualState, double> coeffs;
    const int level = n + m;
    if (level == 0) {
        coeffs[{0, 0}] = 0.0; // constants are harmonic
        return coeffs;
    }
    const double nu = measure.moment_nm(n, m, 1.0);
    for (int k = 0; k <= level; ++k) {
        coeffs[{k, level - k}] = binomial(level, k) * nu;
    }
    coeffs[{n, m}] -= 1.0;
    return coeffs;
}

const std::vector<DualTransition>& DualRateTable::at(const DualState& s) const {
    static const std::vector<DualTransition> empty;
    const auto it = rates.find(s);
    return it == rates.end() ? empty : it->second;
}

double DualRateTable::exit_rate(const DualState& s) const {
    double total = 0.0;
    for (const DualTransition& tr : at(s)) total += tr.rate;
    return total;
}

DualRateTable energy_dual_rates(const RedistributionMeasure& measure,
                                const MomentTable& ctable, int level) {
    require_s_independent(measure);
    if (level < 0 || level > ctable.max_level()) {
        throw error(errc::config_error,
                    "level outside the moment table's range");
    }
    DualRateTable table;
    table.level = level;
    for (int n = 0; n <= level; ++n) {
        const DualState from{n, level - n};
        std::vector<DualTransition> trans;
        if (level > 0) {
            const double nu = measure.moment_nm(n, level - n, 1.0);
            const double c_from = ctable.c(n, level - n);
            for (int k = 0; k <= level; ++k) {
                if (k == n) continue;
                const double rate =
                    binomial(level, k) * nu * ctable.c(k, level - k) / c_from;
                if (!(rate >= 0.0)) {
                    throw error(errc::non_admissible,
                                "negative dual rate constructed");
                }
                trans.push_back({{k, level - k}, rate});
            }
        }
        table.rates.emplace(from, std::move(trans));
    }
    return table;
}

double duality_fn_energy(const MomentTable& ctable, int n, int m, double x,
                         double y) {
    check_level(ctable, n, m);
    return pow_int(x, n) * pow_int(y, m) / ctable.c(n, m);
}

// ---------------------------------------------------------------------------
// Wealth dual

std::map<int, double> wealth_dual_rates_r(double lambda,
                                          const RedistributionMeasure& measure,
                                          const MomentTable& alpha, int n) {
    require_s_independent(measure);
    if (n < 0 || n > alpha.max_level()) {
        throw error(errc::config_error, "state outside the alpha table's range");
    }
    std::map<int, double> rates;
    for (int k = 0; k < n; ++k) {
        const double rate = (alpha.alpha(k) / alpha.alpha(n)) * binomial(n, k) *
                            pow_int(lambda, k) * pow_int(1.0 - lambda, n - k) *
                            measure.moment_nm(n - k, 0, 1.0);
        rates[k] = rate;
    }
    return rates;
}

std::map<DualState, double> wealth_dual_rates_2d(
    double lambda, const RedistributionMeasure& measure, const MomentTable& alpha,
    const DualState& from) {
    require_s_independent(measure);
    if (from.n < 0 || from.m < 0 || from.total() > alpha.max_level()) {
        throw error(errc::config_error, "state outside the alpha table's range");
    }
    std::map<DualState, double> rates;
    const double alpha_from = alpha.alpha_joint(from.n, from.m);
    for (int k1 = 0; k1 <= from.n; ++k1) {
        for (int k2 = 0; k2 <= from.m; ++k2) {
            if (k1 == from.n && k2 == from.m) continue;
            const double a = binomial(from.n, k1) * binomial(from.m, k2) *
                             pow_int(lambda, k1 + k2) *
                             pow_int(1.0 - lambda, from.total() - k1 - k2) *
                             measure.moment_nm(from.n - k1, from.m - k2, 1.0);
            rates[{k1, k2}] = a * alpha.alpha_joint(k1, k2) / alpha_from;
        }
    }
    return rates;
}

DualRateTable wealth_dual_rate_table(double lambda,
                                     const RedistributionMeasure& measure,
                                     const MomentTable& alpha, int max_total) {
    if (max_total < 0 || max_total > alpha.max_level()) {
        throw error(errc::config_error,
                    "max_total outside the alpha table's range");
    }
    DualRateTable table;
    table.level = max_total;
    for (int total = 0; total <= max_total; ++total) {
        for (int n1 = 0; n1 <= total; ++n1) {
            const DualState from{n1, total - n1};
            std::vector<DualTransition> trans;
            for (const auto& [target, rate] :
                 wealth_dual_rates_2d(lambda, measure, alpha, from)) {
                trans.push_back({target, rate});
            }
            table.rates.emplace(from, std::move(trans));
        }
    }
    return table;
}

double duality_fn_wealth(const MomentTable& alpha, int n1, int n2, double x,
                         double y) {
    check_simplex(x, y);
    check_level(alpha, n1, n2);
    return pow_int(x, n1) * pow_int(y, n2) / alpha.alpha_joint(n1, n2);
}

// ---------------------------------------------------------------------------
// Dual simulation

namespace {

// Next jump out of `state`: one exponential clock per enabled transition; the
// earliest one fires. Returns the holding time (infinity at absorbing states).
double next_dual_jump(const DualRateTable& table, const DualState& state,
                      std::mt19937_64& rng, DualState* target) {
    const auto& trans = table.at(state);
    double best = std::numeric_limits<double>::infinity();
    for (const DualTransition& tr : trans) {
        if (!(tr.rate > 0.0)) continue;
        const double clock = exp_rand(rng, tr.rate);
        if (clock < best) {
            best = clock;
            *target = tr.target;
        }
    }
    return best;
}

} // namespace

std::vector<std::pair<double, DualState>> simulate_dual(
    const DualRateTable& table, const DualState& initial, double t_end,
    std::mt19937_64& rng) {
    if (t_end < 0.0) {
        throw error(errc::config_error, "t_end must be nonnegative");
    }
    std::vector<std::pair<double, DualState>> traj;
    traj.emplace_back(0.0, initial);
    if (t_end == 0.0) return traj;
    DualState state = initial;
    double t = 0.0;
    for (;;) {
        DualState target = state;
        const double hold = next_dual_jump(table, state, rng, &target);
        t += hold;
        if (!(t < t_end)) break;
        state = target;
        traj.emplace_back(t, state);
    }
    traj.emplace_back(t_end, state);
    return traj;
}

std::vector<DualState> simulate_dual_at_times(const DualRateTable& table,
                                              const DualState& initial,
                                              const std::vector<double>& times,
                                              std::mt19937_64& rng) {
    check_times(times);
    std::vector<DualState> out;
    out.reserve(times.size());
    DualState state = initial;
    double t = 0.0;
    std::size_t i = 0;
    while (i < times.size()) {
        DualState target = state;
        const double hold = next_dual_jump(table, state, rng, &target);
        const double t_next = t + hold;
        while (i < times.size() && times[i] < t_next) {
            out.push_back(state);
            ++i;
        }
        if (i == times.size()) break;
        t = t_next;
        state = target;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Two-sided checks

namespace {

struct SweepAccumulator {
    // Per-block sums and sums of squares for S stats; combined in block order.
    long n_blocks = 0;
    std::size_t n_stats = 0;
    std::vector<double> sum;   // n_blocks * n_stats
    std::vector<double> sumsq; // n_blocks * n_stats

    SweepAccumulator(long blocks, std::size_t stats)
        : n_blocks(blocks),
          n_stats(stats),
          sum(static_cast<std::size_t>(blocks) * stats, 0.0),
          sumsq(static_cast<std::size_t>(blocks) * stats, 0.0) {}

    double* sum_at(long block) { return sum.data() + block * n_stats; }
    double* sumsq_at(long block) { return sumsq.data() + block * n_stats; }

    Estimate estimate(std::size_t stat, long trials, double divisor) const {
        double s = 0.0, sq = 0.0;
        for (long b = 0; b < n_blocks; ++b) {
            s += sum[static_cast<std::size_t>(b) * n_stats + stat];
            sq += sumsq[static_cast<std::size_t>(b) * n_stats + stat];
        }
        return reduce(s, sq, trials, divisor);
    }
};

} // namespace

DualityCheckResult duality_check_energy(const RedistributionMeasure& measure,
                                        const MomentTable& ctable, double x,
                                        double y, int n, int m, double t,
                                        long trials, std::mt19937_64& rng) {
    check_level(ctable, n, m);
    if (trials < 1 || t < 0.0 || !(x >= 0.0) || !(y >= 0.0)) {
        throw error(errc::config_error, "invalid duality check parameters");
    }
    const ModelParams params{0.0, std::nullopt, 1.0};
    const std::vector<double> times{t};
    const double c_nm = ctable.c(n, m);

    double fsum = 0.0, fsq = 0.0;
    for (long i = 0; i < trials; ++i) {
        const WealthPair end =
            simulate_at_times({x, y}, params, measure, times, rng)[0];
        const double v = pow_int(end.x, n) * pow_int(end.y, m);
        fsum += v;
        fsq += v * v;
    }

    const DualRateTable table = energy_dual_rates(measure, ctable, n + m);
    double dsum = 0.0, dsq = 0.0;
    for (long i = 0; i < trials; ++i) {
        const DualState end = simulate_dual_at_times(table, {n, m}, times, rng)[0];
        const double v =
            pow_int(x, end.n) * pow_int(y, end.m) / ctable.c(end.n, end.m);
        dsum += v;
        dsq += v * v;
    }

    const Estimate lhs = reduce(fsum, fsq, trials, c_nm);
    const Estimate rhs = reduce(dsum, dsq, trials, 1.0);
    return {n, m, t, lhs.value, rhs.value, lhs.se, rhs.se, within_3sigma(lhs, rhs)};
}

DualityCheckResult duality_check_wealth(double lambda,
                                        const RedistributionMeasure& measure,
                                        const MomentTable& alpha, double x,
                                        double y, int n1, int n2, double t,
                                        long trials, std::mt19937_64& rng) {
    check_simplex(x, y);
    check_level(alpha, n1, n2);
    if (trials < 1 || t < 0.0) {
        throw error(errc::config_error, "invalid duality check parameters");
    }
    const ModelParams params{lambda, std::nullopt, 1.0};
    const std::vector<double> times{t};
    const double a_nm = alpha.alpha_joint(n1, n2);

    double fsum = 0.0, fsq = 0.0;
    for (long i = 0; i < trials; ++i) {
        const WealthPair end =
            simulate_at_times({x, y}, params, measure, times, rng)[0];
        const double v = pow_int(end.x, n1) * pow_int(end.y, n2);
        fsum += v;
        fsq += v * v;
    }

    const DualRateTable table =
        wealth_dual_rate_table(lambda, measure, alpha, n1 + n2);
    double dsum = 0.0, dsq = 0.0;
    for (long i = 0; i < trials; ++i) {
        const DualState end =
            simulate_dual_at_times(table, {n1, n2}, times, rng)[0];
        const double v =
            pow_int(x, end.n) * pow_int(y, end.m) / alpha.alpha_joint(end.n, end.m);
        dsum += v;
        dsq += v * v;
    }

    const Estimate lhs = reduce(fsum, fsq, trials, a_nm);
    const Estimate rhs = reduce(dsum, dsq, trials, 1.0);
    return {n1, n2, t,  lhs.value, rhs.value, lhs.se, rhs.se,
            within_3sigma(lhs, rhs)};
}

// ---------------------------------------------------------------------------
// Batched sweeps

namespace {

std::vector<DualState> states_up_to(int max_total) {
    std::vector<DualState> states;
    for (int total = 0; total <= max_total; ++total) {
        for (int n = 0; n <= total; ++n) states.push_back({n, total - n});
    }
    return states;
}

std::vector<DualityCheckResult> run_sweep(
    const std::vector<DualState>& states, const std::vector<double>& times,
    long trials, std::uint64_t seed, int threads,
    const std::function<void(std::mt19937_64&, std::vector<double>&)>& forward_eval,
    const std::function<DualRateTable(const DualState&)>& table_for,
    const std::function<double(const DualState&)>& dual_value,
    const std::function<double(const DualState&)>& divisor_for) {
    check_times(times);
    if (trials < 2) {
        throw error(errc::config_error, "sweeps require at least two trials");
    }
    const std::size_t S = states.size();
    const std::size_t T = times.size();
    const long nb = block_count(trials, kBlockSize);

    // Forward side: one trajectory per trial serves every state and time.
    SweepAccumulator forward(nb, S * T);
    for_blocks(trials, kBlockSize, threads, [&](long b, long lo, long hi) {
        std::vector<double> values(S * T);
        double* bsum = forward.sum_at(b);
        double* bsq = forward.sumsq_at(b);
        for (long i = lo; i < hi; ++i) {
            std::mt19937_64 rng = trial_rng(mix_seed(seed, 0), i);
            forward_eval(rng, values);
            for (std::size_t k = 0; k < values.size(); ++k) {
                bsum[k] += values[k];
                bsq[k] += values[k] * values[k];
            }
        }
    });

    // Dual side: independent runs from each initial state.
    SweepAccumulator dual(nb, S * T);
    for (std::size_t s = 0; s < S; ++s) {
        const DualRateTable table = table_for(states[s]);
        const std::uint64_t stream = mix_seed(seed, 1 + s);
        for_blocks(trials, kBlockSize, threads, [&](long b, long lo, long hi) {
            double* bsum = dual.sum_at(b) + s * T;
            double* bsq = dual.sumsq_at(b) + s * T;
            for (long i = lo; i < hi; ++i) {
                std::mt19937_64 rng = trial_rng(stream, i);
                const std::vector<DualState> ends =
                    simulate_dual_at_times(table, states[s], times, rng);
                for (std::size_t j = 0; j < T; ++j) {
                    const double v = dual_value(ends[j]);
                    bsum[j] += v;
                    bsq[j] += v * v;
                }
            }
        });
    }

    std::vector<DualityCheckResult> results;
    results.reserve(S * T);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t j = 0; j < T; ++j) {
            const Estimate lhs =
                forward.estimate(s * T + j, trials, divisor_for(states[s]));
            const Estimate rhs = dual.estimate(s * T + j, trials, 1.0);
            results.push_back({states[s].n, states[s].m, times[j], lhs.value,
                               rhs.value, lhs.se, rhs.se,
                               within_3sigma(lhs, rhs)});
        }
    }
    return results;
}

} // namespace

std::vector<DualityCheckResult> duality_sweep_energy(
    const RedistributionMeasure& measure, const MomentTable& ctable, double x,
    double y, int max_level, const std::vector<double>& times, long trials,
    std::uint64_t seed, int threads) {
    if (max_level < 0 || max_level > ctable.max_level()) {
        throw error(errc::config_error, "max_level outside the moment table");
    }
    if (!(x >= 0.0) || !(y >= 0.0)) {
        throw error(errc::config_error, "initial wealths must be nonnegative");
    }
    const std::vector<DualState> states = states_up_to(max_level);
    const std::size_t T = times.size();
    const ModelParams params{0.0, std::nullopt, 1.0};

    // Precompute rate tables per level (shared by the level's states) and the
    // dual-side values x^n y^m / c(n,m) for every state.
    std::vector<DualRateTable> tables;
    for (int level = 0; level <= max_level; ++level) {
        tables.push_back(energy_dual_rates(measure, ctable, level));
    }
    std::map<DualState, double> dval;
    for (const DualState& st : states) {
        dval[st] = pow_int(x, st.n) * pow_int(y, st.m) / ctable.c(st.n, st.m);
    }

    auto forward_eval = [&](std::mt19937_64& rng, std::vector<double>& values) {
        const std::vector<WealthPair> ends =
            simulate_at_times({x, y}, params, measure, times, rng);
        std::vector<double> px(max_level + 1), py(max_level + 1);
        for (std::size_t j = 0; j < ends.size(); ++j) {
            px[0] = py[0] = 1.0;
            for (int k = 1; k <= max_level; ++k) {
                px[k] = px[k - 1] * ends[j].x;
                py[k] = py[k - 1] * ends[j].y;
            }
            for (std::size_t s = 0; s < states.size(); ++s) {
                values[s * T + j] = px[states[s].n] * py[states[s].m];
            }
        }
    };

    return run_sweep(
        states, times, trials, seed, threads, forward_eval,
        [&](const DualState& st) { return tables[st.total()]; },
        [&](const DualState& st) { return dval.at(st); },
        [&](const DualState& st) { return ctable.c(st.n, st.m); });
}

std::vector<DualityCheckResult> duality_sweep_wealth(
    double lambda, const RedistributionMeasure& measure, const MomentTable& alpha,
    double x, double y, int max_total, const std::vector<double>& times,
    long trials, std::uint64_t seed, int threads) {
    check_simplex(x, y);
    const std::vector<DualState> states = states_up_to(max_total);
    const std::size_t T = times.size();
    const ModelParams params{lambda, std::nullopt, 1.0};

    const DualRateTable table =
        wealth_dual_rate_table(lambda, measure, alpha, max_total);
    std::map<DualState, double> dval;
    for (const DualState& st : states) {
        dval[st] =
            pow_int(x, st.n) * pow_int(y, st.m) / alpha.alpha_joint(st.n, st.m);
    }

    auto forward_eval = [&](std::mt19937_64& rng, std::vector<double>& values) {
        const std::vector<WealthPair> ends =
            simulate_at_times({x, y}, params, measure, times, rng);
        std::vector<double> px(max_total + 1), py(max_total + 1);
        for (std::size_t j = 0; j < ends.size(); ++j) {
            px[0] = py[0] = 1.0;
            for (int k = 1; k <= max_total; ++k) {
                px[k] = px[k - 1] * ends[j].x;
                py[k] = py[k - 1] * ends[j].y;
            }
            for (std::size_t s = 0; s < states.size(); ++s) {
                values[s * T + j] = px[states[s].n] * py[states[s].m];
            }
        }
    };

    return run_sweep(
        states, times, trials, seed, threads, forward_eval,
        [&](const DualState&) { return table; },
        [&](const DualState& st) { return dval.at(st); },
        [&](const DualState& st) { return alpha.alpha_joint(st.n, st.m); });
}

std::vector<ProfileEntry> harmonic_profile(
    const std::function<WealthPair(std::mt19937_64&)>& sampler,
    const MomentTable& ctable, int level, long trials, std::mt19937_64& rng) {
    if (level < 0 || level > ctable.max_level()) {
        throw error(errc::config_error, "level outside the moment table");
    }
    if (trials < 2) {
        throw error(errc::config_error, "profile requires at least two trials");
    }
    const int S = level + 1;
    std::vector<double> sum(S, 0.0), sumsq(S, 0.0);
    for (long i = 0; i < trials; ++i) {
        const WealthPair p = sampler(rng);
        for (int n = 0; n <= level; ++n) {
            const double v = pow_int(p.x, n) * pow_int(p.y, level - n);
            sum[n] += v;
            sumsq[n] += v * v;
        }
    }
    std::vector<ProfileEntry> out;
    out.reserve(S);
    for (int n = 0; n <= level; ++n) {
        out.push_back({{n, level - n},
                       reduce(sum[n], sumsq[n], trials, ctable.c(n, level - n))});
    }
    return out;
}

} // namespace kinex

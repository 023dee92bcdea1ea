#include "kinex/nagent.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "kinex/error.hpp"
#include "kinex/exchange.hpp"
#include "kinex/parallel.hpp"
#include "kinex/rng.hpp"

namespace kinex {

namespace {

constexpr double kKernelTol = 1e-12;
constexpr double kMeanTol = 1e-10;
constexpr long kTrialBlock = 8192;

// Unordered pairs {i < j} with positive rate 2 p(i, j), plus the cumulative
// rate table used for categorical selection. Diagonal entries of p are lazy
// self-jumps: they cancel in P - I and produce no exchange event.
struct PairTable {
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> cum;
    double total_rate = 0.0;
};

PairTable build_pairs(const WalkKernel& kernel) {
    PairTable pt;
    for (int i = 0; i < kernel.size; ++i) {
        for (int j = i + 1; j < kernel.size; ++j) {
            const double rate = 2.0 * kernel.at(i, j);
            if (rate > 0.0) {
                pt.total_rate += rate;
                pt.pairs.emplace_back(i, j);
                pt.cum.push_back(pt.total_rate);
            }
        }
    }
    return pt;
}

void check_inputs(const std::vector<double>& x0, double lambda,
                  const RedistributionMeasure& measure,
                  const WalkKernel& kernel) {
    if (kernel.size <= 0) {
        throw error(errc::config_error, "walk kernel is empty");
    }
    if (x0.size() != static_cast<std::size_t>(kernel.size)) {
        throw error(errc::config_error,
                    "initial configuration has " + std::to_string(x0.size()) +
                        " agents but the kernel expects " +
                        std::to_string(kernel.size));
    }
    for (double v : x0) {
        if (!(v >= 0.0)) {
            throw error(errc::non_admissible,
                        "agent wealths must be nonnegative");
        }
    }
    if (!(lambda >= 0.0) || !(lambda < 1.0)) {
        throw error(errc::config_error, "lambda must lie in [0, 1)");
    }
    if (measure.s_dependent()) {
        throw error(errc::s_dependent_measure,
                    "the graph dynamics requires a scale-free redistribution "
                    "measure (" + measure.describe() + " depends on s)");
    }
    const double mean = measure.moment_nm(1, 0, 1.0);
    if (!(std::abs(mean - 0.5) <= kMeanTol)) {
        throw error(errc::asymmetric_mean,
                    "redistribution mean is " + std::to_string(mean) +
                        ", expected 1/2");
    }
}

// One exchange event: the pair is already chosen. Skips the draw for an empty
// pair, so a zero-wealth pair consumes no randomness (matching the two-agent
// jump semantics).
void apply_event(std::vector<double>& x, int i, int j, double lambda,
                 const RedistributionMeasure& measure, std::mt19937_64& rng) {
    const double s_pair = x[static_cast<std::size_t>(i)] +
                          x[static_cast<std::size_t>(j)];
    if (s_pair == 0.0) return;
    const double eps = measure.sample(s_pair, rng);
    const WealthPair np = apply_T_lambda(
        lambda, eps,
        {x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]});
    x[static_cast<std::size_t>(i)] = np.x;
    x[static_cast<std::size_t>(j)] = np.y;
}

int pick_pair(const PairTable& pt, std::mt19937_64& rng) {
    if (pt.cum.size() == 1) return 0;
    const double target = u01(rng) * pt.total_rate;
    const auto it = std::upper_bound(pt.cum.begin(), pt.cum.end(), target);
    const std::size_t idx = static_cast<std::size_t>(it - pt.cum.begin());
    return static_cast<int>(std::min(idx, pt.cum.size() - 1));
}

void check_times(const std::vector<double>& times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) {
            throw error(errc::config_error,
                        "observation times must be nonnegative");
        }
        if (i > 0 && times[i] < times[i - 1]) {
            throw error(errc::config_error,
                        "observation times must be ascending");
        }
    }
}

} // namespace

WalkKernel build_walk(const std::vector<std::vector<double>>& weights) {
    const int n = static_cast<int>(weights.size());
    if (n <= 0) {
        throw error(errc::config_error, "walk kernel is empty");
    }
    WalkKernel kernel;
    kernel.size = n;
    kernel.p.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (weights[static_cast<std::size_t>(i)].size() !=
            static_cast<std::size_t>(n)) {
            throw error(errc::config_error, "walk kernel must be square");
        }
        for (int j = 0; j < n; ++j) {
            const double v = weights[static_cast<std::size_t>(i)]
                                    [static_cast<std::size_t>(j)];
            if (!(v >= 0.0)) {
                throw error(errc::non_admissible,
                            "walk kernel entries must be nonnegative");
            }
            kernel.p[static_cast<std::size_t>(i) * n + j] = v;
        }
    }
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            row_sum += kernel.at(i, j);
            if (std::abs(kernel.at(i, j) - kernel.at(j, i)) > kKernelTol) {
                throw error(errc::asymmetric_kernel,
                            "p(" + std::to_string(i) + "," + std::to_string(j) +
                                ") != p(" + std::to_string(j) + "," +
                                std::to_string(i) + ")");
            }
        }
        if (std::abs(row_sum - 1.0) > kKernelTol) {
            throw error(errc::row_sum_violation,
                        "row " + std::to_string(i) + " sums to " +
                            std::to_string(row_sum));
        }
    }
    return kernel;
}

WalkKernel ring_walk(int n) {
    if (n < 2) {
        throw error(errc::config_error, "ring walk needs at least 2 agents");
    }
    std::vector<std::vector<double>> w(
        static_cast<std::size_t>(n),
        std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        const int up = (i + 1) % n;
        const int dn = (i + n - 1) % n;
        w[static_cast<std::size_t>(i)][static_cast<std::size_t>(up)] += 0.5;
        w[static_cast<std::size_t>(i)][static_cast<std::size_t>(dn)] += 0.5;
    }
    return build_walk(w);
}

WalkKernel complete_walk(int n) {
    if (n < 2) {
        throw error(errc::config_error,
                    "complete walk needs at least 2 agents");
    }
    const double off = 1.0 / (n - 1);
    std::vector<std::vector<double>> w(
        static_cast<std::size_t>(n),
        std::vector<double>(static_cast<std::size_t>(n), off));
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0.0;
    }
    return build_walk(w);
}

std::vector<std::vector<double>> simulate_nagent_at_times(
    const std::vector<double>& x0, double lambda,
    const RedistributionMeasure& measure, const WalkKernel& kernel,
    const std::vector<double>& times, std::mt19937_64& rng) {
    check_inputs(x0, lambda, measure, kernel);
    check_times(times);
    const PairTable pt = build_pairs(kernel);

    std::vector<std::vector<double>> out;
    out.reserve(times.size());
    std::vector<double> x = x0;
    if (pt.total_rate <= 0.0) {
        out.assign(times.size(), x);
        return out;
    }
    std::size_t idx = 0;
    double t = 0.0;
    while (idx < times.size()) {
        const double t_jump = t + exp_rand(rng, pt.total_rate);
        while (idx < times.size() && times[idx] < t_jump) {
            out.push_back(x);
            ++idx;
        }
        if (idx == times.size()) break;
        t = t_jump;
        const auto [i, j] = pt.pairs[static_cast<std::size_t>(pick_pair(pt, rng))];
        apply_event(x, i, j, lambda, measure, rng);
    }
    return out;
}

std::vector<double> simulate_nagent_endpoint(const std::vector<double>& x0,
                                             double lambda,
                                             const RedistributionMeasure& measure,
                                             const WalkKernel& kernel,
                                             double t_end,
                                             std::mt19937_64& rng) {
    if (!(t_end >= 0.0)) {
        throw error(errc::config_error, "t_end must be nonnegative");
    }
    std::vector<std::vector<double>> traj =
        simulate_nagent_at_times(x0, lambda, measure, kernel, {t_end}, rng);
    return std::move(traj.front());
}

std::vector<double> heat_kernel(const WalkKernel& kernel, double t) {
    const int n = kernel.size;
    if (n <= 0) {
        throw error(errc::config_error, "walk kernel is empty");
    }
    if (!(t >= 0.0)) {
        throw error(errc::config_error, "time must be nonnegative");
    }
    std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
    if (t == 0.0) {
        for (int i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i) * n + i] = 1.0;
        }
        return out;
    }

    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            P(i, j) = kernel.at(i, j);
        }
    }

    // exp(t(P - I)) = sum_k Poisson(t)(k) P^k; the Poisson weights are built
    // in log space so large t cannot underflow e^{-t}. The k-step tail mass
    // bounds the truncation error because ||P^k||_inf = 1.
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    const double log_t = std::log(t);
    double log_w = -t;
    double cum = 0.0;
    const long k_max = 1000 + static_cast<long>(10.0 * t);
    for (long k = 0;; ++k) {
        const double w = std::exp(log_w);
        acc += w * term;
        cum += w;
        if (1.0 - cum <= 1e-13 && static_cast<double>(k) >= t) break;
        if (k >= k_max) {
            throw error(errc::quadrature_failure,
                        "heat kernel series did not converge");
        }
        term = term * P;
        log_w += log_t - std::log(static_cast<double>(k + 1));
    }

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(i) * n + j] = acc(i, j);
        }
    }
    return out;
}

std::vector<std::vector<WealthCheckRow>> expected_wealth_check_at_times(
    const std::vector<double>& x0, double lambda,
    const RedistributionMeasure& measure, const WalkKernel& kernel,
    const std::vector<double>& times, long trials, std::uint64_t seed,
    int threads) {
    check_inputs(x0, lambda, measure, kernel);
    check_times(times);
    if (trials < 2) {
        throw error(errc::config_error, "need at least 2 trials");
    }
    const int n = kernel.size;
    const std::size_t m = times.size() * static_cast<std::size_t>(n);

    const std::size_t nb = block_count(trials, kTrialBlock);
    std::vector<double> block_sum(nb * m, 0.0);
    std::vector<double> block_sq(nb * m, 0.0);
    for_blocks(trials, kTrialBlock, threads,
               [&](std::size_t block, long lo, long hi) {
                   double* sum = block_sum.data() + block * m;
                   double* sq = block_sq.data() + block * m;
                   for (long trial = lo; trial < hi; ++trial) {
                       std::mt19937_64 rng =
                           trial_rng(seed, static_cast<std::uint64_t>(trial));
                       const auto traj = simulate_nagent_at_times(
                           x0, lambda, measure, kernel, times, rng);
                       for (std::size_t k = 0; k < times.size(); ++k) {
                           for (int i = 0; i < n; ++i) {
                               const double v =
                                   traj[k][static_cast<std::size_t>(i)];
                               const std::size_t slot =
                                   k * static_cast<std::size_t>(n) +
                                   static_cast<std::size_t>(i);
                               sum[slot] += v;
                               sq[slot] += v * v;
                           }
                       }
                   }
               });

    std::vector<std::vector<WealthCheckRow>> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const std::vector<double> pt =
            heat_kernel(kernel, (1.0 - lambda) * times[k]);
        out[k].resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const std::size_t slot =
                k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
            double s = 0.0;
            double s2 = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                s += block_sum[b * m + slot];
                s2 += block_sq[b * m + slot];
            }
            const double mean = s / static_cast<double>(trials);
            const double var =
                std::max(0.0, (s2 - static_cast<double>(trials) * mean * mean) /
                                  static_cast<double>(trials - 1));
            const double se = std::sqrt(var / static_cast<double>(trials));
            double analytic = 0.0;
            for (int j = 0; j < n; ++j) {
                analytic += pt[static_cast<std::size_t>(i) * n + j] *
                            x0[static_cast<std::size_t>(j)];
            }
            WealthCheckRow& row = out[k][static_cast<std::size_t>(i)];
            row.agent = i;
            row.mc_mean = mean;
            row.analytic = analytic;
            row.se = se;
            row.pass = std::abs(mean - analytic) <= 3.0 * se;
        }
    }
    return out;
}

std::vector<WealthCheckRow> expected_wealth_check(
    const std::vector<double>& x0, double lambda,
    const RedistributionMeasure& measure, const WalkKernel& kernel, double t,
    long trials, std::uint64_t seed, int threads) {
    auto table = expected_wealth_check_at_times(x0, lambda, measure, kernel,
                                                {t}, trials, seed, threads);
    return std::move(table.front());
}

std::vector<Estimate> harmonicity_check(
    const std::function<std::vector<double>(std::mt19937_64&)>& sampler,
    const WalkKernel& kernel, long trials, std::mt19937_64& rng) {
    if (kernel.size <= 0) {
        throw error(errc::config_error, "walk kernel is empty");
    }
    if (trials < 2) {
        throw error(errc::config_error, "need at least 2 trials");
    }
    const int n = kernel.size;
    std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
    std::vector<double> sq(static_cast<std::size_t>(n), 0.0);
    for (long trial = 0; trial < trials; ++trial) {
        const std::vector<double> x = sampler(rng);
        if (x.size() != static_cast<std::size_t>(n)) {
            throw error(errc::config_error,
                        "sampled configuration has the wrong size");
        }
        for (int i = 0; i < n; ++i) {
            double px = 0.0;
            for (int j = 0; j < n; ++j) {
                px += kernel.at(i, j) * x[static_cast<std::size_t>(j)];
            }
            const double r = px - x[static_cast<std::size_t>(i)];
            sum[static_cast<std::size_t>(i)] += r;
            sq[static_cast<std::size_t>(i)] += r * r;
        }
    }
    std::vector<Estimate> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double mean = sum[static_cast<std::size_t>(i)] /
                            static_cast<double>(trials);
        const double var = std::max(
            0.0, (sq[static_cast<std::size_t>(i)] -
                  static_cast<double>(trials) * mean * mean) /
                     static_cast<double>(trials - 1));
        out[static_cast<std::size_t>(i)] = {
            mean, std::sqrt(var / static_cast<double>(trials))};
    }
    return out;
}

} // namespace kinex

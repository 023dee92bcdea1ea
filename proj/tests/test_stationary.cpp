#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kinex/error.hpp"
#include "kinex/exchange.hpp"
#include "kinex/measures.hpp"
#include "kinex/rng.hpp"
#include "kinex/stationary.hpp"
#include "kinex/stats.hpp"

#include "oracles.hpp"

using namespace kinex;

namespace {

const SeriesTruncation kTrunc{}; // tol = 1e-12

std::vector<double> eps_samples(double lambda,
                                const RedistributionMeasure& measure, long n,
                                std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        std::mt19937_64 rng = trial_rng(seed, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] =
            sample_eps_infinity(lambda, measure, kTrunc, rng);
    }
    return out;
}

} // namespace

TEST_SUITE("stationary") {

TEST_CASE("stationary fraction series basics") {
    const auto uniform = RedistributionMeasure::Uniform();
    const auto beta22 = RedistributionMeasure::Beta(2.0, 2.0);

    // Zero propensity: a single coupled draw from the measure.
    std::mt19937_64 a = trial_rng(50, 1);
    std::mt19937_64 b = trial_rng(50, 1);
    CHECK(sample_eps_infinity(0.0, beta22, kTrunc, a) ==
          beta22.sample(1.0, b));

    // Mean equals the measure mean for any propensity (weights sum to 1).
    for (const double lambda : {0.3, 0.8}) {
        const auto s = eps_samples(lambda, beta22, 200000, 51);
        const Estimate m = empirical_moment(s, 1);
        CHECK(std::abs(m.value - 0.5) <= 3.0 * m.se);
    }

    // Uniform fraction at half propensity: variance 1/36.
    const auto s = eps_samples(0.5, uniform, 200000, 52);
    const Estimate m1 = empirical_moment(s, 1);
    const Estimate m2 = empirical_moment(s, 2);
    const double var = m2.value - m1.value * m1.value;
    const double se = std::sqrt(m2.se * m2.se + 4.0 * m1.se * m1.se *
                                                    m1.value * m1.value);
    CHECK(std::abs(var - 1.0 / 36.0) <= 3.0 * se);

    const auto pareto = RedistributionMeasure::ParetoType(1.0);
    std::mt19937_64 rng = trial_rng(53, 0);
    CHECK_THROWS_WITH_AS(
        (void)sample_eps_infinity(0.5, pareto, kTrunc, rng),
        doctest::Contains("s_dependent_measure"), const error&);
}

TEST_CASE("truncation error is bounded pathwise by the tolerance") {
    const auto uniform = RedistributionMeasure::Uniform();
    for (const double tol : {1e-3, 1e-6}) {
        const SeriesTruncation coarse{tol};
        const SeriesTruncation fine{tol / 100.0};
        for (int i = 0; i < 300; ++i) {
            std::mt19937_64 a = trial_rng(54, static_cast<std::uint64_t>(i));
            std::mt19937_64 b = trial_rng(54, static_cast<std::uint64_t>(i));
            const double va = sample_eps_infinity(0.7, uniform, coarse, a);
            const double vb = sample_eps_infinity(0.7, uniform, fine, b);
            CHECK(std::abs(va - vb) <= tol);
        }
    }
    CHECK(SeriesTruncation{1e-12}.depth(0.5) == 40);
    CHECK_THROWS_AS((void)SeriesTruncation{1e-12}.depth(1.0), const error&);
}

TEST_CASE("analytic fraction moments") {
    const auto uniform = RedistributionMeasure::Uniform();
    const auto alpha = alpha_moments(0.5, uniform, 8);
    CHECK(alpha[0] == 1.0);
    CHECK(alpha[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(alpha[2] == doctest::Approx(5.0 / 18.0).epsilon(1e-14));

    CHECK(alpha_joint(alpha, 0, 0) == 1.0);
    CHECK(alpha_joint(alpha, 1, 1) == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
    for (int i = 0; i <= 8; ++i) {
        CHECK(alpha_joint(alpha, i, 0) ==
              doctest::Approx(alpha[static_cast<std::size_t>(i)]).epsilon(1e-14));
    }
    CHECK(alpha_joint(0.5, uniform, 1, 1) ==
          doctest::Approx(2.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("analytic moments match sampled moments across propensities") {
    const auto uniform = RedistributionMeasure::Uniform();
    const auto beta22 = RedistributionMeasure::Beta(2.0, 2.0);
    const long n = 150000;
    std::uint64_t seed = 55;
    for (const RedistributionMeasure* m : {&uniform, &beta22}) {
        for (const double lambda : {0.1, 0.5, 0.9}) {
            const auto alpha = alpha_moments(lambda, *m, 6);
            const auto s = eps_samples(lambda, *m, n, seed++);
            for (int k = 1; k <= 6; ++k) {
                const Estimate e = empirical_moment(s, k);
                CHECK(std::abs(e.value - alpha[static_cast<std::size_t>(k)]) <=
                      4.0 * e.se);
            }
        }
    }
}

TEST_CASE("fixed-total stationary samplers") {
    const auto uniform = RedistributionMeasure::Uniform();
    const auto beta22 = RedistributionMeasure::Beta(2.0, 2.0);

    std::vector<double> xs(100000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::mt19937_64 rng = trial_rng(60, i);
        const WealthPair p = sample_canonical_energy(1.0, uniform, rng);
        CHECK(p.x + p.y == 1.0);
        xs[i] = p.x;
    }
    CHECK(ks_statistic(xs, oracle::uniform_cdf) < 0.01);

    double sum = 0.0, sumsq = 0.0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) {
        std::mt19937_64 rng = trial_rng(61, static_cast<std::uint64_t>(i));
        const double x = sample_canonical_energy(2.0, beta22, rng).x;
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double se =
        std::sqrt((sumsq - n * mean * mean) / (n - 1) / n);
    CHECK(std::abs(mean - 1.0) <= 3.0 * se);

    // Zero propensity reduces the saving-model sampler to the fixed-total one.
    std::mt19937_64 a = trial_rng(62, 3);
    std::mt19937_64 b = trial_rng(62, 3);
    const WealthPair w1 = sample_stationary_wealth(2.5, 0.0, beta22, kTrunc, a);
    const WealthPair w2 = sample_canonical_energy(2.5, beta22, b);
    CHECK(w1.x == w2.x);
    CHECK(w1.y == w2.y);

    // Uniform measure, half propensity, unit total: Var(x) = 1/36.
    std::vector<double> vx(200000);
    for (std::size_t i = 0; i < vx.size(); ++i) {
        std::mt19937_64 rng = trial_rng(63, i);
        vx[i] = sample_stationary_wealth(1.0, 0.5, uniform, kTrunc, rng).x;
    }
    const Estimate e1 = empirical_moment(vx, 1);
    const Estimate e2 = empirical_moment(vx, 2);
    const double var = e2.value - e1.value * e1.value;
    const double se_var = std::sqrt(e2.se * e2.se +
                                    4.0 * e1.se * e1.se * e1.value * e1.value);
    CHECK(std::abs(var - 1.0 / 36.0) <= 3.0 * se_var);
}

TEST_CASE("stationary law is preserved by the jump dynamics") {
    const auto uniform = RedistributionMeasure::Uniform();
    const double lambda = 0.5, s = 1.0, t_end = 5.0;
    const ModelParams params{lambda, std::nullopt, 1.0};
    const long n = 60000;

    // Paired per-trial differences of the joint moments up to order 3.
    struct Slot { int i, j; double dsum = 0.0, dsq = 0.0; };
    std::vector<Slot> slots;
    for (int i = 0; i <= 3; ++i) {
        for (int j = 0; i + j <= 3; ++j) {
            if (i + j >= 1) slots.push_back({i, j, 0.0, 0.0});
        }
    }
    for (long t = 0; t < n; ++t) {
        std::mt19937_64 rng = trial_rng(64, static_cast<std::uint64_t>(t));
        const WealthPair w0 =
            sample_stationary_wealth(s, lambda, uniform, kTrunc, rng);
        const WealthPair wt = simulate_endpoint(w0, params, uniform, t_end, rng);
        for (Slot& sl : slots) {
            const double d = std::pow(wt.x, sl.i) * std::pow(wt.y, sl.j) -
                             std::pow(w0.x, sl.i) * std::pow(w0.y, sl.j);
            sl.dsum += d;
            sl.dsq += d * d;
        }
    }
    for (const Slot& sl : slots) {
        const double mean = sl.dsum / n;
        const double var = (sl.dsq - n * mean * mean) / (n - 1);
        const double se = std::sqrt(var / n);
        CHECK(std::abs(mean) <= 4.0 * se);
    }
}

TEST_CASE("two-propensity stationary fraction") {
    const auto uniform = RedistributionMeasure::Uniform();

    // Equal propensities: same law as the single-propensity sampler.
    std::vector<double> a(100000), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::mt19937_64 r1 = trial_rng(65, i);
        a[i] = sample_two_prop_r(0.5, 0.5, uniform, kTrunc, r1);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        std::mt19937_64 r2 = trial_rng(66, i);
        b[i] = sample_eps_infinity(0.5, uniform, kTrunc, r2);
    }
    std::sort(b.begin(), b.end());
    const double ks = ks_statistic(a, [&](double x) {
        const auto it = std::upper_bound(b.begin(), b.end(), x);
        return static_cast<double>(it - b.begin()) /
               static_cast<double>(b.size());
    });
    CHECK(ks < 0.01);

    // Both propensities zero: the first draw is returned unchanged.
    std::mt19937_64 r1 = trial_rng(67, 9);
    std::mt19937_64 r2 = trial_rng(67, 9);
    CHECK(sample_two_prop_r(0.0, 0.0, uniform, kTrunc, r1) ==
          uniform.sample(1.0, r2));

    // Invariance of first and second moments under the two-propensity jumps.
    const double l1 = 0.3, l2 = 0.6, s = 1.0;
    ModelParams params{l1, l2, 1.0};
    const long n = 60000;
    double d1 = 0.0, d1sq = 0.0, d2 = 0.0, d2sq = 0.0;
    for (long t = 0; t < n; ++t) {
        std::mt19937_64 rng = trial_rng(68, static_cast<std::uint64_t>(t));
        const WealthPair w0 = sample_two_prop(s, l1, l2, uniform, kTrunc, rng);
        const WealthPair wt = simulate_endpoint(w0, params, uniform, 4.0, rng);
        const double e1 = wt.x - w0.x;
        const double e2 = wt.x * wt.x - w0.x * w0.x;
        d1 += e1;
        d1sq += e1 * e1;
        d2 += e2;
        d2sq += e2 * e2;
    }
    const double m1 = d1 / n, v1 = (d1sq - n * m1 * m1) / (n - 1);
    const double m2 = d2 / n, v2 = (d2sq - n * m2 * m2) / (n - 1);
    CHECK(std::abs(m1) <= 3.0 * std::sqrt(v1 / n));
    CHECK(std::abs(m2) <= 3.0 * std::sqrt(v2 / n));

    std::mt19937_64 rng = trial_rng(69, 0);
    CHECK_THROWS_WITH_AS(
        (void)sample_two_prop_r(1.0, 0.5, uniform, kTrunc, rng),
        doctest::Contains("truncation_overflow"), const error&);
}

TEST_CASE("randomized-total sampler and the product law at zero propensity") {
    const auto uniform = RedistributionMeasure::Uniform();
    const auto gamma21 = GrandCanonicalSpec::Gamma(2.0, 1.0);

    const long n = 100000;
    std::vector<double> xs(static_cast<std::size_t>(n)),
        ys(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        std::mt19937_64 rng = trial_rng(70, static_cast<std::uint64_t>(i));
        const WealthPair p =
            sample_grand_canonical(gamma21, 0.0, uniform, kTrunc, rng);
        xs[static_cast<std::size_t>(i)] = p.x;
        ys[static_cast<std::size_t>(i)] = p.y;
    }
    CHECK(ks_statistic(xs, [](double v) { return oracle::exp_cdf(1.0, v); }) <
          0.01);
    double mx = 0.0, my = 0.0;
    for (long i = 0; i < n; ++i) {
        mx += xs[static_cast<std::size_t>(i)];
        my += ys[static_cast<std::size_t>(i)];
    }
    mx /= n;
    my /= n;
    double cov_sum = 0.0, cov_sq = 0.0;
    for (long i = 0; i < n; ++i) {
        const double c = (xs[static_cast<std::size_t>(i)] - mx) *
                         (ys[static_cast<std::size_t>(i)] - my);
        cov_sum += c;
        cov_sq += c * c;
    }
    const double cov = cov_sum / n;
    const double cov_se =
        std::sqrt((cov_sq - n * cov * cov) / (n - 1) / n);
    CHECK(std::abs(cov) <= 3.0 * cov_se);

    // Fixed total: the sum is that total, always.
    const auto point = GrandCanonicalSpec::PointMass(3.5);
    for (int i = 0; i < 200; ++i) {
        std::mt19937_64 rng = trial_rng(71, static_cast<std::uint64_t>(i));
        const WealthPair p =
            sample_grand_canonical(point, 0.0, uniform, kTrunc, rng);
        CHECK(p.x + p.y == 3.5);
    }

    // Positive propensity destroys independence: the coordinates correlate.
    double c2_sum = 0.0, c2_sq = 0.0, mx2 = 0.0, my2 = 0.0;
    std::vector<double> x2(static_cast<std::size_t>(n)),
        y2(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        std::mt19937_64 rng = trial_rng(72, static_cast<std::uint64_t>(i));
        const WealthPair p =
            sample_grand_canonical(gamma21, 0.5, uniform, kTrunc, rng);
        x2[static_cast<std::size_t>(i)] = p.x;
        y2[static_cast<std::size_t>(i)] = p.y;
        mx2 += p.x;
        my2 += p.y;
    }
    mx2 /= n;
    my2 /= n;
    for (long i = 0; i < n; ++i) {
        const double c = (x2[static_cast<std::size_t>(i)] - mx2) *
                         (y2[static_cast<std::size_t>(i)] - my2);
        c2_sum += c;
        c2_sq += c * c;
    }
    const double c2 = c2_sum / n;
    const double c2_se = std::sqrt((c2_sq - n * c2 * c2) / (n - 1) / n);
    CHECK(std::abs(c2) > 5.0 * c2_se);
}

TEST_CASE("product-invariance defect identifies matched and mismatched pairs") {
    const auto uniform = RedistributionMeasure::Uniform();
    CHECK(verify_product_invariance(Density1D::Exponential(1.0), uniform) <
          1e-8);
    for (const double k : {2.0, 3.0}) {
        CHECK(verify_product_invariance(
                  Density1D::Gamma(k, 1.0),
                  RedistributionMeasure::Beta(k, k)) < 1e-8);
    }
    CHECK(verify_product_invariance(Density1D::Gamma(2.0, 1.0), uniform) > 0.1);
}

TEST_CASE("mixtures over the total stay invariant under the dynamics") {
    const auto uniform = RedistributionMeasure::Uniform();
    const ModelParams params{0.0, std::nullopt, 1.0};
    const long n = 50000;
    for (const auto& spec :
         {GrandCanonicalSpec::PointMass(2.0), GrandCanonicalSpec::Gamma(2.0, 1.0)}) {
        struct Slot { int i, j; double dsum = 0.0, dsq = 0.0; };
        std::vector<Slot> slots = {{1, 0, 0, 0}, {0, 1, 0, 0}, {1, 1, 0, 0},
                                   {2, 0, 0, 0}, {2, 1, 0, 0}, {3, 0, 0, 0}};
        for (long t = 0; t < n; ++t) {
            std::mt19937_64 rng = trial_rng(73, static_cast<std::uint64_t>(t));
            const WealthPair w0 =
                sample_grand_canonical(spec, 0.0, uniform, kTrunc, rng);
            const WealthPair wt =
                simulate_endpoint(w0, params, uniform, 3.0, rng);
            for (Slot& sl : slots) {
                const double d = std::pow(wt.x, sl.i) * std::pow(wt.y, sl.j) -
                                 std::pow(w0.x, sl.i) * std::pow(w0.y, sl.j);
                sl.dsum += d;
                sl.dsq += d * d;
            }
        }
        for (const Slot& sl : slots) {
            const double mean = sl.dsum / n;
            const double var = (sl.dsq - n * mean * mean) / (n - 1);
            CHECK(std::abs(mean) <= 4.0 * std::sqrt(var / n));
        }
    }
}

} // TEST_SUITE

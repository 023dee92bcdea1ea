#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "kinex/duality.hpp"
#include "kinex/error.hpp"
#include "kinex/measures.hpp"
#include "kinex/rng.hpp"
#include "kinex/special.hpp"
#include "kinex/stationary.hpp"

using namespace kinex;

TEST_SUITE("duality") {

TEST_CASE("generator action on monomials") {
    const auto uniform = RedistributionMeasure::Uniform();

    const auto row11 = energy_generator_coeffs(uniform, 1, 1);
    // nu_11 = 1/6; binomial weights 1,2,1 over (0,2),(1,1),(2,0); diagonal -1.
    CHECK(row11.at({0, 2}) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(row11.at({1, 1}) == doctest::Approx(2.0 / 6.0 - 1.0).epsilon(1e-13));
    CHECK(row11.at({2, 0}) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

    const auto row00 = energy_generator_coeffs(uniform, 0, 0);
    for (const auto& [state, coeff] : row00) {
        CHECK(coeff == 0.0);
    }

    // Applied to the constant function the row sums to nu_nm 2^(n+m) - 1.
    for (int n = 0; n <= 3; ++n) {
        for (int m = 0; n + m <= 3; ++m) {
            const auto row = energy_generator_coeffs(uniform, n, m);
            double sum = 0.0;
            for (const auto& [state, coeff] : row) sum += coeff;
            const double expected =
                uniform.moment_nm(n, m, 1.0) * std::pow(2.0, n + m) - 1.0;
            CHECK(sum == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    const auto pareto = RedistributionMeasure::ParetoType(1.0);
    CHECK_THROWS_WITH_AS((void)energy_generator_coeffs(pareto, 1, 0),
                         doctest::Contains("s_dependent_measure"),
                         const error&);
}

TEST_CASE("reference moment tables") {
    const MomentTable expo = MomentTable::ProductExponential(4);
    CHECK(expo.c(2, 1) == doctest::Approx(2.0).epsilon(1e-14)); // 2! 1!
    CHECK(expo.c(0, 0) == 1.0);
    CHECK(expo.c_se(2, 1) == 0.0);

    const MomentTable gamma2 = MomentTable::ProductGamma(2.0, 4);
    CHECK(gamma2.c(1, 1) == doctest::Approx(4.0).epsilon(1e-14)); // 2 * 2

    // Monte Carlo table under the same product law agrees within 4 sigma.
    std::mt19937_64 rng = trial_rng(80, 0);
    const MomentTable mc = MomentTable::FromSampler(
        [](std::mt19937_64& r) {
            return WealthPair{gamma_rand(r, 2.0), gamma_rand(r, 2.0)};
        },
        200000, 3, rng);
    for (int n = 0; n <= 3; ++n) {
        for (int m = 0; n + m <= 3; ++m) {
            CHECK(std::abs(mc.c(n, m) - gamma2.c(n, m)) <=
                  4.0 * mc.c_se(n, m) + 1e-12);
        }
    }

    // Product references factorize exactly.
    for (int n = 0; n <= 4; ++n) {
        for (int m = 0; n + m <= 4; ++m) {
            CHECK(std::abs(gamma2.c(n, m) * gamma2.c(0, 0) -
                           gamma2.c(n, 0) * gamma2.c(0, m)) < 1e-10);
        }
    }
}

TEST_CASE("factorization fails under the correlated stationary law") {
    // Under a saving propensity the stationary pair is not a product, and its
    // moment table shows it: c11 != c10 c01 beyond 5 combined sigma.
    const auto uniform = RedistributionMeasure::Uniform();
    const SeriesTruncation trunc{};
    const auto spec = GrandCanonicalSpec::Gamma(2.0, 1.0);
    std::mt19937_64 rng = trial_rng(81, 0);
    const MomentTable mc = MomentTable::FromSampler(
        [&](std::mt19937_64& r) {
            return sample_grand_canonical(spec, 0.5, uniform, trunc, r);
        },
        200000, 2, rng);
    const double defect = std::abs(mc.c(1, 1) - mc.c(1, 0) * mc.c(0, 1));
    const double se = mc.c_se(1, 1) + std::abs(mc.c(0, 1)) * mc.c_se(1, 0) +
                      std::abs(mc.c(1, 0)) * mc.c_se(0, 1);
    CHECK(defect > 5.0 * se);
}

TEST_CASE("energy dual rates") {
    const auto uniform = RedistributionMeasure::Uniform();
    const MomentTable expo = MomentTable::ProductExponential(6);

    const DualRateTable level3 = energy_dual_rates(uniform, expo, 3);
    for (const auto& [state, transitions] : level3.rates) {
        CHECK(transitions.size() == 3); // the other states on the level
        for (const DualTransition& tr : transitions) {
            CHECK(tr.rate == doctest::Approx(0.25).epsilon(1e-13));
            CHECK(tr.target.total() == 3);
        }
    }

    const DualRateTable level0 = energy_dual_rates(uniform, expo, 0);
    CHECK(level0.at({0, 0}).empty());
    CHECK(level0.exit_rate({0, 0}) == 0.0);

    // Brute-force cross-check for a non-uniform measure and gamma reference.
    const auto beta22 = RedistributionMeasure::Beta(2.0, 2.0);
    const MomentTable gamma2 = MomentTable::ProductGamma(2.0, 5);
    for (int level = 1; level <= 5; ++level) {
        const DualRateTable table = energy_dual_rates(beta22, gamma2, level);
        for (const auto& [state, transitions] : table.rates) {
            const double nu = beta22.moment_nm(state.n, state.m, 1.0);
            for (const DualTransition& tr : transitions) {
                const double direct = binomial(level, tr.target.n) * nu *
                                      gamma2.c(tr.target.n, tr.target.m) /
                                      gamma2.c(state.n, state.m);
                CHECK(std::abs(tr.rate - direct) < 1e-10);
                CHECK(tr.rate >= 0.0);
            }
        }
    }
}

TEST_CASE("energy duality function") {
    const MomentTable expo = MomentTable::ProductExponential(4);
    CHECK(duality_fn_energy(expo, 0, 0, 1.7, 2.9) == 1.0);
    CHECK(duality_fn_energy(expo, 1, 1, 3.0, 5.0) ==
          doctest::Approx(15.0).epsilon(1e-14)); // c11 = 1
    CHECK(duality_fn_energy(expo, 2, 1, 0.0, 4.0) == 0.0);
}

TEST_CASE("wealth dual rates, one and two indices") {
    const auto uniform = RedistributionMeasure::Uniform();
    const MomentTable alpha = MomentTable::WealthAlpha(0.5, uniform, 8);

    const auto r1 = wealth_dual_rates_r(0.5, uniform, alpha, 1);
    REQUIRE(r1.size() == 1);
    CHECK(r1.at(0) == doctest::Approx(0.5).epsilon(1e-13));

    // Near-frozen dual at high propensity: every downward rate vanishes.
    const MomentTable alpha99 = MomentTable::WealthAlpha(0.999, uniform, 4);
    const auto frozen = wealth_dual_rates_r(0.999, uniform, alpha99, 3);
    for (const auto& [k, rate] : frozen) {
        CHECK(rate < 0.01);
    }

    // Exit-rate identity 1 - lambda^n.
    for (const double lambda : {0.2, 0.5, 0.8}) {
        const MomentTable a = MomentTable::WealthAlpha(lambda, uniform, 6);
        for (int n = 1; n <= 6; ++n) {
            const auto rates = wealth_dual_rates_r(lambda, uniform, a, n);
            double exit = 0.0;
            for (const auto& [k, rate] : rates) exit += rate;
            CHECK(std::abs(exit - (1.0 - std::pow(lambda, n))) < 1e-10);
        }
    }

    // The two-index dual from (1,0) reproduces the one-index rate.
    const auto r2 = wealth_dual_rates_2d(0.5, uniform, alpha, {1, 0});
    REQUIRE(r2.size() == 1);
    CHECK(r2.begin()->first == DualState{0, 0});
    CHECK(r2.begin()->second == doctest::Approx(0.5).epsilon(1e-13));

    // Zero propensity: the only reachable target is (0,0), in one jump.
    const MomentTable alpha0 = MomentTable::WealthAlpha(0.0, uniform, 6);
    const auto collapse = wealth_dual_rates_2d(0.0, uniform, alpha0, {2, 1});
    int live = 0;
    for (const auto& [target, rate] : collapse) {
        if (rate > 0.0) {
            ++live;
            CHECK(target == DualState{0, 0});
        }
    }
    CHECK(live == 1);

    // Symmetric measure: swapping both site labels preserves the rates.
    const auto ab = wealth_dual_rates_2d(0.5, uniform, alpha, {2, 1});
    const auto ba = wealth_dual_rates_2d(0.5, uniform, alpha, {1, 2});
    REQUIRE(ab.size() == ba.size());
    for (const auto& [target, rate] : ab) {
        const DualState swapped{target.m, target.n};
        CHECK(ba.at(swapped) == doctest::Approx(rate).epsilon(1e-12));
    }
}

TEST_CASE("dual chain simulation") {
    const auto uniform = RedistributionMeasure::Uniform();
    const MomentTable expo = MomentTable::ProductExponential(4);

    // Uniform rates on a level make the stationary occupation uniform.
    const DualRateTable level2 = energy_dual_rates(uniform, expo, 2);
    std::mt19937_64 rng = trial_rng(82, 0);
    const auto traj = simulate_dual(level2, {2, 0}, 30000.0, rng);
    std::map<DualState, double> occupation;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        occupation[traj[i].second] += traj[i + 1].first - traj[i].first;
        CHECK(traj[i].second.total() == 2);
    }
    for (const auto& [state, time] : occupation) {
        CHECK(std::abs(time / 30000.0 - 1.0 / 3.0) < 0.01);
    }

    // A state with no transitions never moves.
    const auto still = simulate_dual(level2, {0, 0}, 5.0, rng);
    REQUIRE(still.size() == 2);
    CHECK(still.back().second == DualState{0, 0});

    // The wealth dual always drains to (0,0); its absorption time has a
    // finite mean.
    const MomentTable alpha = MomentTable::WealthAlpha(0.5, uniform, 3);
    const DualRateTable wtable = wealth_dual_rate_table(0.5, uniform, alpha, 3);
    double absorb_sum = 0.0;
    const int runs = 2000;
    for (int i = 0; i < runs; ++i) {
        std::mt19937_64 r = trial_rng(83, static_cast<std::uint64_t>(i));
        const auto w = simulate_dual(wtable, {3, 0}, 1000.0, r);
        CHECK(w.back().second == DualState{0, 0});
        int prev_total = 3;
        double absorbed_at = 0.0;
        for (const auto& [time, state] : w) {
            CHECK(state.total() <= prev_total);
            prev_total = state.total();
            if (state == DualState{0, 0} && absorbed_at == 0.0) {
                absorbed_at = time;
            }
        }
        absorb_sum += absorbed_at;
    }
    CHECK(absorb_sum / runs > 0.0);
    CHECK(absorb_sum / runs < 50.0);
}

TEST_CASE("two-sided duality checks, small scale") {
    const auto uniform = RedistributionMeasure::Uniform();
    const MomentTable expo = MomentTable::ProductExponential(4);
    std::mt19937_64 rng = trial_rng(84, 0);

    const DualityCheckResult r = duality_check_energy(
        uniform, expo, 1.0, 1.0, 1, 1, 1.0, 200000, rng);
    CHECK(r.pass);
    CHECK(std::abs(r.lhs - r.rhs) <= 3.0 * (r.se_lhs + r.se_rhs));

    // Constants are preserved exactly.
    const DualityCheckResult c = duality_check_energy(
        uniform, expo, 1.3, 0.4, 0, 0, 2.0, 100, rng);
    CHECK(c.lhs == 1.0);
    CHECK(c.rhs == 1.0);
    CHECK(c.se_lhs == 0.0);

    // No evolution at t = 0: both sides equal the duality function itself.
    const DualityCheckResult t0 = duality_check_energy(
        uniform, expo, 2.0, 3.0, 2, 1, 0.0, 100, rng);
    CHECK(t0.lhs == doctest::Approx(t0.rhs).epsilon(1e-13));
    CHECK(t0.lhs ==
          doctest::Approx(duality_fn_energy(expo, 2, 1, 2.0, 3.0)).epsilon(1e-13));

    // Wealth model on the simplex.
    const MomentTable alpha = MomentTable::WealthAlpha(0.5, uniform, 3);
    const DualityCheckResult w = duality_check_wealth(
        0.5, uniform, alpha, 0.3, 0.7, 1, 1, 1.0, 200000, rng);
    CHECK(w.pass);

    CHECK_THROWS_WITH_AS(
        (void)duality_check_wealth(0.5, uniform, alpha, 0.4, 0.7, 1, 0, 1.0,
                                   100, rng),
        doctest::Contains("unnormalized_total"), const error&);
}

TEST_CASE("sweeps cover all states and are thread-invariant") {
    const auto uniform = RedistributionMeasure::Uniform();
    const MomentTable expo = MomentTable::ProductExponential(3);
    const std::vector<double> times = {0.5, 1.5};

    const auto rows1 =
        duality_sweep_energy(uniform, expo, 1.0, 1.0, 3, times, 30000, 777, 1);
    const auto rows4 =
        duality_sweep_energy(uniform, expo, 1.0, 1.0, 3, times, 30000, 777, 4);
    REQUIRE(rows1.size() == rows4.size());
    for (std::size_t i = 0; i < rows1.size(); ++i) {
        CHECK(rows1[i].lhs == rows4[i].lhs);
        CHECK(rows1[i].rhs == rows4[i].rhs);
        CHECK(rows1[i].n == rows4[i].n);
        CHECK(rows1[i].m == rows4[i].m);
        CHECK(rows1[i].t == rows4[i].t);
    }
    // All states with total <= 3, including (0,0), for each of the two times.
    CHECK(rows1.size() == (1 + 2 + 3 + 4) * times.size());

    const MomentTable alpha = MomentTable::WealthAlpha(0.5, uniform, 2);
    const auto wrows = duality_sweep_wealth(0.5, uniform, alpha, 0.25, 0.75, 2,
                                            {1.0}, 30000, 778, 2);
    CHECK(wrows.size() == 6); // states with total <= 2
}

TEST_CASE("moment-ratio profile across a level") {
    const auto uniform = RedistributionMeasure::Uniform();
    const MomentTable expo = MomentTable::ProductExponential(4);

    // Sampling the reference itself gives ratio 1 everywhere.
    std::mt19937_64 rng = trial_rng(85, 0);
    const auto base = harmonic_profile(
        [](std::mt19937_64& r) {
            return WealthPair{exp_rand(r, 1.0), exp_rand(r, 1.0)};
        },
        expo, 3, 200000, rng);
    for (const ProfileEntry& e : base) {
        CHECK(std::abs(e.ratio.value - 1.0) <= 3.0 * e.ratio.se);
    }

    // A fixed-total start makes the profile constant across the level but
    // different from 1.
    const auto fixed = harmonic_profile(
        [&](std::mt19937_64& r) {
            return sample_canonical_energy(2.0, uniform, r);
        },
        expo, 3, 200000, rng);
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        for (std::size_t j = i + 1; j < fixed.size(); ++j) {
            CHECK(std::abs(fixed[i].ratio.value - fixed[j].ratio.value) <=
                  4.0 * (fixed[i].ratio.se + fixed[j].ratio.se));
        }
    }

    // A non-stationary product of unequal point masses is detected.
    const auto skew = harmonic_profile(
        [](std::mt19937_64&) {
            return WealthPair{1.0, 2.0};
        },
        expo, 3, 20000, rng);
    double spread = 0.0, se = 0.0;
    for (std::size_t i = 0; i < skew.size(); ++i) {
        for (std::size_t j = i + 1; j < skew.size(); ++j) {
            const double d =
                std::abs(skew[i].ratio.value - skew[j].ratio.value);
            if (d > spread) {
                spread = d;
                se = skew[i].ratio.se + skew[j].ratio.se;
            }
        }
    }
    CHECK(spread > 5.0 * (se + 1e-12));
}

} // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kinex/error.hpp"
#include "kinex/exchange.hpp"
#include "kinex/measures.hpp"
#include "kinex/rng.hpp"
#include "kinex/stats.hpp"

#include "oracles.hpp"

using namespace kinex;

TEST_SUITE("exchange") {

TEST_CASE("full redistribution map") {
    const WealthPair r = apply_T(0.5, {2.0, 4.0});
    CHECK(r.x == 3.0);
    CHECK(r.y == 3.0);

    const WealthPair lo = apply_T(0.0, {1.25, 2.5});
    CHECK(lo.x == 0.0);
    CHECK(lo.y == 3.75);
    const WealthPair hi = apply_T(1.0, {1.25, 2.5});
    CHECK(hi.x == 3.75);
    CHECK(hi.y == 0.0);
    const WealthPair z = apply_T(0.7, {0.0, 0.0});
    CHECK(z.x == 0.0);
    CHECK(z.y == 0.0);
}

TEST_CASE("partial redistribution map") {
    std::mt19937_64 rng = trial_rng(31, 0);
    for (int i = 0; i < 200; ++i) {
        const WealthPair p{3.0 * u01(rng), 5.0 * u01(rng)};
        const double eps = u01(rng);
        const WealthPair id = apply_T_lambda(1.0, eps, p);
        CHECK(id.x == p.x);
        CHECK(id.y == p.y);
        const WealthPair full = apply_T_lambda(0.0, eps, p);
        const WealthPair direct = apply_T(eps, p);
        CHECK(full.x == direct.x);
        CHECK(full.y == direct.y);
    }
    const WealthPair h = apply_T_lambda(0.5, 0.5, {2.0, 4.0});
    CHECK(h.x == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(h.y == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("two-propensity map: reduction, pool arithmetic, fraction recursion") {
    std::mt19937_64 rng = trial_rng(32, 0);
    for (int i = 0; i < 200; ++i) {
        const WealthPair p{4.0 * u01(rng), 2.0 * u01(rng)};
        const double eps = u01(rng);
        const double lambda = u01(rng);
        const WealthPair a = apply_T_two_prop(lambda, lambda, eps, p);
        const WealthPair b = apply_T_lambda(lambda, eps, p);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
    }

    const WealthPair q = apply_T_two_prop(0.5, 0.0, 1.0, {2.0, 4.0});
    CHECK(q.x == doctest::Approx(6.0).epsilon(1e-15)); // pool 1+4 all to agent 1
    CHECK(q.y == doctest::Approx(0.0));

    // r' = r (l1 + (l2-l1) eps) + (1-l2) eps, checked pathwise.
    for (int i = 0; i < 200; ++i) {
        const double l1 = 0.9 * u01(rng), l2 = 0.9 * u01(rng);
        const double eps = u01(rng);
        const WealthPair p{0.1 + u01(rng), 0.1 + u01(rng)};
        const double r = p.x / p.total();
        const WealthPair next = apply_T_two_prop(l1, l2, eps, p);
        const double r_next = next.x / next.total();
        const double predicted = r * (l1 + (l2 - l1) * eps) + (1.0 - l2) * eps;
        CHECK(r_next == doctest::Approx(predicted).epsilon(1e-12));
        CHECK(next.total() == doctest::Approx(p.total()).epsilon(1e-15));
    }
}

TEST_CASE("single exchange event") {
    const auto uniform = RedistributionMeasure::Uniform();
    std::mt19937_64 rng = trial_rng(33, 0);

    // Full redistribution from (1,0): the post-jump first coordinate is the
    // drawn fraction itself.
    const long n = 100000;
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
        sum += jump({1.0, 0.0}, ModelParams{0.0, std::nullopt, 1.0}, uniform,
                    rng).x;
    }
    const double se = std::sqrt(1.0 / 12.0 / static_cast<double>(n));
    CHECK(std::abs(sum / static_cast<double>(n) - 0.5) <= 3.0 * se);

    // High saving propensity bounds the transfer per event.
    const ModelParams sticky{0.9, std::nullopt, 1.0};
    for (int i = 0; i < 2000; ++i) {
        const WealthPair p{2.0 * u01(rng), 3.0 * u01(rng)};
        const WealthPair next = jump(p, sticky, uniform, rng);
        CHECK(std::abs(next.x - p.x) <= 0.1 * p.total() * (1.0 + 1e-12));
    }

    // The drawn fraction is exposed for instrumentation, and the fraction
    // coordinate obeys r' = lambda r + (1-lambda) eps with that same draw.
    const ModelParams half{0.5, std::nullopt, 1.0};
    for (int i = 0; i < 2000; ++i) {
        const WealthPair p{0.5 + u01(rng), 0.5 + u01(rng)};
        double eps = -1.0;
        const WealthPair next = jump(p, half, uniform, rng, &eps);
        REQUIRE(eps >= 0.0);
        const double r_next = next.x / next.total();
        const double r_prev = p.x / p.total();
        CHECK(r_next ==
              doctest::Approx(0.5 * r_prev + 0.5 * eps).epsilon(1e-13));
    }
}

TEST_CASE("conservation over a million events") {
    const auto beta22 = RedistributionMeasure::Beta(2.0, 2.0);
    const ModelParams params{0.3, std::nullopt, 1.0};
    std::mt19937_64 rng = trial_rng(34, 0);
    WealthPair state{1.75, 0.25};
    const double total0 = state.total();
    for (long i = 0; i < 1000000; ++i) {
        state = jump(state, params, beta22, rng);
    }
    CHECK(std::abs(state.total() - total0) / total0 < 1e-12);
}

TEST_CASE("event-driven trajectory") {
    const auto uniform = RedistributionMeasure::Uniform();
    const ModelParams params{0.0, std::nullopt, 1.0};
    std::mt19937_64 rng = trial_rng(35, 0);

    const auto still = simulate({1.0, 2.0}, params, uniform, 0.0, rng);
    REQUIRE(still.size() == 1);
    CHECK(still[0].t == 0.0);
    CHECK(still[0].state.x == 1.0);

    // Event count in [0, t] is Poisson(jump_rate * t).
    const double t = 4.0;
    const long runs = 10000;
    double count_sum = 0.0, count_sq = 0.0;
    for (long i = 0; i < runs; ++i) {
        std::mt19937_64 r = trial_rng(36, static_cast<std::uint64_t>(i));
        const auto traj = simulate({1.0, 0.0}, params, uniform, t, r);
        // first entry is the initial state, last is the t_end snapshot
        const double events = static_cast<double>(traj.size()) - 2.0;
        count_sum += events;
        count_sq += events * events;
    }
    const double mean = count_sum / runs;
    const double var = (count_sq - runs * mean * mean) / (runs - 1);
    const double se = std::sqrt(var / runs);
    CHECK(std::abs(mean - t) <= 3.0 * se);

    // Long-time law of the fraction for full redistribution is the measure
    // itself.
    std::vector<double> xs(20000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::mt19937_64 r = trial_rng(37, i);
        xs[i] = simulate_endpoint({1.0, 0.0}, params, uniform, 20.0, r).x;
    }
    CHECK(ks_statistic(xs, oracle::uniform_cdf) < 0.015);
}

TEST_CASE("observation at fixed times is right-continuous and consistent") {
    const auto uniform = RedistributionMeasure::Uniform();
    const ModelParams params{0.5, std::nullopt, 1.0};
    std::mt19937_64 a = trial_rng(38, 0);
    std::mt19937_64 b = trial_rng(38, 0);
    const std::vector<double> times = {0.0, 0.5, 1.5, 3.0};
    const auto at = simulate_at_times({2.0, 1.0}, params, uniform, times, a);
    REQUIRE(at.size() == times.size());
    CHECK(at[0].x == 2.0);
    // The final observation matches an endpoint run with the same stream.
    const WealthPair end = simulate_endpoint({2.0, 1.0}, params, uniform, 3.0, b);
    CHECK(at.back().x == end.x);
    CHECK(at.back().y == end.y);
}

TEST_CASE("exchangeability after one jump from equal wealth") {
    const auto beta22 = RedistributionMeasure::Beta(2.0, 2.0);
    const ModelParams params{0.25, std::nullopt, 1.0};
    std::mt19937_64 rng = trial_rng(39, 0);
    const long n = 100000;
    double sx = 0.0, sy = 0.0, sxx = 0.0;
    for (long i = 0; i < n; ++i) {
        const WealthPair next = jump({1.0, 1.0}, params, beta22, rng);
        sx += next.x;
        sy += next.y;
        sxx += next.x * next.x;
    }
    const double mx = sx / n, my = sy / n;
    const double var = (sxx - n * mx * mx) / (n - 1);
    // y = total - x pathwise, so Var(mean x - mean y) = 4 Var(mean x).
    const double se_diff = std::sqrt(4.0 * var / n);
    CHECK(std::abs(mx - my) <= 3.0 * se_diff);
}

TEST_CASE("scaling both wealths scales the whole path") {
    const auto beta22 = RedistributionMeasure::Beta(2.0, 2.0);
    const ModelParams params{0.4, std::nullopt, 1.0};
    // Doubling is exact in floating point, so the coupled paths match
    // bitwise when the measure ignores s.
    std::mt19937_64 r1 = trial_rng(40, 5);
    std::mt19937_64 r2 = trial_rng(40, 5);
    const auto base = simulate({0.75, 1.5}, params, beta22, 6.0, r1);
    const auto doubled = simulate({1.5, 3.0}, params, beta22, 6.0, r2);
    REQUIRE(base.size() == doubled.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].t == doubled[i].t);
        CHECK(2.0 * base[i].state.x == doubled[i].state.x);
        CHECK(2.0 * base[i].state.y == doubled[i].state.y);
    }
}

TEST_CASE("fraction/total coordinates") {
    const RS rs = to_rs({2.0, 4.0});
    CHECK(rs.r == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(rs.s == 6.0);

    std::mt19937_64 rng = trial_rng(41, 0);
    for (int i = 0; i < 500; ++i) {
        const WealthPair p{5.0 * u01_pos(rng), 3.0 * u01(rng)};
        const RS c = to_rs(p);
        const WealthPair back = from_rs(c.r, c.s);
        CHECK(back.x == doctest::Approx(p.x).epsilon(1e-15));
        CHECK(back.y == doctest::Approx(p.y).epsilon(1e-15));
    }

    CHECK(to_rs({0.0, 5.0}).r == 0.0);
    CHECK_THROWS_WITH_AS((void)to_rs({0.0, 0.0}),
                         doctest::Contains("zero_total"), const error&);

    CHECK_THROWS_AS(validate(ModelParams{1.0, std::nullopt, 1.0}), const error&);
    CHECK_THROWS_AS(validate(ModelParams{0.5, 1.5, 1.0}), const error&);
    CHECK_THROWS_AS(validate(ModelParams{0.5, std::nullopt, 0.0}), const error&);
}

} // TEST_SUITE

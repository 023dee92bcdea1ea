#include "kinex/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "kinex/error.hpp"
#include "kinex/quadrature.hpp"
#include "kinex/rng.hpp"
#include "kinex/special.hpp"

namespace kinex {

namespace {

void require_s_independent(const RedistributionMeasure& measure) {
    if (measure.s_dependent()) {
        throw error(errc::s_dependent_measure,
                    measure.describe() + ": an s-independent measure is required");
    }
}

double pow_int(double x, int k) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x;
    return p;
}

// s slot used when drawing from an s-independent measure.
constexpr double kAnyS = 1.0;

} // namespace

int SeriesTruncation::depth(double lambda) const {
    if (!(tol > 0.0 && tol < 1.0)) {
        throw error(errc::config_error, "truncation tol must lie in (0, 1)");
    }
    if (!(lambda < 1.0)) {
        throw error(errc::degenerate_lambda,
                    "series depth undefined at lambda >= 1");
    }
    if (lambda <= 0.0) return 1;
    const double n = std::ceil(std::log(tol) / std::log(lambda));
    return std::max(1, static_cast<int>(n));
}

double sample_eps_infinity(double lambda, const RedistributionMeasure& measure,
                           const SeriesTruncation& trunc, std::mt19937_64& rng) {
    require_s_independent(measure);
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw error(errc::degenerate_lambda, "lambda must lie in [0, 1)");
    }
    const int depth = trunc.depth(lambda);
    double acc = 0.0;
    double w = 1.0; // lambda^n
    for (int n = 0; n < depth; ++n) {
        acc += (1.0 - lambda) * w * measure.sample(kAnyS, rng);
        w *= lambda;
    }
    // Completion draw: the exact tail is w times an independent copy of
    // eps_inf; substituting one eps-draw keeps the value in [0,1] and the
    // error below w <= tol.
    if (w > 0.0) acc += w * measure.sample(kAnyS, rng);
    return acc;
}

std::vector<double> alpha_moments(double lambda,
                                  const RedistributionMeasure& measure,
                                  int n_max) {
    require_s_independent(measure);
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw error(errc::degenerate_lambda,
                    "alpha moments require lambda in [0, 1)");
    }
    if (n_max < 0) {
        throw error(errc::config_error, "n_max must be nonnegative");
    }
    std::vector<double> m(n_max + 1, 1.0);
    for (int j = 1; j <= n_max; ++j) m[j] = measure.moment_nm(j, 0, kAnyS);

    std::vector<double> alpha(n_max + 1, 1.0);
    for (int n = 1; n <= n_max; ++n) {
        double rhs = 0.0;
        for (int k = 0; k < n; ++k) {
            rhs += binomial(n, k) * pow_int(lambda, k) *
                   pow_int(1.0 - lambda, n - k) * m[n - k] * alpha[k];
        }
        alpha[n] = rhs / (1.0 - pow_int(lambda, n));
    }
    return alpha;
}

double alpha_joint(const std::vector<double>& alpha, int i, int j) {
    if (i < 0 || j < 0 ||
        static_cast<std::size_t>(i) + static_cast<std::size_t>(j) >= alpha.size()) {
        throw error(errc::config_error,
                    "alpha vector too short for requested joint moment");
    }
    double acc = 0.0;
    for (int k = 0; k <= j; ++k) {
        const double term = binomial(j, k) * alpha[i + k];
        acc += (k % 2 == 0) ? term : -term;
    }
    return acc;
}

double alpha_joint(double lambda, const RedistributionMeasure& measure, int i,
                   int j) {
    return alpha_joint(alpha_moments(lambda, measure, i + j), i, j);
}

WealthPair sample_canonical_energy(double s, const RedistributionMeasure& measure,
                                   std::mt19937_64& rng) {
    const double eps = measure.sample(s, rng);
    const double xp = eps * s;
    return {xp, s - xp};
}

WealthPair sample_stationary_wealth(double s, double lambda,
                                    const RedistributionMeasure& measure,
                                    const SeriesTruncation& trunc,
                                    std::mt19937_64& rng) {
    const double r = sample_eps_infinity(lambda, measure, trunc, rng);
    const double xp = r * s;
    return {xp, s - xp};
}

double sample_two_prop_r(double l1, double l2, const RedistributionMeasure& measure,
                         const SeriesTruncation& trunc, std::mt19937_64& rng) {
    require_s_independent(measure);
    if (!(l1 >= 0.0) || !(l2 >= 0.0)) {
        throw error(errc::config_error, "propensities must be nonnegative");
    }
    const double q = std::max(l1, l2);
    if (!(q < 1.0)) {
        throw error(errc::truncation_overflow,
                    "two-propensity series tail bound is vacuous at "
                    "max(lambda1, lambda2) >= 1");
    }
    const int depth = trunc.depth(q);
    double r = 0.0;
    double prefix = 1.0; // prod_{i<k} (l1 + (l2-l1) eps_i), bounded by q^k
    for (int k = 0; k < depth; ++k) {
        const double eps = measure.sample(kAnyS, rng);
        r += (1.0 - l2) * eps * prefix;
        prefix *= l1 + (l2 - l1) * eps;
    }
    if (prefix > 0.0) r += prefix * measure.sample(kAnyS, rng);
    return r;
}

WealthPair sample_two_prop(double s, double l1, double l2,
                           const RedistributionMeasure& measure,
                           const SeriesTruncation& trunc, std::mt19937_64& rng) {
    const double r = sample_two_prop_r(l1, l2, measure, trunc, rng);
    const double xp = r * s;
    return {xp, s - xp};
}

GrandCanonicalSpec GrandCanonicalSpec::PointMass(double s) {
    if (!(s >= 0.0)) {
        throw error(errc::config_error, "point-mass total must be nonnegative");
    }
    GrandCanonicalSpec spec;
    spec.kind = kind_t::point_mass;
    spec.s = s;
    return spec;
}

GrandCanonicalSpec GrandCanonicalSpec::Gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw error(errc::config_error,
                    "gamma total law requires positive shape and rate");
    }
    GrandCanonicalSpec spec;
    spec.kind = kind_t::gamma;
    spec.shape = shape;
    spec.rate = rate;
    return spec;
}

GrandCanonicalSpec GrandCanonicalSpec::Custom(
    std::function<double(std::mt19937_64&)> fn) {
    GrandCanonicalSpec spec;
    spec.kind = kind_t::custom;
    spec.sampler = std::move(fn);
    return spec;
}

double GrandCanonicalSpec::draw(std::mt19937_64& rng) const {
    switch (kind) {
        case kind_t::point_mass:
            return s;
        case kind_t::gamma:
            return gamma_rand(rng, shape) / rate;
        case kind_t::custom: {
            const double v = sampler(rng);
            if (!(v >= 0.0)) {
                throw error(errc::non_admissible,
                            "custom total sampler produced a negative value");
            }
            return v;
        }
    }
    return 0.0;
}

WealthPair sample_grand_canonical(const GrandCanonicalSpec& spec, double lambda,
                                  const RedistributionMeasure& measure,
                                  const SeriesTruncation& trunc,
                                  std::mt19937_64& rng) {
    const double total = spec.draw(rng);
    if (total == 0.0) return {0.0, 0.0};
    if (lambda == 0.0) return sample_canonical_energy(total, measure, rng);
    return sample_stationary_wealth(total, lambda, measure, trunc, rng);
}

double verify_product_invariance(const Density1D& mu,
                                 const RedistributionMeasure& measure,
                                 std::vector<double> s_grid,
                                 std::vector<double> a_grid) {
    if (s_grid.empty()) s_grid = {0.5, 1.0, 2.0, 5.0, 10.0};
    if (a_grid.empty()) {
        for (int i = 1; i <= 101; ++i) {
            a_grid.push_back(static_cast<double>(i) / 102.0);
        }
    }
    double worst = 0.0;
    for (const double s : s_grid) {
        const double z = integrate01(
            [&](double a) { return mu(a * s) * mu((1.0 - a) * s); });
        if (!(z > 0.0)) {
            throw error(errc::zero_denominator,
                        "product-invariance normalizer vanished at s");
        }
        for (const double a : a_grid) {
            const double induced = mu(a * s) * mu((1.0 - a) * s) / z;
            worst = std::max(worst, std::fabs(measure.density(s, a) - induced));
        }
    }
    return worst;
}

} // namespace kinex

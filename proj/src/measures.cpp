#include "kinex/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

#include "kinex/error.hpp"
#include "kinex/quadrature.hpp"
#include "kinex/rng.hpp"
#include "kinex/special.hpp"

namespace kinex {

namespace {

double pow_int(double x, int k) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x;
    return p;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double beta_density(double a, double b, double e) {
    if (e < 0.0 || e > 1.0) return 0.0;
    const double logB = log_beta(a, b);
    if (e == 0.0) {
        if (a < 1.0) return std::numeric_limits<double>::infinity();
        if (a > 1.0) return 0.0;
        return std::exp(-logB);
    }
    if (e == 1.0) {
        if (b < 1.0) return std::numeric_limits<double>::infinity();
        if (b > 1.0) return 0.0;
        return std::exp(-logB);
    }
    return std::exp(-logB + (a - 1.0) * std::log(e) + (b - 1.0) * std::log1p(-e));
}

// Monotone (Fritsch-Butland) cubic interpolant of a tabulated CDF on a uniform
// grid, with a safeguarded-Newton inverse. Used for sampling families without
// closed-form quantiles.
struct CdfTable {
    double lo = 0.0;
    double hi = 1.0;
    double h = 0.0;
    std::vector<double> F;     // normalized to [0,1]
    std::vector<double> slope; // dF/dx at the nodes

    static constexpr int kNodes = 1024;

    double node(int i) const { return lo + h * static_cast<double>(i); }

    void hermite(int i, double t, double& value, double& deriv) const {
        const double t2 = t * t;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t2 * (3.0 - 2.0 * t);
        const double h11 = t2 * (t - 1.0);
        value = F[i] * h00 + h * slope[i] * h10 + F[i + 1] * h01 +
                h * slope[i + 1] * h11;
        deriv = F[i] * (6.0 * t2 - 6.0 * t) + h * slope[i] * (3.0 * t2 - 4.0 * t + 1.0) +
                F[i + 1] * (6.0 * t - 6.0 * t2) + h * slope[i + 1] * (3.0 * t2 - 2.0 * t);
    }

    double cdf_eval(double x) const {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        int i = static_cast<int>((x - lo) / h);
        i = std::min(i, kNodes - 2);
        double v, d;
        hermite(i, (x - node(i)) / h, v, d);
        return std::clamp(v, 0.0, 1.0);
    }

    double invert(double u) const {
        if (u <= 0.0) return lo;
        if (u >= 1.0) return hi;
        const auto it = std::upper_bound(F.begin(), F.end(), u);
        int i = static_cast<int>(it - F.begin()) - 1;
        i = std::clamp(i, 0, kNodes - 2);
        const double span = F[i + 1] - F[i];
        double t = span > 0.0 ? (u - F[i]) / span : 0.5;
        double tlo = 0.0, thi = 1.0;
        for (int iter = 0; iter < 80; ++iter) {
            double v, d;
            hermite(i, t, v, d);
            const double diff = v - u;
            if (std::fabs(diff) < 1e-15) break;
            if (diff > 0.0) {
                thi = t;
            } else {
                tlo = t;
            }
            double tn = d > 0.0 ? t - diff / d : -1.0;
            if (!(tn > tlo && tn < thi)) tn = 0.5 * (tlo + thi);
            if (tn == t) break;
            t = tn;
        }
        return node(i) + t * h;
    }
};

std::shared_ptr<const CdfTable> build_table(
    const std::function<double(double)>& raw, double lo, double hi) {
    auto table = std::make_shared<CdfTable>();
    table->lo = lo;
    table->hi = hi;
    table->h = (hi - lo) / static_cast<double>(CdfTable::kNodes - 1);
    table->F.assign(CdfTable::kNodes, 0.0);

    // Per-cell composite Simpson (4 panels) accumulated into a CDF.
    double acc = 0.0;
    for (int i = 0; i + 1 < CdfTable::kNodes; ++i) {
        const double a = table->node(i);
        const double step = table->h / 8.0;
        double cell = raw(a) + raw(a + 8.0 * step);
        for (int j = 1; j < 8; j += 2) cell += 4.0 * raw(a + step * j);
        for (int j = 2; j < 8; j += 2) cell += 2.0 * raw(a + step * j);
        cell *= step / 3.0;
        acc += cell;
        table->F[i + 1] = acc;
    }
    if (!(acc > 0.0) || !std::isfinite(acc)) {
        throw error(errc::zero_denominator,
                    "sampling table: density does not integrate to a positive value");
    }
    for (double& f : table->F) f /= acc;

    table->slope.assign(CdfTable::kNodes, 0.0);
    std::vector<double> d(CdfTable::kNodes - 1);
    for (int i = 0; i + 1 < CdfTable::kNodes; ++i) {
        d[i] = (table->F[i + 1] - table->F[i]) / table->h;
    }
    table->slope[0] = d[0];
    table->slope[CdfTable::kNodes - 1] = d[CdfTable::kNodes - 2];
    for (int i = 1; i + 1 < CdfTable::kNodes; ++i) {
        const double dl = d[i - 1], dr = d[i];
        table->slope[i] = (dl > 0.0 && dr > 0.0) ? 2.0 * dl * dr / (dl + dr) : 0.0;
    }
    return table;
}

} // namespace

// ---------------------------------------------------------------------------
// Density1D / Density2D

double Density1D::operator()(double x) const {
    switch (kind) {
        case kind_t::gamma: {
            if (x < 0.0) return 0.0;
            if (x == 0.0) {
                if (shape > 1.0) return 0.0;
                if (shape == 1.0) return rate;
                return std::numeric_limits<double>::infinity();
            }
            return std::exp((shape - 1.0) * std::log(x) + shape * std::log(rate) -
                            rate * x - std::lgamma(shape));
        }
        case kind_t::pareto1:
            if (x < 1.0) return 0.0;
            return alpha * std::pow(x, -alpha - 1.0);
        case kind_t::custom:
            if (x < min_support) return 0.0;
            return fn(x);
    }
    return 0.0;
}

Density1D Density1D::Gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw error(errc::config_error, "gamma density requires positive shape and rate");
    }
    Density1D d;
    d.kind = kind_t::gamma;
    d.shape = shape;
    d.rate = rate;
    d.min_support = 0.0;
    d.name = "gamma(shape=" + fmt(shape) + ",rate=" + fmt(rate) + ")";
    return d;
}

Density1D Density1D::Exponential(double rate) {
    Density1D d = Gamma(1.0, rate);
    d.name = "exponential(rate=" + fmt(rate) + ")";
    return d;
}

Density1D Density1D::Pareto1(double alpha) {
    if (!(alpha > 0.0)) {
        throw error(errc::config_error, "pareto density requires positive index");
    }
    Density1D d;
    d.kind = kind_t::pareto1;
    d.alpha = alpha;
    d.min_support = 1.0;
    d.name = "pareto1(alpha=" + fmt(alpha) + ")";
    return d;
}

Density1D Density1D::Custom(std::function<double(double)> fn, double min_support,
                            std::string name) {
    Density1D d;
    d.kind = kind_t::custom;
    d.fn = std::move(fn);
    d.min_support = min_support;
    d.name = std::move(name);
    return d;
}

// ---------------------------------------------------------------------------
// RedistributionMeasure

struct RedistributionMeasure::Impl {
    family_t family = family_t::uniform;
    bool s_dep = false;
    double a = 1.0, b = 1.0; // beta
    double alpha = 1.0;      // pareto-type
    bool induced2d = false;
    Density1D mu1;
    Density2D mu2;
    std::function<double(double, double)> custom_fn;
    std::string name = "uniform";

    mutable std::mutex lock;
    mutable std::map<double, double> norm_cache;
    mutable std::map<double, std::shared_ptr<const CdfTable>> table_cache;

    void check_s(double s) const {
        if (!(s > 0.0)) {
            throw error(errc::degenerate_support, name + ": total s must be positive");
        }
        const auto [lo, hi] = support_unchecked(s);
        if (!(lo < hi)) {
            throw error(errc::degenerate_support,
                        name + ": empty support at s=" + fmt(s));
        }
    }

    std::pair<double, double> support_unchecked(double s) const {
        switch (family) {
            case family_t::pareto_type:
                if (!(s > 2.0)) return {0.5, 0.5};
                return {1.0 / s, 1.0 - 1.0 / s};
            case family_t::induced: {
                const double ms = induced2d ? mu2.min_support : mu1.min_support;
                const double lo = std::max(0.0, ms / s);
                return {lo, 1.0 - lo};
            }
            default:
                return {0.0, 1.0};
        }
    }

    // Density up to the per-s normalizer (exact for the closed-form families).
    double raw_density(double s, double e) const {
        switch (family) {
            case family_t::uniform:
                return (e >= 0.0 && e <= 1.0) ? 1.0 : 0.0;
            case family_t::beta:
                return beta_density(a, b, e);
            case family_t::pareto_type: {
                const auto [lo, hi] = support_unchecked(s);
                if (e < lo || e > hi) return 0.0;
                return std::pow(e, -alpha - 1.0) * std::pow(1.0 - e, -alpha - 1.0);
            }
            case family_t::induced: {
                if (e < 0.0 || e > 1.0) return 0.0;
                if (induced2d) return mu2.fn(e * s, (1.0 - e) * s);
                return mu1(e * s) * mu1((1.0 - e) * s);
            }
            case family_t::custom: {
                if (e < 0.0 || e > 1.0) return 0.0;
                const double v = custom_fn(s, e);
                if (v < 0.0) {
                    throw error(errc::non_admissible,
                                name + ": negative density at (s=" + fmt(s) +
                                    ", eps=" + fmt(e) + ")");
                }
                return v;
            }
        }
        return 0.0;
    }

    bool has_unit_normalizer() const {
        return family == family_t::uniform || family == family_t::beta ||
               family == family_t::custom;
    }

    // Integration range for quadrature/tables: support with the endpoint inset
    // applied where the support touches 0 or 1 (densities may blow up there).
    std::pair<double, double> quad_range(double s) const {
        auto [lo, hi] = support_unchecked(s);
        if (lo <= 0.0) lo = kEndpointInset;
        if (hi >= 1.0) hi = 1.0 - kEndpointInset;
        return {lo, hi};
    }

    double normalizer(double s) const {
        if (has_unit_normalizer()) return 1.0;
        {
            std::lock_guard<std::mutex> g(lock);
            const auto it = norm_cache.find(s);
            if (it != norm_cache.end()) return it->second;
        }
        const auto [lo, hi] = quad_range(s);
        const double z =
            integrate([&](double e) { return raw_density(s, e); }, lo, hi);
        if (!(z > 0.0) || !std::isfinite(z)) {
            throw error(errc::zero_denominator,
                        name + ": normalizer vanished at s=" + fmt(s));
        }
        std::lock_guard<std::mutex> g(lock);
        norm_cache.emplace(s, z);
        return z;
    }

    std::shared_ptr<const CdfTable> table(double s) const {
        {
            std::lock_guard<std::mutex> g(lock);
            const auto it = table_cache.find(s);
            if (it != table_cache.end()) return it->second;
        }
        const auto [lo, hi] = quad_range(s);
        auto t = build_table([&](double e) { return raw_density(s, e); }, lo, hi);
        std::lock_guard<std::mutex> g(lock);
        table_cache.emplace(s, t);
        return t;
    }
};

RedistributionMeasure::RedistributionMeasure(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

RedistributionMeasure RedistributionMeasure::Uniform() {
    auto impl = std::make_shared<Impl>();
    impl->family = family_t::uniform;
    impl->s_dep = false;
    impl->name = "uniform";
    return RedistributionMeasure(impl);
}

RedistributionMeasure RedistributionMeasure::Beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw error(errc::config_error, "beta measure requires positive shapes");
    }
    auto impl = std::make_shared<Impl>();
    impl->family = family_t::beta;
    impl->s_dep = false;
    impl->a = a;
    impl->b = b;
    impl->name = "beta(a=" + fmt(a) + ",b=" + fmt(b) + ")";
    return RedistributionMeasure(impl);
}

RedistributionMeasure RedistributionMeasure::ParetoType(double alpha) {
    if (!(alpha > 0.0)) {
        throw error(errc::config_error, "pareto-type measure requires positive index");
    }
    auto impl = std::make_shared<Impl>();
    impl->family = family_t::pareto_type;
    impl->s_dep = true;
    impl->alpha = alpha;
    impl->name = "pareto_type(alpha=" + fmt(alpha) + ")";
    return RedistributionMeasure(impl);
}

RedistributionMeasure RedistributionMeasure::Induced(const Density1D& mu) {
    auto impl = std::make_shared<Impl>();
    impl->family = family_t::induced;
    // s-dependence is declared per family, never inferred numerically; induced
    // measures are treated as s-dependent even when the input happens to
    // induce an s-independent law (Gamma -> Beta).
    impl->s_dep = true;
    impl->mu1 = mu;
    impl->name = "induced(" + mu.name + ")";
    return RedistributionMeasure(impl);
}

RedistributionMeasure RedistributionMeasure::Induced(const Density2D& mu) {
    auto impl = std::make_shared<Impl>();
    impl->family = family_t::induced;
    impl->s_dep = true;
    impl->induced2d = true;
    impl->mu2 = mu;
    impl->name = "induced(" + mu.name + ")";
    return RedistributionMeasure(impl);
}

RedistributionMeasure RedistributionMeasure::Custom(
    std::function<double(double, double)> f, bool s_dependent, std::string name) {
    auto impl = std::make_shared<Impl>();
    impl->family = family_t::custom;
    impl->s_dep = s_dependent;
    impl->custom_fn = std::move(f);
    impl->name = std::move(name);
    return RedistributionMeasure(impl);
}

RedistributionMeasure::family_t RedistributionMeasure::family() const {
    return impl_->family;
}

bool RedistributionMeasure::s_dependent() const { return impl_->s_dep; }

std::string RedistributionMeasure::describe() const { return impl_->name; }

double RedistributionMeasure::beta_a() const { return impl_->a; }
double RedistributionMeasure::beta_b() const { return impl_->b; }

std::pair<double, double> RedistributionMeasure::support(double s) const {
    impl_->check_s(s);
    return impl_->support_unchecked(s);
}

double RedistributionMeasure::density(double s, double eps) const {
    impl_->check_s(s);
    return impl_->raw_density(s, eps) / impl_->normalizer(s);
}

double RedistributionMeasure::cdf(double s, double eps) const {
    impl_->check_s(s);
    switch (impl_->family) {
        case family_t::uniform:
            return std::clamp(eps, 0.0, 1.0);
        case family_t::beta:
            return beta_cdf(impl_->a, impl_->b, eps);
        default:
            return impl_->table(s)->cdf_eval(eps);
    }
}

double RedistributionMeasure::sample(double s, std::mt19937_64& rng) const {
    impl_->check_s(s);
    switch (impl_->family) {
        case family_t::uniform:
            return u01(rng);
        case family_t::beta:
            return beta_rand(rng, impl_->a, impl_->b);
        default:
            return impl_->table(s)->invert(u01(rng));
    }
}

double RedistributionMeasure::moment_nm(int n, int m, double s) const {
    if (n < 0 || m < 0) {
        throw error(errc::config_error, "moment orders must be nonnegative");
    }
    impl_->check_s(s);
    switch (impl_->family) {
        case family_t::uniform:
            return factorial(n) * factorial(m) / factorial(n + m + 1);
        case family_t::beta:
            return std::exp(log_beta(impl_->a + n, impl_->b + m) -
                            log_beta(impl_->a, impl_->b));
        default: {
            const auto [lo, hi] = impl_->quad_range(s);
            const double z = impl_->normalizer(s);
            return integrate(
                       [&](double e) {
                           return pow_int(e, n) * pow_int(1.0 - e, m) *
                                  impl_->raw_density(s, e);
                       },
                       lo, hi) /
                   z;
        }
    }
}

RedistributionMeasure induce_from_density(const Density1D& mu) {
    return RedistributionMeasure::Induced(mu);
}

RedistributionMeasure induce_from_density(const Density2D& mu) {
    return RedistributionMeasure::Induced(mu);
}

} // namespace kinex

#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>

namespace kinex {

// One-dimensional probability density on [min_support, infinity), used as the
// marginal of a candidate invariant product measure.
struct Density1D {
    enum class kind_t { gamma, pareto1, custom };

    kind_t kind = kind_t::custom;
    double shape = 1.0;   // gamma
    double rate = 1.0;    // gamma
    double alpha = 1.0;   // pareto1 (support [1, infinity))
    std::function<double(double)> fn;
    double min_support = 0.0;
    std::string name = "custom";

    double operator()(double x) const;

    static Density1D Gamma(double shape, double rate);
    static Density1D Exponential(double rate);
    static Density1D Pareto1(double alpha);
    static Density1D Custom(std::function<double(double)> fn, double min_support,
                            std::string name = "custom");
};

// Two-dimensional density on the positive quadrant (coordinatewise support
// starting at min_support).
struct Density2D {
    std::function<double(double, double)> fn;
    double min_support = 0.0;
    std::string name = "custom2d";
};

// The law nu(s, d eps) of the fraction of the pooled total s assigned to the
// first agent at an exchange event. Immutable after construction; per-s
// sampling tables are memoized behind a lock, so instances are safe to share
// across concurrent workers. Random sources are always passed in.
class RedistributionMeasure {
  public:
    enum class family_t { uniform, beta, pareto_type, induced, custom };

    static RedistributionMeasure Uniform();
    static RedistributionMeasure Beta(double a, double b);
    static RedistributionMeasure ParetoType(double alpha);
    static RedistributionMeasure Induced(const Density1D& mu);
    static RedistributionMeasure Induced(const Density2D& mu);
    // s_dependent must be declared, not inferred, by the caller.
    static RedistributionMeasure Custom(std::function<double(double, double)> f,
                                        bool s_dependent,
                                        std::string name = "custom");

    family_t family() const;
    bool s_dependent() const;
    std::string describe() const;

    // Beta parameters (valid for the beta family only).
    double beta_a() const;
    double beta_b() const;

    // Support interval of nu(s, .) as a subset of [0,1].
    std::pair<double, double> support(double s) const;

    // Density nu(s, eps); zero outside the support.
    double density(double s, double eps) const;

    // Cumulative distribution of nu(s, .) at eps.
    double cdf(double s, double eps) const;

    // One draw from nu(s, .).
    double sample(double s, std::mt19937_64& rng) const;

    // nu_nm(s) = integral of eps^n (1-eps)^m nu(s, eps) d eps. Closed form for
    // the uniform and beta families, adaptive quadrature otherwise.
    double moment_nm(int n, int m, double s) const;

  private:
    struct Impl;
    explicit RedistributionMeasure(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

// nu(s, a) = mu(a s) mu((1-a) s) / integral_0^1 mu(alpha s) mu((1-alpha) s) d alpha.
// For Gamma(shape k) input the result coincides with Beta(k, k); for an
// exponential input it is the uniform measure; for Pareto1(alpha) it is the
// pareto-type measure.
RedistributionMeasure induce_from_density(const Density1D& mu);

// nu(s, a) proportional to mu(a s, (1-a) s), normalized in a.
RedistributionMeasure induce_from_density(const Density2D& mu);

} // namespace kinex

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "kinex/measures.hpp"

namespace kinex {

// Drift of the fraction coordinate r (the pair drift divided by the conserved
// total s), used in the generator r(1-r) d^2/dr^2 + drift d/dr.
class DriftSpec {
  public:
    enum class kind_t { linear, from_measure };

    // drift(r) = alpha (1 - 2r), the drift whose stationary law is
    // Beta(alpha, alpha). alpha = 0 gives the driftless (pure martingale)
    // diffusion, which has no stationary density.
    static DriftSpec Linear(double alpha);

    // drift(r) = r (1-r) d/dr log( r (1-r) measure(s, r) ): the drift whose
    // stationary law is the measure itself.
    static DriftSpec FromMeasure(const RedistributionMeasure& measure);

    kind_t kind() const { return kind_; }
    double linear_alpha() const { return alpha_; }
    const RedistributionMeasure& measure() const { return measure_; }

    double evaluate(double r, double s) const;

    // True when the drift is affine, drift = a + b r: always for the linear
    // kind, and for the uniform/beta measure families (closed forms).
    bool affine(double s, double* a, double* b) const;

  private:
    DriftSpec() : measure_(RedistributionMeasure::Uniform()) {}

    kind_t kind_ = kind_t::linear;
    double alpha_ = 1.0;
    RedistributionMeasure measure_;
};

// The drift (divided by s) induced by a redistribution measure: closed form
// a - (a+b) r for the beta family (1 - 2r for uniform), central difference
// with h = 1e-6 on log(r (1-r) density) otherwise. Throws boundary_undefined
// when r (or the difference stencil) leaves (0, 1) and nonpositive_density
// when the density vanishes at a stencil point.
double drift_from_measure(const RedistributionMeasure& measure, double s,
                          double r);

// Fixed-step Euler-Maruyama path of
//   dr = drift(r) dt + sqrt(2 r (1-r)) dW
// observed at 0, dt, 2dt, ..., t_end (final partial step when t_end is not a
// multiple of dt). Boundary handling matches the batched kernels: a path
// crossing below eps_b = 1e-9 (above 1 - eps_b) is set to exactly 0 (1) when
// the drift does not push inward there, else clamped to the cushion; paths at
// exactly 0 or 1 never move again. Throws step_too_large for dt > 1e-2 and
// boundary_undefined unless r0 lies in (0, 1).
std::vector<double> simulate_r_diffusion(const DriftSpec& drift, double s,
                                         double r0, double t_end, double dt,
                                         std::mt19937_64& rng);

// Endpoints r(t_end) of `paths` independent paths, computed with the batched
// step kernels. Path p draws from the stream keyed by (seed, p), so results
// are independent of the thread count.
std::vector<double> diffuse_endpoints(const DriftSpec& drift, double s,
                                      double r0, double t_end, double dt,
                                      long paths, std::uint64_t seed,
                                      int threads);

// Stationary density of the r-diffusion,
//   psi(r) = C (r (1-r))^{-1} exp( int drift(u) / (u (1-u)) du ),
// normalized over (0, 1). Affine drifts a + b r yield exactly the
// Beta(a, -(a+b)) density; other drifts are handled by nested quadrature.
// Throws non_integrable when the normalizer diverges (including affine cases
// with a nonpositive Beta parameter).
double stationary_density(const DriftSpec& drift, double s, double r);

// Simulates the r-diffusion with the measure-induced drift from r0 = 1/2 to
// t_long and returns the KS distance between the endpoint sample and the
// measure itself.
double thermalization_check(const RedistributionMeasure& measure, double s,
                            double t_long, long paths, double dt,
                            std::uint64_t seed, int threads);

} // namespace kinex

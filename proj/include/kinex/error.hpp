#pragma once

#include <stdexcept>
#include <string>

namespace kinex {

// Every failure mode the library reports deliberately. Callers can switch on
// code() programmatically; what() carries the human-readable context.
enum class errc {
    degenerate_support,   // measure support empty/degenerate (e.g. pareto-type with s <= 2)
    non_admissible,       // custom density negative at a queried point
    quadrature_failure,   // adaptive quadrature did not reach the requested tolerance
    zero_denominator,     // induced-measure normalizer vanished at the queried s
    s_dependent_measure,  // operation requires an s-independent measure
    degenerate_lambda,    // propensity value makes the operation ill-posed (lambda = 1)
    truncation_overflow,  // series truncation bound vacuous (contraction factor >= 1)
    zero_total,           // (r,s) coordinates undefined at total s = 0
    boundary_undefined,   // drift requested at r in {0,1}
    nonpositive_density,  // log-derivative drift requested where the density is <= 0
    non_integrable,       // stationary density does not normalize
    step_too_large,       // Euler-Maruyama step exceeds the guard threshold
    asymmetric_kernel,    // walk kernel not symmetric
    row_sum_violation,    // walk kernel rows do not sum to one
    asymmetric_mean,      // N-agent redistribution measure must have mean 1/2
    unnormalized_total,   // wealth-model duality check requires x + y = 1
    degenerate_variance,  // moment-matched Beta fit undefined for the sample
    config_error,         // experiment configuration invalid
};

const char* errc_name(errc code) noexcept;

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

} // namespace kinex

#include "kinex/error.hpp"

namespace kinex {

const char* errc_name(errc code) noexcept {
    switch (code) {
        case errc::degenerate_support: return "degenerate_support";
        case errc::non_admissible: return "non_admissible";
        case errc::quadrature_failure: return "quadrature_failure";
        case errc::zero_denominator: return "zero_denominator";
        case errc::s_dependent_measure: return "s_dependent_measure";
        case errc::degenerate_lambda: return "degenerate_lambda";
        case errc::truncation_overflow: return "truncation_overflow";
        case errc::zero_total: return "zero_total";
        case errc::boundary_undefined: return "boundary_undefined";
        case errc::nonpositive_density: return "nonpositive_density";
        case errc::non_integrable: return "non_integrable";
        case errc::step_too_large: return "step_too_large";
        case errc::asymmetric_kernel: return "asymmetric_kernel";
        case errc::row_sum_violation: return "row_sum_violation";
        case errc::asymmetric_mean: return "asymmetric_mean";
        case errc::unnormalized_total: return "unnormalized_total";
        case errc::degenerate_variance: return "degenerate_variance";
        case errc::config_error: return "config_error";
    }
    return "unknown_error";
}

} // namespace kinex

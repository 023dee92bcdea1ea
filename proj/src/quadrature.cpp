#include "kinex/quadrature.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kinex/error.hpp"

namespace kinex {

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, /*max_depth=*/25, /*rel_tol=*/abs_tol, &err);
    // gauss_kronrod's tolerance is relative; accept on the absolute scale too so
    // that integrals with tiny values (tails) do not spuriously fail.
    if (!(err <= abs_tol * std::max(1.0, std::fabs(value)) * 10.0) || !std::isfinite(value)) {
        throw error(errc::quadrature_failure,
                    "error estimate " + std::to_string(err) + " over [" +
                        std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return value;
}

double integrate01(const std::function<double(double)>& f, double abs_tol) {
    return integrate(f, kEndpointInset, 1.0 - kEndpointInset, abs_tol);
}

} // namespace kinex

#pragma once

#include <functional>

namespace kinex {

// Absolute tolerance and endpoint inset used throughout the library for
// densities that may be unbounded at interval endpoints.
inline constexpr double kQuadTol = 1e-12;
inline constexpr double kEndpointInset = 1e-12;

// Adaptive Gauss-Kronrod integration of f over [a, b] to absolute tolerance
// abs_tol. Throws error(errc::quadrature_failure) when the error estimate does
// not meet the tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = kQuadTol);

// Integration over the unit interval with the standard endpoint inset,
// i.e. over [inset, 1 - inset].
double integrate01(const std::function<double(double)>& f, double abs_tol = kQuadTol);

} // namespace kinex

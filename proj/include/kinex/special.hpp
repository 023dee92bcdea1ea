#pragma once

namespace kinex {

// Thin wrappers over boost::math special functions, isolated in one
// translation unit so the heavy headers are compiled once.

// Regularized incomplete beta: P(X <= x) for X ~ Beta(a, b).
double beta_cdf(double a, double b, double x);

// P(X <= x) for X ~ Gamma(shape, rate).
double gamma_cdf(double shape, double rate, double x);

// Standard normal CDF.
double normal_cdf(double x);

// log Beta(a, b).
double log_beta(double a, double b);

// Binomial coefficient as a double (exact for the small arguments used here).
double binomial(int n, int k);

// Rising factorial Gamma(b + n) / Gamma(b), computed as an explicit product so
// small-integer cases are exact in floating point.
double rising_factorial(double b, int n);

// n! as a double (exact up to n = 22, plenty for dual-chain levels).
double factorial(int n);

} // namespace kinex

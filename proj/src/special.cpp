#include "kinex/special.hpp"

#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace kinex {

double beta_cdf(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(a, b, x);
}

double gamma_cdf(double shape, double rate, double x) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(shape, rate * x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    // The multiplicative form is exact only up to rounding; round to the nearest
    // integer, which is exact for every n used in this library (n <= 40).
    return std::nearbyint(c);
}

double rising_factorial(double b, int n) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= b + static_cast<double>(i);
    return p;
}

double factorial(int n) {
    return rising_factorial(1.0, n);
}

} // namespace kinex

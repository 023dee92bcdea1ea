#include "kinex/rng.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace kinex {

double exp_rand(std::mt19937_64& rng, double rate) {
    return -std::log(u01_pos(rng)) / rate;
}

double normal_rand(std::mt19937_64& rng) {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

double gamma_rand(std::mt19937_64& rng, double shape) {
    boost::random::gamma_distribution<double> dist(shape, 1.0);
    return dist(rng);
}

namespace {

// a-th smallest of n = a+b-1 i.i.d. uniforms is Beta(a, b) exactly.
// Insertion sort: n is at most 9 on this path.
double beta_order_statistic(std::mt19937_64& rng, int a, int b) {
    double u[9];
    const int n = a + b - 1;
    for (int i = 0; i < n; ++i) {
        double v = u01(rng);
        int j = i;
        while (j > 0 && u[j - 1] > v) {
            u[j] = u[j - 1];
            --j;
        }
        u[j] = v;
    }
    return u[a - 1];
}

} // namespace

double beta_rand(std::mt19937_64& rng, double a, double b) {
    const int ia = static_cast<int>(a);
    const int ib = static_cast<int>(b);
    if (a == ia && b == ib && ia >= 1 && ib >= 1 && ia + ib <= 10) {
        return beta_order_statistic(rng, ia, ib);
    }
    const double x = gamma_rand(rng, a);
    const double y = gamma_rand(rng, b);
    return x / (x + y);
}

} // namespace kinex

#include "kinex/stats.hpp"

#include <algorithm>
#include <cmath>

#include "kinex/error.hpp"

namespace kinex {

namespace {

double pow_int(double x, int k) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x;
    return p;
}

Estimate moment_of(const std::vector<double>& xs, int order) {
    const std::size_t n = xs.size();
    if (n == 0) return {0.0, 0.0};
    double sum = 0.0;
    for (double x : xs) sum += pow_int(x, order);
    const double mean = sum / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) {
        const double d = pow_int(x, order) - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

} // namespace

Estimate empirical_moment(const std::vector<double>& samples, int order) {
    return moment_of(samples, order);
}

std::map<int, Estimate> empirical_moments(const std::vector<double>& samples,
                                          const std::vector<int>& orders) {
    std::map<int, Estimate> out;
    for (int k : orders) out[k] = moment_of(samples, k);
    return out;
}

double ks_statistic_sorted(const std::vector<double>& sorted,
                           const std::function<double(double)>& reference_cdf) {
    const std::size_t n = sorted.size();
    if (n == 0) return 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = reference_cdf(sorted[i]);
        const double lo = f - static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - f;
        d = std::max(d, std::max(lo, hi));
    }
    return d;
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& reference_cdf) {
    std::sort(samples.begin(), samples.end());
    return ks_statistic_sorted(samples, reference_cdf);
}

double ks_threshold_99(std::size_t n) {
    return 1.63 / std::sqrt(static_cast<double>(n));
}

std::pair<double, double> fit_beta_by_moments(const std::vector<double>& samples) {
    const double m = moment_of(samples, 1).value;
    double ss = 0.0;
    for (double x : samples) {
        const double d = x - m;
        ss += d * d;
    }
    const double v = samples.size() > 1
                         ? ss / static_cast<double>(samples.size() - 1)
                         : 0.0;
    if (!(m > 0.0) || !(m < 1.0)) {
        throw error(errc::degenerate_variance,
                    "sample mean outside (0,1), no Beta fit");
    }
    if (!(v > 0.0) || v >= m * (1.0 - m)) {
        throw error(errc::degenerate_variance,
                    "sample variance incompatible with a Beta law");
    }
    const double c = m * (1.0 - m) / v - 1.0;
    return {m * c, (1.0 - m) * c};
}

Histogram histogram(const std::vector<double>& samples, int bins, double lo,
                    double hi) {
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double x : samples) {
        if (x < lo) {
            ++h.underflow;
        } else if (x > hi) {
            ++h.overflow;
        } else {
            auto idx = static_cast<std::size_t>((x - lo) / width);
            if (idx >= h.counts.size()) idx = h.counts.size() - 1; // x == hi
            ++h.counts[idx];
        }
    }
    return h;
}

EmpiricalSummary::EmpiricalSummary(std::vector<double> samples)
    : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
}

Estimate EmpiricalSummary::moment(int order) const {
    return moment_of(sorted_, order);
}

double EmpiricalSummary::ks_vs(const std::string& reference_name,
                               const std::function<double(double)>& reference_cdf) {
    ks_reference_ = reference_name;
    ks_value_ = ks_statistic_sorted(sorted_, reference_cdf);
    return ks_value_;
}

EmpiricalSummary EmpiricalSummary::merge(const EmpiricalSummary& a,
                                         const EmpiricalSummary& b) {
    std::vector<double> merged;
    merged.resize(a.sorted_.size() + b.sorted_.size());
    std::merge(a.sorted_.begin(), a.sorted_.end(), b.sorted_.begin(),
               b.sorted_.end(), merged.begin());
    EmpiricalSummary out;
    out.sorted_ = std::move(merged);
    return out;
}

} // namespace kinex

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kinex {

// A point estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

// Mean of samples^order with the direct (delta-free) standard error: the
// sample standard deviation of the order-th powers divided by sqrt(n).
Estimate empirical_moment(const std::vector<double>& samples, int order);

std::map<int, Estimate> empirical_moments(const std::vector<double>& samples,
                                          const std::vector<int>& orders);

// Two-sided Kolmogorov-Smirnov distance sup |F_hat - F| against a reference
// CDF, via the standard sorted-sample formula.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& reference_cdf);

// Same, for an already ascending-sorted sample.
double ks_statistic_sorted(const std::vector<double>& sorted,
                           const std::function<double(double)>& reference_cdf);

// Asymptotic 99% critical value for the KS statistic under the null.
double ks_threshold_99(std::size_t n);

// Method-of-moments Beta fit: a = m(m(1-m)/v - 1), b = (1-m)(m(1-m)/v - 1).
// Throws error(errc::degenerate_variance) when v = 0 or v >= m(1-m).
std::pair<double, double> fit_beta_by_moments(const std::vector<double>& samples);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
};

// Equal-width binning over [lo, hi]; a sample exactly at hi lands in the last
// bin, values outside go to the separate under/overflow counters.
Histogram histogram(const std::vector<double>& samples, int bins, double lo,
                    double hi);

// A batch of scalar observations, stored sorted. Storing the raw (sorted)
// sample makes merging exact: moments are always computed over the sorted
// array in ascending order, so pooling batches and then summarizing gives
// bitwise the same estimates as summarizing the concatenated sample.
class EmpiricalSummary {
  public:
    EmpiricalSummary() = default;
    explicit EmpiricalSummary(std::vector<double> samples);

    std::size_t n() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }

    Estimate moment(int order) const;
    double ks_vs(const std::string& reference_name,
                 const std::function<double(double)>& reference_cdf);

    // Name and statistic of the last ks_vs call, if any.
    const std::string& ks_reference() const { return ks_reference_; }
    double ks_value() const { return ks_value_; }

    static EmpiricalSummary merge(const EmpiricalSummary& a,
                                  const EmpiricalSummary& b);

  private:
    std::vector<double> sorted_;
    std::string ks_reference_;
    double ks_value_ = -1.0;
};

} // namespace kinex

#ifndef QQLAB_STATISTICS_HPP_
#define QQLAB_STATISTICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qqlab {

/// Running sum and sum of squares. Merging is order-sensitive in floating
/// point, so callers merge per-chunk accumulators in chunk order.
struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }

  void merge(const MeanAccumulator &o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }

  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }

  double variance() const {
    if (count < 2) {
      return 0.0;
    }
    const double n = static_cast<double>(count);
    const double m = sum / n;
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
  }

  double std_err() const {
    return count ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

inline MeanAccumulator summarize(std::span<const double> values) {
  MeanAccumulator acc;
  for (double v : values) {
    acc.add(v);
  }
  return acc;
}

/// Value with a standard error.
struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

/// Combined standard error of a difference of independent estimates.
inline double combined_se(double a, double b) { return std::hypot(a, b); }

/// Sorted realizations of a scalar law at quantile t (J(t) draws, scaled
/// comparison counts, perpetuity draws, ...).
struct EmpiricalSample {
  double t = 0.0;
  std::vector<double> draws;

  EmpiricalSample() = default;
  EmpiricalSample(double t_, std::vector<double> values)
      : t(t_), draws(std::move(values)) {
    std::sort(draws.begin(), draws.end());
  }

  std::size_t n() const { return draws.size(); }

  /// Empirical CDF, P(X <= x).
  double cdf(double x) const {
    if (draws.empty()) {
      throw std::invalid_argument("empirical CDF of an empty sample");
    }
    const auto it = std::upper_bound(draws.begin(), draws.end(), x);
    return static_cast<double>(it - draws.begin()) /
           static_cast<double>(draws.size());
  }

  /// Empirical survival P(X > x).
  double survival(double x) const { return 1.0 - cdf(x); }

  /// Binomial standard error of the empirical CDF at x.
  double cdf_se(double x) const {
    const double p = cdf(x);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(draws.size()));
  }

  MeanAccumulator moments() const { return summarize(draws); }
};

} // namespace qqlab

#endif // QQLAB_STATISTICS_HPP_

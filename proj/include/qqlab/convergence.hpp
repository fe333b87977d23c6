#ifndef QQLAB_CONVERGENCE_HPP_
#define QQLAB_CONVERGENCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qqlab/check_report.hpp"
#include "qqlab/density.hpp"
#include "qqlab/errors.hpp"
#include "qqlab/key_process.hpp"
#include "qqlab/parallel.hpp"
#include "qqlab/statistics.hpp"
#include "qqlab/tails.hpp"

namespace qqlab {

// Distances -----------------------------------------------------------------

/// Two-sample Kolmogorov-Smirnov statistic, evaluated at every jump point.
inline double ks_distance(const EmpiricalSample &a, const EmpiricalSample &b) {
  if (a.draws.empty() || b.draws.empty()) {
    throw std::invalid_argument("ks_distance: empty sample");
  }
  const auto &x = a.draws;
  const auto &y = b.draws;
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) {
      ++i;
    }
    while (j < y.size() && y[j] == v) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

/// KS distance between a sample and a continuous reference CDF.
inline double ks_distance(const EmpiricalSample &a,
                          const std::function<double(double)> &cdf) {
  if (a.draws.empty()) {
    throw std::invalid_argument("ks_distance: empty sample");
  }
  const double n = static_cast<double>(a.n());
  double d = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i) {
    const double f = cdf(a.draws[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return d;
}

/// Scale of two-sample KS noise, sqrt((n + m) / (n m)); used as the
/// statistic's standard error.
inline double ks_noise_scale(std::size_t n, std::size_t m) {
  const double a = static_cast<double>(n);
  const double b = static_cast<double>(m);
  return std::sqrt((a + b) / (a * b));
}

/// W1 by order-statistic coupling of equal-size samples.
inline double wasserstein1(const EmpiricalSample &a, const EmpiricalSample &b) {
  if (a.draws.empty() || b.draws.empty()) {
    throw std::invalid_argument("wasserstein1: empty sample");
  }
  if (a.n() != b.n()) {
    throw std::invalid_argument(
        "wasserstein1: sizes differ; use wasserstein1_quantile");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i) {
    s += std::abs(a.draws[i] - b.draws[i]);
  }
  return s / static_cast<double>(a.n());
}

/// W1 = int |F_a - F_b| dx for samples of any sizes.
inline double wasserstein1_quantile(const EmpiricalSample &a,
                                    const EmpiricalSample &b) {
  if (a.draws.empty() || b.draws.empty()) {
    throw std::invalid_argument("wasserstein1: empty sample");
  }
  const auto &x = a.draws;
  const auto &y = b.draws;
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = std::min(x.front(), y.front());
  double s = 0.0;
  while (i < x.size() || j < y.size()) {
    const double v = (j == y.size() || (i < x.size() && x[i] <= y[j])) ? x[i]
                                                                       : y[j];
    s += (v - prev) * std::abs(static_cast<double>(i) / na -
                               static_cast<double>(j) / nb);
    prev = v;
    while (i < x.size() && x[i] == v) {
      ++i;
    }
    while (j < y.size() && y[j] == v) {
      ++j;
    }
  }
  return s;
}

// Finite n versus the limit ---------------------------------------------------

/// delta_{n,t} = |m_n / n - t| + 1/n with m_n = floor(nt) + 1.
inline double delta_nt(std::uint64_t n, double t) {
  const double nn = static_cast<double>(n);
  return std::abs(static_cast<double>(quantile_rank(n, t)) / nn - t) + 1.0 / nn;
}

/// E Z(t) - E X_n(t) from the exact finite-n mean. Since X_n(t) is
/// stochastically below Z(t), this is exactly their W1 distance.
inline double exact_d1(std::uint64_t n, double t) {
  return limit_mean(t) -
         expected_comparisons(n, quantile_rank(n, t)) / static_cast<double>(n);
}

/// n_reps draws of C_{n, m_n} / n.
inline EmpiricalSample sample_scaled_cost(std::uint64_t n, double t,
                                          std::size_t n_reps,
                                          const UniformStream &rng) {
  const std::uint64_t m = quantile_rank(n, t);
  const double nn = static_cast<double>(n);
  return EmpiricalSample(t, sample_replicates(n_reps, rng, [&](auto &r) {
                           return static_cast<double>(
                                      sample_quickselect_cost(n, m, r)) /
                                  nn;
                         }));
}

/// n_reps draws of Z(t) = 1 + J(t).
inline EmpiricalSample sample_z(double t, std::size_t n_reps, double trunc_eps,
                                const UniformStream &rng) {
  return EmpiricalSample(t, sample_replicates(n_reps, rng, [&](auto &r) {
                           return 1.0 + sample_j(t, trunc_eps, r);
                         }));
}

inline EmpiricalSample sample_perpetuity(std::size_t n_reps, double trunc_eps,
                                         const UniformStream &rng) {
  return EmpiricalSample(0.0, sample_replicates(n_reps, rng, [&](auto &r) {
                           return sample_v(trunc_eps, r);
                         }));
}

struct RateRow {
  std::uint64_t n = 0;
  double delta = 0.0;
  double d1 = 0.0;        // empirical W1
  double d1_exact = 0.0;  // E Z - E X_n
  double d1_se = 0.0;     // SE of the mean difference
  double dks = 0.0;
  double dks_se = 0.0;
  double bound = 0.0;     // delta ln(1/delta)
};

/// One row of the rate table from draws of X_n(t) = C_{n,m_n}/n and Z(t).
inline RateRow rate_row(std::uint64_t n, double t, const EmpiricalSample &x,
                        const EmpiricalSample &z) {
  RateRow row;
  row.n = n;
  row.delta = delta_nt(n, t);
  row.d1 = wasserstein1_quantile(x, z);
  row.d1_exact = exact_d1(n, t);
  const auto mx = x.moments();
  const auto mz = z.moments();
  row.d1_se = combined_se(mx.std_err(), mz.std_err());
  row.dks = ks_distance(x, z);
  row.dks_se = ks_noise_scale(x.n(), z.n());
  row.bound = row.delta * std::log(1.0 / row.delta);
  return row;
}

// Large deviations ------------------------------------------------------------

struct LdInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool empty() const { return lower > upper; }
};

/// I_n = [c, (1/2)(L / ln L)(1 - omega / ln L)] with L = ln(1/delta).
inline LdInterval ld_interval_from_delta(double delta, double c, double omega) {
  if (!(delta > 0.0)) {
    throw std::domain_error("delta must be positive");
  }
  if (!(c > 1.0) || !(omega > 0.0)) {
    throw std::domain_error("ld_interval needs c > 1 and omega > 0");
  }
  const double big_l = std::log(1.0 / delta);
  if (!(big_l > 1.0)) {
    throw std::domain_error("delta too large: ln ln (1/delta) must be > 0");
  }
  const double ll = std::log(big_l);
  return {c, 0.5 * (big_l / ll) * (1.0 - omega / ll)};
}

inline LdInterval ld_interval(std::uint64_t n, double t, double c,
                              double omega) {
  return ld_interval_from_delta(delta_nt(n, t), c, omega);
}

struct LdRatio {
  double x = 0.0;
  double p_n = 0.0;
  double p_z = 0.0;
  double ratio = 0.0;
  double ratio_se = 0.0;
};

struct LdReport {
  double t = 0.0;
  std::uint64_t n = 0;
  std::uint64_t m_n = 0;
  double delta = 0.0;
  LdInterval interval;
  std::vector<LdRatio> ratios;
};

inline constexpr double kMinTailHits = 30.0;

/// P(C_n/n > x), P(Z > x) and their ratio, with a delta-method SE.
inline LdRatio ld_ratio(const EmpiricalSample &scaled_cost,
                        const EmpiricalSample &z, double x) {
  LdRatio r;
  r.x = x;
  r.p_n = scaled_cost.survival(x);
  r.p_z = z.survival(x);
  const double hits_n = r.p_n * static_cast<double>(scaled_cost.n());
  const double hits_z = r.p_z * static_cast<double>(z.n());
  if (hits_n < kMinTailHits || hits_z < kMinTailHits) {
    throw NumericalGuardError("tail at x = " + std::to_string(x) +
                              " too deep for the replicate budget");
  }
  r.ratio = r.p_n / r.p_z;
  const double rel_n = (1 - r.p_n) / hits_n;
  const double rel_z = (1 - r.p_z) / hits_z;
  r.ratio_se = r.ratio * std::sqrt(rel_n + rel_z);
  return r;
}

inline LdRatio ld_ratio_check(double t, double x, std::uint64_t n,
                              std::size_t n_reps, double trunc_eps,
                              const UniformStream &rng) {
  const EmpiricalSample c = sample_scaled_cost(n, t, n_reps, rng.substream(0));
  const EmpiricalSample z = sample_z(t, n_reps, trunc_eps, rng.substream(1));
  return ld_ratio(c, z, x);
}

// Stochastic order --------------------------------------------------------------

/// Largest standardized violation of "lower <= upper stochastically",
/// max_x [F_upper(x) - F_lower(x)] / combined SE over the grid; <= z means the
/// order holds within z standard errors at every grid point.
struct DominanceMargin {
  double worst_excess = -INFINITY; // max of F_upper - F_lower - z * se
  double at_x = 0.0;
};

inline DominanceMargin dominance_margin(const EmpiricalSample &lower,
                                        const EmpiricalSample &upper,
                                        const std::vector<double> &grid,
                                        double z = 3.0) {
  DominanceMargin out;
  for (double x : grid) {
    const double se = combined_se(lower.cdf_se(x), upper.cdf_se(x));
    const double excess = upper.cdf(x) - lower.cdf(x) - z * se;
    if (excess > out.worst_excess) {
      out.worst_excess = excess;
      out.at_x = x;
    }
  }
  return out;
}

/// F_{X_n} >= F_Z >= F_V and F_D >= F_Z on a 200-point grid over [0, 15],
/// within 3 combined SEs.
inline CheckReport dominance_check(double t, std::uint64_t n,
                                   std::size_t n_reps, double trunc_eps,
                                   const UniformStream &rng) {
  const auto grid = uniform_grid(0.0, 15.0, 200);
  const EmpiricalSample x = sample_scaled_cost(n, t, n_reps, rng.substream(0));
  const EmpiricalSample z = sample_z(t, n_reps, trunc_eps, rng.substream(1));
  const EmpiricalSample v = sample_perpetuity(n_reps, trunc_eps,
                                              rng.substream(2));
  const EmpiricalSample d = sample_z(0.0, n_reps, trunc_eps, rng.substream(3));
  const double worst = std::max({dominance_margin(x, z, grid).worst_excess,
                                 dominance_margin(z, v, grid).worst_excess,
                                 dominance_margin(d, z, grid).worst_excess});
  return CheckReport::make("dominance chain t=" + std::to_string(t) +
                               " n=" + std::to_string(n),
                           worst, 0.0, 0.0, Relation::AtMost,
                           Provenance::Paper,
                           "largest CDF-order violation beyond 3 combined SE");
}

// Worst case ---------------------------------------------------------------------

struct WorstCaseProbability {
  Rational enumerated;
  Rational formula;
};

/// Exact P(C_{n,m} = n(n-1)/2) by enumeration, next to (1/n!) C(n-1, m-1).
inline WorstCaseProbability worst_case_probability(unsigned n, unsigned m) {
  check_rank(n, m);
  const std::uint64_t worst = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t hits = 0;
  enumerate_quickselect_costs(n, m,
                              [&](std::uint64_t c) { hits += c == worst; });
  const auto total = factorial(n);
  std::uint64_t binom = 1;
  for (unsigned i = 1; i < m; ++i) {
    binom = binom * (n - i) / i;
  }
  return {Rational(hits) / Rational(total), Rational(binom) / Rational(total)};
}

} // namespace qqlab

#endif // QQLAB_CONVERGENCE_HPP_

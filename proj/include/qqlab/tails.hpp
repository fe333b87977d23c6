#ifndef QQLAB_TAILS_HPP_
#define QQLAB_TAILS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qqlab/check_report.hpp"
#include "qqlab/errors.hpp"
#include "qqlab/key_process.hpp"
#include "qqlab/parallel.hpp"
#include "qqlab/rng.hpp"
#include "qqlab/statistics.hpp"

namespace qqlab {

// ---------------------------------------------------------------------------
// The perpetuity V = 1 + sum_n prod_{k<=n} V_k, V_k ~ Uniform(1/2, 1).

inline constexpr double kPerpetuityMean = 4.0;

/// One draw of V, stopping once the running product falls below trunc_eps.
/// The dropped tail has conditional mean product * (E V - 1) < 3 trunc_eps.
inline double sample_v(double trunc_eps, UniformStream &rng) {
  check_trunc_eps(trunc_eps);
  double product = 1.0;
  double v = 1.0;
  do {
    product *= 0.5 + 0.5 * rng.uniform();
    v += product;
  } while (product >= trunc_eps);
  return v;
}

// ---------------------------------------------------------------------------
// Moment generating function m(theta) = E exp(theta V).

/// m on the grid theta_i = i * step, stored as log m (m(8) exceeds the
/// double range).
struct MgfTable {
  double step = 1e-3;
  std::vector<double> log_values;
  std::size_t iterations = 0;
  double tol = 1e-12;

  double theta_max() const {
    return step * static_cast<double>(log_values.size() - 1);
  }
  std::size_t size() const { return log_values.size(); }
  double theta(std::size_t i) const { return step * static_cast<double>(i); }

  /// log m(theta), linear in log between nodes.
  double log_at(double theta) const {
    if (!(theta >= 0.0 && theta <= theta_max() * (1 + 1e-12))) {
      throw std::out_of_range("theta " + std::to_string(theta) +
                              " outside the solved range [0, " +
                              std::to_string(theta_max()) + "]");
    }
    const double pos = theta / step;
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= log_values.size()) {
      return log_values.back();
    }
    const double f = pos - static_cast<double>(i);
    return log_values[i] + f * (log_values[i + 1] - log_values[i]);
  }

  double at(double theta) const {
    const double lv = log_at(theta);
    if (lv > std::log(std::numeric_limits<double>::max())) {
      throw NumericalGuardError("m(theta) overflows double at theta = " +
                                std::to_string(theta));
    }
    return std::exp(lv);
  }
};

namespace detail {

inline double log_add_exp(double a, double b) {
  if (a == -INFINITY) {
    return b;
  }
  if (b == -INFINITY) {
    return a;
  }
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

} // namespace detail

inline constexpr double kMgfThetaLimit = 8.0;

/// Solves m(theta) = 2 e^theta int_{1/2}^1 m(theta v) dv by fixed-point
/// sweeps from m = 1. With s = theta v the right side is
/// (2 e^theta / theta) int_{theta/2}^theta m(s) ds; the integral is the
/// trapezoid rule on the grid (the exact integral of the piecewise-linear
/// interpolant), taken as a difference of running integrals, so one sweep
/// costs O(grid size). Everything is carried in log space.
inline MgfTable mgf_v_solve(double theta_max, double grid_step = 1e-3,
                            double tol = 1e-12,
                            std::size_t max_iterations = 100000) {
  if (!(theta_max > 0.0)) {
    throw std::domain_error("mgf_v_solve requires theta_max > 0");
  }
  if (theta_max > kMgfThetaLimit) {
    throw NumericalGuardError("mgf_v_solve: theta_max above 8 is refused, m "
                              "grows superexponentially");
  }
  if (!(grid_step > 0.0 && grid_step <= theta_max) || !(tol > 0.0)) {
    throw std::invalid_argument("mgf_v_solve: bad grid step or tolerance");
  }
  const auto n = static_cast<std::size_t>(std::llround(theta_max / grid_step));
  if (std::abs(static_cast<double>(n) * grid_step - theta_max) >
      1e-9 * theta_max) {
    throw std::invalid_argument("mgf_v_solve: step must divide theta_max");
  }
  const double h = grid_step;
  const double log_half_h = std::log(0.5 * h);
  MgfTable table;
  table.step = h;
  table.tol = tol;
  std::vector<double> lm(n + 1, 0.0);
  std::vector<double> next(n + 1, 0.0);
  std::vector<double> log_cum(n + 1, -INFINITY);

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    for (std::size_t i = 1; i <= n; ++i) {
      log_cum[i] = detail::log_add_exp(
          log_cum[i - 1], log_half_h + detail::log_add_exp(lm[i - 1], lm[i]));
    }
    double change = 0.0;
    next[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      // running integral up to theta_i / 2: node i/2, or half a cell past it
      const std::size_t j = i / 2;
      double log_lower = log_cum[j];
      if (i % 2) {
        // int over [theta_j, theta_j + h/2] of the linear interpolant
        const double part = detail::log_add_exp(std::log(0.375 * h) + lm[j],
                                                std::log(0.125 * h) + lm[j + 1]);
        log_lower = detail::log_add_exp(log_lower, part);
      }
      const double log_integral =
          log_cum[i] + std::log1p(-std::exp(log_lower - log_cum[i]));
      const double theta = table.theta(i);
      next[i] = std::numbers::ln2 + theta - std::log(theta) + log_integral;
      change = std::max(change, std::abs(std::expm1(next[i] - lm[i])));
    }
    lm.swap(next);
    if (change < tol) {
      table.log_values = std::move(lm);
      table.iterations = it;
      return table;
    }
  }
  throw NumericalGuardError("mgf_v_solve did not converge within " +
                            std::to_string(max_iterations) + " sweeps");
}

/// m(theta) <= exp[(2 + eps) e^theta / theta + a theta], compared in logs.
inline CheckReport mgf_bound_check(const MgfTable &table, double theta,
                                   double eps, double a) {
  if (!(theta > 0.0) || !(eps > 0.0) || !(a > 0.0)) {
    throw std::domain_error("mgf_bound_check needs theta, eps, a > 0");
  }
  const double lhs = table.log_at(theta);
  const double rhs = (2.0 + eps) * std::exp(theta) / theta + a * theta;
  return CheckReport::make("mgf_bound theta=" + std::to_string(theta) +
                               " (log m vs log bound)",
                           lhs, rhs, 0.0, Relation::AtMost, Provenance::Paper);
}

// ---------------------------------------------------------------------------
// Right-tail envelopes.

struct ChernoffEnvelopes {
  double survival_bound = 1.0; // bound on P(Z(t) > x)
  double survival_theta = 0.0;
  double density_bound = INFINITY; // bound on f_t(x), x >= 3
  double density_theta = 0.0;
};

inline void check_interior_quantile(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::domain_error("quantile must lie in (0, 1)");
  }
}

/// Minimizes the two Chernoff-type bounds over the table's theta > 0.
inline ChernoffEnvelopes chernoff_envelopes(double t, double x,
                                            const MgfTable &table) {
  check_interior_quantile(t);
  if (!(x > 1.0)) {
    throw std::domain_error("survival envelope needs x > 1");
  }
  ChernoffEnvelopes out;
  double best_s = 0.0;
  double best_d = INFINITY;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const double th = table.theta(i);
    const double lm = table.log_values[i];
    const double ls = lm - th * x;
    if (ls < best_s) {
      best_s = ls;
      out.survival_theta = th;
    }
    const double ld = std::log(4.0 / th) + 2.0 * th + lm - th * x;
    if (ld < best_d) {
      best_d = ld;
      out.density_theta = th;
    }
  }
  out.survival_bound = std::exp(best_s);
  if (x >= 3.0) {
    out.density_bound = std::exp(best_d);
  } else {
    out.density_bound = INFINITY;
    out.density_theta = 0.0;
  }
  return out;
}

/// Density bound at x >= 3 for one theta.
inline double density_envelope(double theta, double x, const MgfTable &table) {
  if (!(x >= 3.0)) {
    throw std::domain_error("density envelope needs x >= 3");
  }
  if (!(theta > 0.0)) {
    throw std::domain_error("theta must be positive");
  }
  return 4.0 / theta * std::exp(2.0 * theta + table.log_at(theta) - theta * x);
}

/// C_theta with f_t(x) <= C_theta e^{-theta x} for every real x.
inline double envelope_constant(double theta, const MgfTable &table) {
  if (!(theta > 0.0)) {
    throw std::domain_error("theta must be positive");
  }
  return std::max(10.0 * std::exp(3.0 * theta),
                  4.0 / theta * std::exp(2.0 * theta + table.log_at(theta)));
}

/// l(x) = -x ln x - x ln ln x.
inline double tail_envelope(double x) {
  if (!(x > std::numbers::e)) {
    throw std::domain_error("tail_envelope requires x > e");
  }
  return -x * std::log(x) - x * std::log(std::log(x));
}

// ---------------------------------------------------------------------------
// Left tail: f_t(t + t z) = sum_k (-1)^{k-1} c_k z^k (doubled at t = 1/2).

struct SeriesCoeffs {
  std::vector<unsigned> ks;
  std::vector<double> c_values;
  std::vector<double> c_errs;
  std::size_t n_samples = 0;

  unsigned k_max() const { return ks.empty() ? 0 : ks.back(); }
};

inline double series_upper_bound(unsigned k) {
  return std::ldexp(1.0, -static_cast<int>(k + 1)) / k *
         (1.0 + std::ldexp(1.0, -static_cast<int>(k)));
}

inline double series_lower_bound(unsigned k) {
  return 0.0007 * std::ldexp(1.0, -static_cast<int>(k + 1)) /
         ((k + 1.0) * (k + 1.0));
}

/// c_k = int_0^1 (1-w)^{k-1} E[2 - w + J(w)]^{-(k+1)} dw for k = 1..k_max,
/// all from one pool of (w, J(w)) draws.
inline SeriesCoeffs left_series_coeffs(unsigned k_max, std::size_t n_samples,
                                       double trunc_eps,
                                       const UniformStream &rng) {
  if (k_max < 1) {
    throw std::invalid_argument("k_max must be >= 1");
  }
  if (n_samples < 2) {
    throw std::invalid_argument("need at least two samples");
  }
  check_trunc_eps(trunc_eps);
  auto parts = map_chunks(n_samples, rng, [&](Chunk &chunk) {
    std::vector<MeanAccumulator> acc(k_max);
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
      const double w = chunk.rng.uniform();
      const double base = 1.0 / (2.0 - w + sample_j(w, trunc_eps, chunk.rng));
      double term = base * base;
      for (unsigned k = 1; k <= k_max; ++k) {
        acc[k - 1].add(term);
        term *= (1.0 - w) * base;
      }
    }
    return acc;
  });
  std::vector<MeanAccumulator> total(k_max);
  for (const auto &p : parts) {
    for (unsigned k = 0; k < k_max; ++k) {
      total[k].merge(p[k]);
    }
  }
  SeriesCoeffs out;
  out.n_samples = n_samples;
  for (unsigned k = 1; k <= k_max; ++k) {
    out.ks.push_back(k);
    out.c_values.push_back(total[k - 1].mean());
    out.c_errs.push_back(total[k - 1].std_err());
  }
  return out;
}

/// c_k alone (same pool construction, so it equals entry k of
/// left_series_coeffs on the same stream).
inline Estimate left_series_coeff(unsigned k, std::size_t n_samples,
                                  double trunc_eps, const UniformStream &rng) {
  const SeriesCoeffs all = left_series_coeffs(k, n_samples, trunc_eps, rng);
  return {all.c_values.back(), all.c_errs.back()};
}

struct SeriesValue {
  double value = 0.0;
  /// Sum of |z|^k SE(c_k); conservative because the c_k share draws.
  double std_err = 0.0;
  /// Bound on the omitted terms: the first one, with c_{k_max+1} replaced by
  /// its upper bound.
  double truncation = 0.0;
};

inline double series_radius(double t) {
  if (!(t > 0.0 && t <= 0.5)) {
    throw std::domain_error("left series needs 0 < t <= 1/2");
  }
  return t == 0.5 ? 1.0 : std::min(1.0 / t - 2.0, 1.0);
}

/// f_t(t + t z) from the truncated series.
inline SeriesValue left_series_eval(double t, double z,
                                    const SeriesCoeffs &coeffs) {
  const double radius = series_radius(t);
  if (!(z >= 0.0 && z < radius)) {
    throw std::domain_error("z outside [0, " + std::to_string(radius) + ")");
  }
  SeriesValue out;
  double zk = 1.0;
  for (std::size_t i = 0; i < coeffs.ks.size(); ++i) {
    zk *= z;
    const double sign = (coeffs.ks[i] % 2) ? 1.0 : -1.0;
    out.value += sign * coeffs.c_values[i] * zk;
    out.std_err += zk * coeffs.c_errs[i];
  }
  out.truncation = series_upper_bound(coeffs.k_max() + 1) * zk * z;
  if (t == 0.5) {
    out.value *= 2.0;
    out.std_err *= 2.0;
    out.truncation *= 2.0;
  }
  return out;
}

/// Right-hand derivative of f_t at t.
inline double right_derivative(double t, double c1) {
  if (!(t > 0.0 && t <= 0.5)) {
    throw std::domain_error("right_derivative needs 0 < t <= 1/2");
  }
  return t == 0.5 ? 4.0 * c1 : c1 / t;
}

} // namespace qqlab

#endif // QQLAB_TAILS_HPP_

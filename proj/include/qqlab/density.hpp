#ifndef QQLAB_DENSITY_HPP_
#define QQLAB_DENSITY_HPP_

// Limit density f_t and distribution F_t of J(t) = Z(t) - 1: the mixture
// Monte Carlo estimator, the Dickman law at t in {0, 1}, and residuals of the
// two integral equations obtained by conditioning on the first interval.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qqlab/conditional_density.hpp"
#include "qqlab/errors.hpp"
#include "qqlab/key_process.hpp"
#include "qqlab/parallel.hpp"
#include "qqlab/quadrature.hpp"
#include "qqlab/rng.hpp"
#include "qqlab/statistics.hpp"

namespace qqlab {

inline constexpr double kEulerGamma = std::numbers::egamma;

/// Monte Carlo estimate of f_t on a grid, with per-point standard errors.
struct DensityGrid {
  double t = 0.0;
  std::vector<double> xs;
  std::vector<double> values;
  std::vector<double> std_errs;
  std::size_t n_samples = 0;
  double trunc_eps = kDefaultTruncEps;
  /// Largest x at which any replicate contributed; the estimate is exactly 0
  /// beyond it.
  double support_max = 0.0;

  std::size_t size() const { return xs.size(); }
};

inline std::vector<double> uniform_grid(double lo, double hi,
                                        std::size_t points) {
  if (points < 2 || !(lo < hi)) {
    throw std::invalid_argument("uniform_grid needs lo < hi and >= 2 points");
  }
  std::vector<double> xs(points);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    xs[i] = lo + h * static_cast<double>(i);
  }
  xs.back() = hi;
  return xs;
}

inline void check_grid(std::span<const double> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("empty grid");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw std::invalid_argument("grid must be strictly increasing");
    }
  }
}

namespace detail {

struct DensitySums {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  double support_max = 0.0;
};

} // namespace detail

/// Mixture estimator: per replicate draw (L_3, R_3), then
/// Y = (R_3 - L_3)(1 + J(t')) with t' the relative position of t, and add
/// f_{L_3,R_3}(x - Y) at every grid point.
inline DensityGrid estimate_density(double t, std::span<const double> xs,
                                    std::size_t n_samples, double trunc_eps,
                                    const UniformStream &rng) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::domain_error("estimate_density requires 0 < t < 1");
  }
  check_grid(xs);
  check_trunc_eps(trunc_eps);
  if (n_samples == 0) {
    throw std::invalid_argument("estimate_density: n_samples must be > 0");
  }
  const std::size_t g = xs.size();
  auto parts = map_chunks(n_samples, rng, [&](Chunk &chunk) {
    detail::DensitySums s;
    s.sum.assign(g, 0.0);
    s.sum_sq.assign(g, 0.0);
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
      const PivotTriple tri = sample_pivot_triple(t, chunk.rng);
      const double width = tri.r3 - tri.l3;
      const double inner = std::clamp((t - tri.l3) / width, 0.0, 1.0);
      const double y = width * (1.0 + sample_j(inner, trunc_eps, chunk.rng));
      const ConditionalDensity cd(tri.l3, tri.r3);
      const double hi = y + ConditionalDensity::support_hi();
      s.support_max = std::max(s.support_max, hi);
      auto it = std::lower_bound(xs.begin(), xs.end(), y + cd.support_lo());
      for (; it != xs.end() && *it < hi; ++it) {
        const double v = cd(*it - y);
        const auto k = static_cast<std::size_t>(it - xs.begin());
        s.sum[k] += v;
        s.sum_sq[k] += v * v;
      }
    }
    return s;
  });

  DensityGrid out;
  out.t = t;
  out.xs.assign(xs.begin(), xs.end());
  out.n_samples = n_samples;
  out.trunc_eps = trunc_eps;
  std::vector<double> sum(g, 0.0);
  std::vector<double> sum_sq(g, 0.0);
  for (const auto &p : parts) {
    for (std::size_t k = 0; k < g; ++k) {
      sum[k] += p.sum[k];
      sum_sq[k] += p.sum_sq[k];
    }
    out.support_max = std::max(out.support_max, p.support_max);
  }
  const double n = static_cast<double>(n_samples);
  out.values.resize(g);
  out.std_errs.resize(g);
  for (std::size_t k = 0; k < g; ++k) {
    const double mean = sum[k] / n;
    const double var =
        n > 1 ? std::max(0.0, (sum_sq[k] - n * mean * mean) / (n - 1)) : 0.0;
    out.values[k] = mean;
    out.std_errs[k] = std::sqrt(var / n);
  }
  return out;
}

/// n_samples independent J(t) draws, sorted.
inline EmpiricalSample estimate_cdf(double t, std::size_t n_samples,
                                    double trunc_eps,
                                    const UniformStream &rng) {
  check_quantile(t);
  check_trunc_eps(trunc_eps);
  if (n_samples == 0) {
    throw std::invalid_argument("estimate_cdf: n_samples must be > 0");
  }
  return EmpiricalSample(t, sample_replicates(n_samples, rng, [&](auto &r) {
                           return sample_j(t, trunc_eps, r);
                         }));
}

/// Dickman function rho on [0, x_max] by marching (u rho(u))' = rho(u - 1),
/// i.e. rho'(u) = -rho(u - 1) / u, with Simpson steps; the delayed midpoint
/// value comes from four-point cubic interpolation. The step must divide 1.
class DickmanTable {
public:
  DickmanTable(double x_max, double step) : step_(step) {
    if (!(x_max >= 0.0)) {
      throw std::domain_error("Dickman table needs x_max >= 0");
    }
    if (!(step > 0.0 && step <= 0.25)) {
      throw std::invalid_argument("Dickman step must lie in (0, 0.25]");
    }
    const double per_unit = 1.0 / step;
    per_unit_ = static_cast<std::size_t>(std::llround(per_unit));
    if (std::abs(per_unit - static_cast<double>(per_unit_)) > 1e-9 * per_unit) {
      throw std::invalid_argument("Dickman step must divide 1 exactly");
    }
    const std::size_t n =
        std::max<std::size_t>(per_unit_ + 1,
                              static_cast<std::size_t>(std::ceil(x_max / step)) +
                                  1);
    rho_.assign(n + 1, 1.0);
    const std::size_t m = per_unit_;
    auto delayed = [&](std::ptrdiff_t k) {
      return k < 0 ? 1.0 : rho_[static_cast<std::size_t>(k)];
    };
    for (std::size_t i = m; i < n; ++i) {
      const double u0 = static_cast<double>(i) * step;
      const double u1 = u0 + step;
      const auto k = static_cast<std::ptrdiff_t>(i - m);
      const double g0 = delayed(k);
      const double g1 = delayed(k + 1);
      // rho loses smoothness at integers, so the stencil stays in one unit
      // cell: centered when possible, shifted at either cell edge.
      const auto km = static_cast<std::ptrdiff_t>(m);
      double gm;
      if (k >= 0 && k % km == 0) {
        gm = (5.0 * g0 + 15.0 * g1 - 5.0 * delayed(k + 2) + delayed(k + 3)) /
             16.0;
      } else if ((k + 1) % km == 0) {
        gm = (delayed(k - 2) - 5.0 * delayed(k - 1) + 15.0 * g0 + 5.0 * g1) /
             16.0;
      } else {
        gm = (-delayed(k - 1) + 9.0 * g0 + 9.0 * g1 - delayed(k + 2)) / 16.0;
      }
      const double integral =
          step / 6.0 * (g0 / u0 + 4.0 * gm / (u0 + 0.5 * step) + g1 / u1);
      rho_[i + 1] = rho_[i] - integral;
    }
    cumulative_.assign(rho_.size(), 0.0);
    for (std::size_t i = 1; i < rho_.size(); ++i) {
      cumulative_[i] = cumulative_[i - 1] + 0.5 * step * (rho_[i - 1] + rho_[i]);
    }
  }

  double step() const { return step_; }
  double x_max() const { return step_ * static_cast<double>(rho_.size() - 1); }

  double rho(double u) const {
    if (u < 0.0) {
      throw std::domain_error("Dickman rho needs u >= 0");
    }
    if (u <= 1.0) {
      return 1.0;
    }
    guard(u);
    return lerp_uniform(rho_, 0.0, step_, u);
  }

  /// Density of J(0) = Z(0) - 1.
  double density(double x) const { return std::exp(-kEulerGamma) * rho(x); }

  /// P(J(0) <= x).
  double cdf(double x) const {
    if (x <= 0.0) {
      return 0.0;
    }
    if (x >= x_max()) {
      return std::min(1.0, std::exp(-kEulerGamma) * cumulative_.back());
    }
    return std::min(1.0, std::exp(-kEulerGamma) *
                             lerp_uniform(cumulative_, 0.0, step_, x));
  }

private:
  void guard(double u) const {
    if (u > x_max()) {
      throw NumericalGuardError("Dickman table covers [0, " +
                                std::to_string(x_max()) + "], asked " +
                                std::to_string(u));
    }
  }

  double step_;
  std::size_t per_unit_ = 0;
  std::vector<double> rho_;
  std::vector<double> cumulative_;
};

inline constexpr double kDickmanStep = 1e-3;

/// f_0(x) = e^{-gamma} rho(x), marched with the given step.
inline double dickman_density(double x, double step = kDickmanStep) {
  if (x < 0.0) {
    throw std::domain_error("dickman_density requires x >= 0");
  }
  return DickmanTable(std::max(x, 1.0) + step, step).density(x);
}

/// Relative drift of f_0(x) between step and step/2.
inline double dickman_richardson_drift(double x, double step = kDickmanStep) {
  const double coarse = dickman_density(x, step);
  const double fine = dickman_density(x, 0.5 * step);
  return std::abs(coarse - fine) / std::abs(fine);
}

/// f_v on a quantile grid v_i = i / K, i = 0..K. The endpoint laws are the
/// Dickman density; interior nodes are mixture estimates.
class DensityFamily {
public:
  DensityFamily(std::size_t k, std::vector<DensityGrid> interior,
                DickmanTable dickman)
      : k_(k), interior_(std::move(interior)), dickman_(std::move(dickman)) {
    if (k < 2 || interior_.size() != k - 1) {
      throw std::invalid_argument("density family needs K - 1 interior grids");
    }
  }

  static DensityFamily build(std::size_t k, std::span<const double> xs,
                             std::size_t n_samples, double trunc_eps,
                             const UniformStream &rng) {
    std::vector<DensityGrid> grids;
    grids.reserve(k - 1);
    for (std::size_t i = 1; i < k; ++i) {
      grids.push_back(estimate_density(static_cast<double>(i) /
                                           static_cast<double>(k),
                                       xs, n_samples, trunc_eps,
                                       rng.substream(i)));
    }
    return DensityFamily(k, std::move(grids),
                         DickmanTable(xs.back() + 1.0, kDickmanStep));
  }

  std::size_t nodes() const { return k_ + 1; }
  double node(std::size_t i) const {
    return static_cast<double>(i) / static_cast<double>(k_);
  }
  const DensityGrid &grid(std::size_t i) const { return interior_.at(i - 1); }

  /// f_{v_i}(y) at node i, linearly interpolated in y.
  Estimate at_node(std::size_t i, double y) const {
    if (y <= 0.0) {
      return {};
    }
    if (i == 0 || i == k_) {
      return {dickman_.density(y), 0.0};
    }
    const DensityGrid &g = grid(i);
    if (y >= g.support_max) {
      return {};
    }
    if (y < g.xs.front() || y > g.xs.back()) {
      throw NumericalGuardError("density family does not cover y = " +
                                std::to_string(y) + " at v = " +
                                std::to_string(node(i)));
    }
    auto it = std::upper_bound(g.xs.begin(), g.xs.end(), y);
    std::size_t hi = std::min<std::size_t>(
        static_cast<std::size_t>(it - g.xs.begin()), g.xs.size() - 1);
    const std::size_t lo = hi - 1;
    const double w = (y - g.xs[lo]) / (g.xs[hi] - g.xs[lo]);
    return {(1 - w) * g.values[lo] + w * g.values[hi],
            (1 - w) * g.std_errs[lo] + w * g.std_errs[hi]};
  }

  /// Bilinear interpolation in (v, y).
  Estimate at(double v, double y) const {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw NumericalGuardError("quantile outside the family's [0, 1]");
    }
    const double pos = v * static_cast<double>(k_);
    const double near = std::round(pos);
    if (std::abs(pos - near) < 1e-9) {
      return at_node(static_cast<std::size_t>(near), y);
    }
    const auto lo = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(lo);
    const Estimate a = at_node(lo, y);
    const Estimate b = at_node(lo + 1, y);
    return {(1 - w) * a.value + w * b.value,
            (1 - w) * a.std_err + w * b.std_err};
  }

private:
  std::size_t k_;
  std::vector<DensityGrid> interior_;
  DickmanTable dickman_;
};

/// Empirical CDF of J(v) tabulated on a uniform x grid [0, x_max].
struct CdfTable {
  double t = 0.0;
  double step = 1e-3;
  std::vector<double> values;
  std::size_t n_samples = 0;
  double sample_max = 0.0;

  double x_max() const { return step * static_cast<double>(values.size() - 1); }

  static CdfTable from_sample(const EmpiricalSample &s, double x_max,
                              double step) {
    CdfTable out;
    out.t = s.t;
    out.step = step;
    out.n_samples = s.n();
    out.sample_max = s.draws.empty() ? 0.0 : s.draws.back();
    const auto n = static_cast<std::size_t>(std::llround(x_max / step)) + 1;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.values[i] = s.cdf(step * static_cast<double>(i));
    }
    return out;
  }

  /// Histogram route: J(t) draws are binned as they are produced, so no
  /// sample is held in memory.
  static CdfTable simulate(double t, std::size_t n_samples, double trunc_eps,
                           double x_max, double step,
                           const UniformStream &rng) {
    check_quantile(t);
    check_trunc_eps(trunc_eps);
    const auto n = static_cast<std::size_t>(std::llround(x_max / step)) + 1;
    struct Counts {
      std::vector<std::uint32_t> bins;
      double max = 0.0;
    };
    auto parts = map_chunks(n_samples, rng, [&](Chunk &chunk) {
      Counts c;
      c.bins.assign(n + 1, 0);
      for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
        const double j = sample_j(t, trunc_eps, chunk.rng);
        c.max = std::max(c.max, j);
        // bin b holds draws in (x_{b-1}, x_b]; bin n holds draws beyond x_max
        const double pos = std::ceil(j / step);
        const std::size_t b =
            pos >= static_cast<double>(n) ? n : static_cast<std::size_t>(pos);
        ++c.bins[b];
      }
      return c;
    });
    CdfTable out;
    out.t = t;
    out.step = step;
    out.n_samples = n_samples;
    std::vector<std::uint64_t> bins(n + 1, 0);
    for (const auto &p : parts) {
      for (std::size_t b = 0; b <= n; ++b) {
        bins[b] += p.bins[b];
      }
      out.sample_max = std::max(out.sample_max, p.max);
    }
    out.values.resize(n);
    std::uint64_t running = 0;
    for (std::size_t b = 0; b < n; ++b) {
      running += bins[b];
      out.values[b] = static_cast<double>(running) /
                      static_cast<double>(n_samples);
    }
    return out;
  }

  Estimate at(double x) const {
    if (x < 0.0) {
      return {};
    }
    if (x >= sample_max) {
      return {1.0, 0.0};
    }
    if (x > x_max()) {
      throw NumericalGuardError("CDF table covers [0, " +
                                std::to_string(x_max()) + "], asked " +
                                std::to_string(x));
    }
    const double p = lerp_uniform(values, 0.0, step, x);
    return {p, std::sqrt(p * (1 - p) / static_cast<double>(n_samples))};
  }
};

/// F_v on the quantile grid v_i = i / K, i = 0..K.
class CdfFamily {
public:
  CdfFamily(std::size_t k, std::vector<CdfTable> tables)
      : k_(k), tables_(std::move(tables)) {
    if (tables_.size() != k + 1) {
      throw std::invalid_argument("CDF family needs K + 1 tables");
    }
  }

  static CdfFamily build(std::size_t k, std::size_t n_samples,
                         double trunc_eps, double x_max, double step,
                         const UniformStream &rng) {
    std::vector<CdfTable> tables;
    tables.reserve(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
      tables.push_back(CdfTable::simulate(
          static_cast<double>(i) / static_cast<double>(k), n_samples,
          trunc_eps, x_max, step, rng.substream(i)));
    }
    return CdfFamily(k, std::move(tables));
  }

  std::size_t nodes() const { return k_ + 1; }
  double node(std::size_t i) const {
    return static_cast<double>(i) / static_cast<double>(k_);
  }
  const CdfTable &table(std::size_t i) const { return tables_.at(i); }

  Estimate at(double v, double x) const {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw NumericalGuardError("quantile outside the family's [0, 1]");
    }
    const double pos = v * static_cast<double>(k_);
    const double near = std::round(pos);
    if (std::abs(pos - near) < 1e-9) {
      return tables_[static_cast<std::size_t>(near)].at(x);
    }
    const auto lo = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(lo);
    const Estimate a = tables_[lo].at(x);
    const Estimate b = tables_[lo + 1].at(x);
    return {(1 - w) * a.value + w * b.value,
            (1 - w) * a.std_err + w * b.std_err};
  }

private:
  std::size_t k_;
  std::vector<CdfTable> tables_;
};

/// Integral-equation residual with its standard error.
struct Residual {
  double t = 0.0;
  double x = 0.0;
  double rhs = 0.0;
  double lhs = 0.0;
  double residual = 0.0;
  double std_err = 0.0;
};

namespace detail {

/// Even panel count for Simpson on an interval of length len when nodes are
/// spaced 1/K: matches the node grid whenever len * K is an even integer.
inline std::size_t panels_for(double len, std::size_t k) {
  const double exact = len * static_cast<double>(k);
  double n = std::round(exact);
  if (std::abs(exact - n) > 1e-9) {
    n = std::ceil(exact);
  }
  auto p = static_cast<std::size_t>(std::max(2.0, n));
  return p % 2 ? p + 1 : p;
}

/// RHS of either integral equation: Simpson in the quantile variable v over
/// [0, t] and [t, 1]. `left(v)` and `right(v)` return the weighted integrand.
template <class Left, class Right>
Estimate conditioning_rhs(double t, std::size_t k, Left &&left,
                          Right &&right) {
  double value = 0.0;
  double var = 0.0;
  auto run = [&](double a, double b, auto &&fn) {
    const std::size_t n = panels_for(b - a, k);
    const double h = (b - a) / static_cast<double>(n);
    const auto w = simpson_weights(n, h);
    for (std::size_t i = 0; i <= n; ++i) {
      const double v = i == n ? b : a + h * static_cast<double>(i);
      const Estimate e = fn(v);
      value += w[i] * e.value;
      var += (w[i] * e.std_err) * (w[i] * e.std_err);
    }
  };
  run(0.0, t, left);
  run(t, 1.0, right);
  return {value, std::sqrt(var)};
}

} // namespace detail

/// RHS - f_t(x) for
/// f_t(x) = int_0^t (1-v)^{-1} f_v(x(1-v)/(1-t) - 1) dv
///        + int_t^1 v^{-1} f_v(xv/t - 1) dv,
/// the conditioning identity written in the relative quantile v.
inline Residual integral_eq_residual_density(const DensityFamily &family,
                                             std::size_t t_node, double x) {
  if (t_node == 0 || t_node + 1 >= family.nodes()) {
    throw std::domain_error("density residual needs an interior quantile");
  }
  const double t = family.node(t_node);
  const std::size_t k = family.nodes() - 1;
  auto left = [&](double v) {
    const Estimate e = family.at(v, x * (1 - v) / (1 - t) - 1);
    return Estimate{e.value / (1 - v), e.std_err / (1 - v)};
  };
  auto right = [&](double v) {
    const Estimate e = family.at(v, x * v / t - 1);
    return Estimate{e.value / v, e.std_err / v};
  };
  const Estimate rhs = detail::conditioning_rhs(t, k, left, right);
  const Estimate lhs = family.at_node(t_node, x);
  return {t, x, rhs.value, lhs.value, rhs.value - lhs.value,
          rhs.std_err + lhs.std_err};
}

/// RHS - F_t(x) for
/// F_t(x) = int_0^t (1-t)(1-v)^{-2} F_v(x(1-v)/(1-t) - 1) dv
///        + int_t^1 t v^{-2} F_v(xv/t - 1) dv.
inline Residual integral_eq_residual_cdf(const CdfFamily &family,
                                         std::size_t t_node, double x) {
  if (t_node == 0 || t_node + 1 >= family.nodes()) {
    throw std::domain_error("CDF residual needs an interior quantile");
  }
  const double t = family.node(t_node);
  const std::size_t k = family.nodes() - 1;
  auto left = [&](double v) {
    const double w = (1 - t) / ((1 - v) * (1 - v));
    const Estimate e = family.at(v, x * (1 - v) / (1 - t) - 1);
    return Estimate{w * e.value, w * e.std_err};
  };
  auto right = [&](double v) {
    const double w = t / (v * v);
    const Estimate e = family.at(v, x * v / t - 1);
    return Estimate{w * e.value, w * e.std_err};
  };
  const Estimate rhs = detail::conditioning_rhs(t, k, left, right);
  const Estimate lhs = family.table(t_node).at(x);
  return {t, x, rhs.value, lhs.value, rhs.value - lhs.value,
          rhs.std_err + lhs.std_err};
}

/// Empirical Lipschitz constant: the largest slope between adjacent grid
/// points after discounting z standard errors of noise.
struct LipschitzEstimate {
  double lambda = 0.0;
  double at_x = 0.0;
};

inline LipschitzEstimate empirical_lipschitz(const DensityGrid &g,
                                             double z = 5.0) {
  LipschitzEstimate out;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double jump = std::abs(g.values[i] - g.values[i - 1]) -
                        z * (g.std_errs[i] + g.std_errs[i - 1]);
    const double slope = jump / (g.xs[i] - g.xs[i - 1]);
    if (slope > out.lambda) {
      out.lambda = slope;
      out.at_x = g.xs[i];
    }
  }
  return out;
}

/// Trapezoid integral of the grid estimate.
inline Estimate integrate_grid(const DensityGrid &g) {
  double value = trapezoid(g.xs, g.values);
  double var = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double left = i > 0 ? g.xs[i] - g.xs[i - 1] : 0.0;
    const double right = i + 1 < g.size() ? g.xs[i + 1] - g.xs[i] : 0.0;
    const double w = 0.5 * (left + right);
    var += w * w * g.std_errs[i] * g.std_errs[i];
  }
  return {value, std::sqrt(var)};
}

} // namespace qqlab

#endif // QQLAB_DENSITY_HPP_

#ifndef QQLAB_QUADRATURE_HPP_
#define QQLAB_QUADRATURE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qqlab/errors.hpp"

namespace qqlab {

/// Adaptive Gauss-Kronrod (15-point) over [a, b], split at every breakpoint
/// inside the interval so each panel sees a smooth integrand.
template <class F>
double integrate_piecewise(F &&f, double a, double b,
                           std::vector<double> breaks, double abs_tol = 1e-9) {
  if (!(a < b)) {
    throw std::invalid_argument("integrate_piecewise: need a < b");
  }
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  double prev = a;
  for (double x : breaks) {
    if (x <= prev) {
      continue;
    }
    if (x > b) {
      break;
    }
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, prev, x, 15, abs_tol, &err);
    if (!(err <= 10 * abs_tol)) {
      throw NumericalGuardError("Gauss-Kronrod did not reach tolerance on [" +
                                std::to_string(prev) + ", " +
                                std::to_string(x) + "]");
    }
    prev = x;
  }
  return total;
}

/// Composite Simpson over n (even) panels of [a, b].
template <class F> double simpson(F &&f, double a, double b, std::size_t n) {
  if (n == 0 || n % 2 != 0) {
    throw std::invalid_argument("simpson: panel count must be even and > 0");
  }
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) {
    s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  }
  return s * h / 3.0;
}

/// Simpson weights for n (even) panels of width h: 1 4 2 4 ... 4 1, times h/3.
inline std::vector<double> simpson_weights(std::size_t n, double h) {
  if (n == 0 || n % 2 != 0) {
    throw std::invalid_argument("simpson_weights: panel count must be even");
  }
  std::vector<double> w(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    w[i] = (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * h / 3.0;
  }
  return w;
}

/// Trapezoid rule over tabulated (x, y).
inline double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("trapezoid: size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    s += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
  }
  return s;
}

/// Linear interpolation on a uniform grid x0 + i*h; clamps nothing, the
/// caller guarantees x lies in [x0, x0 + (n-1)h].
inline double lerp_uniform(std::span<const double> ys, double x0, double h,
                           double x) {
  const double pos = (x - x0) / h;
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= ys.size()) {
    i = ys.size() - 2;
  }
  const double frac = pos - static_cast<double>(i);
  return ys[i] + frac * (ys[i + 1] - ys[i]);
}

} // namespace qqlab

#endif // QQLAB_QUADRATURE_HPP_

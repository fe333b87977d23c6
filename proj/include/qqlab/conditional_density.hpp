#ifndef QQLAB_CONDITIONAL_DENSITY_HPP_
#define QQLAB_CONDITIONAL_DENSITY_HPP_

// Closed-form conditional density of X = Delta_1 + Delta_2 given the third
// search interval (L_3, R_3) = (l, r), the joint density g of (L_3, R_3) on
// the interior, and the constant bounds built on them.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qqlab/rng.hpp"

namespace qqlab {

/// Class of rho = l / (1 - r). Interior classes fix the order of the six
/// support breakpoints of the conditional density.
enum class RhoClass { Zero, Lo, Mid, Hi, Top, Infinite };

inline const char *to_string(RhoClass c) {
  switch (c) {
  case RhoClass::Zero:
    return "Zero";
  case RhoClass::Lo:
    return "Lo";
  case RhoClass::Mid:
    return "Mid";
  case RhoClass::Hi:
    return "Hi";
  case RhoClass::Top:
    return "Top";
  case RhoClass::Infinite:
    return "Infinite";
  }
  return "?";
}

inline bool is_interior(RhoClass c) {
  return c != RhoClass::Zero && c != RhoClass::Infinite;
}

/// The six breakpoints of the interior conditional density.
enum class Breakpoint {
  TwoRMinusL,      // 2r - l
  TwoR,            // 2r
  OnePlusRMinus2L, // 1 + r - 2l
  OnePlusR,        // 1 + r
  TwoMinus2L,      // 2 - 2l
  TwoMinusL        // 2 - l
};

inline double breakpoint_value(Breakpoint b, double l, double r) {
  switch (b) {
  case Breakpoint::TwoRMinusL:
    return 2 * r - l;
  case Breakpoint::TwoR:
    return 2 * r;
  case Breakpoint::OnePlusRMinus2L:
    return 1 + r - 2 * l;
  case Breakpoint::OnePlusR:
    return 1 + r;
  case Breakpoint::TwoMinus2L:
    return 2 - 2 * l;
  case Breakpoint::TwoMinusL:
    return 2 - l;
  }
  return 0.0;
}

/// Increasing order of the breakpoints within an interior class.
inline std::array<Breakpoint, 6> breakpoint_order(RhoClass c) {
  using B = Breakpoint;
  switch (c) {
  case RhoClass::Lo:
    return {B::TwoRMinusL, B::TwoR, B::OnePlusRMinus2L, B::OnePlusR,
            B::TwoMinus2L, B::TwoMinusL};
  case RhoClass::Mid:
    return {B::TwoRMinusL, B::OnePlusRMinus2L, B::TwoR, B::TwoMinus2L,
            B::OnePlusR, B::TwoMinusL};
  case RhoClass::Hi:
    return {B::OnePlusRMinus2L, B::TwoRMinusL, B::TwoMinus2L, B::TwoR,
            B::TwoMinusL, B::OnePlusR};
  case RhoClass::Top:
    // 2 - 2l < 2r - l exactly when rho > 2.
    return {B::OnePlusRMinus2L, B::TwoMinus2L, B::TwoRMinusL, B::TwoMinusL,
            B::TwoR, B::OnePlusR};
  default:
    throw std::invalid_argument("breakpoint order exists only for interior "
                                "classes");
  }
}

/// Classification of (l, r): rho, its class, and for interior classes the
/// six breakpoints listed in the order the class prescribes.
struct RhoClassification {
  RhoClass cls = RhoClass::Zero;
  double rho = 0.0;
  std::array<double, 6> endpoints{};
};

inline void check_endpoints(double l, double r) {
  if (!(l >= 0.0 && l < r && r <= 1.0)) {
    throw std::domain_error("pivot endpoints must satisfy 0 <= l < r <= 1");
  }
  if (l == 0.0 && r == 1.0) {
    throw std::domain_error("degenerate pivot endpoints (0, 1)");
  }
}

inline RhoClassification rho_class(double l, double r) {
  check_endpoints(l, r);
  RhoClassification out;
  if (l == 0.0) {
    out.cls = RhoClass::Zero;
    return out;
  }
  if (r == 1.0) {
    out.cls = RhoClass::Infinite;
    out.rho = INFINITY;
    return out;
  }
  out.rho = l / (1.0 - r);
  // Ties at rho in {1/2, 1, 2} go to the upper class; the two orders agree
  // there because the tied breakpoints coincide.
  if (out.rho < 0.5) {
    out.cls = RhoClass::Lo;
  } else if (out.rho < 1.0) {
    out.cls = RhoClass::Mid;
  } else if (out.rho < 2.0) {
    out.cls = RhoClass::Hi;
  } else {
    out.cls = RhoClass::Top;
  }
  const auto order = breakpoint_order(out.cls);
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.endpoints[i] = breakpoint_value(order[i], l, r);
  }
  return out;
}

/// A sampled or given third interval (l3, r3) around quantile t.
struct PivotTriple {
  double t = 0.5;
  double l3 = 0.0;
  double r3 = 1.0;
  RhoClass rho_class = RhoClass::Zero;

  static PivotTriple make(double t, double l, double r) {
    check_endpoints(l, r);
    if (!(l <= t && t <= r) || (t == l && l > 0.0) || (t == r && r < 1.0)) {
      throw std::domain_error("quantile must lie inside the pivot interval");
    }
    return PivotTriple{t, l, r, qqlab::rho_class(l, r).cls};
  }

  /// Triple whose quantile is irrelevant to the question asked (the
  /// conditional density depends on (l, r) only).
  static PivotTriple from_endpoints(double l, double r) {
    check_endpoints(l, r);
    return make(0.5 * (l + r), l, r);
  }
};

/// alpha: the real root of 1 + x - x ln x = 0; beta = 1 / alpha.
struct AlphaBeta {
  double alpha;
  double beta;
};

inline double alpha_residual(double x) { return 1.0 + x - x * std::log(x); }

inline const AlphaBeta &alpha_beta() {
  static const AlphaBeta value = [] {
    // f(x) = 1 + x - x ln x is decreasing on (1, inf) with f(3) > 0 > f(4).
    double lo = 3.0;
    double hi = 4.0;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (alpha_residual(mid) > 0.0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
      x -= alpha_residual(x) / (-std::log(x));
    }
    if (std::abs(alpha_residual(x)) > 1e-12) {
      throw std::logic_error("alpha root did not converge");
    }
    return AlphaBeta{x, 1.0 / x};
  }();
  return value;
}

/// Joint density of (L_3, R_3) on 0 < l < t < r < 1.
inline double g_density(double l, double r) {
  if (!(0.0 < l && l < r && r < 1.0)) {
    throw std::domain_error("g_density requires 0 < l < r < 1");
  }
  const double log_inv_width = -std::log(r - l);
  const double log_inv_r = -std::log(r);
  const double log_inv_1ml = -std::log1p(-l);
  return (1.0 / (l * (1.0 - l)) + 1.0 / (r * (1.0 - r))) * log_inv_width -
         (1.0 / l + 1.0 / (1.0 - r)) * (log_inv_r + log_inv_1ml);
}

/// Conditional density of X given (L_3, R_3) = (l, r), with the per-(l, r)
/// constants hoisted so repeated evaluation in the mixture estimator is cheap.
/// Pieces are right-continuous: every indicator is on [lo, hi).
class ConditionalDensity {
public:
  ConditionalDensity(double l, double r) : l_(l), r_(r) {
    const auto rc = qqlab::rho_class(l, r);
    cls_ = rc.cls;
    switch (cls_) {
    case RhoClass::Zero: {
      const double lg = -std::log(r);
      scale_ = 2.0 / (lg * lg);
      lo_ = 2.0 * r;
      break;
    }
    case RhoClass::Infinite: {
      const double lg = -std::log1p(-l);
      scale_ = 2.0 / (lg * lg);
      lo_ = 2.0 - 2.0 * l;
      break;
    }
    default:
      g_ = g_density(l, r);
      inv_g_ = 1.0 / g_;
      lo_ = std::min(2.0 * r - l, 1.0 + r - 2.0 * l);
      break;
    }
  }

  double l() const { return l_; }
  double r() const { return r_; }
  RhoClass rho_class() const { return cls_; }
  /// Smallest point of the support; the density vanishes on (-inf, lo) and
  /// on [2, inf).
  double support_lo() const { return lo_; }
  static constexpr double support_hi() { return 2.0; }
  /// g(l, r) for interior classes, 0 otherwise.
  double g() const { return g_; }

  double operator()(double x) const {
    if (x < lo_ || x >= 2.0) {
      return 0.0;
    }
    switch (cls_) {
    case RhoClass::Zero:
      return zero_class(x);
    case RhoClass::Infinite:
      return infinite_class(x);
    default:
      return inv_g_ * six_subcases(x);
    }
  }

  /// Interior classes only: the regrouped form with m_1..m_4.
  double assembled(double x) const {
    if (!is_interior(cls_)) {
      throw std::invalid_argument(
          "assembled form exists only for interior rho classes");
    }
    const double l = l_;
    const double r = r_;
    const double a = 2 * r - l;
    const double c = 1 + r - 2 * l;
    const double d = 1 + r;
    const double f = 2 - l;
    const double r_term = 1.0 / (r * (x - r));
    const double l_pair = 2.0 / ((x + l) * (x - l));
    const double one_minus_l_term = 1.0 / ((1 - l) * (x - 1 + l));
    const double r_pair = 2.0 / ((x + 1 - r) * (x + r - 1));
    const double m1 = r_term + l_pair;
    const double m2 = one_minus_l_term + l_pair;
    const double m3 = r_pair + one_minus_l_term;
    const double m4 = r_term + r_pair;
    double s = 0.0;
    if (l / (1 - r) <= 1.0) {
      if (a <= x && x < c) {
        s = m1;
      } else if (c <= x && x < d) {
        s = m2 + m4;
      } else if (d <= x && x < f) {
        s = m2;
      }
    } else {
      if (c <= x && x < a) {
        s = m3;
      } else if (a <= x && x < f) {
        s = m2 + m4;
      } else if (f <= x && x < d) {
        s = m4;
      }
    }
    return inv_g_ * s;
  }

private:
  double zero_class(double x) const {
    const double r = r_;
    if (x < 1.0 + r) {
      return scale_ / x * std::log((x - r) / r);
    }
    return scale_ / x * -std::log(x - 1.0);
  }

  double infinite_class(double x) const {
    const double l = l_;
    if (x < 2.0 - l) {
      return scale_ / x * std::log((x - 1.0 + l) / (1.0 - l));
    }
    return scale_ / x * -std::log(x - 1.0);
  }

  // Sum of the six subcase contributions (llr, rrl, lrl, rlr, rll, lrr).
  double six_subcases(double x) const {
    const double l = l_;
    const double r = r_;
    double s = 0.0;
    if (2 - 2 * l <= x && x < 2 - l) {
      s += 1.0 / ((1 - l) * (x - 1 + l));
    }
    if (2 * r <= x && x < 1 + r) {
      s += 1.0 / (r * (x - r));
    }
    if (1 + r - 2 * l <= x && x < 1 + r) {
      s += 2.0 / ((x + 1 - r) * (x + r - 1));
    }
    if (2 * r - l <= x && x < 2 - l) {
      s += 2.0 / ((x + l) * (x - l));
    }
    if (2 * r - l <= x && x < 2 * r) {
      s += 1.0 / (r * (x - r));
    }
    if (1 + r - 2 * l <= x && x < 2 - 2 * l) {
      s += 1.0 / ((1 - l) * (x - 1 + l));
    }
    return s;
  }

  double l_;
  double r_;
  RhoClass cls_;
  double g_ = 0.0;
  double inv_g_ = 0.0;
  double scale_ = 0.0;
  double lo_ = 0.0;
};

inline double cond_density(const PivotTriple &triple, double x) {
  return ConditionalDensity(triple.l3, triple.r3)(x);
}

inline double cond_density_assembled(const PivotTriple &triple, double x) {
  return ConditionalDensity(triple.l3, triple.r3).assembled(x);
}

/// Pointwise bound on the interior conditional density.
inline double bound_b(double l, double r) {
  const double w = r - l;
  return 1.5 / g_density(l, r) * (1.0 / (r * w) + 1.0 / ((1.0 - l) * w));
}

inline double bound_b1(double r) {
  return 2.0 / (-std::log(r)) / (1.0 + r);
}

inline double bound_b2(double r) {
  const double lg = -std::log(r);
  return 2.0 / (lg * lg) / r * alpha_beta().beta;
}

/// Optimal constant bound on the boundary-class conditional densities
/// (l = 0 or r = 1). The switch between b_1 and b_2 happens at beta.
inline double bound_bt(double t, double l, double r) {
  const auto triple = PivotTriple::make(t, l, r);
  const double beta = alpha_beta().beta;
  switch (triple.rho_class) {
  case RhoClass::Zero:
    return r >= beta ? bound_b1(r) : bound_b2(r);
  case RhoClass::Infinite:
    return 1.0 - l >= beta ? bound_b1(1.0 - l) : bound_b2(1.0 - l);
  default:
    throw std::invalid_argument("bound_bt applies to boundary classes; use "
                                "bound_b for interior triples");
  }
}

/// Bound on cond_density for any class.
inline double cond_density_bound(const PivotTriple &triple) {
  return is_interior(triple.rho_class)
             ? bound_b(triple.l3, triple.r3)
             : bound_bt(triple.t, triple.l3, triple.r3);
}

/// Three steps of the interval recursion at t, returning (L_3, R_3).
inline PivotTriple sample_pivot_triple(double t, UniformStream &rng) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::domain_error("sample_pivot_triple requires 0 < t < 1");
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double pivot = lo + (hi - lo) * rng.uniform();
    if (pivot <= t) {
      lo = pivot;
    } else {
      hi = pivot;
    }
  }
  if (lo == 0.0 && hi == 1.0) {
    throw std::logic_error("three pivots left the unit interval unchanged");
  }
  return PivotTriple{t, lo, hi, rho_class(lo, hi).cls};
}

} // namespace qqlab

#endif // QQLAB_CONDITIONAL_DENSITY_HPP_

#ifndef QQLAB_KEY_PROCESS_HPP_
#define QQLAB_KEY_PROCESS_HPP_

// Coupled uniform-key construction of QuickSelect / QuickVal / the limiting
// interval process, plus exact small-n oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qqlab/errors.hpp"
#include "qqlab/rng.hpp"

namespace qqlab {

using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const Rational &q) {
  const auto num = boost::multiprecision::numerator(q);
  const auto den = boost::multiprecision::denominator(q);
  if (den == 1) {
    return num.str();
  }
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational &q) { return q.convert_to<double>(); }

/// H_n = 1 + 1/2 + ... + 1/n, exactly; H_0 = 0.
inline Rational harmonic(unsigned n) {
  Rational h = 0;
  for (unsigned i = 1; i <= n; ++i) {
    h += Rational(1, i);
  }
  return h;
}

inline double harmonic_double(std::uint64_t n) {
  double h = 0.0;
  // Summed smallest-first for accuracy.
  for (std::uint64_t i = n; i >= 1; --i) {
    h += 1.0 / static_cast<double>(i);
  }
  return h;
}

/// Binary entropy in nats, -x ln x - (1-x) ln(1-x), with 0 ln 0 = 0.
inline double entropy_h(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("entropy_h: argument outside [0,1]");
  }
  auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
  return -xlogx(x) - xlogx(1.0 - x);
}

/// Limit mean E Z(t) = 2 + 2 H(t).
inline double limit_mean(double t) { return 2.0 + 2.0 * entropy_h(t); }

inline void check_rank(std::uint64_t n, std::uint64_t m) {
  if (n < 1 || m < 1 || m > n) {
    throw std::out_of_range("rank m must satisfy 1 <= m <= n (n=" +
                            std::to_string(n) + ", m=" + std::to_string(m) +
                            ")");
  }
}

/// Knuth's exact mean of the QuickSelect(n, m) comparison count:
/// 2[(n+1)H_n - (n+3-m)H_{n+1-m} - (m+2)H_m + (n+3)].
inline Rational expected_comparisons_exact(unsigned n, unsigned m) {
  check_rank(n, m);
  const Rational value = Rational(n + 1) * harmonic(n) -
                         Rational(n + 3 - m) * harmonic(n + 1 - m) -
                         Rational(m + 2) * harmonic(m) + Rational(n + 3);
  return 2 * value;
}

/// Double-precision evaluation of the same formula for large n.
inline double expected_comparisons(std::uint64_t n, std::uint64_t m) {
  check_rank(n, m);
  const auto dn = static_cast<double>(n);
  const auto dm = static_cast<double>(m);
  return 2.0 * ((dn + 1.0) * harmonic_double(n) -
                (dn + 3.0 - dm) * harmonic_double(n + 1 - m) -
                (dm + 2.0) * harmonic_double(m) + (dn + 3.0));
}

/// One QuickSelect run: n keys, target rank m, total comparisons, and the
/// ranks of the pivots in the order they were used.
struct SelectTrace {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t comparisons = 0;
  std::vector<std::uint64_t> pivot_ranks;
};

/// Direct QuickSelect on a permutation of {1..n} given in arrival order.
/// The pivot is the first element of the current sublist; each partition
/// step costs (sublist size - 1) comparisons and keeps arrival order.
inline SelectTrace quickselect_on_permutation(std::vector<std::uint64_t> keys,
                                              std::uint64_t m) {
  SelectTrace trace;
  trace.n = keys.size();
  trace.m = m;
  check_rank(trace.n, m);
  while (keys.size() > 1) {
    const std::uint64_t pivot = keys.front();
    trace.comparisons += keys.size() - 1;
    trace.pivot_ranks.push_back(pivot);
    if (pivot == m) {
      return trace;
    }
    const bool go_left = m < pivot;
    std::erase_if(keys, [&](std::uint64_t k) {
      return go_left ? k >= pivot : k <= pivot;
    });
  }
  return trace;
}

/// Walks all n! arrival orders and calls visit(cost) for each.
template <class Visit>
void enumerate_quickselect_costs(unsigned n, unsigned m, Visit &&visit) {
  check_rank(n, m);
  if (n > 9) {
    throw std::out_of_range("exhaustive enumeration is capped at n = 9");
  }
  std::vector<std::uint64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  do {
    visit(quickselect_on_permutation(perm, m).comparisons);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

inline std::uint64_t factorial(unsigned n) {
  std::uint64_t f = 1;
  for (unsigned i = 2; i <= n; ++i) {
    f *= i;
  }
  return f;
}

/// Exact mean comparison count by enumerating every permutation (n <= 9).
inline Rational brute_force_expected_comparisons(unsigned n, unsigned m) {
  std::uint64_t total = 0;
  enumerate_quickselect_costs(n, m, [&](std::uint64_t c) { total += c; });
  return Rational(total, factorial(n));
}

/// Truncation constant: cutting the interval sum once the current width is
/// below eps leaves an expected remainder of at most (2 + 2 ln 2) eps.
inline constexpr double kTruncationBiasFactor = 2.0 + 2.0 * std::numbers::ln2;

inline constexpr double kDefaultTruncEps = 1e-8;

/// One realization of the nested search intervals for quantile t.
struct IntervalPath {
  double t = 0.0;
  std::vector<std::pair<double, double>> pairs; ///< (L_k, R_k), k = 1..K
  double j_value = 0.0;                         ///< sum of R_k - L_k
  double trunc_eps = kDefaultTruncEps;

  std::size_t steps() const { return pairs.size(); }
  double z_value() const { return 1.0 + j_value; }
  double bias_bound() const { return kTruncationBiasFactor * trunc_eps; }
};

inline void check_quantile(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("quantile t must lie in [0,1]");
  }
}

inline void check_trunc_eps(double eps) {
  if (!(eps > 0.0)) {
    throw std::domain_error("trunc_eps must be positive");
  }
}

/// Simulates the limiting interval process at t. Pivots are drawn uniformly
/// on the current interval; a pivot <= t replaces L, otherwise R. Stops once
/// the width drops below trunc_eps.
inline IntervalPath simulate_interval_process(double t, double trunc_eps,
                                              UniformStream &rng) {
  check_quantile(t);
  check_trunc_eps(trunc_eps);
  IntervalPath path;
  path.t = t;
  path.trunc_eps = trunc_eps;
  double lo = 0.0;
  double hi = 1.0;
  for (;;) {
    const double pivot = lo + (hi - lo) * rng.uniform();
    if (pivot <= t) {
      lo = pivot;
    } else {
      hi = pivot;
    }
    const double width = hi - lo;
    path.pairs.emplace_back(lo, hi);
    path.j_value += width;
    if (width < trunc_eps) {
      break;
    }
  }
  return path;
}

/// J(t) draw without recording the path (hot loop of every estimator).
inline double sample_j(double t, double trunc_eps, UniformStream &rng) {
  double lo = 0.0;
  double hi = 1.0;
  double j = 0.0;
  for (;;) {
    const double pivot = lo + (hi - lo) * rng.uniform();
    if (pivot <= t) {
      lo = pivot;
    } else {
      hi = pivot;
    }
    const double width = hi - lo;
    j += width;
    if (width < trunc_eps) {
      return j;
    }
  }
}

namespace detail {

/// Comparison count from the coupled interval recursion: at step k the pivot
/// is the first key inside (L_{k-1}, R_{k-1}), and S_{n,k} counts the later
/// keys inside that open interval. Scans all keys per step on purpose; this
/// is the literal construction, not the fast path.
inline std::uint64_t coupled_count(const std::vector<double> &keys,
                                   double target,
                                   std::vector<double> *pivots = nullptr) {
  const std::size_t n = keys.size();
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t total = 0;
  for (;;) {
    std::size_t tau = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (lo < keys[i] && keys[i] < hi) {
        tau = i;
        break;
      }
    }
    if (tau == n) {
      return total;
    }
    const double pivot = keys[tau];
    if (pivots) {
      pivots->push_back(pivot);
    }
    for (std::size_t i = tau + 1; i < n; ++i) {
      total += (lo < keys[i] && keys[i] < hi) ? 1 : 0;
    }
    // rank(pivot) <= m  <=>  pivot <= target key
    const double new_lo = pivot <= target ? pivot : lo;
    const double new_hi = pivot >= target ? pivot : hi;
    lo = new_lo;
    hi = new_hi;
  }
}

inline std::vector<double> draw_keys(std::uint64_t n, UniformStream &rng) {
  std::vector<double> keys(n);
  for (auto &k : keys) {
    k = rng.uniform();
  }
  return keys;
}

inline double order_statistic(std::vector<double> keys, std::uint64_t m) {
  std::nth_element(keys.begin(), keys.begin() + static_cast<long>(m - 1),
                   keys.end());
  return keys[m - 1];
}

} // namespace detail

/// QuickSelect(n, m) on n fresh uniform keys, counted twice: through the
/// coupled interval recursion and by direct partitioning of the induced
/// permutation. Throws ConsistencyError if the two counts differ.
inline SelectTrace simulate_quickselect(std::uint64_t n, std::uint64_t m,
                                        UniformStream &rng) {
  check_rank(n, m);
  const auto keys = detail::draw_keys(n, rng);
  const double target = detail::order_statistic(keys, m);
  const std::uint64_t coupled = detail::coupled_count(keys, target);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<std::uint64_t> ranks(n);
  for (std::size_t r = 0; r < n; ++r) {
    ranks[order[r]] = r + 1;
  }
  SelectTrace trace = quickselect_on_permutation(std::move(ranks), m);
  if (trace.comparisons != coupled) {
    throw ConsistencyError("coupled count " + std::to_string(coupled) +
                           " != direct count " +
                           std::to_string(trace.comparisons));
  }
  return trace;
}

/// Fast QuickSelect comparison count for bulk sampling: keeps only the keys
/// of the current sublist, in arrival order. Same law and same value as
/// simulate_quickselect on the same keys.
inline std::uint64_t sample_quickselect_cost(std::uint64_t n, std::uint64_t m,
                                             UniformStream &rng) {
  check_rank(n, m);
  auto keys = detail::draw_keys(n, rng);
  const double target = detail::order_statistic(keys, m);
  std::uint64_t total = 0;
  while (keys.size() > 1) {
    const double pivot = keys.front();
    total += keys.size() - 1;
    if (pivot == target) {
      break;
    }
    const bool keep_above = pivot < target;
    std::size_t out = 0;
    for (std::size_t i = 1; i < keys.size(); ++i) {
      const double k = keys[i];
      if (keep_above ? k > pivot : k < pivot) {
        keys[out++] = k;
      }
    }
    keys.resize(out);
  }
  return total;
}

/// Rank sequence m_n(t) = floor(n t) + 1 (capped at n, so t = 1 gives n).
inline std::uint64_t quantile_rank(std::uint64_t n, double t) {
  check_quantile(t);
  const auto m =
      static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * t)) + 1;
  return std::min(m, n);
}

/// QuickVal(n, t): locate the population t-quantile among n uniform keys.
/// Pivot-versus-t comparisons are not counted.
inline std::uint64_t simulate_quickval(std::uint64_t n, double t,
                                       UniformStream &rng) {
  check_quantile(t);
  if (n < 1) {
    throw std::out_of_range("simulate_quickval: n must be >= 1");
  }
  auto keys = detail::draw_keys(n, rng);
  std::uint64_t total = 0;
  while (!keys.empty()) {
    const double pivot = keys.front();
    total += keys.size() - 1;
    const bool keep_above = pivot <= t;
    std::size_t out = 0;
    for (std::size_t i = 1; i < keys.size(); ++i) {
      const double k = keys[i];
      if (keep_above ? k > pivot : k < pivot) {
        keys[out++] = k;
      }
    }
    keys.resize(out);
  }
  return total;
}

/// Grübel's chain on {(i, j): 1 <= j <= i <= n} from (n, m), absorbed at
/// (1, 1). Returns n^{-1} * sum over visited states of (i - 1).
inline double simulate_grubel_chain(std::uint64_t n, std::uint64_t m,
                                    UniformStream &rng) {
  check_rank(n, m);
  std::uint64_t i = n;
  std::uint64_t j = m;
  std::uint64_t total = 0;
  while (!(i == 1 && j == 1)) {
    total += i - 1;
    // i equally likely successors: j-1 moves of both coordinates, the
    // absorbing state, and i-j moves of the size alone.
    const std::uint64_t u = rng.below(i);
    if (u + 1 < j) {
      const std::uint64_t k = u + 1;
      i -= k;
      j -= k;
    } else if (u + 1 == j) {
      i = 1;
      j = 1;
    } else {
      const std::uint64_t k = u + 1 - j;
      i -= k;
    }
  }
  return static_cast<double>(total) / static_cast<double>(n);
}

} // namespace qqlab

#endif // QQLAB_KEY_PROCESS_HPP_

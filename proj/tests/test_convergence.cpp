#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "qqlab/convergence.hpp"
#include "test_support.hpp"

namespace qqlab {
namespace {

EmpiricalSample uniform_sample(std::size_t n, double shift, std::uint64_t seed) {
  UniformStream rng(seed, streams::kConvergence);
  std::vector<double> v(n);
  for (auto &x : v) {
    x = rng.uniform() + shift;
  }
  return EmpiricalSample(0.0, std::move(v));
}

// Worst case needs every pivot to be an extreme of its sublist (sizes n, n-1,
// ..., 2), or the target itself once two keys remain.
Rational worst_case_recursive(unsigned k, unsigned j) {
  static std::map<std::pair<unsigned, unsigned>, Rational> memo;
  if (k <= 1) {
    return Rational(1);
  }
  if (auto it = memo.find({k, j}); it != memo.end()) {
    return it->second;
  }
  Rational sum(0);
  for (unsigned p = 1; p <= k; ++p) {
    if (p == j) {
      sum += k == 2 ? 1 : 0;
    } else if (p == 1) {
      sum += worst_case_recursive(k - 1, j - 1);
    } else if (p == k) {
      sum += worst_case_recursive(k - 1, j);
    }
  }
  return memo[{k, j}] = sum / Rational(k);
}

TEST(Ks, IdenticalAndShifted) {
  const auto a = uniform_sample(50'000, 0.0, 1);
  EXPECT_EQ(ks_distance(a, a), 0.0);
  const auto b = uniform_sample(50'000, 0.1, 2);
  EXPECT_NEAR(ks_distance(a, b), 0.1, 4 * ks_noise_scale(a.n(), b.n()));
  const double d =
      ks_distance(a, [](double x) { return std::clamp(x - 0.1, 0.0, 1.0); });
  EXPECT_NEAR(d, 0.1, 0.02);
}

TEST(Ks, HandlesTiesAndRejectsEmpty) {
  const EmpiricalSample a(0.0, {1, 1, 2, 3});
  const EmpiricalSample b(0.0, {1, 2, 2, 3});
  EXPECT_DOUBLE_EQ(ks_distance(a, b), 0.25);
  EXPECT_THROW(ks_distance(a, EmpiricalSample{}), std::invalid_argument);
}

TEST(Wasserstein, Basics) {
  const EmpiricalSample zeros(0.0, {0, 0, 0});
  const EmpiricalSample ones(0.0, {1, 1, 1});
  EXPECT_EQ(wasserstein1(zeros, zeros), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1(zeros, ones), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein1_quantile(zeros, ones), 1.0);
  const auto a = uniform_sample(1000, 0.0, 3);
  const auto b = uniform_sample(1000, 0.0, 4);
  EXPECT_NEAR(wasserstein1(a, b), wasserstein1_quantile(a, b), 1e-12);
  const EmpiricalSample two(0.0, {0, 2});
  EXPECT_DOUBLE_EQ(wasserstein1_quantile(zeros, two), 1.0);
  EXPECT_THROW(wasserstein1(zeros, two), std::invalid_argument);
}

TEST(DeltaNt, Values) {
  EXPECT_NEAR(delta_nt(10, 0.3), 0.2, 1e-15);
  EXPECT_NEAR(delta_nt(100, 0.5), 0.02, 1e-15);
  EXPECT_LT(delta_nt(10'000, 0.3), delta_nt(1'000, 0.3));
}

TEST(ExactD1, PositiveDecreasingAndMatchesSimulation) {
  double prev = INFINITY;
  for (std::uint64_t n : {10u, 100u, 1000u, 10000u}) {
    const double d = exact_d1(n, 0.3);
    EXPECT_GT(d, 0.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
  const UniformStream rng(5, streams::kConvergence);
  const auto x = sample_scaled_cost(100, 0.3, 100'000, rng.substream(0));
  const auto z = sample_z(0.3, 100'000, kDefaultTruncEps, rng.substream(1));
  const RateRow row = rate_row(100, 0.3, x, z);
  EXPECT_EQ(row.d1_exact, exact_d1(100, 0.3));
  EXPECT_NEAR(row.d1, row.d1_exact, 4 * row.d1_se + 0.01);
  EXPECT_LE(row.dks, std::sqrt(20 * row.d1) + 3 * row.dks_se);
  EXPECT_NEAR(row.bound, row.delta * std::log(1 / row.delta), 1e-15);
}

TEST(KsRate, DecreasesInN) {
  const UniformStream rng(6, streams::kConvergence);
  const auto z = sample_z(0.3, 40'000, kDefaultTruncEps, rng.substream(0));
  const auto x100 = sample_scaled_cost(100, 0.3, 40'000, rng.substream(1));
  const auto x10k = sample_scaled_cost(10'000, 0.3, 40'000, rng.substream(2));
  EXPECT_LT(ks_distance(x10k, z), ks_distance(x100, z));
}

TEST(KsContinuity, NearbyQuantiles) {
  const UniformStream rng(7, streams::kConvergence);
  const std::size_t n = 100'000;
  const auto z30 = sample_z(0.3, n, kDefaultTruncEps, rng.substream(0));
  const auto z31 = sample_z(0.31, n, kDefaultTruncEps, rng.substream(1));
  const auto z35 = sample_z(0.35, n, kDefaultTruncEps, rng.substream(2));
  const auto z40 = sample_z(0.4, n, kDefaultTruncEps, rng.substream(3));
  const double se = ks_noise_scale(n, n);
  EXPECT_LT(ks_distance(z30, z31), ks_distance(z30, z35) + 3 * se);
  EXPECT_GE(ks_distance(z30, z40), 0.01 / 150 - 3 * se);
  EXPECT_GT(ks_distance(z30, z40), 5 * se);
}

TEST(LdInterval, Examples) {
  const LdInterval a = ld_interval_from_delta(1e-4, 1.5, 0.5);
  const double big_l = std::log(1e4);
  const double ll = std::log(big_l);
  EXPECT_NEAR(a.upper, 0.5 * big_l / ll * (1 - 0.5 / ll), 1e-12);
  EXPECT_NEAR(a.upper, 1.607, 1e-3);
  EXPECT_EQ(a.lower, 1.5);
  EXPECT_FALSE(a.empty());
  EXPECT_TRUE(ld_interval_from_delta(1e-2, 2.0, 1.0).empty());
  EXPECT_LT(ld_interval_from_delta(1e-3, 1.5, 0.5).upper,
            ld_interval_from_delta(1e-8, 1.5, 0.5).upper);
  EXPECT_NEAR(ld_interval(10'000, 0.3, 1.5, 0.5).upper,
              ld_interval_from_delta(delta_nt(10'000, 0.3), 1.5, 0.5).upper,
              1e-15);
}

TEST(LdInterval, Rejects) {
  EXPECT_THROW(ld_interval_from_delta(0.0, 1.5, 1.0), std::domain_error);
  EXPECT_THROW(ld_interval_from_delta(1e-4, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(ld_interval_from_delta(1e-4, 1.5, 0.0), std::domain_error);
  EXPECT_THROW(ld_interval_from_delta(0.5, 1.5, 1.0), std::domain_error);
}

TEST(LdRatio, NearOneAtLowerEnd) {
  const LdRatio r = ld_ratio_check(0.3, 1.5, 10'000, 20'000, kDefaultTruncEps,
                                   UniformStream(8, streams::kConvergence));
  EXPECT_GE(r.ratio, 0.8);
  EXPECT_LE(r.ratio, 1.25);
  EXPECT_GT(r.ratio_se, 0.0);
  const LdRatio low = ld_ratio_check(0.3, 0.2, 1'000, 5'000, kDefaultTruncEps,
                                     UniformStream(9, streams::kConvergence));
  EXPECT_EQ(low.ratio, 1.0);
}

TEST(LdRatio, GuardsDeepTail) {
  EXPECT_THROW(ld_ratio_check(0.3, 8.0, 1'000, 2'000, kDefaultTruncEps,
                              UniformStream(10, streams::kConvergence)),
               NumericalGuardError);
}

TEST(Dominance, ChainHolds) {
  for (double t : {0.3, 0.5}) {
    const CheckReport r = dominance_check(t, 1'000, 50'000, kDefaultTruncEps,
                                          UniformStream(11, streams::kConvergence));
    EXPECT_TRUE(r.pass) << t;
  }
}

TEST(Dominance, DetectsReversedOrder) {
  const auto a = uniform_sample(20'000, 0.0, 12);
  const auto b = uniform_sample(20'000, 0.2, 13);
  const auto grid = uniform_grid(0.0, 1.2, 50);
  EXPECT_LE(dominance_margin(a, b, grid).worst_excess, 0.0);
  const auto reversed = dominance_margin(b, a, grid);
  EXPECT_GT(reversed.worst_excess, 0.1);
  EXPECT_GT(reversed.at_x, 0.2);
}

TEST(WorstCase, Examples) {
  const auto w21 = worst_case_probability(2, 1);
  EXPECT_EQ(w21.enumerated, Rational(1));
  EXPECT_EQ(w21.formula, Rational(1, 2));
  const auto w32 = worst_case_probability(3, 2);
  EXPECT_EQ(w32.enumerated, Rational(2, 3));
  EXPECT_EQ(w32.formula, Rational(1, 3));
}

TEST(WorstCase, EnumerationMatchesRecursionAndDominatesFormula) {
  for (unsigned n = 1; n <= 8; ++n) {
    for (unsigned m = 1; m <= n; ++m) {
      const auto w = worst_case_probability(n, m);
      EXPECT_EQ(w.enumerated, worst_case_recursive(n, m))
          << "n=" << n << " m=" << m;
      EXPECT_GE(w.enumerated, w.formula) << "n=" << n << " m=" << m;
    }
  }
  EXPECT_THROW(worst_case_probability(3, 4), std::out_of_range);
}

} // namespace
} // namespace qqlab

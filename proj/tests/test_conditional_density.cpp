#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "qqlab/acceptance.hpp"
#include "qqlab/conditional_density.hpp"
#include "qqlab/quadrature.hpp"
#include "test_support.hpp"

namespace qqlab {
namespace {

using acceptance::density_breaks;

double mass(double l, double r) {
  const ConditionalDensity cd(l, r);
  return integrate_piecewise([&](double x) { return cd(x); }, cd.support_lo(),
                             2.0, density_breaks(l, r), 1e-10);
}

/// x moved one ulp right when it sits on a piece boundary.
double off_breakpoints(double x, double l, double r) {
  for (double e : density_breaks(l, r)) {
    if (std::abs(x - e) <= 1e-15) {
      return std::nextafter(e, INFINITY);
    }
  }
  return x;
}

TEST(RhoClass, Examples) {
  EXPECT_EQ(rho_class(0.0, 0.5).cls, RhoClass::Zero);
  EXPECT_EQ(rho_class(0.3, 1.0).cls, RhoClass::Infinite);
  const auto mid = rho_class(0.3, 0.5);
  EXPECT_EQ(mid.cls, RhoClass::Mid);
  EXPECT_NEAR(mid.rho, 0.6, 1e-15);
  EXPECT_EQ(rho_class(0.1, 0.9).cls, RhoClass::Hi);
  EXPECT_EQ(rho_class(0.5, 0.9).cls, RhoClass::Top);
}

TEST(RhoClass, LoOrder) {
  const auto c = rho_class(0.1, 0.5);
  EXPECT_EQ(c.cls, RhoClass::Lo);
  const double expected[] = {0.9, 1.0, 1.3, 1.5, 1.8, 1.9};
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(c.endpoints[i], expected[i], 1e-15) << i;
  }
}

TEST(RhoClass, EndpointsSortedForEveryInteriorClass) {
  UniformStream rng(14, 1);
  int seen[6] = {};
  for (int i = 0; i < 20'000; ++i) {
    const double l = rng.uniform(0.0, 0.99);
    const double r = rng.uniform(l, 1.0);
    const auto c = rho_class(l, r);
    ++seen[static_cast<int>(c.cls)];
    if (!is_interior(c.cls)) {
      continue;
    }
    auto sorted = c.endpoints;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, c.endpoints) << "l=" << l << " r=" << r;
  }
  for (RhoClass k : {RhoClass::Lo, RhoClass::Mid, RhoClass::Hi, RhoClass::Top}) {
    EXPECT_GT(seen[static_cast<int>(k)], 100) << to_string(k);
  }
}

TEST(RhoClass, TopOrder) {
  // l = 0.6, r = 0.9: rho = 6.
  const auto c = rho_class(0.6, 0.9);
  EXPECT_EQ(c.cls, RhoClass::Top);
  const double expected[] = {0.7, 0.8, 1.2, 1.4, 1.8, 1.9};
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(c.endpoints[i], expected[i], 1e-15) << i;
  }
}

TEST(RhoClass, TiesGoToUpperClass) {
  EXPECT_EQ(rho_class(0.25, 0.5).cls, RhoClass::Mid); // rho = 1/2
  EXPECT_EQ(rho_class(0.25, 0.75).cls, RhoClass::Hi); // rho = 1
  EXPECT_EQ(rho_class(0.5, 0.75).cls, RhoClass::Top); // rho = 2
}

TEST(RhoClass, RejectsDegenerateInput) {
  EXPECT_THROW(rho_class(0.0, 1.0), std::domain_error);
  EXPECT_THROW(rho_class(0.5, 0.4), std::domain_error);
  EXPECT_THROW(rho_class(-0.1, 0.4), std::domain_error);
}

TEST(PivotTripleTest, QuantileMustBeInside) {
  EXPECT_NO_THROW(PivotTriple::make(0.3, 0.1, 0.5));
  EXPECT_THROW(PivotTriple::make(0.6, 0.1, 0.5), std::domain_error);
}

TEST(AlphaBetaTest, RootAndReciprocal) {
  const auto &ab = alpha_beta();
  EXPECT_LT(std::abs(alpha_residual(ab.alpha)), 1e-12);
  EXPECT_NEAR(ab.alpha * ab.beta, 1.0, 1e-14);
  EXPECT_NEAR(ab.alpha, 3.59112, 1e-5);
  EXPECT_NEAR(ab.beta, 0.27846, 1e-5);
}

TEST(GDensity, Values) {
  const double l = 0.25;
  const double r = 0.75;
  const double direct =
      (1 / (l * (1 - l)) + 1 / (r * (1 - r))) * std::log(1 / (r - l)) -
      (1 / l + 1 / (1 - r)) * (std::log(1 / r) + std::log(1 / (1 - l)));
  EXPECT_NEAR(g_density(l, r), direct, 1e-14);
  EXPECT_NEAR(g_density(l, r), 2.79066, 1e-5);
  EXPECT_NEAR(g_density(0.1, 0.6), g_density(0.4, 0.9), 1e-12);
}

TEST(GDensity, PositiveOnGrid) {
  for (int i = 1; i < 100; ++i) {
    for (int j = i + 1; j < 100; ++j) {
      EXPECT_GT(g_density(i / 100.0, j / 100.0), 0.0);
    }
  }
  EXPECT_THROW(g_density(0.0, 0.5), std::domain_error);
  EXPECT_THROW(g_density(0.5, 0.5), std::domain_error);
}

TEST(CondDensity, ZeroClassClosedForm) {
  const double r = 0.5;
  const double x = 1.2;
  const double lg = std::log(r);
  const double closed = 2.0 / (lg * lg) / x * std::log((x - r) / r);
  const auto tri = PivotTriple::make(0.3, 0.0, r);
  EXPECT_NEAR(cond_density(tri, x), closed, 1e-14);
  EXPECT_NEAR(cond_density(tri, x), 1.167205, 1e-6);
}

TEST(CondDensity, VanishesOutsideSupport) {
  UniformStream rng(2, 2);
  for (int i = 0; i < 200; ++i) {
    const auto tri = sample_pivot_triple(rng.uniform(), rng);
    const ConditionalDensity cd(tri.l3, tri.r3);
    EXPECT_EQ(cond_density(tri, 2.5), 0.0);
    EXPECT_EQ(cd(2.0), 0.0);
    EXPECT_EQ(cd(std::nextafter(cd.support_lo(), -INFINITY)), 0.0);
  }
}

TEST(CondDensity, NormalizesForAllClasses) {
  UniformStream rng(20, 1);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(mass(0.0, rng.uniform(0.05, 0.95)), 1.0, 1e-6);
    EXPECT_NEAR(mass(rng.uniform(0.05, 0.95), 1.0), 1.0, 1e-6);
  }
  int interior = 0;
  while (interior < 20) {
    const auto tri = sample_pivot_triple(rng.uniform(), rng);
    if (is_interior(tri.rho_class)) {
      EXPECT_NEAR(mass(tri.l3, tri.r3), 1.0, 1e-6)
          << to_string(tri.rho_class) << " " << tri.l3 << " " << tri.r3;
      ++interior;
    }
  }
}

TEST(CondDensity, AssembliesAgree) {
  const std::pair<double, double> fixed[] = {{0.1, 0.5}, {0.3, 0.5}};
  const double xs[] = {1.1, 1.35};
  for (int i = 0; i < 2; ++i) {
    const auto tri = PivotTriple::from_endpoints(fixed[i].first, fixed[i].second);
    EXPECT_NEAR(cond_density(tri, xs[i]), cond_density_assembled(tri, xs[i]),
                1e-12);
  }
  UniformStream rng(40, 4);
  int probes = 0;
  while (probes < 10'000) {
    const auto tri = sample_pivot_triple(rng.uniform(), rng);
    if (!is_interior(tri.rho_class)) {
      continue;
    }
    const double x = off_breakpoints(rng.uniform(0.0, 2.2), tri.l3, tri.r3);
    ASSERT_NEAR(cond_density(tri, x), cond_density_assembled(tri, x), 1e-12);
    ++probes;
  }
}

TEST(CondDensity, AssembliesRightContinuousAtEndpoints) {
  const double l = 0.1;
  const double r = 0.5;
  const auto tri = PivotTriple::from_endpoints(l, r);
  for (double e : rho_class(l, r).endpoints) {
    const double right = std::nextafter(e, INFINITY);
    EXPECT_NEAR(cond_density(tri, e), cond_density(tri, right), 1e-9) << e;
    EXPECT_NEAR(cond_density_assembled(tri, e),
                cond_density_assembled(tri, right), 1e-9)
        << e;
  }
}

TEST(CondDensity, AssembledRejectsBoundaryClasses) {
  EXPECT_THROW(cond_density_assembled(PivotTriple::make(0.2, 0.0, 0.5), 1.2),
               std::invalid_argument);
}

TEST(CondDensity, ReflectionSymmetry) {
  UniformStream rng(8, 8);
  for (int i = 0; i < 2000; ++i) {
    const auto tri = sample_pivot_triple(rng.uniform(), rng);
    const double x = rng.uniform(0.0, 2.1);
    const ConditionalDensity a(tri.l3, tri.r3);
    const ConditionalDensity b(1.0 - tri.r3, 1.0 - tri.l3);
    const double xa = off_breakpoints(x, tri.l3, tri.r3);
    const double xb = off_breakpoints(xa, 1.0 - tri.r3, 1.0 - tri.l3);
    if (xa != x || xb != xa) {
      continue;
    }
    EXPECT_NEAR(a(x), b(x), 1e-12 * std::max(1.0, a(x)));
  }
}

TEST(CondDensity, FiniteAndBoundedByClassBound) {
  UniformStream rng(9, 9);
  for (int i = 0; i < 2000; ++i) {
    const auto tri = sample_pivot_triple(rng.uniform(), rng);
    const double bound = cond_density_bound(tri);
    for (int j = 0; j < 20; ++j) {
      const double v = cond_density(tri, rng.uniform(0.0, 2.0));
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, bound + 1e-12);
    }
  }
}

TEST(BoundB, Value) {
  EXPECT_NEAR(bound_b(0.25, 0.75), 8.0 / g_density(0.25, 0.75), 1e-12);
  EXPECT_NEAR(bound_b(0.25, 0.75), 2.86671, 1e-5);
}

TEST(BoundB, DominatesInteriorDensity) {
  UniformStream rng(50, 5);
  int triples = 0;
  while (triples < 50) {
    const auto tri = sample_pivot_triple(rng.uniform(), rng);
    if (!is_interior(tri.rho_class)) {
      continue;
    }
    ++triples;
    const double b = bound_b(tri.l3, tri.r3);
    for (int j = 0; j < 200; ++j) {
      EXPECT_LE(cond_density(tri, rng.uniform(0.0, 2.0)), b + 1e-12);
    }
  }
}

TEST(BoundB, InteriorExpectation) {
  // E[b(L3, R3); interior] at several t, against pi^2/4 + (3/2) ln^2 2.
  const double cap = std::numbers::pi * std::numbers::pi / 4 +
                     1.5 * std::numbers::ln2 * std::numbers::ln2;
  EXPECT_NEAR(cap, 3.188, 1e-3);
  for (double t : {0.1, 0.3, 0.5}) {
    const auto v = sample_replicates(400'000, UniformStream(5, 100), [&](auto &r) {
      const auto tri = sample_pivot_triple(t, r);
      return is_interior(tri.rho_class) ? bound_b(tri.l3, tri.r3) : 0.0;
    });
    const MeanAccumulator acc = summarize(v);
    EXPECT_LE(acc.mean(), cap + 4 * acc.std_err()) << "t=" << t;
  }
}

TEST(BoundBt, KneeContinuity) {
  const double beta = alpha_beta().beta;
  EXPECT_NEAR(bound_b1(beta), bound_b2(beta), 1e-12);
  EXPECT_NEAR(bound_b1(beta), 2.0 / ((1 + beta) * (1 + beta)), 1e-12);
  EXPECT_NEAR(bound_b1(beta), 1.223637, 1e-6);
}

TEST(BoundBt, TightAtSixTenths) {
  const auto tri = PivotTriple::make(0.3, 0.0, 0.6);
  double best = 0.0;
  for (int i = 0; i <= 200'000; ++i) {
    best = std::max(best, cond_density(tri, 1.2 + 0.8 * i / 200'000.0));
  }
  EXPECT_NEAR(best, bound_b1(0.6), 1e-4);
  EXPECT_NEAR(cond_density(tri, 1.6), bound_b1(0.6), 1e-12);
  EXPECT_EQ(bound_bt(0.3, 0.0, 0.6), bound_b1(0.6));
}

TEST(BoundBt, DominatesBoundaryDensities) {
  UniformStream rng(60, 6);
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform(0.01, 0.99);
    const double r = rng.uniform(t, 1.0);
    const double l = rng.uniform(0.0, t);
    const double b0 = bound_bt(t, 0.0, r);
    const double b1 = bound_bt(t, l, 1.0);
    const ConditionalDensity c0(0.0, r);
    const ConditionalDensity c1(l, 1.0);
    for (int j = 0; j < 200; ++j) {
      const double x = rng.uniform(0.0, 2.0);
      EXPECT_LE(c0(x), b0 + 1e-12);
      EXPECT_LE(c1(x), b1 + 1e-12);
    }
  }
}

TEST(BoundBt, RejectsInteriorTriple) {
  EXPECT_THROW(bound_bt(0.3, 0.1, 0.5), std::invalid_argument);
}

TEST(SamplePivotTriple, ZeroClassMass) {
  const double t = 0.3;
  const double lt = std::log(t);
  const double expected = 0.5 * (2.0 - t * (lt * lt - 2 * lt + 2));
  EXPECT_NEAR(expected, 0.121376, 1e-6);
  const auto hits = sample_replicates(1'000'000, UniformStream(70, 1), [&](auto &r) {
    const auto tri = sample_pivot_triple(t, r);
    return tri.l3 == 0.0 && tri.r3 < 1.0 ? 1.0 : 0.0;
  });
  EXPECT_TRUE(testing::mean_within_se(hits, expected));
}

TEST(SamplePivotTriple, NeverDegenerate) {
  UniformStream rng(71, 1);
  for (int i = 0; i < 200'000; ++i) {
    const auto tri = sample_pivot_triple(0.5, rng);
    ASSERT_FALSE(tri.l3 == 0.0 && tri.r3 == 1.0);
    ASSERT_LE(tri.l3, 0.5);
    ASSERT_GT(tri.r3, 0.5);
  }
}

TEST(SamplePivotTriple, InteriorHistogramMatchesG) {
  const double t = 0.4;
  const int cells = 10;
  const std::size_t n = 1'000'000;
  std::vector<double> observed(cells * cells, 0.0);
  UniformStream rng(72, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto tri = sample_pivot_triple(t, rng);
    if (!is_interior(tri.rho_class)) {
      continue;
    }
    const int a = std::min(cells - 1, static_cast<int>(tri.l3 / t * cells));
    const int b =
        std::min(cells - 1, static_cast<int>((tri.r3 - t) / (1 - t) * cells));
    observed[a * cells + b] += 1.0;
  }
  using boost::math::quadrature::gauss_kronrod;
  double chi2 = 0.0;
  for (int a = 0; a < cells; ++a) {
    const double l0 = t * a / cells;
    const double l1 = t * (a + 1) / cells;
    for (int b = 0; b < cells; ++b) {
      const double r0 = t + (1 - t) * b / cells;
      const double r1 = t + (1 - t) * (b + 1) / cells;
      const double p = gauss_kronrod<double, 31>::integrate(
          [&](double l) {
            return gauss_kronrod<double, 31>::integrate(
                [&](double r) { return g_density(l, r); }, r0, r1, 10, 1e-12);
          },
          l0, l1, 10, 1e-11);
      const double e = p * static_cast<double>(n);
      const double o = observed[a * cells + b];
      chi2 += (o - e) * (o - e) / e;
    }
  }
  const boost::math::chi_squared dist(cells * cells - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 1 - 1e-3));
}

TEST(SamplePivotTriple, JointLawOfWidthSumMatchesConditionalDensity) {
  // Simulate (L3, R3, X = width_1 + width_2) jointly and compare
  // E[1{X <= x} - F_{L3,R3}(x)] with zero.
  const double t = 0.3;
  const double xs[] = {1.0, 1.4, 1.8};
  UniformStream rng(73, 1);
  std::vector<MeanAccumulator> diff(3);
  for (int i = 0; i < 20'000; ++i) {
    double lo = 0.0;
    double hi = 1.0;
    double x_sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double p = lo + (hi - lo) * rng.uniform();
      (p <= t ? lo : hi) = p;
      if (k < 2) {
        x_sum += hi - lo;
      }
    }
    const ConditionalDensity cd(lo, hi);
    for (int j = 0; j < 3; ++j) {
      double cdf = 0.0;
      if (xs[j] > cd.support_lo()) {
        cdf = integrate_piecewise([&](double y) { return cd(y); },
                                  cd.support_lo(), std::min(xs[j], 2.0),
                                  density_breaks(lo, hi), 1e-10);
      }
      diff[j].add((x_sum <= xs[j] ? 1.0 : 0.0) - cdf);
    }
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_TRUE(testing::within_se(diff[j].mean(), diff[j].std_err(), 0.0))
        << "x=" << xs[j];
  }
}

} // namespace
} // namespace qqlab

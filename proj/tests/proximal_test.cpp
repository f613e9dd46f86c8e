#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "metric_action_lab/proximal.hpp"
#include "oracles.hpp"

using namespace mal;

namespace {

ResolventOptions numeric() {
  ResolventOptions o;
  o.use_closed_form = false;
  return o;
}

FunctionalSpec half_quadratic() { return quadratic_functional(Space::euclidean(1), Point::euclidean({0.0}), 1.0); }

}  // namespace

TEST(Resolvent, QuadraticMatchesGridOracle) {
  const double oracle = oracle::grid_argmin([](double y) { return 0.5 * y * y + (y - 3.0) * (y - 3.0); }, -10, 10);
  EXPECT_NEAR(oracle, 2.0, 1e-7);
  const Space e = Space::euclidean(1);
  EXPECT_NEAR(resolvent_point(half_quadratic(), e, 0.5, Point::euclidean({3.0})).x(), 2.0, 1e-12);
  EXPECT_NEAR(resolvent_point(half_quadratic(), e, 0.5, Point::euclidean({3.0}), numeric()).x(), 2.0, 1e-8);
}

TEST(Resolvent, ZeroFunctionalIsIdentity) {
  Rng rng(1);
  for (const Space& s : {Space::euclidean(3), Space::half_line(), Space::tripod(3, 1.0), Space::quantile(4)}) {
    for (int k = 0; k < 20; ++k) {
      const Point x = random_point(s, rng, 2.0);
      EXPECT_EQ(distance(s, resolvent_point(zero_functional(), s, 0.7, x), x), 0.0);
      EXPECT_LE(distance(s, resolvent_point(zero_functional(), s, 0.7, x, numeric()), x), 1e-8) << s.describe();
    }
  }
}

TEST(Resolvent, Example2RampAgainstGridOracle) {
  const double h = 4.0, tau = 0.01;
  const auto g = [&](double y) { return (y <= 1 / h ? 1 - h * y : 0.0) + y * y / (2 * tau); };
  const double oracle = oracle::grid_argmin(g, 0.0, 1.0);
  EXPECT_NEAR(oracle, 0.04, 1e-7);
  const FunctionalSpec f = example2_functional(h);
  EXPECT_NEAR(resolvent_point(f, Space::half_line(), tau, Point::half_line(0.0)).x(), 0.04, 1e-12);
  EXPECT_NEAR(resolvent_point(f, Space::half_line(), tau, Point::half_line(0.0), numeric()).x(), oracle, 1e-8);
}

TEST(Resolvent, NumericMatchesClosedFormOnRandomInputs) {
  Rng rng(2024);
  std::uniform_real_distribution<double> tau_dist(0.01, 5.0);
  for (std::size_t n = 1; n <= 4; ++n) {
    const Space e = Space::euclidean(n);
    const FunctionalSpec f = quadratic_functional(e, e.origin(), 1.0);
    for (int k = 0; k < 25; ++k) {
      const double tau = tau_dist(rng);
      Point x = random_point(e, rng, 5.0);
      const Point u = resolvent_point(f, e, tau, x, numeric());
      for (double& c : x.coords) c /= 1.0 + tau;
      ASSERT_LE(distance(e, u, x), 1e-8) << "n=" << n << " tau=" << tau;
    }
  }
}

TEST(Resolvent, HalfLineAndQuantileNumericAgainstClosedForm) {
  Rng rng(9);
  for (const Space& s : {Space::half_line(), Space::quantile(3), Space::tripod({1.0, 2.0, 0.5})}) {
    const Point c = random_point(s, rng, 1.0);
    const FunctionalSpec f = quadratic_functional(s, c, 1.5);
    for (int k = 0; k < 20; ++k) {
      const Point x = random_point(s, rng, 2.0);
      const double d = distance(s, resolvent_point(f, s, 0.4, x), resolvent_point(f, s, 0.4, x, numeric()));
      ASSERT_LE(d, 1e-7) << s.describe();
    }
  }
}

TEST(Resolvent, TauOutOfRange) {
  const FunctionalSpec f = quadratic_functional(Space::euclidean(1), Point::euclidean({0}), -1.0);
  const Space e = Space::euclidean(1);
  EXPECT_THROW(resolvent(f, e, 0.0, Point::euclidean({1})), DomainError);
  EXPECT_THROW(resolvent(f, e, 0.5, Point::euclidean({1})), DomainError);  // 1/(2λ⁻) = 0.5
  EXPECT_NO_THROW(resolvent(f, e, 0.49, Point::euclidean({1})));
  EXPECT_THROW(resolvent(zero_functional(), e, -1.0, Point::euclidean({1})), DomainError);
}

TEST(Resolvent, ConvergenceErrorCarriesBestIterate) {
  const Space e = Space::euclidean(3);
  const FunctionalSpec f = quadratic_functional(e, Point::euclidean({1, 2, 3}), 1.0);
  ResolventOptions o = numeric();
  o.max_iter = 1;
  try {
    resolvent(f, e, 10.0, Point::euclidean({-5, 7, 0}), o);
    FAIL() << "expected a convergence error";
  } catch (const ConvergenceError& err) {
    EXPECT_EQ(err.best().point.coords.size(), 3u);
    EXPECT_GT(err.best().residual, o.point_tol);
  }
}

TEST(Resolvent, TripodTieFlagged) {
  // f decreases identically along edges 0 and 1, so J from the branch point has two minimizers.
  const Space t = Space::tripod(3, 1.0);
  FunctionalSpec f;
  f.id = "two_wells";
  f.evaluate = [](const Point& x) {
    if (x.at_branch() || x.edge == 2) return ExtendedReal(1.0);
    return ExtendedReal(1.0 - x.offset());
  };
  const ResolventResult r = resolvent(f, t, 0.25, Point::tripod(0, 0.0));
  EXPECT_TRUE(r.tie);
  EXPECT_EQ(r.point.edge, 0);
}

TEST(BoundChain, QuadraticEqualities) {
  const BoundChain c = check_bound_chain(half_quadratic(), Space::euclidean(1), 0.5, Point::euclidean({3.0}));
  EXPECT_NEAR(c.slope_at_resolvent, 2.0, 1e-12);
  EXPECT_NEAR(c.displacement_ratio, 2.0, 1e-12);
  EXPECT_NEAR(c.slope_bound, 2.0, 1e-12);
  EXPECT_LE(c.max_residual(), 1e-12);
}

TEST(BoundChain, ZeroFunctional) {
  const BoundChain c = check_bound_chain(zero_functional(), Space::half_line(), 0.3, Point::half_line(0.7));
  EXPECT_EQ(c.slope_at_resolvent, 0.0);
  EXPECT_EQ(c.displacement_ratio, 0.0);
  EXPECT_EQ(c.slope_bound, 0.0);
}

TEST(BoundChain, Example2Ramp) {
  const BoundChain c = check_bound_chain(example2_functional(4.0), Space::half_line(), 0.01, Point::half_line(0.0));
  EXPECT_NEAR(c.slope_at_resolvent, 4.0, 1e-12);
  EXPECT_NEAR(c.displacement_ratio, 4.0, 1e-9);
  EXPECT_NEAR(c.slope_bound, 4.0, 1e-12);
}

TEST(BoundChain, SupFormulaSlopesOnRandomInputs) {
  Rng rng(5);
  const Space e = Space::euclidean(2);
  const FunctionalSpec f = quadratic_functional(e, Point::euclidean({0.5, -0.5}), 0.8);
  for (int k = 0; k < 50; ++k) {
    const Point x = random_point(e, rng, 2.0);
    EXPECT_LE(check_bound_chain(f, e, 0.3, x).max_residual(), 1e-6);
    EXPECT_LE(check_bound_chain(f, e, 0.3, x, SlopeMethod::sup_formula()).max_residual(), 1e-3);
  }
}

TEST(ResolventLipschitz, SamePointIsZero) {
  EXPECT_EQ(check_resolvent_lipschitz(half_quadratic(), Space::euclidean(1), 0.5, Point::euclidean({1}),
                                      Point::euclidean({1})),
            0.0);
}

TEST(ResolventLipschitz, ConcaveBoxAgainstGridOracle) {
  // f = -|x|^2/4 on [0,1]^2 with λ = -1/2, τ = 1/2: per coordinate J minimizes -y^2/4 + (y-x)^2.
  const Space e = Space::euclidean(2);
  const FunctionalSpec f = box_quadratic_functional(e, e.origin(), -0.5, 0.0, 1.0);
  const double tau = 0.5;
  auto oracle_j = [&](const Point& x) {
    std::vector<double> u(2);
    for (int i = 0; i < 2; ++i)
      u[i] = oracle::grid_argmin([&](double y) { return -0.25 * y * y + (y - x.coords[i]) * (y - x.coords[i]); }, 0, 1);
    return Point::euclidean(u);
  };
  Rng rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const Point x = Point::euclidean({u01(rng), u01(rng)});
    const Point y = Point::euclidean({u01(rng), u01(rng)});
    const Point jx = resolvent_point(f, e, tau, x);
    ASSERT_LE(distance(e, jx, oracle_j(x)), 1e-7);
    const double lhs = distance(e, jx, resolvent_point(f, e, tau, y));
    const double via_oracle = distance(e, oracle_j(x), oracle_j(y));
    EXPECT_LE(via_oracle, std::sqrt(2.0) * distance(e, x, y) + 1e-9);
    EXPECT_LE(check_resolvent_lipschitz(f, e, tau, x, y), 1e-6);
    EXPECT_NEAR(lhs, via_oracle, 2e-7);
  }
}

TEST(TauContinuity, QuadraticClosedForm) {
  const Space e = Space::euclidean(1);
  const double lhs = std::abs(1 / 1.1 - 1 / 1.2);
  EXPECT_NEAR(lhs, 0.0758, 1e-4);
  const double r = check_tau_continuity(half_quadratic(), e, 0.1, 0.2, Point::euclidean({1.0}));
  EXPECT_NEAR(r, lhs - 0.1 / 1.2, 1e-12);
  EXPECT_LT(r, 0.0);
}

TEST(TauContinuity, EqualStepsGiveZero) {
  EXPECT_NEAR(check_tau_continuity(half_quadratic(), Space::euclidean(1), 0.3, 0.3, Point::euclidean({2.0})), 0.0,
              1e-15);
}

TEST(TauContinuity, Example2AgainstGridOracle) {
  const double h = 2.0;
  const auto j = [&](double tau, double x) {
    return oracle::grid_argmin(
        [&](double y) { return (y <= 1 / h ? 1 - h * y : 0.0) + (y - x) * (y - x) / (2 * tau); }, 0.0, 3.0);
  };
  const double lhs = std::abs(j(0.05, 1.0) - j(0.1, 1.0));
  EXPECT_LE(lhs, 1e-9);
  EXPECT_LE(check_tau_continuity(example2_functional(h), Space::half_line(), 0.05, 0.1, Point::half_line(1.0)), 1e-9);
  // On the ramp the bound is active: J_ν 0 = hν, J_μ 0 = hμ, RHS (μ-ν)h.
  EXPECT_NEAR(check_tau_continuity(example2_functional(h), Space::half_line(), 0.05, 0.1, Point::half_line(0.0)), 0.0,
              1e-12);
}

TEST(TauContinuity, NeedsFiniteSlope) {
  EXPECT_THROW(check_tau_continuity(example1_functional(1.0), Space::half_line(), 0.1, 0.2, Point::half_line(0.0)),
               PreconditionError);
  EXPECT_THROW(check_tau_continuity(half_quadratic(), Space::euclidean(1), 0.3, 0.2, Point::euclidean({0})),
               DomainError);
}

TEST(ResolventIdentity, QuadraticClosedFormChain) {
  const Space e = Space::euclidean(1);
  const Point x = Point::euclidean({1.0});
  EXPECT_NEAR(resolvent_point(half_quadratic(), e, 0.4, x).x(), 1 / 1.4, 1e-15);
  EXPECT_LE(check_resolvent_identity(half_quadratic(), e, 0.2, 0.4, x), 1e-12);
  EXPECT_LE(check_resolvent_identity(half_quadratic(), e, 0.2, 0.4, x, numeric()), 1e-8);
  EXPECT_EQ(check_resolvent_identity(half_quadratic(), e, 0.4, 0.4, x), 0.0);
}

TEST(ResolventIdentity, TripodQuadraticToLeaf) {
  const Space t = Space::tripod(3, 1.0);
  const FunctionalSpec f = quadratic_functional(t, Point::tripod(1, 1.0), 1.0);
  Rng rng(3);
  std::uniform_real_distribution<double> tau(0.05, 2.0);
  for (int k = 0; k < 30; ++k) {
    const Point x = random_point(t, rng);
    double nu = tau(rng), mu = tau(rng);
    if (nu > mu) std::swap(nu, mu);
    EXPECT_LE(check_resolvent_identity(f, t, nu, mu, x, numeric()), 1e-4);
    EXPECT_LE(check_resolvent_lipschitz(f, t, mu, x, random_point(t, rng), numeric()), 1e-4);
  }
}

TEST(ConvergenceProbe, ScaledQuadraticFamily) {
  FunctionalFamily fam;
  fam.limit = half_quadratic();
  fam.member = [](double h) { return scaled(half_quadratic(), 1 + 1 / h); };
  const std::vector<double> hs{1, 10, 100, 1000};
  const auto d = resolvent_convergence_probe(fam, Space::euclidean(1), 0.5, Point::euclidean({2.0}), hs);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double expect = std::abs(2.0 / (1 + 0.5 * (1 + 1 / hs[i])) - 2.0 / 1.5);
    EXPECT_NEAR(d[i], expect, 1e-12);
    if (i > 0) {
      EXPECT_LT(d[i], d[i - 1]);
    }
  }
}

TEST(ConvergenceProbe, ConstantFamily) {
  FunctionalFamily fam;
  fam.limit = half_quadratic();
  fam.member = [](double) { return half_quadratic(); };
  for (double d : resolvent_convergence_probe(fam, Space::euclidean(1), 0.5, Point::euclidean({2.0}), {1, 2, 3}))
    EXPECT_EQ(d, 0.0);
}

TEST(ConvergenceProbe, Example2FamilyAtOne) {
  FunctionalFamily fam;
  fam.limit = zero_functional();
  fam.member = [](double h) { return example2_functional(h); };
  for (double d :
       resolvent_convergence_probe(fam, Space::half_line(), 0.1, Point::half_line(1.0), {1, 4, 16, 64}, numeric()))
    EXPECT_LE(d, 1e-8);
}

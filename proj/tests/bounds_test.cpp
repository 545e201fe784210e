#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fracreg/bounds/closed_forms.hpp"
#include "fracreg/bounds/constraints.hpp"
#include "fracreg/bounds/curve.hpp"
#include "fracreg/bounds/optimizer.hpp"

using namespace fracreg;
using namespace fracreg::bounds;

namespace {

Rational q(long n, long d) { return Rational(n, d); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(ClosedForms, EndpointLabelsAreExact) {
  EXPECT_EQ(L_of(Rational(1)), q(5, 3));
  EXPECT_EQ(J_of(Rational(1)), q(360, 277));
  EXPECT_EQ(L_of(q(5, 4)), Rational(0));
  EXPECT_EQ(J_of(q(5, 4)), Rational(0));
  EXPECT_EQ(nzeta_star_of(Rational(1)), q(27, 277));
  EXPECT_EQ(nzeta_star_of(q(5, 4)), Rational(0));
}

TEST(ClosedForms, NineEighthsExactValues) {
  // Hand-expanded: (15 - 9/4 - 81/8)/3 = (21/8)/3 = 7/8; J and N*zeta frozen
  // from an independent symbolic evaluation.
  EXPECT_EQ(L_of(q(9, 8)), q(7, 8));
  EXPECT_EQ(J_of(q(9, 8)), q(315, 506));
  EXPECT_EQ(nzeta_star_of(q(9, 8)), q(12, 253));
  EXPECT_LT(J_of(q(9, 8)), L_of(q(9, 8)));
  EXPECT_GT(J_of(q(9, 8)), Rational(0));
}

TEST(ClosedForms, RationalParsing) {
  EXPECT_EQ(rational_from_string("9/8"), q(9, 8));
  EXPECT_EQ(rational_from_string("1.05"), q(21, 20));
  EXPECT_EQ(rational_from_string("1"), Rational(1));
}

TEST(ClosedForms, FloatingAgreesWithExactOnGrid) {
  for (int k = 1; k < 1000; ++k) {
    const Rational a = Rational(1) + Rational(k, 4000);
    const AlphaParams ap(to_double(a));
    EXPECT_LT(rel(eval_L(ap), to_double(L_of(a))), 1e-12);
    EXPECT_LT(rel(eval_J(ap), to_double(J_of(a))), 1e-12);
    EXPECT_LT(rel(nzeta_star(ap), to_double(nzeta_star_of(a))), 1e-12);
  }
}

TEST(ClosedForms, ExpandedFormIsTheSameFunction) {
  for (int k = 1; k < 1000; ++k) {
    const Rational a = Rational(1) + Rational(k, 4000);
    EXPECT_EQ(J_of(a), J_expanded_of(a));
    const double ad = to_double(a);
    EXPECT_LT(rel(J_expanded_of(ad), J_of(ad)), 1e-12);
  }
}

TEST(ClosedForms, DenominatorPositiveOnClosedInterval) {
  EXPECT_GT(denominator_grid_minimum(), 270.0);
}

TEST(ClosedForms, NzetaStarEqualizesCapsTwoAndThree) {
  // Oracle: bisection on N zeta for cap2 == cap3 at zeta = 0.
  const double a = 1.1;
  auto diff = [&](double nz) {
    const auto caps = gamma_caps_of(a, 0.0, nz);
    return caps[1] - caps[2];
  };
  double lo = 0.0, hi = 1.0;
  ASSERT_LT(diff(lo) * diff(hi), 0.0);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (diff(lo) * diff(mid) <= 0.0 ? hi : lo) = mid;
  }
  EXPECT_NEAR(nzeta_star(AlphaParams(a)), 0.5 * (lo + hi), 1e-13);
  EXPECT_GT(nzeta_star(AlphaParams(a)), 0.0);
}

TEST(ClosedForms, IdentityChainEqualsGap) {
  for (int k = 1; k <= 200; ++k) {
    const double a = 1.0 + 0.25 * k / 201.0;
    const double gap = L_of(a) - J_of(a);
    EXPECT_LT(rel(identity_chain_of(a), gap), 1e-10) << a;
  }
  EXPECT_EQ(identity_chain_of(q(9, 8)), L_of(q(9, 8)) - J_of(q(9, 8)));
}

TEST(EtaFrom, ZeroLimitGivesOne) {
  const AlphaParams a(1.2);
  EXPECT_NEAR(eta_from(a, 0.0, 0.0, eval_L(a)), 1.0, 1e-15);
}

TEST(EtaFrom, SatisfiesEquatedExponentRelation) {
  const auto a = AlphaParams::closure(1.0);
  const double nz = 27.0 / 277.0;
  const double eta = eta_from(a, 0.01, nz, 0.0);
  EXPECT_LT(std::abs(eta_relation_residual_of(1.0, 0.01, nz, 0.0, eta)), 1e-12);
  // Exact arithmetic: the residual vanishes identically.
  const Rational z = q(1, 100), nzq = q(27, 277), g = Rational(0);
  EXPECT_EQ(eta_relation_residual_of(Rational(1), z, nzq, g, eta_from_of(Rational(1), z, nzq, g)),
            Rational(0));
}

TEST(EtaFrom, AffineInEachArgument) {
  const AlphaParams a(1.13);
  auto collinear = [](double f0, double f1, double f2) { return std::abs(f2 - 2 * f1 + f0); };
  EXPECT_LT(collinear(eta_from(a, 0.1, 0.2, 0.1), eta_from(a, 0.2, 0.2, 0.1),
                      eta_from(a, 0.3, 0.2, 0.1)), 1e-14);
  EXPECT_LT(collinear(eta_from(a, 0.1, 0.1, 0.1), eta_from(a, 0.1, 0.2, 0.1),
                      eta_from(a, 0.1, 0.3, 0.1)), 1e-14);
  EXPECT_LT(collinear(eta_from(a, 0.1, 0.2, 0.0), eta_from(a, 0.1, 0.2, 0.1),
                      eta_from(a, 0.1, 0.2, 0.2)), 1e-14);
}

TEST(ExponentTriplet, GammaEqualLKillsGapTerms) {
  const AlphaParams a(1.2);
  const auto j = exponent_triplet(a, eval_L(a), 0.0, 0.0);
  EXPECT_NEAR(j.j1, 1.0 * (4 * 1.2 - 2), 1e-14);
  EXPECT_GE(j.j1, 0.0);
}

TEST(ExponentTriplet, J1IncreasingInNzeta) {
  const AlphaParams a(1.07);
  double prev = exponent_triplet(a, 0.1, 1e-3, 0.0).j1;
  for (int k = 1; k <= 50; ++k) {
    const double cur = exponent_triplet(a, 0.1, 1e-3, 0.01 * k).j1;
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(ExponentTriplet, J2AndJ3ChangeSignTogetherNearTheOptimum) {
  // alpha = 1, zeta -> 0, N zeta = N zeta*: both J2 and J3 cross zero at
  // gamma = L - J (within the zeta-induced shift).
  const auto a = AlphaParams::closure(1.0);
  const double zeta = 1e-4, nz = 27.0 / 277.0;
  auto crossing = [&](auto pick) {
    double lo = 0.0, hi = eval_L(a);
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (lo + hi);
      (pick(exponent_triplet(a, mid, zeta, nz)) >= 0.0 ? lo : hi) = mid;
    }
    return lo;
  };
  const double g2 = crossing([](const ExponentTriplet& j) { return j.j2; });
  const double g3 = crossing([](const ExponentTriplet& j) { return j.j3; });
  EXPECT_NEAR(g2, g3, 1e-3 * zeta * 100);  // both within O(zeta) of L - J
  EXPECT_NEAR(g2, 305.0 / 831.0, 2e-4);
  EXPECT_NEAR(g3, 305.0 / 831.0, 2e-4);
}

TEST(ConstraintMargins, GammaZeroAdmissible) {
  const AlphaParams a(1.2);
  const auto m = constraint_margins(a, 0.0, 1e-3, nzeta_star(a));
  for (double v : m.m) EXPECT_GE(v, 0.0);
}

TEST(ConstraintMargins, GammaEqualLViolatesEnergyCap) {
  const AlphaParams a(1.2);
  const double L = eval_L(a);
  const auto m = constraint_margins(a, L, 1e-3, nzeta_star(a));
  // ((4a-3)/(4a) - 1) L = -3L/(4a).
  EXPECT_NEAR(m.m[4], -3.0 * L / (4 * 1.2), 1e-14);
  EXPECT_FALSE(m.feasible());
}

TEST(ConstraintMargins, ReducedSignsMatchRawExponents) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(1.0 + 1e-6, 1.25 - 1e-6), uz(1e-6, 0.2),
      un(0.0, 0.5), ug(0.0, 1.7);
  for (int trial = 0; trial < 1000; ++trial) {
    const AlphaParams a(ua(rng));
    const double z = uz(rng), nz = un(rng), g = ug(rng);
    const auto m = constraint_margins(a, g, z, nz);
    const auto j = exponent_triplet(a, g, z, nz);
    EXPECT_EQ(m.m[0] >= 0.0, j.j1 >= 0.0);
    EXPECT_EQ(m.m[1] >= 0.0, j.j2 >= 0.0);
    EXPECT_EQ(m.m[2] >= 0.0, j.j3 >= 0.0);
    EXPECT_EQ(m.m[3] >= 0.0, eta_from(a, z, nz, g) >= 1.0);
    EXPECT_EQ(m.m[4] >= 0.0, g <= (4 * a.alpha() - 3) / (4 * a.alpha()) * eval_L(a));
  }
}

TEST(ConstraintMargins, ReducedFormsAgreeExactly) {
  // Each cap solves its condition for gamma: plugging gamma = cap_i back in
  // makes the raw quantity vanish in exact arithmetic.
  const Rational a = q(23, 20), z = q(1, 50), nz = q(3, 40);
  const auto caps = gamma_caps_of(a, z, nz);
  EXPECT_EQ(j1_of(a, z, nz, caps[0]), Rational(0));
  EXPECT_EQ(j2_of(a, z, nz, caps[1]), Rational(0));
  EXPECT_EQ(j3_of(a, z, nz, caps[2]), Rational(0));
  EXPECT_EQ(eta_from_of(a, z, nz, caps[3]), Rational(1));
}

TEST(ConstraintMargins, FeasibleSetIsConvex) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const AlphaParams a(1.1);
  int checked = 0;
  for (int trial = 0; trial < 5000 && checked < 300; ++trial) {
    const double g1 = 0.3 * u(rng), z1 = 0.01 * u(rng) + 1e-6, n1 = 0.1 * u(rng);
    const double g2 = 0.3 * u(rng), z2 = 0.01 * u(rng) + 1e-6, n2 = 0.1 * u(rng);
    if (!constraint_margins(a, g1, z1, n1).feasible() || !constraint_margins(a, g2, z2, n2).feasible())
      continue;
    ++checked;
    const double t = u(rng);
    EXPECT_TRUE(constraint_margins(a, t * g1 + (1 - t) * g2, t * z1 + (1 - t) * z2,
                                   t * n1 + (1 - t) * n2).feasible(1e-13));
  }
  EXPECT_GE(checked, 100);
}

TEST(OptimizeGamma, AlphaOneConvergesToGap) {
  const auto res = optimize_gamma(1.0, default_zeta_schedule());
  EXPECT_NEAR(res.gamma_star, 305.0 / 831.0, 1e-4);
  const auto& w = res.best();
  EXPECT_GE(w.params.n_steps, 1);
  EXPECT_GE(w.margins.min_margin(), 0.0);
  EXPECT_LE(res.gamma_star, eval_L(AlphaParams(1.0 + 1e-9)));
}

TEST(OptimizeGamma, NearUpperEndpointTracksL) {
  const double alpha = 1.25 - 1e-6;
  const auto res = optimize_gamma(alpha, default_zeta_schedule());
  EXPECT_NEAR(res.gamma_star, eval_L(AlphaParams(alpha)), 1e-5);
  // Coarse schedule entries are infeasible this close to 5/4.
  EXPECT_FALSE(res.witnesses.front().feasible);
}

TEST(OptimizeGamma, FinerZetaImproves) {
  const auto coarse = optimize_gamma(1.1, {1e-2});
  const auto fine = optimize_gamma(1.1, {1e-4});
  EXPECT_LT(coarse.witnesses[0].params.gamma, fine.witnesses[0].params.gamma);
}

TEST(OptimizeGamma, RejectsNonmonotoneSchedule) {
  try {
    optimize_gamma(1.1, {1e-3, 1e-2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonmonotoneSchedule);
  }
}

TEST(OptimizeGamma, WitnessSatisfiesZetaAdmissibility) {
  for (double alpha : {1.0, 1.05, 1.1, 1.15, 1.2, 1.24}) {
    const auto res = optimize_gamma(alpha, default_zeta_schedule());
    const AlphaParams a = clamp_for_optimizer(alpha);
    for (const auto& w : res.witnesses) {
      if (!w.feasible) continue;
      EXPECT_LE(w.zeta, zeta_admissibility_cap(a, w.params.gamma)) << alpha << " " << w.zeta;
    }
  }
}

TEST(IterationBound, SingleTerm) {
  const AlphaParams a(1.1);
  const std::vector<double> c{3.0};
  const double theta = 0.3;
  EXPECT_NEAR(iteration_bound(theta, c, 2.0, a),
              std::pow(theta, 4 * 1.1 - 6) * 3.0 + std::pow(theta, 4 * 1.1 - 1.5) * 2.0, 1e-12);
}

TEST(IterationBound, PressureOnlyTerm) {
  const AlphaParams a(1.2);
  const std::vector<double> c(10, 0.0);
  // 10 (4 * 1.2 - 3/2) = 33.
  EXPECT_NEAR(iteration_bound(0.5, c, 1.0, a), std::ldexp(1.0, -33), 1e-25);
}

TEST(IterationBound, GeometricSumClosedForm) {
  const AlphaParams a(1.17);
  const double theta = 0.4, qq = 0.7;
  const int n = 25;
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[i] = std::pow(qq, i);
  const double beta = 4 * 1.17 - 1.5, kappa = 4 * 1.17 - 6;
  const double x = std::pow(theta, beta) / qq;
  const double closed = std::pow(theta, kappa) * std::pow(qq, n - 1) * (1 - std::pow(x, n)) / (1 - x);
  EXPECT_LT(rel(iteration_bound(theta, c, 0.0, a), closed), 1e-14);
}

TEST(IterationBound, MonotoneInInputs) {
  const AlphaParams a(1.12);
  std::vector<double> c{1.0, 2.0, 0.5};
  const double base = iteration_bound(0.25, c, 1.0, a);
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto bumped = c;
    bumped[i] += 0.1;
    EXPECT_GE(iteration_bound(0.25, bumped, 1.0, a), base);
  }
  EXPECT_GE(iteration_bound(0.25, c, 1.5, a), base);
}

TEST(IterationBound, ThetaOutOfRange) {
  const AlphaParams a(1.12);
  const std::vector<double> c{1.0};
  EXPECT_THROW(iteration_bound(0.6, c, 1.0, a), Error);
  EXPECT_THROW(iteration_bound(0.0, c, 1.0, a), Error);
}

TEST(IterParams, RadiusSequenceDecreasing) {
  const auto res = optimize_gamma(1.1, {1e-2});
  const auto& p = res.witnesses[0].params;
  ASSERT_TRUE(p.rho.has_value());
  EXPECT_NO_THROW(p.validate());
  EXPECT_NEAR(p.theta(), 0.5, 1e-12);
  for (long k = 1; k <= p.n_steps; ++k) EXPECT_LT(p.radius(k), p.radius(k - 1));
}

TEST(BoundCurve, InteriorGridAllBelowL) {
  const auto grid = interior_alpha_grid(999);
  ASSERT_EQ(grid.size(), 999u);
  for (double alpha : grid) {
    const AlphaParams a(alpha);
    EXPECT_GT(eval_J(a), 0.0);
    EXPECT_LT(eval_J(a), eval_L(a));
  }
}

TEST(BoundCurve, GammaColumnMatchesGap) {
  const auto curve = bound_curve(interior_alpha_grid(40), true);
  ASSERT_EQ(curve.rows.size(), 41u);
  EXPECT_DOUBLE_EQ(curve.rows[0].L, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(curve.rows[0].J, 360.0 / 277.0);
  for (const auto& r : curve.rows) EXPECT_NEAR(r.gamma_star, r.L - r.J, 1e-4) << r.alpha;
  const std::string svg = curve_svg(curve);
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1))
    ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_NE(svg.find(">alpha<"), std::string::npos);
  EXPECT_NE(svg.find(">dim_B(S)<"), std::string::npos);
  const std::string csv = curve_csv(curve);
  EXPECT_EQ(csv.rfind("alpha,L,J,gamma_star\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

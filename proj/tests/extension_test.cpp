#include <gtest/gtest.h>

#include <cmath>

#include "fracreg/extension/extended_field.hpp"
#include "fracreg/extension/profile.hpp"

using namespace fracreg;
using namespace fracreg::extension;
namespace sp = fracreg::spectral;

namespace {

// phi(s) = 2^{1-a}/Gamma(a) s^a K_a(s) solves the profile problem; its
// weighted energy is 2^{3-2a} Gamma(2-a)/Gamma(a).
double bessel_phi(double a, double s) {
  return std::pow(2.0, 1.0 - a) / std::tgamma(a) * std::pow(s, a) * std::cyl_bessel_k(a, s);
}
double bessel_i_alpha(double a) { return std::pow(2.0, 3.0 - 2.0 * a) * std::tgamma(2.0 - a) / std::tgamma(a); }

const ExtensionProfile& profile_12() {
  static const ExtensionProfile p = solve_profile(AlphaParams(1.2));
  return p;
}

}  // namespace

TEST(Profile, BoundaryValueAndNeumann) {
  for (double a : {1.05, 1.2}) {
    const auto p = solve_profile(AlphaParams(a), 30.0, 1025);
    EXPECT_NEAR(p.phi_at(0.0), 1.0, 1e-8);
    EXPECT_NEAR(p.phi.front(), 1.0, 1e-8);
    double prev = INFINITY;
    for (double s : {1e-3, 1e-5, 1e-7, 1e-9}) {
      const double flux = std::abs(std::pow(s, 1.0 - a) * p.dphi_at(s));
      EXPECT_LT(flux, prev);
      prev = flux;
    }
    EXPECT_LT(prev, 1e-5);
    EXPECT_GT(p.i_alpha, 0.0);
    EXPECT_LT(p.bvp_residual, 1e-8);
  }
}

TEST(Profile, MatchesBesselClosedForm) {
  for (double a : {1.0001, 1.1, 1.2, 1.2499}) {
    const auto p = solve_profile(AlphaParams(a));
    for (double s = 1e-6; s < 20.0; s *= 1.3) EXPECT_NEAR(p.phi_at(s), bessel_phi(a, s), 1e-7) << a << " " << s;
    EXPECT_NEAR(p.i_alpha / bessel_i_alpha(a), 1.0, 1e-7);
  }
}

TEST(Profile, MonotoneDecay) {
  const auto& p = profile_12();
  for (std::size_t i = 1; i < p.phi.size(); ++i) EXPECT_LE(p.phi[i], p.phi[i - 1] + 1e-12);
  EXPECT_LT(std::abs(p.phi_at(40.0)), 1e-14);
}

TEST(Profile, TailTruncationConverged) {
  for (double a : {1.1, 1.2}) {
    const auto p30 = solve_profile(AlphaParams(a), 30.0);
    const auto p60 = solve_profile(AlphaParams(a), 60.0);
    EXPECT_LT(std::abs(p60.i_alpha / p30.i_alpha - 1.0), 1e-6);
  }
}

TEST(Profile, Preconditions) {
  EXPECT_THROW(solve_profile(AlphaParams(1.1), 20.0), Error);
  try {
    solve_profile(AlphaParams(1.1), 60.0, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
  }
}

TEST(CAlpha, ReciprocalPositiveContinuous) {
  ExtensionProfile fake;
  fake.i_alpha = 2.0;
  EXPECT_DOUBLE_EQ(c_alpha(fake), 0.5);
  double prev = -1.0;
  for (int k = 1; k <= 20; ++k) {
    const double a = 1.0 + 0.25 * k / 21.0;
    const auto p = solve_profile(AlphaParams(a), 30.0, 1025);
    EXPECT_GT(c_alpha(p), 0.0);
    if (prev > 0.0) EXPECT_LT(std::abs(c_alpha(p) / prev - 1.0), 0.1);
    prev = c_alpha(p);
  }
}

TEST(Profile, CsvExports) {
  const auto p = solve_profile(AlphaParams(1.1), 30.0, 513);
  const auto csv = profile_csv(p);
  EXPECT_EQ(csv.rfind("s,phi,dphi,ddphi\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 514);
  const auto tab = constant_csv({{1.1, p.i_alpha, p.c_alpha}});
  EXPECT_EQ(tab.rfind("alpha,i_alpha,c_alpha\n", 0), 0u);
}

TEST(ExtendField, SingleModeAndBoundarySlice) {
  auto g = sp::make_grid(16);
  const auto u = sp::shear_mode(g, 2, 0.7);
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  const auto e = extend_field(u, prof);
  for (double y : {0.05, 0.3, 1.0}) {
    const auto v = e.values_at(y);
    double err = 0.0;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        const double expect = 0.7 * prof->phi_at(2.0 * y) * std::sin(2.0 * g->position(i, j, 0)[1]);
        err = std::max(err, std::abs(v[0][g->rindex(i, j, 3)] - expect));
      }
    EXPECT_LT(err, 1e-13);
  }
  const auto rnd = sp::random_bandlimited(g, 3, 1.0, 4.0);
  const auto e0 = extend_field(rnd, prof).values_at(0.0);
  const auto u0 = rnd.to_real();
  double err = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < u0[c].size(); ++i) err = std::max(err, std::abs(e0[c][i] - u0[c][i]));
  EXPECT_LT(err, 1e-10);
}

TEST(ExtendField, ParsevalPerLevel) {
  auto g = sp::make_grid(16);
  const auto u = sp::random_bandlimited(g, 8, 1.0, 4.0);
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  const auto e = extend_field(u, prof);
  for (double y : {0.1, 0.5}) {
    const auto v = e.values_at(y);
    double direct = 0.0;
    for (int c = 0; c < 3; ++c)
      for (double x : v[c]) direct += x * x * g->cell_volume();
    double spec = 0.0;
    for (int c = 0; c < 3; ++c)
      spec += g->weighted_norm2(u.u_hat[c], [&](std::size_t idx) {
        const double f = prof->phi_at(std::sqrt(g->k2(idx)) * y);
        return f * f;
      });
    spec *= g->volume();
    EXPECT_NEAR(direct, spec, 1e-10 * spec);
  }
}

TEST(ExtendField, LinearityAndRangeFlag) {
  auto g = sp::make_grid(16);
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  const auto u = sp::random_bandlimited(g, 1, 1.0, 4.0);
  const auto v = sp::random_bandlimited(g, 2, 1.0, 4.0);
  sp::VelocityState w = u;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < w.u_hat[c].size(); ++i) w.u_hat[c][i] = 2.0 * u.u_hat[c][i] - 3.0 * v.u_hat[c][i];
  const auto yg = default_y_grid(w);
  const auto ew = extend_field(w, prof, yg).values_at(0.2);
  const auto eu = extend_field(u, prof, yg).values_at(0.2);
  const auto ev = extend_field(v, prof, yg).values_at(0.2);
  double err = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < ew[c].size(); ++i) err = std::max(err, std::abs(ew[c][i] - (2 * eu[c][i] - 3 * ev[c][i])));
  EXPECT_LT(err, 1e-13);
  EXPECT_FALSE(extend_field(u, prof, make_y_grid(1e-3, 10.0, 64)).range_exceeded);
  EXPECT_TRUE(extend_field(u, prof, make_y_grid(1e-3, 200.0, 64)).range_exceeded);
}

TEST(ExtendField, ScalingIsArgumentRelabeling) {
  // (u_lambda)* (x, y) = lambda^{2a-1} u*(lambda x, lambda y) for lambda = 2.
  const double a = 1.2, lam = 2.0;
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  auto g = sp::make_grid(16, 2.0 * M_PI);
  auto gs = sp::make_grid(16, 2.0 * M_PI / lam);
  const auto u = sp::random_bandlimited(g, 4, 1.0, 4.0);
  auto ur = u.to_real();
  for (auto& c : ur)
    for (auto& x : c) x *= std::pow(lam, 2 * a - 1);
  const auto us = sp::VelocityState::from_real(gs, ur);
  const auto big = extend_field(u, prof).values_at(0.3);
  const auto small = extend_field(us, prof).values_at(0.3 / lam);
  double err = 0.0, scale = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < big[c].size(); ++i) {
      err = std::max(err, std::abs(small[c][i] - std::pow(lam, 2 * a - 1) * big[c][i]));
      scale = std::max(scale, std::abs(small[c][i]));
    }
  EXPECT_LT(err, 1e-12 * scale);
}

TEST(WeightedEnergy, ZeroSingleModeAndAdditivity) {
  const AlphaParams a(1.2);
  auto g = sp::make_grid(16);
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  EXPECT_EQ(weighted_energy(extend_field(sp::VelocityState::zero(g), prof), a), 0.0);

  const auto m2 = sp::shear_mode(g, 2, 0.5);
  const auto yg = make_y_grid(0.01 / 3.0, 30.0 / 2.0, 400);
  const double e2 = weighted_energy(extend_field(m2, prof, yg), a);
  // sin has two modes of amplitude 1/2: total |u_hat|^2 sum is A^2/2.
  const double closed = std::pow(2.0, 2 * 1.2) * 0.25 / 2.0 * prof->i_alpha * g->volume();
  EXPECT_NEAR(e2 / closed, 1.0, 1e-4);

  // orthogonal second mode along z in the y-component
  sp::VectorReal r;
  for (auto& c : r) c.assign(g->real_size(), 0.0);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int k = 0; k < 16; ++k) r[1][g->rindex(i, j, k)] = 0.3 * std::cos(3.0 * g->position(i, j, k)[2]);
  const auto m3 = sp::VelocityState::from_real(g, r);
  sp::VelocityState both = m2;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < both.u_hat[c].size(); ++i) both.u_hat[c][i] += m3.u_hat[c][i];
  const double e3 = weighted_energy(extend_field(m3, prof, yg), a);
  const double eb = weighted_energy(extend_field(both, prof, yg), a);
  EXPECT_NEAR(eb, e2 + e3, 1e-8 * eb);
}

TEST(EnergyIdentity, RandomFieldsBothAlphas) {
  auto g = sp::make_grid(16);
  for (double al : {1.1, 1.2}) {
    const auto prof = solve_profile(AlphaParams(al));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto u = sp::random_bandlimited(g, seed, 1.0, 4.0);
      EXPECT_LT(energy_identity_residual(u, prof), 1e-3);
    }
  }
}

TEST(EnergyIdentity, RecoveredConstantAndRefinement) {
  auto g = sp::make_grid(16);
  const auto& prof = profile_12();
  for (std::uint64_t seed = 11; seed <= 15; ++seed) {
    const auto u = sp::random_bandlimited(g, seed, 1.0, 5.0);
    EXPECT_NEAR(recovered_constant(u, prof) / prof.c_alpha, 1.0, 1e-3);
  }
  const auto u = sp::random_bandlimited(g, 21, 1.0, 4.0);
  const double coarse = energy_identity_residual(u, prof, 10.0);
  const double fine = energy_identity_residual(u, prof, 20.0);
  EXPECT_LT(fine, coarse);
  EXPECT_THROW(energy_identity_residual(sp::VelocityState::zero(g), prof), Error);
}

TEST(Minimality, ZeroPerturbationAndFiftyTrials) {
  const AlphaParams a(1.2);
  auto g = sp::make_grid(16);
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  const auto e = extend_field(sp::random_bandlimited(g, 5, 1.0, 4.0), prof);
  auto zero = e;
  zero.perturbations = scaled(random_perturbations(e, 3), 0.0);
  EXPECT_EQ(weighted_energy(zero, a), weighted_energy(e, a));
  const auto rep = minimality_test(e, a, 50);
  EXPECT_EQ(rep.passed, 50);
  EXPECT_GE(rep.min_gap, -1e-6);
}

TEST(Minimality, GapIsQuadraticInAmplitude) {
  const AlphaParams a(1.2);
  auto g = sp::make_grid(16);
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  const auto e = extend_field(sp::random_bandlimited(g, 6, 1.0, 4.0), prof);
  const double base = weighted_energy(e, a);
  const auto w = random_perturbations(e, 17);
  std::vector<double> lx, ly;
  for (double amp : {0.01, 0.02, 0.04, 0.08, 0.16}) {
    auto pe = e;
    pe.perturbations = scaled(w, amp);
    lx.push_back(std::log(amp));
    ly.push_back(std::log(weighted_energy(pe, a) - base));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, 2.0, 0.1);
}

TEST(Flux, BoundaryFluxRecoversFractionalLaplacian) {
  const AlphaParams a(1.2);
  auto g = sp::make_grid(16);
  auto prof = std::make_shared<const ExtensionProfile>(profile_12());
  const auto u = sp::random_bandlimited(g, 2, 1.0, 4.0);
  const auto e = extend_field(u, prof, make_y_grid(1e-5, 30.0, 600));
  EXPECT_LT(flux_diagnostic(e, a), 0.05);
}

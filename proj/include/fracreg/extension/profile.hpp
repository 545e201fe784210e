#pragma once

// Radial profile of the weighted biharmonic extension. With L = d^2/ds^2 +
// (b/s) d/ds - 1 and b = 3 - 2 alpha the profile solves L^2 phi = 0 on (0, inf)
// with phi(0) = 1, s^{1-alpha} phi'(s) -> 0 and decay at infinity. A mode
// u_hat(xi) extends as u_hat(xi) phi(|xi| y).
//
// The fourth-order problem is split as L phi = psi, L psi = 0 and discretized
// with fourth-order finite differences on a grid uniform in x = ln s + s/kappa
// (logarithmic near 0, linear in the decaying tail). On (0, s0] the Frobenius
// expansion phi = 1 + a2 s^2 + a3 s^{2 alpha} is patched in; the s^{2 alpha - 2}
// branch of phi is what the Neumann condition removes.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"

namespace fracreg::extension {

namespace detail {

/// Fornberg weights for the m-th derivative at z from nodes x.
inline std::vector<double> fornberg(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

/// Stencil offsets (relative to node i) and weights in units of h = 1 for a
/// grid of `count` nodes; five-point centered inside, six-point one-sided at
/// the two nodes next to each end.
struct Stencil {
  std::vector<int> offsets;
  std::vector<double> d1, d2;
};

inline Stencil stencil_for(int i, int count) {
  int first;
  int width;
  if (i >= 2 && i <= count - 3) {
    first = i - 2;
    width = 5;
  } else {
    width = 6;
    first = i < 2 ? 0 : count - 6;
  }
  Stencil st;
  std::vector<double> pts;
  for (int k = 0; k < width; ++k) {
    st.offsets.push_back(first + k - i);
    pts.push_back(static_cast<double>(first + k - i));
  }
  st.d1 = fornberg(0.0, pts, 1);
  st.d2 = fornberg(0.0, pts, 2);
  return st;
}

inline double cubic_hermite(double t, double h, double f0, double f1, double d0, double d1) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

inline double cubic_hermite_slope(double t, double h, double f0, double f1, double d0, double d1) {
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * f1 +
          (3 * t2 - 2 * t) * h * d1) /
         h;
}

}  // namespace detail

struct ProfileOptions {
  double s0 = 1e-6;  // Frobenius patch endpoint
  double kappa = 2.0;  // log-to-linear switch of the grid map
  double residual_tolerance = 1e-8;
  int max_iterations = 4;
};

struct ExtensionProfile {
  double alpha = 0.0;
  double b = 0.0;
  std::vector<double> s_grid;
  std::vector<double> phi;
  std::vector<double> psi;  // L phi
  std::vector<double> phi_x, psi_x;  // derivatives along the grid coordinate x
  double i_alpha = 0.0;
  double c_alpha = 0.0;
  double a2 = 0.0, a3 = 0.0;  // Frobenius coefficients
  double s0 = 0.0, kappa = 0.0, x0 = 0.0, hx = 0.0;
  double bvp_residual = 0.0;
  int iterations = 0;

  double s_max() const { return s_grid.back(); }

  double x_of(double s) const { return std::log(s) + s / kappa; }
  double xs_of(double s) const { return 1.0 / s + 1.0 / kappa; }

  /// phi(s); 0 beyond s_max (the caller decides whether that is acceptable).
  double phi_at(double s) const { return eval(s, phi, phi_x, 0); }
  double dphi_at(double s) const { return eval(s, phi, phi_x, 1); }
  double psi_at(double s) const { return eval(s, psi, psi_x, 2); }
  double dpsi_at(double s) const { return eval(s, psi, psi_x, 3); }
  double ddphi_at(double s) const {
    if (s <= 0.0) return 2.0 * a2;  // only the regular part; s^{2 alpha - 2} term blows up
    return psi_at(s) + phi_at(s) - b / s * dphi_at(s);
  }

  /// Per-mode weighted energy density factor: int_0^inf s^b psi^2 ds.
  double energy_factor() const { return i_alpha; }

 private:
  // which: 0 phi, 1 phi', 2 psi, 3 psi'
  double eval(double s, const std::vector<double>& f, const std::vector<double>& fx, int which) const {
    if (s < 0.0) s = 0.0;
    if (s <= s0) return series(s, which);
    if (s >= s_max()) return 0.0;
    const double x = x_of(s);
    double pos = (x - x0) / hx;
    std::size_t j = static_cast<std::size_t>(std::floor(pos));
    if (j >= f.size() - 1) j = f.size() - 2;
    const double t = pos - static_cast<double>(j);
    if (which == 0 || which == 2) return detail::cubic_hermite(t, hx, f[j], f[j + 1], fx[j], fx[j + 1]);
    return detail::cubic_hermite_slope(t, hx, f[j], f[j + 1], fx[j], fx[j + 1]) * xs_of(s);
  }

  double series(double s, int which) const {
    const double two_a = 2.0 * alpha;
    switch (which) {
      case 0: return 1.0 + a2 * s * s + a3 * std::pow(s, two_a);
      case 1: return 2.0 * a2 * s + two_a * a3 * std::pow(s, two_a - 1.0);
      case 2:
        return -1.0 + 2.0 * (1.0 + b) * a2 + 2.0 * alpha * 2.0 * a3 * std::pow(s, two_a - 2.0);
      default:
        return s == 0.0 ? 0.0 : 4.0 * alpha * (two_a - 2.0) * a3 * std::pow(s, two_a - 3.0);
    }
  }
};

inline double c_alpha(const ExtensionProfile& p) { return 1.0 / p.i_alpha; }

namespace detail {

/// s with ln s + s/kappa = x.
inline double invert_map(double x, double kappa) {
  double s = x < 0.0 ? std::exp(x) : std::max(1e-300, kappa * x);
  for (int it = 0; it < 200; ++it) {
    const double f = std::log(s) + s / kappa - x;
    const double df = 1.0 / s + 1.0 / kappa;
    double next = s - f / df;
    if (next <= 0.0) next = 0.5 * s;
    if (std::abs(next - s) <= 1e-15 * s) {
      s = next;
      break;
    }
    s = next;
  }
  return s;
}

/// Composite Simpson on a uniform grid; a 3/8 panel closes an even node count.
inline double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  if (n == 3) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
  const std::size_t simpson_end = (n % 2 == 1) ? n - 1 : n - 4;
  double acc = 0.0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) acc += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  if (n % 2 == 0) {
    const std::size_t i = n - 4;
    acc += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return acc;
}

}  // namespace detail

inline ExtensionProfile solve_profile(const AlphaParams& a, double s_max = 60.0, int n_points = 4097,
                                      const ProfileOptions& opt = {}) {
  require(s_max >= 30.0, ErrorCode::DomainViolation, "solve_profile needs s_max >= 30");
  require(n_points >= 512, ErrorCode::GridTooCoarse, "solve_profile needs n_points >= 512");
  const double alpha = a.alpha(), b = a.b();

  ExtensionProfile p;
  p.alpha = alpha;
  p.b = b;
  p.s0 = opt.s0;
  p.kappa = opt.kappa;
  p.x0 = p.x_of(opt.s0);
  const double x1 = p.x_of(s_max);
  const int n = n_points;
  p.hx = (x1 - p.x0) / (n - 1);
  if (p.hx > 0.1)
    fail(ErrorCode::GridTooCoarse, "grid spacing " + std::to_string(p.hx) + " in the mapped coordinate exceeds 0.1");
  p.s_grid.resize(n);
  for (int i = 0; i < n; ++i) p.s_grid[i] = detail::invert_map(p.x0 + i * p.hx, p.kappa);
  p.s_grid.front() = opt.s0;
  p.s_grid.back() = s_max;

  // Unknown layout: phi_0..phi_{n-1}, psi_0..psi_{n-1}, a2, a3.
  const int N = 2 * n + 2;
  const int ia2 = 2 * n, ia3 = 2 * n + 1;
  auto iphi = [](int i) { return i; };
  auto ipsi = [n](int i) { return n + i; };
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  const double h = p.hx;
  int row = 0;

  // Left patch at s0.
  {
    const double s = opt.s0, two_a = 2.0 * alpha;
    const auto st = detail::stencil_for(0, n);
    // phi_0 - a2 s^2 - a3 s^{2a} = 1
    trips.emplace_back(row, iphi(0), 1.0);
    trips.emplace_back(row, ia2, -s * s);
    trips.emplace_back(row, ia3, -std::pow(s, two_a));
    rhs[row++] = 1.0;
    // psi_0 - 2(1+b) a2 - 4 alpha a3 s^{2a-2} = -1
    trips.emplace_back(row, ipsi(0), 1.0);
    trips.emplace_back(row, ia2, -2.0 * (1.0 + b));
    trips.emplace_back(row, ia3, -4.0 * alpha * std::pow(s, two_a - 2.0));
    rhs[row++] = -1.0;
    // phi_x = s phi_s: 2 a2 s^2 + 2 alpha a3 s^{2a}; the map adds a factor s x_s.
    const double sxs = s * p.xs_of(s);
    for (std::size_t k = 0; k < st.offsets.size(); ++k) trips.emplace_back(row, iphi(st.offsets[k]), st.d1[k] / h);
    trips.emplace_back(row, ia2, -2.0 * s * s / sxs);
    trips.emplace_back(row, ia3, -two_a * std::pow(s, two_a) / sxs);
    rhs[row++] = 0.0;
    for (std::size_t k = 0; k < st.offsets.size(); ++k) trips.emplace_back(row, ipsi(st.offsets[k]), st.d1[k] / h);
    trips.emplace_back(row, ia3, -4.0 * alpha * (two_a - 2.0) * std::pow(s, two_a - 2.0) / sxs);
    rhs[row++] = 0.0;
  }

  // Interior collocation, scaled by 1/x_s^2 so the phi_xx coefficient is 1.
  for (int i = 1; i <= n - 2; ++i) {
    const double s = p.s_grid[i];
    const double xs = p.xs_of(s), xss = -1.0 / (s * s);
    const double c1 = (xss + b / s * xs) / (xs * xs);
    const double c0 = 1.0 / (xs * xs);
    const auto st = detail::stencil_for(i, n);
    for (int eq = 0; eq < 2; ++eq) {
      const int var0 = eq == 0 ? 0 : n;  // operator acts on phi, then on psi
      for (std::size_t k = 0; k < st.offsets.size(); ++k) {
        const int col = var0 + i + st.offsets[k];
        trips.emplace_back(row, col, st.d2[k] / (h * h) + c1 * st.d1[k] / h);
      }
      trips.emplace_back(row, var0 + i, -c0);
      if (eq == 0) trips.emplace_back(row, ipsi(i), -c0);
      rhs[row++] = 0.0;
    }
  }

  trips.emplace_back(row, iphi(n - 1), 1.0);
  rhs[row++] = 0.0;
  trips.emplace_back(row, ipsi(n - 1), 1.0);
  rhs[row++] = 0.0;
  if (row != N) fail(ErrorCode::InvariantViolation, "profile system is not square");

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) fail(ErrorCode::BvpNoConvergence, "profile matrix factorization failed");

  // The problem is linear: Newton converges in one step; the extra passes are
  // iterative refinement against rounding.
  Eigen::VectorXd sol = Eigen::VectorXd::Zero(N);
  double res = 0.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::VectorXd r = rhs - A * sol;
    res = r.lpNorm<Eigen::Infinity>();
    if (it > 0 && res <= opt.residual_tolerance * 1e-3) break;
    sol += lu.solve(r);
    p.iterations = it + 1;
  }
  res = (rhs - A * sol).lpNorm<Eigen::Infinity>();
  p.bvp_residual = res;
  if (!(res <= opt.residual_tolerance))
    fail(ErrorCode::BvpNoConvergence, "profile residual " + std::to_string(res) + " above tolerance");

  p.phi.assign(sol.data(), sol.data() + n);
  p.psi.assign(sol.data() + n, sol.data() + 2 * n);
  p.a2 = sol[ia2];
  p.a3 = sol[ia3];
  p.phi_x.resize(n);
  p.psi_x.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto st = detail::stencil_for(i, n);
    double dp = 0.0, dq = 0.0;
    for (std::size_t k = 0; k < st.offsets.size(); ++k) {
      dp += st.d1[k] * p.phi[i + st.offsets[k]];
      dq += st.d1[k] * p.psi[i + st.offsets[k]];
    }
    p.phi_x[i] = dp / h;
    p.psi_x[i] = dq / h;
  }

  // I(alpha) = int_0^inf s^b psi^2 ds: Simpson in x plus the analytic [0, s0] piece.
  std::vector<double> integrand(n);
  for (int i = 0; i < n; ++i) {
    const double s = p.s_grid[i];
    integrand[i] = std::pow(s, b) * p.psi[i] * p.psi[i] / p.xs_of(s);
  }
  double I = detail::simpson(integrand, h);
  {
    const double A0 = -1.0 + 2.0 * (1.0 + b) * p.a2;
    const double B0 = 4.0 * alpha * p.a3;
    const double s = opt.s0;
    I += A0 * A0 * std::pow(s, b + 1.0) / (b + 1.0) + 2.0 * A0 * B0 * s * s / 2.0 +
         B0 * B0 * std::pow(s, 2.0 * alpha) / (2.0 * alpha);
  }
  if (!(I > 0.0) || !std::isfinite(I)) fail(ErrorCode::BvpNoConvergence, "non-positive weighted energy");
  p.i_alpha = I;
  p.c_alpha = 1.0 / I;
  return p;
}

/// CSV `s,phi,dphi,ddphi` on the solver grid.
inline std::string profile_csv(const ExtensionProfile& p) {
  std::string out = "s,phi,dphi,ddphi\n";
  char buf[160];
  for (std::size_t i = 0; i < p.s_grid.size(); ++i) {
    const double s = p.s_grid[i];
    const double dphi = p.phi_x[i] * p.xs_of(s);
    const double ddphi = p.psi[i] + p.phi[i] - p.b / s * dphi;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s, p.phi[i], dphi, ddphi);
    out += buf;
  }
  return out;
}

struct ConstantRow {
  double alpha, i_alpha, c_alpha;
};

/// CSV `alpha,i_alpha,c_alpha`.
inline std::string constant_csv(const std::vector<ConstantRow>& rows) {
  std::string out = "alpha,i_alpha,c_alpha\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r.alpha, r.i_alpha, r.c_alpha);
    out += buf;
  }
  return out;
}

}  // namespace fracreg::extension

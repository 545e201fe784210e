#pragma once

// Local energy inequality of suitable weak solutions tested against a product
// bump phi(x, y, t) = amp X(x) Y(y) Theta(t), each factor beta(s) = exp(-1/(1-s))
// of a squared scaled distance. For smooth solutions the inequality is an
// identity, so the residual rhs - lhs sits at quadrature level.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/extension/profile.hpp"
#include "fracreg/local/cylinder.hpp"
#include "fracreg/spectral/solver.hpp"

namespace fracreg::local {

namespace detail {

struct Bump {
  double v = 0.0, d1 = 0.0, d2 = 0.0;  // beta, beta', beta''
};

inline Bump bump(double s) {
  if (s >= 1.0) return {};
  const double q = 1.0 / (1.0 - s);
  const double v = std::exp(-q);
  return {v, -v * q * q, v * (q * q * q * q - 2.0 * q * q * q)};
}

}  // namespace detail

struct TestFunction {
  std::array<double, 3> center{};
  double radius = 1.0;    // spatial support
  double y_radius = 1.0;  // support in y around y_shift
  double y_shift = 0.0;   // nonzero breaks the Neumann condition
  double t_center = 0.0;
  double t_half_width = 0.1;
  double amplitude = 1.0;

  double theta(double t) const { return detail::bump(sq((t - t_center) / t_half_width)).v; }
  double dtheta(double t) const {
    const double d = t - t_center;
    return detail::bump(sq(d / t_half_width)).d1 * 2.0 * d / sq(t_half_width);
  }
  /// Y, Y', Y'' and (b/y) Y' at height y.
  std::array<double, 4> y_factor(double y, double b) const {
    const double d = y - y_shift;
    const double s = sq(d / y_radius);
    const auto f = detail::bump(s);
    const double sp = 2.0 * d / sq(y_radius), spp = 2.0 / sq(y_radius);
    const double over_y = y_shift == 0.0 ? f.d1 * spp : (y > 0.0 ? f.d1 * sp / y : 0.0);
    return {f.v, f.d1 * sp, f.d2 * sp * sp + f.d1 * spp, b * over_y};
  }
  /// X, grad X, Laplacian X for a periodic displacement d from the center.
  std::array<double, 5> x_factor(const std::array<double, 3>& d) const {
    const double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    const auto f = detail::bump(r2 / sq(radius));
    const double g = 2.0 * f.d1 / sq(radius);
    return {f.v, g * d[0], g * d[1], g * d[2], f.d2 * 4.0 * r2 / sq(sq(radius)) + f.d1 * 6.0 / sq(radius)};
  }

 private:
  static double sq(double v) { return v * v; }
};

/// Rejects negative or non-Neumann test functions and supports that leave the window.
inline void validate(const TestFunction& phi, const Trajectory& tr) {
  if (!(phi.amplitude >= 0.0)) fail(ErrorCode::BadTestFunction, "test function must be nonnegative");
  if (!(phi.radius > 0.0 && phi.y_radius > 0.0 && phi.t_half_width > 0.0))
    fail(ErrorCode::BadTestFunction, "test function supports must have positive size");
  const double slope = phi.y_factor(0.0, 0.0)[1];
  if (std::abs(slope) > 1e-12 * std::max(1.0, phi.y_factor(0.0, 0.0)[0] / phi.y_radius))
    fail(ErrorCode::BadTestFunction, "d/dy phi must vanish at y = 0");
  if (phi.radius >= 0.5 * tr.grid().box_length())
    fail(ErrorCode::BadTestFunction, "spatial support wraps around the periodic box");
  if (phi.t_center - phi.t_half_width <= tr.t_begin() || phi.t_center + phi.t_half_width >= tr.t_end() + 1e-12)
    fail(ErrorCode::BadTestFunction, "time support must lie inside the stored window");
}

struct SuitabilityResult {
  double residual = 0.0;  // rhs - lhs
  double scale = 0.0;     // sum of the magnitudes of the separate terms
  double tau = 0.0;
};

namespace detail {

struct SliceTerms {
  double energy = 0.0;     // int X |u|^2
  double flux = 0.0;       // int (|u|^2 + 2p) u . grad X
  double dissip = 0.0;     // int int y^b |w|^2 X Y
  double cross = 0.0;      // int int y^b w_i (2 grad phi . grad u*_i + u*_i Delta_b phi) / (Theta amp)
};

struct YQuad {
  std::vector<double> y, w;
};

/// Log-spaced Simpson on [1e-5 R, R/8], uniform Simpson on [R/8, R].
inline YQuad y_quadrature(double R, int log_levels = 33, int lin_levels = 65) {
  YQuad q;
  const double lo = 1e-5 * R, mid = R / 8.0;
  const double hl = std::log(mid / lo) / (log_levels - 1);
  for (int k = 0; k < log_levels; ++k) {
    const double y = lo * std::exp(k * hl);
    const double s = (k == 0 || k == log_levels - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    q.y.push_back(y);
    q.w.push_back(s * hl / 3.0 * y);
  }
  const double hu = (R - mid) / (lin_levels - 1);
  for (int k = 0; k < lin_levels; ++k) {
    const double s = (k == 0 || k == lin_levels - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    if (k == 0) {
      q.w.back() += s * hu / 3.0;
      continue;
    }
    q.y.push_back(mid + k * hu);
    q.w.push_back(s * hu / 3.0);
  }
  return q;
}

inline SliceTerms slice_terms(const spectral::Snapshot& s, const extension::ExtensionProfile& prof,
                              const TestFunction& phi) {
  const auto& g = s.grid();
  const int n = g.n();
  const double b = prof.b;
  const std::size_t nr = g.real_size(), m = g.spectral_size();

  // Spatial factor on the grid, restricted to its support.
  std::vector<std::size_t> support;
  std::vector<std::array<double, 5>> xf;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::array<double, 3> d{periodic_offset(g, i, phi.center[0]), periodic_offset(g, j, phi.center[1]),
                                      periodic_offset(g, k, phi.center[2])};
        const auto f = phi.x_factor(d);
        if (f[0] > 0.0) {
          support.push_back(g.rindex(i, j, k));
          xf.push_back(f);
        }
      }
  const double cell = g.cell_volume();

  SliceTerms out;
  for (std::size_t q = 0; q < support.size(); ++q) {
    const std::size_t i = support[q];
    const double u2 = speed2(s, i);
    out.energy += xf[q][0] * u2;
    double ugx = 0.0;
    for (int c = 0; c < 3; ++c) ugx += s.u_real[c][i] * xf[q][1 + c];
    out.flux += (u2 + 2.0 * s.p_real[i]) * ugx;
  }
  out.energy *= cell;
  out.flux *= cell;

  std::vector<int> msq(m);
  int msq_max = 0;
  for (std::size_t i = 0; i < m; ++i) {
    msq[i] = static_cast<int>(std::lround(g.k2(i) / (g.k0() * g.k0())));
    msq_max = std::max(msq_max, msq[i]);
  }

  const auto yq = y_quadrature(phi.y_radius);
  std::vector<double> dis(yq.y.size()), crs(yq.y.size());
  parallel_for(yq.y.size(), [&](std::size_t lev) {
    const double y = yq.y[lev];
    std::vector<double> t_phi(msq_max + 1), t_lap(msq_max + 1), t_dy(msq_max + 1);
    for (int qq = 0; qq <= msq_max; ++qq) {
      const double kk = g.k0() * std::sqrt(static_cast<double>(qq));
      t_phi[qq] = prof.phi_at(kk * y);
      t_lap[qq] = kk * kk * prof.psi_at(kk * y);
      t_dy[qq] = kk * prof.dphi_at(kk * y);
    }
    const auto yf = phi.y_factor(y, b);
    double acc_d = 0.0, acc_c = 0.0;
    spectral::SpectralField f(m);
    std::vector<double> w_local(support.size()), dummy;
    for (int c = 0; c < 3; ++c) {
      const auto& uh = s.u.u_hat[c];
      for (std::size_t i = 0; i < m; ++i) f[i] = uh[i] * t_lap[msq[i]];
      const auto w = g.inverse(f);
      for (std::size_t i = 0; i < m; ++i) f[i] = uh[i] * t_phi[msq[i]];
      const auto us = g.inverse(f);
      for (std::size_t i = 0; i < m; ++i) f[i] = uh[i] * t_dy[msq[i]];
      const auto uy = g.inverse(f);
      std::array<spectral::RealField, 3> ux;
      for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < m; ++i) f[i] = spectral::Complex(0.0, g.wavevector_component(i, d)) * uh[i] * t_phi[msq[i]];
        ux[d] = g.inverse(f);
      }
      for (std::size_t q = 0; q < support.size(); ++q) {
        const std::size_t i = support[q];
        const auto& x = xf[q];
        acc_d += w[i] * w[i] * x[0] * yf[0];
        const double grad_dot = yf[0] * (x[1] * ux[0][i] + x[2] * ux[1][i] + x[3] * ux[2][i]) + x[0] * yf[1] * uy[i];
        const double lap_b = x[4] * yf[0] + x[0] * (yf[2] + yf[3]);
        acc_c += w[i] * (2.0 * grad_dot + us[i] * lap_b);
      }
    }
    const double yb = std::pow(y, b);
    dis[lev] = yq.w[lev] * yb * acc_d * cell;
    crs[lev] = yq.w[lev] * yb * acc_c * cell;
    (void)nr;
  });
  for (std::size_t lev = 0; lev < dis.size(); ++lev) {
    out.dissip += dis[lev];
    out.cross += crs[lev];
  }
  return out;
}

}  // namespace detail

/// rhs - lhs of the local energy inequality at time tau (a snapshot time).
/// Slice integrals are interpolated by local cubics in time and multiplied by
/// the exact time factor, so the steep bump costs no snapshot resolution.
inline SuitabilityResult suitability_residual(const Trajectory& tr, const extension::ExtensionProfile& prof,
                                              const TestFunction& phi, double c_alpha, double tau) {
  validate(phi, tr);
  const auto& snaps = tr.snapshots;
  const double tol = time_tolerance(tr);
  std::size_t last = snaps.size();
  for (std::size_t k = 0; k < snaps.size(); ++k)
    if (std::abs(snaps[k]->time() - tau) <= tol) last = k;
  if (last == snaps.size()) fail(ErrorCode::DomainViolation, "tau must be a stored snapshot time");
  std::size_t first = 0;
  for (std::size_t k = 0; k <= last; ++k)
    if (snaps[k]->time() <= phi.t_center - phi.t_half_width) first = k;

  SuitabilityResult res;
  res.tau = tau;
  if (last <= first) return res;  // support starts after tau: every term vanishes

  // Cubic stencils need four slices; borrow neighbours outside [first, last] when stored.
  const std::size_t lo = first >= 1 ? first - 1 : first;
  const std::size_t hi = std::min(snaps.size() - 1, last + 1);
  const std::size_t count = hi - lo + 1;
  std::vector<detail::SliceTerms> terms(count);
  std::vector<double> times(count);
  for (std::size_t q = 0; q < count; ++q) {
    terms[q] = detail::slice_terms(*snaps[lo + q], prof, phi);
    times[q] = snaps[lo + q]->time();
  }
  const double y0 = phi.y_factor(0.0, prof.b)[0];

  // Lagrange cubic through the four slices nearest to panel [q, q+1].
  auto interp = [&](std::size_t q, double t, auto field) {
    std::size_t s0 = q >= 1 ? q - 1 : 0;
    if (count >= 4) s0 = std::min(s0, count - 4);
    const std::size_t s1 = std::min(count, s0 + 4);
    double acc = 0.0;
    for (std::size_t a = s0; a < s1; ++a) {
      double w = 1.0;
      for (std::size_t c = s0; c < s1; ++c)
        if (c != a) w *= (t - times[c]) / (times[a] - times[c]);
      acc += w * field(terms[a]);
    }
    return acc;
  };
  static const double xg[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                               0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static const double wg[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                               0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    const std::size_t q = k - lo;
    const double a = times[q], b = times[q + 1];
    for (int gq = 0; gq < 8; ++gq) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * xg[gq];
      const double w = 0.5 * (b - a) * wg[gq];
      const double th = phi.theta(t), dth = phi.dtheta(t);
      if (th == 0.0 && dth == 0.0) continue;
      e1 += w * dth * y0 * interp(q, t, [](const detail::SliceTerms& s) { return s.energy; });
      e2 += w * th * y0 * interp(q, t, [](const detail::SliceTerms& s) { return s.flux; });
      e3 -= w * 2.0 * c_alpha * th * interp(q, t, [](const detail::SliceTerms& s) { return s.dissip; });
      e4 -= w * 2.0 * c_alpha * th * interp(q, t, [](const detail::SliceTerms& s) { return s.cross; });
    }
  }
  const double end_energy = phi.theta(tau) * y0 * terms[last - lo].energy;
  res.residual = phi.amplitude * (e1 + e2 + e3 + e4 - end_energy);
  res.scale = phi.amplitude * (std::abs(e1) + std::abs(e2) + std::abs(e3) + std::abs(e4) + std::abs(end_energy));
  return res;
}

}  // namespace fracreg::local

#pragma once

// Empirical-constant ratios lhs/rhs for the local inequalities, each taken with
// constant 1 on the right. 0/0 reads as 0 (flagged degenerate); a vanishing
// right side under a positive left side is an error.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fracreg/core/error.hpp"
#include "fracreg/local/cylinder.hpp"
#include "fracreg/local/provider.hpp"
#include "fracreg/local/quantities.hpp"
#include "fracreg/spectral/maximal.hpp"

namespace fracreg::local {

struct RatioResult {
  double ratio = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool degenerate = false;
};

inline RatioResult make_ratio(double lhs, double rhs, const char* what) {
  if (lhs == 0.0 && rhs == 0.0) return {0.0, 0.0, 0.0, true};
  if (!(rhs > 0.0))
    fail(ErrorCode::DegenerateDenominator, std::string(what) + ": right side vanishes under a positive left side");
  return {lhs / rhs, lhs, rhs, false};
}

inline void check_scale_pair(double r, double rho) {
  if (!(r > 0.0) || r > 0.5 * rho * (1.0 + 1e-12))
    fail(ErrorCode::DomainViolation, "scale pair needs 0 < r <= rho/2");
}

/// C(r) against (rho/r)^{15/2-6a} A^{1/2}(rho)(E(rho)+T(rho)) + (r/rho)^{6a-3} A^{3/2}(rho).
inline RatioResult interpolation_ratio(const Trajectory& tr, const ExtensionProvider& prov, const SpaceTimePoint& z,
                                       double r, double rho) {
  check_scale_pair(r, rho);
  check_cylinder(tr, z, rho);
  check_cylinder(tr, z, r);
  const double a = tr.alpha.alpha();
  BallCache balls(tr.grid());
  const double c = quantity_C(tr, balls, z, r);
  const double A = quantity_A(tr, balls, z, rho);
  const double E = quantity_E(tr, prov, balls, z, rho);
  const double T = quantity_T(tr, balls, z, rho);
  const double rhs = std::pow(rho / r, 7.5 - 6.0 * a) * std::sqrt(A) * (E + T) + std::pow(r / rho, 6.0 * a - 3.0) * A * std::sqrt(A);
  return make_ratio(c, rhs, "interpolation_ratio");
}

/// D(r) against (r/rho)^{4a-3/2} D(rho) + (rho/r)^{6-4a} C(rho).
inline RatioResult pressure_decay_ratio(const Trajectory& tr, const SpaceTimePoint& z, double r, double rho) {
  check_scale_pair(r, rho);
  check_cylinder(tr, z, rho);
  check_cylinder(tr, z, r);
  const double a = tr.alpha.alpha();
  BallCache balls(tr.grid());
  const double d = quantity_D(tr, balls, z, r);
  const double rhs = std::pow(r / rho, 4.0 * a - 1.5) * quantity_D(tr, balls, z, rho) +
                     std::pow(rho / r, 6.0 - 4.0 * a) * quantity_C(tr, balls, z, rho);
  return make_ratio(d, rhs, "pressure_decay_ratio");
}

/// Per-slice reference level g(t_k); empty means the mean of |u|^2 over B_{4r/3}.
using SliceLevel = std::function<double(std::size_t snapshot_index)>;

/// Local energy inequality: A(r) + E(r) against the three integrals over
/// Q_{4r/3} with constant 1.
inline RatioResult local_energy_ratio(const Trajectory& tr, const ExtensionProvider& prov, const SpaceTimePoint& z,
                                      double r, SliceLevel g = {}) {
  const double R = 4.0 * r / 3.0;
  check_cylinder(tr, z, r);
  check_cylinder(tr, z, R);
  const double a = tr.alpha.alpha();
  BallCache balls(tr.grid());
  const double lhs = quantity_A(tr, balls, z, r) + quantity_E(tr, prov, balls, z, r);

  const auto& big = balls.get(z.x, R);
  const double t0 = z.t - tr.alpha.time_scale(R);
  auto level = [&](std::size_t k) {
    if (g) return g(k);
    const auto& s = *tr.snapshots[k];
    double acc = 0.0;
    for (std::size_t i : big) acc += speed2(s, i);
    return big.empty() ? 0.0 : acc / static_cast<double>(big.size());
  };
  const double i1 = integrate_window(tr, t0, z.t, [&](std::size_t k) {
    const auto& s = *tr.snapshots[k];
    return ball_integral(s.grid(), big, [&](std::size_t i) { return speed2(s, i); });
  });
  const double i2 = integrate_window(tr, t0, z.t, [&](std::size_t k) {
    const auto& s = *tr.snapshots[k];
    const double gk = level(k);
    return ball_integral(s.grid(), big, [&](std::size_t i) {
      const double q = speed2(s, i);
      return std::sqrt(q) * (std::abs(q - gk) + std::abs(s.p_real[i]));
    });
  });
  const double i3 = integrate_window(tr, t0, z.t, [&](std::size_t k) {
    return tail_sup(*tr.snapshots[k], balls, z.x, r, a);
  });
  const double rhs = std::pow(r, 2.0 * a - 5.0) * i1 + std::pow(r, 4.0 * a - 6.0) * i2 + std::pow(r, 5.0 * a - 2.0) * i3;
  return make_ratio(lhs, rhs, "local_energy_ratio");
}

/// Extension embedding on one slice: ||u||^2_{L^q(B_r)}, q = 6/(3-2a), against
/// int_{B_rho x [0, rho)} y^b |Delta_b u*|^2 + rho^{a+3} sup_{R >= rho/4} R^{-3a} avg_{B_R} |u|^2.
inline RatioResult embedding_ratio(const SnapshotPtr& snap, const ExtensionProvider& prov,
                                   const std::array<double, 3>& x, double r, double rho) {
  check_scale_pair(r, rho);
  const auto& g = snap->grid();
  if (rho > 0.5 * g.box_length() * (1.0 + 1e-12))
    fail(ErrorCode::CylinderOutOfWindow, "rho exceeds box_length/2");
  if (2.0 * r < 4.0 * g.dx() * (1.0 - 1e-12))
    fail(ErrorCode::RadiusUnresolved, "fewer than 4 grid cells across B_r");
  const double a = prov.alpha();
  const double q = 6.0 / (3.0 - 2.0 * a);
  BallCache balls(g);
  const double lq = ball_integral(g, balls.get(x, r), [&](std::size_t i) { return std::pow(speed2(*snap, i), 0.5 * q); });
  const double lhs = std::pow(lq, 2.0 / q);
  const auto col = prov.column(snap, rho);
  const double ext = ball_integral(g, balls.get(x, rho), [&](std::size_t i) { return (*col)[i]; });
  const double rhs = ext + std::pow(rho, a + 3.0) * tail_sup(*snap, balls, x, 0.25 * rho, a);
  return make_ratio(lhs, rhs, "embedding_ratio");
}

/// sup_{R >= r/4} avg_{B_R} |u|^2 against int_{B_{r/4}} M|u|^2 on one slice.
inline RatioResult maximal_domination_ratio(const spectral::Snapshot& s, const std::array<double, 3>& x, double r) {
  const auto& g = s.grid();
  spectral::RealField q(g.real_size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = speed2(s, i);
  BallCache balls(g);
  const double half_box = 0.5 * g.box_length() * (1.0 + 1e-12);
  double lhs = 0.0;
  for (double R = 0.25 * r; R <= half_box; R *= 2.0) {
    const auto& mem = balls.get(x, R);
    if (!mem.empty()) lhs = std::max(lhs, ball_mean(q, mem));
  }
  const auto m = spectral::maximal_function(s.u.grid, q);
  const double rhs = ball_integral(g, balls.get(x, 0.25 * r), [&](std::size_t i) { return m[i]; });
  return make_ratio(lhs, rhs, "maximal_domination_ratio");
}

struct RatioRow {
  double r = 0.0, rho = 0.0;
  RatioResult value;
};

inline std::string ratio_csv(const std::vector<RatioRow>& rows) {
  std::string out = "r,rho,ratio,flag\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%s\n", row.r, row.rho, row.value.ratio,
                  row.value.degenerate ? "degenerate" : "ok");
    out += buf;
  }
  return out;
}

}  // namespace fracreg::local

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fracreg/core/error.hpp"
#include "fracreg/spectral/solver.hpp"

namespace fracreg::spectral {

/// Hermite-corrected trapezoid of f over one panel given endpoint derivatives.
inline double hermite_panel(double h, double f0, double f1, double d0, double d1) {
  return 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
}

struct EnergyInterval {
  double s = 0.0;
  double t = 0.0;
  double residual = 0.0;  // [E(t) + int_s^t D - E(s)] / E(t_0)
};

struct EnergyReport {
  std::vector<EnergyInterval> intervals;
  double worst = 0.0;  // max |residual|
  double energy_scale = 0.0;  // E(t_0), the normalization
  double tolerance = 0.0;
  bool suitable_grade = true;
  bool strictly_decreasing = true;  // kinetic energy across snapshots
  std::string caveat = "periodic box stands in for R^3";
};

namespace detail {

/// Dissipation samples (t, D, dD/dt) covering [s, t]; prefers the per-step history.
inline std::vector<HistorySample> samples_on(const Trajectory& tr, const std::vector<HistorySample>& snap,
                                             double s, double t) {
  std::vector<HistorySample> out;
  const double eps = 1e-9 * std::max(1.0, std::abs(t));
  for (const auto& h : tr.history)
    if (h.t >= s - eps && h.t <= t + eps) out.push_back(h);
  const bool covers = out.size() >= 2 && std::abs(out.front().t - s) <= eps && std::abs(out.back().t - t) <= eps;
  if (covers) return out;
  out.clear();
  for (const auto& h : snap)
    if (h.t >= s - eps && h.t <= t + eps) out.push_back(h);
  return out;
}

inline std::vector<HistorySample> snapshot_diagnostics(const Trajectory& tr) {
  std::vector<HistorySample> out;
  if (tr.snapshots.empty()) return out;
  FnseStepper stepper(tr.snapshots.front()->u.grid, tr.alpha);
  for (const auto& sp : tr.snapshots) {
    const auto d = stepper.diagnose(sp->u, nonlinear_term(sp->grid(), sp->u.u_hat));
    out.push_back({sp->time(), d.energy, d.dissipation, d.dissipation_rate});
  }
  return out;
}

}  // namespace detail

inline EnergyReport global_energy_report(const Trajectory& tr, double tolerance = 1e-6) {
  require(tr.snapshots.size() >= 2, ErrorCode::DomainViolation,
          "global_energy_report needs at least two snapshots");
  EnergyReport rep;
  rep.tolerance = tolerance;
  const auto snap = detail::snapshot_diagnostics(tr);
  rep.energy_scale = snap.front().energy;
  const double norm = rep.energy_scale > 0.0 ? rep.energy_scale : 1.0;
  for (std::size_t i = 0; i + 1 < snap.size(); ++i) {
    const double s = snap[i].t, t = snap[i + 1].t;
    const auto samples = detail::samples_on(tr, snap, s, t);
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < samples.size(); ++k)
      integral += hermite_panel(samples[k + 1].t - samples[k].t, samples[k].dissipation,
                                samples[k + 1].dissipation, samples[k].dissipation_rate,
                                samples[k + 1].dissipation_rate);
    const double res = (snap[i + 1].energy + integral - snap[i].energy) / norm;
    rep.intervals.push_back({s, t, res});
    rep.worst = std::max(rep.worst, std::abs(res));
    if (!(snap[i + 1].energy < snap[i].energy)) rep.strictly_decreasing = false;
  }
  rep.suitable_grade = rep.worst <= tolerance;
  return rep;
}

struct GradpReport {
  double exponent = 0.0;  // (3 + 2 alpha) / 4
  double lhs = 0.0;  // int int |grad p|^exponent
  double rhs = 0.0;  // (int int |(-Delta)^{alpha/2} u|^2)^{(3 + 2 alpha)/8}
  double ratio = 0.0;
  bool degenerate = false;
  double max_route_difference = 0.0;
};

inline GradpReport gradp_integrability_report(const Trajectory& tr) {
  require(!tr.snapshots.empty(), ErrorCode::DomainViolation, "trajectory has no snapshots");
  const double alpha = tr.alpha.alpha();
  GradpReport rep;
  rep.exponent = (3.0 + 2.0 * alpha) / 4.0;
  std::vector<double> t, lhs_slice, rhs_slice;
  for (const auto& sp : tr.snapshots) {
    const auto& g = sp->grid();
    const GradPressure gp = grad_pressure(sp->u);
    rep.max_route_difference = std::max(rep.max_route_difference, gp.route_difference);
    VectorReal grad;
    for (int c = 0; c < 3; ++c) grad[c] = g.inverse(gp.grad_hat[c]);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.real_size(); ++i) {
      const double m = std::sqrt(grad[0][i] * grad[0][i] + grad[1][i] * grad[1][i] + grad[2][i] * grad[2][i]);
      acc += std::pow(m, rep.exponent);
    }
    t.push_back(sp->time());
    lhs_slice.push_back(acc * g.cell_volume());
    rhs_slice.push_back(dissipation(sp->u, tr.alpha));
  }
  double lhs = 0.0, rhs = 0.0;
  if (t.size() == 1) {
    lhs = lhs_slice[0];
    rhs = rhs_slice[0];
  } else {
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const double h = t[i + 1] - t[i];
      lhs += 0.5 * h * (lhs_slice[i] + lhs_slice[i + 1]);
      rhs += 0.5 * h * (rhs_slice[i] + rhs_slice[i + 1]);
    }
  }
  rep.lhs = lhs;
  rep.rhs = std::pow(rhs, (3.0 + 2.0 * alpha) / 8.0);
  if (rep.rhs <= 0.0) {
    rep.degenerate = true;
    rep.ratio = 0.0;
  } else {
    rep.ratio = rep.lhs / rep.rhs;
  }
  return rep;
}

/// Spectral check of ||grad u||^2 <= ||u||^2 + ||(-Delta)^{alpha/2} u||^2.
inline double fourier_splitting_margin(const VelocityState& s, const AlphaParams& a) {
  return l2_norm2(s) + dissipation(s, a) - gradient_norm2(s);
}

}  // namespace fracreg::spectral

#pragma once

// Maximizes the regularity gain gamma over the five-constraint system.
//
// For fixed zeta the constraints are affine in (gamma, N zeta), so the
// feasible set is convex: gamma is bisected and, for each trial gamma, the
// best N zeta is found by golden-section search on the concave function
// N zeta -> min_i margin_i. The continuous N zeta is finally realized as an
// integer N = round(N zeta / zeta) and the witness re-checked.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fracreg/bounds/closed_forms.hpp"
#include "fracreg/bounds/constraints.hpp"
#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"

namespace fracreg::bounds {

inline constexpr double kOptimizerAlphaMargin = 1e-9;

struct OptimizerOptions {
  int gamma_bisection_steps = 60;
  int golden_steps = 120;
  /// Margins of the integer-N witness must be >= -witness_tol.
  double witness_tol = 0.0;
};

struct ScheduleWitness {
  double zeta = 0.0;
  bool feasible = false;
  /// Continuous optimum before integer realization.
  double gamma_continuous = 0.0;
  double n_zeta_continuous = 0.0;
  IterParams params;
  ConstraintMargins margins;
};

struct GammaOptimum {
  double alpha = 0.0;
  double gamma_star = 0.0;
  std::vector<ScheduleWitness> witnesses;

  /// Feasible witness at the finest zeta.
  const ScheduleWitness& best() const {
    for (auto it = witnesses.rbegin(); it != witnesses.rend(); ++it)
      if (it->feasible) return *it;
    fail(ErrorCode::InvariantViolation, "no feasible witness");
  }
};

inline std::vector<double> default_zeta_schedule() {
  return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

/// The optimizer works on the closed interval [1 + 1e-9, 5/4 - 1e-9].
inline AlphaParams clamp_for_optimizer(double alpha) {
  return AlphaParams(std::clamp(alpha, kAlphaLower + kOptimizerAlphaMargin,
                                kAlphaUpper - kOptimizerAlphaMargin));
}

namespace detail {

struct InnerMax {
  double n_zeta = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

/// max over n_zeta >= zeta of min_i margin_i(gamma, zeta, n_zeta).
/// Bracket starts at the asymptotic optimum and widens geometrically until the
/// objective is no longer improving at the right end.
inline InnerMax best_n_zeta(const AlphaParams& a, double gamma, double zeta, int steps) {
  auto objective = [&](double nz) {
    return constraint_margins(a, gamma, zeta, nz).min_margin();
  };
  const double lo_bound = zeta;
  const double seed = std::max(nzeta_star(a), lo_bound);
  double hi = std::max(2.0 * seed, lo_bound * 2.0);
  while (objective(hi) > objective(0.5 * (seed + hi)) - 1e-15 && hi < 1e6) hi *= 2.0;
  double lo = lo_bound;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int k = 0; k < steps; ++k) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  InnerMax best{0.5 * (lo + hi), objective(0.5 * (lo + hi))};
  for (double cand : {lo_bound, seed}) {
    const double v = objective(cand);
    if (v > best.value) best = {cand, v};
  }
  return best;
}

inline ScheduleWitness solve_for_zeta(const AlphaParams& a, double zeta,
                                      const OptimizerOptions& opt) {
  ScheduleWitness w;
  w.zeta = zeta;
  const double L = eval_L(a);
  if (best_n_zeta(a, 0.0, zeta, opt.golden_steps).value < 0.0) return w;

  double lo = 0.0;
  double hi = L;
  for (int k = 0; k < opt.gamma_bisection_steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (best_n_zeta(a, mid, zeta, opt.golden_steps).value >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const InnerMax inner = best_n_zeta(a, lo, zeta, opt.golden_steps);
  w.gamma_continuous = lo;
  w.n_zeta_continuous = inner.n_zeta;

  // Integer realization; gamma is lowered to the largest value admissible at
  // the realized N (each margin is cap_i - gamma).
  const long n = std::max(1L, std::lround(inner.n_zeta / zeta));
  const double nz = static_cast<double>(n) * zeta;
  const auto caps = gamma_caps_of(a.alpha(), zeta, nz);
  const double gamma = std::min(lo, *std::min_element(caps.begin(), caps.end()));
  if (gamma < 0.0) return w;

  w.params.zeta = zeta;
  w.params.n_steps = n;
  w.params.gamma = gamma;
  w.params.eta = eta_from_of(a.alpha(), zeta, nz, gamma);
  // theta = rho^zeta = 1/2 when rho is representable.
  const double rho = std::exp2(-1.0 / zeta);
  if (rho > std::numeric_limits<double>::min()) w.params.rho = rho;
  w.margins = constraint_margins(a, gamma, zeta, nz);
  w.feasible = w.margins.feasible(opt.witness_tol);
  return w;
}

}  // namespace detail

/// Maximal gamma per schedule entry and the zeta -> 0 estimate gamma_star.
inline GammaOptimum optimize_gamma(double alpha, const std::vector<double>& zeta_schedule,
                                   const OptimizerOptions& opt = {}) {
  require(!zeta_schedule.empty(), ErrorCode::NonmonotoneSchedule, "empty zeta schedule");
  for (std::size_t i = 0; i < zeta_schedule.size(); ++i) {
    require(zeta_schedule[i] > 0.0, ErrorCode::NonmonotoneSchedule, "zeta must be > 0");
    if (i > 0)
      require(zeta_schedule[i] < zeta_schedule[i - 1], ErrorCode::NonmonotoneSchedule,
              "zeta schedule must be strictly decreasing");
  }
  const AlphaParams a = clamp_for_optimizer(alpha);
  GammaOptimum out;
  out.alpha = a.alpha();
  for (double zeta : zeta_schedule) out.witnesses.push_back(detail::solve_for_zeta(a, zeta, opt));

  require(out.witnesses.back().feasible, ErrorCode::InfeasibleAtGammaZero,
          "gamma = 0 infeasible at the finest zeta (alpha = " + std::to_string(a.alpha()) + ")");

  // Linear extrapolation zeta -> 0 through the two finest feasible entries.
  const ScheduleWitness& last = out.witnesses.back();
  double estimate = last.gamma_continuous;
  if (out.witnesses.size() >= 2) {
    const ScheduleWitness& prev = out.witnesses[out.witnesses.size() - 2];
    if (prev.feasible) {
      const double slope =
          (last.gamma_continuous - prev.gamma_continuous) / (prev.zeta - last.zeta);
      estimate = last.gamma_continuous + slope * last.zeta;
    }
  }
  out.gamma_star = std::clamp(estimate, last.params.gamma, eval_L(a));
  return out;
}

}  // namespace fracreg::bounds

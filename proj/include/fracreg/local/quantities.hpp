#pragma once

// The five scale-invariant quantities on Q_r(z):
//   A = sup_t r^{4 alpha - 5} int_{B_r} |u|^2
//   C = r^{4 alpha - 6} int_{Q_r} |u|^3
//   D = r^{4 alpha - 6} int_{Q_r} |p - [p]_r|^{3/2}
//   E = r^{4 alpha - 5} int_{Q_r x [0, r)} y^b |Delta_b u*|^2
//   T = r^{5 alpha - 2} int sup_{R >= r/4} R^{-3 alpha} avg_{B_R} |u|^2 dt
// with [p]_r the per-slice mean over B_r and R restricted to dyadic multiples
// of r/4 not exceeding box_length/2.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/local/cylinder.hpp"
#include "fracreg/local/provider.hpp"

namespace fracreg::local {

inline constexpr const char* kTorusCaveat =
    "periodic box stands in for R^3; sup over R truncated at box_length/2";

struct QuantityReport {
  SpaceTimePoint z;
  double r = 0.0;
  double a_val = 0.0, c_val = 0.0, d_val = 0.0, e_val = 0.0, t_val = 0.0;
  double epsilon_sum = 0.0;  // C + D + T
  bool e_computed = false;
};

/// Cached ball membership for repeated queries on one grid.
class BallCache {
 public:
  explicit BallCache(const SpectralGrid& g) : g_(g) {}
  const std::vector<std::size_t>& get(const std::array<double, 3>& x, double r) {
    const auto key = std::make_tuple(x[0], x[1], x[2], r);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, ball_members(g_, x, r)).first;
    return it->second;
  }

 private:
  const SpectralGrid& g_;
  std::map<std::tuple<double, double, double, double>, std::vector<std::size_t>> cache_;
};

/// sup over dyadic R = R_min 2^k <= box/2 of R^{-3 alpha} avg_{B_R} |u|^2 on one slice.
inline double tail_sup(const spectral::Snapshot& s, BallCache& balls, const std::array<double, 3>& x,
                       double r_min, double alpha) {
  const double half_box = 0.5 * s.grid().box_length() * (1.0 + 1e-12);
  double best = 0.0;
  for (double R = r_min; R <= half_box; R *= 2.0) {
    const auto& mem = balls.get(x, R);
    if (mem.empty()) continue;
    double acc = 0.0;
    for (std::size_t i : mem) acc += speed2(s, i);
    best = std::max(best, std::pow(R, -3.0 * alpha) * acc / static_cast<double>(mem.size()));
  }
  return best;
}

inline double quantity_A(const Trajectory& tr, BallCache& balls, const SpaceTimePoint& z, double r) {
  const double alpha = tr.alpha.alpha();
  const auto& mem = balls.get(z.x, r);
  double best = 0.0;
  for (std::size_t k : slices_in(tr, z.t - tr.alpha.time_scale(r), z.t)) {
    const auto& s = *tr.snapshots[k];
    best = std::max(best, ball_integral(s.grid(), mem, [&](std::size_t i) { return speed2(s, i); }));
  }
  return std::pow(r, 4.0 * alpha - 5.0) * best;
}

inline double quantity_C(const Trajectory& tr, BallCache& balls, const SpaceTimePoint& z, double r) {
  const double alpha = tr.alpha.alpha();
  const auto& mem = balls.get(z.x, r);
  const double integral = integrate_window(tr, z.t - tr.alpha.time_scale(r), z.t, [&](std::size_t k) {
    const auto& s = *tr.snapshots[k];
    return ball_integral(s.grid(), mem, [&](std::size_t i) { return std::pow(speed2(s, i), 1.5); });
  });
  return std::pow(r, 4.0 * alpha - 6.0) * integral;
}

inline double ball_mean(const RealField& f, const std::vector<std::size_t>& mem) {
  double acc = 0.0;
  for (std::size_t i : mem) acc += f[i];
  return mem.empty() ? 0.0 : acc / static_cast<double>(mem.size());
}

inline double quantity_D(const Trajectory& tr, BallCache& balls, const SpaceTimePoint& z, double r) {
  const double alpha = tr.alpha.alpha();
  const auto& mem = balls.get(z.x, r);
  const double integral = integrate_window(tr, z.t - tr.alpha.time_scale(r), z.t, [&](std::size_t k) {
    const auto& s = *tr.snapshots[k];
    const double mean = ball_mean(s.p_real, mem);
    return ball_integral(s.grid(), mem, [&](std::size_t i) { return std::pow(std::abs(s.p_real[i] - mean), 1.5); });
  });
  return std::pow(r, 4.0 * alpha - 6.0) * integral;
}

inline double quantity_E(const Trajectory& tr, const ExtensionProvider& prov, BallCache& balls,
                         const SpaceTimePoint& z, double r) {
  const double alpha = tr.alpha.alpha();
  require(std::abs(prov.alpha() - alpha) < 1e-14, ErrorCode::DomainViolation,
          "extension profile alpha differs from trajectory alpha");
  const auto& mem = balls.get(z.x, r);
  const double integral = integrate_window(tr, z.t - tr.alpha.time_scale(r), z.t, [&](std::size_t k) {
    const auto col = prov.column(tr.snapshots[k], r);
    return ball_integral(tr.snapshots[k]->grid(), mem, [&](std::size_t i) { return (*col)[i]; });
  });
  return std::pow(r, 4.0 * alpha - 5.0) * integral;
}

inline double quantity_T(const Trajectory& tr, BallCache& balls, const SpaceTimePoint& z, double r) {
  const double alpha = tr.alpha.alpha();
  const double integral = integrate_window(tr, z.t - tr.alpha.time_scale(r), z.t, [&](std::size_t k) {
    return tail_sup(*tr.snapshots[k], balls, z.x, 0.25 * r, alpha);
  });
  return std::pow(r, 5.0 * alpha - 2.0) * integral;
}

/// All five quantities; pass provider = nullptr to skip E.
inline QuantityReport compute_quantities(const Trajectory& tr, const ExtensionProvider* prov,
                                         const SpaceTimePoint& z, double r) {
  check_cylinder(tr, z, r);
  BallCache balls(tr.grid());
  QuantityReport q;
  q.z = z;
  q.r = r;
  q.a_val = quantity_A(tr, balls, z, r);
  q.c_val = quantity_C(tr, balls, z, r);
  q.d_val = quantity_D(tr, balls, z, r);
  q.t_val = quantity_T(tr, balls, z, r);
  if (prov) {
    q.e_val = quantity_E(tr, *prov, balls, z, r);
    q.e_computed = true;
  }
  q.epsilon_sum = q.c_val + q.d_val + q.t_val;
  return q;
}

/// Reports for many (z, r) in parallel over a shared trajectory.
inline std::vector<QuantityReport> compute_quantities_batch(const Trajectory& tr, const ExtensionProvider* prov,
                                                            const std::vector<SpaceTimePoint>& centers,
                                                            const std::vector<double>& radii) {
  std::vector<QuantityReport> out(centers.size() * radii.size());
  parallel_for(out.size(), [&](std::size_t q) {
    out[q] = compute_quantities(tr, prov, centers[q / radii.size()], radii[q % radii.size()]);
  });
  return out;
}

// ---------------------------------------------------------------- scaling

/// u_l(x, t) = l^{2a-1} u(l x, l^{2a} t), p_l = l^{4a-2} p(l x, l^{2a} t) for
/// l = 2^k: the same grid on a box of length L/l, relabelled in time.
inline Trajectory scaling_transform(const Trajectory& tr, double lambda) {
  const double k = std::round(std::log2(lambda));
  if (!(lambda > 0.0) || std::abs(lambda - std::exp2(k)) > 1e-15 * lambda)
    fail(ErrorCode::NonDyadicLambda, "lambda must be an integer power of 2, got " + std::to_string(lambda));
  if (lambda == 1.0) return tr;
  const double alpha = tr.alpha.alpha();
  const double su = std::pow(lambda, 2.0 * alpha - 1.0);
  const double sp = std::pow(lambda, 4.0 * alpha - 2.0);
  const double st = std::pow(lambda, 2.0 * alpha);
  const auto& g0 = tr.grid();
  auto g = spectral::make_grid(g0.n(), g0.box_length() / lambda);
  Trajectory out{tr.alpha, tr.dt_output / st, {}, {}};
  for (const auto& s : tr.snapshots) {
    auto ns = std::make_shared<spectral::Snapshot>();
    ns->u = spectral::VelocityState{g, s->time() / st, s->u.u_hat};
    for (auto& c : ns->u.u_hat)
      for (auto& v : c) v *= su;
    ns->p = spectral::PressureField{g, s->p.p_hat};
    for (auto& v : ns->p.p_hat) v *= sp;
    ns->u_real = s->u_real;
    for (auto& c : ns->u_real)
      for (auto& v : c) v *= su;
    ns->p_real = s->p_real;
    for (auto& v : ns->p_real) v *= sp;
    out.snapshots.push_back(std::move(ns));
  }
  const double e_scale = su * su / (lambda * lambda * lambda);
  for (const auto& h : tr.history)
    out.history.push_back({h.t / st, h.energy * e_scale, h.dissipation * e_scale * st,
                           h.dissipation_rate * e_scale * st * st});
  return out;
}

struct ScalingResiduals {
  double a = 0.0, c = 0.0, d = 0.0, e = 0.0, t = 0.0;
  double max() const { return std::max({a, c, d, e, t}); }
};

inline ScalingResiduals scaling_invariance_residual(const Trajectory& tr, const ExtensionProvider* prov,
                                                    double lambda, const SpaceTimePoint& z, double r) {
  const auto scaled = scaling_transform(tr, lambda);
  const double st = std::pow(lambda, 2.0 * tr.alpha.alpha());
  const SpaceTimePoint zs{{z.x[0] / lambda, z.x[1] / lambda, z.x[2] / lambda}, z.t / st};
  const auto q0 = compute_quantities(tr, prov, z, r);
  const auto q1 = compute_quantities(scaled, prov, zs, r / lambda);
  auto rel = [](double a, double b) {
    const double m = std::max(std::abs(a), 1e-300);
    return a == b ? 0.0 : std::abs(a - b) / m;
  };
  return {rel(q0.a_val, q1.a_val), rel(q0.c_val, q1.c_val), rel(q0.d_val, q1.d_val), rel(q0.e_val, q1.e_val),
          rel(q0.t_val, q1.t_val)};
}

// ---------------------------------------------------------------- epsilon criterion

struct EpsilonVerdict {
  double epsilon_sum = 0.0;
  bool pass = false;  // epsilon_sum < epsilon_0
};

inline EpsilonVerdict epsilon_criterion(const Trajectory& tr, const SpaceTimePoint& z, double r, double epsilon_0) {
  require(epsilon_0 > 0.0, ErrorCode::ConfigError, "epsilon_0 must be positive");
  const auto q = compute_quantities(tr, nullptr, z, r);
  return {q.epsilon_sum, q.epsilon_sum < epsilon_0};
}

// ---------------------------------------------------------------- CSV

inline std::string quantity_csv(const std::vector<QuantityReport>& rows) {
  std::string out = "x1,x2,x3,t,r,A,C,D,E,T,eps_sum\n";
  char buf[512];
  for (const auto& q : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", q.z.x[0],
                  q.z.x[1], q.z.x[2], q.z.t, q.r, q.a_val, q.c_val, q.d_val, q.e_val, q.t_val, q.epsilon_sum);
    out += buf;
  }
  return out;
}

}  // namespace fracreg::local

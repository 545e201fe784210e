#pragma once

// Pseudo-spectral stepping for
//   d_t u + (-Delta)^alpha u + P div(u (x) u) = 0
// with an exact integrating factor for the dissipation and classical RK4 for
// the projected, dealiased nonlinearity.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/spectral/state.hpp"

namespace fracreg::spectral {

namespace detail {

inline constexpr std::array<std::array<int, 2>, 6> kSymPairs{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

inline int sym_slot(int i, int j) {
  if (i > j) std::swap(i, j);
  for (int s = 0; s < 6; ++s)
    if (kSymPairs[s][0] == i && kSymPairs[s][1] == j) return s;
  return -1;
}

/// Dealiased transforms of the six products u_i u_j.
inline std::array<SpectralField, 6> product_spectra(const SpectralGrid& g, const VectorReal& u) {
  std::array<SpectralField, 6> out;
  parallel_for(6, [&](std::size_t s) {
    const int a = kSymPairs[s][0], b = kSymPairs[s][1];
    RealField prod(g.real_size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u[a][i] * u[b][i];
    out[s] = g.forward(prod);
    g.dealias(out[s]);
  });
  return out;
}

inline bool all_finite(const VectorSpectral& v) {
  for (const auto& c : v)
    for (const auto& z : c)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace detail

/// -P div(u (x) u), dealiased. Optionally reports max |u| on the grid.
inline VectorSpectral nonlinear_term(const SpectralGrid& g, const VectorSpectral& u_hat,
                                     double* max_speed_out = nullptr) {
  VectorReal u;
  parallel_for(3, [&](std::size_t c) { u[c] = g.inverse(u_hat[c]); });
  if (max_speed_out) *max_speed_out = max_speed(u);
  const auto prod = detail::product_spectra(g, u);
  VectorSpectral out;
  for (auto& c : out) c.assign(g.spectral_size(), Complex{});
  const Complex I(0.0, 1.0);
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.nzh(); ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        if (!g.retained(idx)) continue;
        const auto xi = g.wavevector(i, j, k);
        for (int c = 0; c < 3; ++c) {
          Complex acc{};
          for (int d = 0; d < 3; ++d) acc += xi[d] * prod[detail::sym_slot(c, d)][idx];
          out[c][idx] = -I * acc;
        }
      }
  leray_project_in_place(g, out);
  return out;
}

struct StepDiagnostics {
  double max_speed = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double dissipation_rate = 0.0;  // d/dt of the dissipation at the start of the step
};

class FnseStepper {
 public:
  FnseStepper(GridPtr grid, AlphaParams a) : grid_(std::move(grid)), alpha_(a) {
    symbol_.resize(grid_->spectral_size());
    for (std::size_t i = 0; i < symbol_.size(); ++i) {
      const double k2 = grid_->k2(i);
      symbol_[i] = k2 == 0.0 ? 0.0 : std::pow(k2, alpha_.alpha());
    }
  }

  const AlphaParams& alpha() const noexcept { return alpha_; }
  const GridPtr& grid() const noexcept { return grid_; }

  /// |xi|^{2 alpha} per spectral index.
  double symbol(std::size_t idx) const { return symbol_[idx]; }

  /// Energy, dissipation and the exact time derivative of the dissipation.
  StepDiagnostics diagnose(const VelocityState& s, const VectorSpectral& n_hat) const {
    const auto& g = *grid_;
    StepDiagnostics d;
    double e = 0.0, D = 0.0, dD = 0.0;
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j)
        for (int k = 0; k < g.nzh(); ++k) {
          const std::size_t idx = g.sindex(i, j, k);
          const double w = g.hermitian_weight(k);
          const double sym = symbol_[idx];
          for (int c = 0; c < 3; ++c) {
            const Complex u = s.u_hat[c][idx];
            e += w * std::norm(u);
            D += w * sym * std::norm(u);
            dD += w * sym * (-sym * std::norm(u) + (std::conj(u) * n_hat[c][idx]).real());
          }
        }
    d.energy = 0.5 * g.volume() * e;
    d.dissipation = g.volume() * D;
    d.dissipation_rate = 2.0 * g.volume() * dD;
    return d;
  }

  VelocityState step(const VelocityState& s, double dt, StepDiagnostics* diag = nullptr) const {
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::DomainViolation, "dt must be positive");
    require(s.grid.get() == grid_.get() || (s.grid->n() == grid_->n() &&
                                            s.grid->box_length() == grid_->box_length()),
            ErrorCode::InvariantViolation, "state grid does not match stepper grid");
    const auto& g = *grid_;
    const std::size_t m = g.spectral_size();
    std::vector<double> e_full(m), e_half(m);
    for (std::size_t i = 0; i < m; ++i) {
      e_full[i] = std::exp(-symbol_[i] * dt);
      e_half[i] = std::exp(-symbol_[i] * 0.5 * dt);
    }

    double umax = 0.0;
    const VectorSpectral k1 = nonlinear_term(g, s.u_hat, &umax);
    if (!std::isfinite(umax)) fail(ErrorCode::NanDetected, "non-finite velocity before step");
    if (umax * dt > 0.5 * g.dx() * (1.0 + 1e-12))
      fail(ErrorCode::CflViolation, "max|u| dt = " + std::to_string(umax * dt) +
                                        " exceeds 0.5 dx = " + std::to_string(0.5 * g.dx()));
    if (diag) {
      *diag = diagnose(s, k1);
      diag->max_speed = umax;
    }

    auto combine = [&](auto&& f) {
      VectorSpectral out;
      for (int c = 0; c < 3; ++c) {
        out[c].resize(m);
        for (std::size_t i = 0; i < m; ++i) out[c][i] = f(c, i);
      }
      return out;
    };
    const double h = dt;
    const VectorSpectral k2 = nonlinear_term(
        g, combine([&](int c, std::size_t i) { return e_half[i] * (s.u_hat[c][i] + 0.5 * h * k1[c][i]); }));
    const VectorSpectral k3 = nonlinear_term(
        g, combine([&](int c, std::size_t i) { return e_half[i] * s.u_hat[c][i] + 0.5 * h * k2[c][i]; }));
    const VectorSpectral k4 = nonlinear_term(g, combine([&](int c, std::size_t i) {
      return e_full[i] * s.u_hat[c][i] + h * e_half[i] * k3[c][i];
    }));

    VelocityState out{s.grid, s.time + dt, combine([&](int c, std::size_t i) {
                        return e_full[i] * s.u_hat[c][i] +
                               h / 6.0 *
                                   (e_full[i] * k1[c][i] + 2.0 * e_half[i] * (k2[c][i] + k3[c][i]) +
                                    k4[c][i]);
                      })};
    for (auto& c : out.u_hat) g.dealias(c);
    leray_project_in_place(g, out.u_hat);
    if (!detail::all_finite(out.u_hat)) fail(ErrorCode::NanDetected, "non-finite state after step");
    return out;
  }

 private:
  GridPtr grid_;
  AlphaParams alpha_;
  std::vector<double> symbol_;
};

inline VelocityState step(const VelocityState& s, double dt, const AlphaParams& a) {
  return FnseStepper(s.grid, a).step(s, dt);
}

// ---------------------------------------------------------------- pressure

/// Zero-mean p with -Delta p = div div(u (x) u), products dealiased.
inline PressureField pressure_from(const VelocityState& u) {
  const auto& g = *u.grid;
  const auto prod = detail::product_spectra(g, u.to_real());
  PressureField p{u.grid, SpectralField(g.spectral_size())};
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.nzh(); ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        const double k2 = g.k2(idx);
        if (k2 == 0.0 || !g.retained(idx)) continue;
        const auto xi = g.wavevector(i, j, k);
        Complex acc{};
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) acc += xi[a] * xi[b] * prod[detail::sym_slot(a, b)][idx];
        p.p_hat[idx] = -acc / k2;
      }
  return p;
}

/// || |xi|^2 p_hat - (div div(u (x) u))^ || / || (div div(u (x) u))^ ||, l2 over retained modes.
inline double poisson_residual(const VelocityState& u, const PressureField& p) {
  const auto& g = *u.grid;
  const auto prod = detail::product_spectra(g, u.to_real());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.nzh(); ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        if (!g.retained(idx) || g.k2(idx) == 0.0) continue;
        const auto xi = g.wavevector(i, j, k);
        Complex divdiv{};
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) divdiv -= xi[a] * xi[b] * prod[detail::sym_slot(a, b)][idx];
        num += std::norm(g.k2(idx) * p.p_hat[idx] - divdiv);
        den += std::norm(divdiv);
      }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

struct GradPressure {
  VectorSpectral grad_hat;  // route (b)
  double route_difference = 0.0;  // max |a - b| / max |b| over modes
};

/// grad p by two spectral routes: (a) i xi p_hat, (b) Riesz compositions
/// R_i R_j applied to d_k(u_i u_j) = (d_k u_i) u_j + u_i d_k u_j.
inline GradPressure grad_pressure(const VelocityState& u) {
  const auto& g = *u.grid;
  const Complex I(0.0, 1.0);
  const PressureField p = pressure_from(u);
  const VectorReal ur = u.to_real();

  // du[k][i] = d_k u_i in real space.
  std::array<VectorReal, 3> du;
  parallel_for(9, [&](std::size_t q) {
    const int kd = static_cast<int>(q / 3), ic = static_cast<int>(q % 3);
    SpectralField tmp(g.spectral_size());
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j)
        for (int k = 0; k < g.nzh(); ++k) {
          const std::size_t idx = g.sindex(i, j, k);
          tmp[idx] = I * g.wavevector(i, j, k)[kd] * u.u_hat[ic][idx];
        }
    du[kd][ic] = g.inverse(tmp);
  });

  GradPressure out;
  for (auto& c : out.grad_hat) c.assign(g.spectral_size(), Complex{});
  for (int kd = 0; kd < 3; ++kd) {
    std::array<SpectralField, 6> dprod;
    parallel_for(6, [&](std::size_t s) {
      const int a = detail::kSymPairs[s][0], b = detail::kSymPairs[s][1];
      RealField f(g.real_size());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = du[kd][a][i] * ur[b][i] + ur[a][i] * du[kd][b][i];
      dprod[s] = g.forward(f);
      g.dealias(dprod[s]);
    });
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j)
        for (int k = 0; k < g.nzh(); ++k) {
          const std::size_t idx = g.sindex(i, j, k);
          const double k2 = g.k2(idx);
          if (k2 == 0.0 || !g.retained(idx)) continue;
          const auto xi = g.wavevector(i, j, k);
          Complex acc{};
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              acc += (I * xi[a]) * (I * xi[b]) / k2 * dprod[detail::sym_slot(a, b)][idx];
          out.grad_hat[kd][idx] = acc;
        }
  }

  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.nzh(); ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        const auto xi = g.wavevector(i, j, k);
        for (int c = 0; c < 3; ++c) {
          const Complex a = I * xi[c] * p.p_hat[idx];
          diff = std::max(diff, std::abs(a - out.grad_hat[c][idx]));
          scale = std::max(scale, std::abs(out.grad_hat[c][idx]));
        }
      }
  out.route_difference = scale > 0.0 ? diff / scale : diff;
  return out;
}

/// max |curl v_hat| / max |xi| |v_hat| for a spectral vector field.
inline double curl_norm(const SpectralGrid& g, const VectorSpectral& v) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.nzh(); ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        const auto xi = g.wavevector(i, j, k);
        const Complex c0 = xi[1] * v[2][idx] - xi[2] * v[1][idx];
        const Complex c1 = xi[2] * v[0][idx] - xi[0] * v[2][idx];
        const Complex c2 = xi[0] * v[1][idx] - xi[1] * v[0][idx];
        num = std::max({num, std::abs(c0), std::abs(c1), std::abs(c2)});
        const double mag = std::sqrt(std::norm(v[0][idx]) + std::norm(v[1][idx]) + std::norm(v[2][idx]));
        den = std::max(den, std::sqrt(g.k2(idx)) * mag);
      }
  return den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------------- trajectories

struct Snapshot {
  VelocityState u;
  PressureField p;
  VectorReal u_real;
  RealField p_real;

  double time() const noexcept { return u.time; }
  const SpectralGrid& grid() const noexcept { return *u.grid; }
};

using SnapshotPtr = std::shared_ptr<const Snapshot>;

inline SnapshotPtr make_snapshot(VelocityState u) {
  auto s = std::make_shared<Snapshot>();
  s->p = pressure_from(u);
  s->u_real = u.to_real();
  s->p_real = s->p.to_real();
  s->u = std::move(u);
  return s;
}

/// Snapshot from stored real-space arrays (velocity and pressure as given).
inline SnapshotPtr make_snapshot(GridPtr g, double time, VectorReal u, RealField p) {
  auto s = std::make_shared<Snapshot>();
  s->u = VelocityState{g, time, {}};
  for (int c = 0; c < 3; ++c) s->u.u_hat[c] = g->forward(u[c]);
  s->p = PressureField{g, g->forward(p)};
  s->u_real = std::move(u);
  s->p_real = std::move(p);
  return s;
}

struct HistorySample {
  double t = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double dissipation_rate = 0.0;
};

struct Trajectory {
  AlphaParams alpha;
  double dt_output = 0.0;
  std::vector<SnapshotPtr> snapshots;
  std::vector<HistorySample> history;  // every solver step, may be empty

  double t_begin() const { return snapshots.front()->time(); }
  double t_end() const { return snapshots.back()->time(); }
  const SpectralGrid& grid() const { return snapshots.front()->grid(); }
};

struct SimulationOptions {
  double dt = 1e-2;
  double t_end = 1.0;
  double dt_output = 0.1;
  std::function<void(const Snapshot&)> on_snapshot;  // called on emission, in order
};

/// Integrates from `init` to t_end. The step is shrunk so that it divides
/// dt_output exactly; t_end must be a multiple of dt_output.
inline Trajectory simulate(VelocityState init, const AlphaParams& a, const SimulationOptions& opt) {
  require(opt.t_end >= 0.0 && std::isfinite(opt.t_end), ErrorCode::DomainViolation, "t_end must be >= 0");
  require(opt.dt > 0.0 && opt.dt_output > 0.0, ErrorCode::DomainViolation,
          "dt and dt_output must be positive");
  const double outs = opt.t_end / opt.dt_output;
  const long n_out = std::lround(outs);
  require(std::abs(outs - static_cast<double>(n_out)) <= 1e-9 * std::max(1.0, outs),
          ErrorCode::DomainViolation, "t_end must be an integer multiple of dt_output");
  const long sub = static_cast<long>(std::ceil(opt.dt_output / opt.dt - 1e-9));
  const double h = opt.dt_output / static_cast<double>(sub);

  for (auto& c : init.u_hat) init.grid->dealias(c);
  leray_project_in_place(*init.grid, init.u_hat);
  const double t0 = init.time;
  FnseStepper stepper(init.grid, a);
  Trajectory traj{a, opt.dt_output, {}, {}};

  auto emit = [&](const VelocityState& s) {
    traj.snapshots.push_back(make_snapshot(s));
    if (opt.on_snapshot) opt.on_snapshot(*traj.snapshots.back());
  };
  emit(init);
  VelocityState cur = std::move(init);
  for (long o = 1; o <= n_out; ++o) {
    for (long k = 0; k < sub; ++k) {
      StepDiagnostics d;
      VelocityState next = stepper.step(cur, h, &d);
      traj.history.push_back({cur.time, d.energy, d.dissipation, d.dissipation_rate});
      next.time = t0 + (static_cast<double>((o - 1) * sub + k + 1)) * h;
      cur = std::move(next);
    }
    emit(cur);
  }
  const auto last = stepper.diagnose(cur, nonlinear_term(*cur.grid, cur.u_hat));
  traj.history.push_back({cur.time, last.energy, last.dissipation, last.dissipation_rate});
  return traj;
}

}  // namespace fracreg::spectral

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/spectral/grid.hpp"

namespace fracreg::spectral {

using VectorReal = std::array<RealField, 3>;
using VectorSpectral = std::array<SpectralField, 3>;

struct VelocityState {
  GridPtr grid;
  double time = 0.0;
  VectorSpectral u_hat;

  int n_grid() const { return grid->n(); }
  double box_length() const { return grid->box_length(); }

  static VelocityState zero(GridPtr g, double t = 0.0) {
    VelocityState s{std::move(g), t, {}};
    for (auto& c : s.u_hat) c.assign(s.grid->spectral_size(), Complex{});
    return s;
  }

  /// Transforms real components, applies the dealias mask. No projection.
  static VelocityState from_real(GridPtr g, const VectorReal& u, double t = 0.0) {
    VelocityState s{std::move(g), t, {}};
    parallel_for(3, [&](std::size_t c) {
      s.u_hat[c] = s.grid->forward(u[c]);
      s.grid->dealias(s.u_hat[c]);
    });
    return s;
  }

  VectorReal to_real() const {
    VectorReal r;
    parallel_for(3, [&](std::size_t c) { r[c] = grid->inverse(u_hat[c]); });
    return r;
  }
};

struct PressureField {
  GridPtr grid;
  SpectralField p_hat;

  RealField to_real() const { return grid->inverse(p_hat); }
};

// ---------------------------------------------------------------- projection

inline void leray_project_in_place(const SpectralGrid& g, VectorSpectral& v) {
  const int n = g.n(), nzh = g.nzh();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < nzh; ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        const double k2 = g.k2(idx);
        if (k2 == 0.0) continue;
        const auto xi = g.wavevector(i, j, k);
        const Complex dot = xi[0] * v[0][idx] + xi[1] * v[1][idx] + xi[2] * v[2][idx];
        for (int c = 0; c < 3; ++c) v[c][idx] -= xi[c] * dot / k2;
      }
}

inline VelocityState leray_project(VelocityState v) {
  leray_project_in_place(*v.grid, v.u_hat);
  return v;
}

/// max |xi . u_hat| over max |xi| |u_hat|, over retained modes; 0 for u = 0.
inline double divergence_norm(const VelocityState& s) {
  const auto& g = *s.grid;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.nzh(); ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        const auto xi = g.wavevector(i, j, k);
        const Complex dot = xi[0] * s.u_hat[0][idx] + xi[1] * s.u_hat[1][idx] +
                            xi[2] * s.u_hat[2][idx];
        const double mag = std::sqrt(std::norm(s.u_hat[0][idx]) + std::norm(s.u_hat[1][idx]) +
                                     std::norm(s.u_hat[2][idx]));
        num = std::max(num, std::abs(dot));
        den = std::max(den, std::sqrt(g.k2(idx)) * mag);
      }
  return den > 0.0 ? num / den : 0.0;
}

/// Largest magnitude of any mode outside the 2/3 cutoff.
inline double alias_leak(const VelocityState& s) {
  double m = 0.0;
  for (std::size_t idx = 0; idx < s.grid->spectral_size(); ++idx)
    if (!s.grid->retained(idx))
      for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(s.u_hat[c][idx]));
  return m;
}

// ---------------------------------------------------------------- norms

/// int |u|^2 dx.
inline double l2_norm2(const VelocityState& s) {
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) sum += s.grid->weighted_norm2(s.u_hat[c], [](std::size_t) { return 1.0; });
  return s.grid->volume() * sum;
}

inline double kinetic_energy(const VelocityState& s) { return 0.5 * l2_norm2(s); }

/// int |(-Delta)^{beta/2} u|^2 dx.
inline double fractional_norm2(const VelocityState& s, double beta) {
  const auto& g = *s.grid;
  double sum = 0.0;
  for (int c = 0; c < 3; ++c)
    sum += g.weighted_norm2(s.u_hat[c], [&](std::size_t idx) {
      const double k2 = g.k2(idx);
      return k2 == 0.0 ? 0.0 : std::pow(k2, beta);
    });
  return g.volume() * sum;
}

inline double dissipation(const VelocityState& s, const AlphaParams& a) {
  return fractional_norm2(s, a.alpha());
}

inline double gradient_norm2(const VelocityState& s) { return fractional_norm2(s, 1.0); }

inline double max_speed(const VectorReal& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u[0].size(); ++i)
    m = std::max(m, std::sqrt(u[0][i] * u[0][i] + u[1][i] * u[1][i] + u[2][i] * u[2][i]));
  return m;
}

// ---------------------------------------------------------------- initial data

/// u = A (sin x cos y cos z, -cos x sin y cos z, 0) in box units.
inline VelocityState taylor_green(GridPtr g, double amplitude = 1.0) {
  const int n = g->n();
  const double k0 = g->k0();
  VectorReal u;
  for (auto& c : u) c.assign(g->real_size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const auto x = g->position(i, j, k);
        const std::size_t idx = g->rindex(i, j, k);
        u[0][idx] = amplitude * std::sin(k0 * x[0]) * std::cos(k0 * x[1]) * std::cos(k0 * x[2]);
        u[1][idx] = -amplitude * std::cos(k0 * x[0]) * std::sin(k0 * x[1]) * std::cos(k0 * x[2]);
      }
  return VelocityState::from_real(std::move(g), u);
}

/// Shear u = (A sin(m k0 y), 0, 0); its own nonlinearity vanishes identically.
inline VelocityState shear_mode(GridPtr g, int m, double amplitude) {
  VectorReal u;
  for (auto& c : u) c.assign(g->real_size(), 0.0);
  const double k = m * g->k0();
  for (int i = 0; i < g->n(); ++i)
    for (int j = 0; j < g->n(); ++j)
      for (int l = 0; l < g->n(); ++l)
        u[0][g->rindex(i, j, l)] = amplitude * std::sin(k * g->position(i, j, l)[1]);
  return VelocityState::from_real(std::move(g), u);
}

/// Divergence-free random field with integer-shell support k_min <= |m| <= k_max,
/// normalized to the requested kinetic energy. Deterministic for a given seed.
inline VelocityState random_bandlimited(GridPtr g, std::uint64_t seed, double k_min, double k_max,
                                        double energy = 0.5) {
  require(k_min >= 0.0 && k_max >= k_min, ErrorCode::DomainViolation,
          "random_bandlimited needs 0 <= k_min <= k_max");
  require(k_max < g->n() / 3.0, ErrorCode::DomainViolation,
          "k_max must sit below the dealias cutoff n/3");
  require(energy >= 0.0, ErrorCode::DomainViolation, "energy must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VelocityState s = VelocityState::zero(g);
  const int n = g->n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < g->nzh(); ++k) {
        const std::size_t idx = g->sindex(i, j, k);
        const double m = std::sqrt(g->k2(idx)) / g->k0();
        const bool in_shell = m >= k_min && m <= k_max && m > 0.0 && g->retained(idx);
        for (int c = 0; c < 3; ++c) {
          const double re = gauss(rng), im = gauss(rng);
          if (in_shell) s.u_hat[c][idx] = Complex(re, im) / (1.0 + m * m);
        }
      }
  // Round trip through real space symmetrizes the self-conjugate planes.
  s = VelocityState::from_real(g, s.to_real());
  leray_project_in_place(*g, s.u_hat);
  const double e = kinetic_energy(s);
  require(e > 0.0, ErrorCode::ZeroField, "random_bandlimited shell contains no modes");
  const double scale = std::sqrt(energy / e);
  for (auto& c : s.u_hat)
    for (auto& v : c) v *= scale;
  return s;
}

}  // namespace fracreg::spectral

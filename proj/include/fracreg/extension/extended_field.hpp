#pragma once

// Extension of a periodic field to the half-space R^3 x (0, inf) mode by mode,
// u*_hat(xi, y) = u_hat(xi) phi(|xi| y), together with the weighted energy
// int y^b |Delta_b u*|^2 dx dy evaluated by finite differences in t = ln y.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"
#include "fracreg/extension/profile.hpp"
#include "fracreg/spectral/state.hpp"

namespace fracreg::extension {

using spectral::Complex;
using spectral::VectorReal;
using spectral::VelocityState;
using ProfilePtr = std::shared_ptr<const ExtensionProfile>;

inline ProfilePtr make_profile(const AlphaParams& a, double s_max = 60.0, int n_points = 4097) {
  return std::make_shared<const ExtensionProfile>(solve_profile(a, s_max, n_points));
}

/// Log-uniform heights y_k = y_min e^{k dt}.
struct YGrid {
  std::vector<double> y;
  double dt = 0.0;

  double y_min() const { return y.front(); }
  double y_max() const { return y.back(); }
};

inline YGrid make_y_grid(double y_min, double y_max, int levels) {
  require(y_min > 0.0 && y_max > y_min, ErrorCode::DomainViolation, "y grid needs 0 < y_min < y_max");
  require(levels >= 8, ErrorCode::QuadratureUnresolved, "y grid needs at least 8 levels");
  YGrid g;
  g.dt = std::log(y_max / y_min) / (levels - 1);
  g.y.resize(levels);
  for (int k = 0; k < levels; ++k) g.y[k] = y_min * std::exp(k * g.dt);
  g.y.back() = y_max;
  return g;
}

/// |xi| range of the modes carrying energy (zero mode excluded).
inline std::pair<double, double> active_wavenumbers(const VelocityState& u) {
  const auto& g = *u.grid;
  double kmin = INFINITY, kmax = 0.0, top = 0.0;
  for (const auto& c : u.u_hat)
    for (const auto& z : c) top = std::max(top, std::abs(z));
  // Transform round-off below this level does not count as an active mode.
  const double floor = 1e-13 * top;
  for (std::size_t idx = 0; idx < g.spectral_size(); ++idx) {
    const double k2 = g.k2(idx);
    if (k2 == 0.0) continue;
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(u.u_hat[c][idx]));
    if (m <= floor || m == 0.0) continue;
    kmin = std::min(kmin, std::sqrt(k2));
    kmax = std::max(kmax, std::sqrt(k2));
  }
  if (kmax == 0.0) return {g.k0(), g.k0()};
  return {kmin, kmax};
}

/// y_min = 0.01/k_max, y_max = 30/k_min; about 32 levels per e-fold by default.
inline YGrid default_y_grid(const VelocityState& u, double levels_per_efold = 32.0) {
  const auto [kmin, kmax] = active_wavenumbers(u);
  const double ymin = 0.01 / kmax, ymax = 30.0 / kmin;
  const int levels = std::max(8, static_cast<int>(std::ceil(std::log(ymax / ymin) * levels_per_efold)) + 1);
  return make_y_grid(ymin, ymax, levels);
}

/// Smooth compactly supported bump in t = ln y attached to one spectral mode:
/// w_hat(xi, y) = amplitude * B((ln y - center)/width), B(z) = exp(1 - 1/(1 - z^2)).
struct Perturbation {
  std::size_t mode = 0;
  int component = 0;
  Complex amplitude{};
  double center = 0.0;
  double width = 1.0;

  double shape(double y) const {
    const double z = (std::log(y) - center) / width;
    if (std::abs(z) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - z * z));
  }
};

struct ExtendedField {
  VelocityState base;
  ProfilePtr profile;
  YGrid y_grid;
  std::vector<Perturbation> perturbations;
  bool range_exceeded = false;  // some |xi| y_max beyond s_max; tail taken as 0

  /// Spectral value of component c at mode idx and height y, perturbations included.
  Complex mode_value(int c, std::size_t idx, double y) const {
    const double k = std::sqrt(base.grid->k2(idx));
    Complex v = k == 0.0 ? base.u_hat[c][idx] : base.u_hat[c][idx] * profile->phi_at(k * y);
    for (const auto& p : perturbations)
      if (p.mode == idx && p.component == c) v += p.amplitude * p.shape(y);
    return v;
  }

  /// u*(., y) in real space.
  VectorReal values_at(double y) const {
    const auto& g = *base.grid;
    VectorReal out;
    for (int c = 0; c < 3; ++c) {
      spectral::SpectralField f(g.spectral_size());
      for (std::size_t idx = 0; idx < f.size(); ++idx) f[idx] = mode_value(c, idx, y);
      out[c] = g.inverse(f);
    }
    return out;
  }

  /// Delta_b u*(., y) in real space from the exact profile identity
  /// Delta_b [phi(|xi| y)] = |xi|^2 psi(|xi| y). Perturbations are not included.
  VectorReal laplacian_b_at(double y) const {
    const auto& g = *base.grid;
    VectorReal out;
    for (int c = 0; c < 3; ++c) {
      spectral::SpectralField f(g.spectral_size());
      for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const double k2 = g.k2(idx);
        if (k2 == 0.0) continue;
        f[idx] = base.u_hat[c][idx] * k2 * profile->psi_at(std::sqrt(k2) * y);
      }
      out[c] = g.inverse(f);
    }
    return out;
  }
};

inline ExtendedField extend_field(const VelocityState& u, ProfilePtr p, YGrid y_grid) {
  require(p != nullptr, ErrorCode::DomainViolation, "extend_field needs a profile");
  ExtendedField e{u, std::move(p), std::move(y_grid), {}, false};
  const auto [kmin, kmax] = active_wavenumbers(u);
  (void)kmin;
  if (kmax * e.y_grid.y_max() > e.profile->s_max()) e.range_exceeded = true;
  return e;
}

inline ExtendedField extend_field(const VelocityState& u, ProfilePtr p) {
  auto g = default_y_grid(u);
  return extend_field(u, std::move(p), std::move(g));
}

namespace detail {

/// Fourth-order first and second t-derivatives of samples f on a uniform grid.
template <class T>
void t_derivatives(const std::vector<T>& f, double dt, std::vector<T>& d1, std::vector<T>& d2) {
  const int n = static_cast<int>(f.size());
  d1.assign(n, T{});
  d2.assign(n, T{});
  for (int i = 0; i < n; ++i) {
    const auto st = extension::detail::stencil_for(i, n);
    for (std::size_t k = 0; k < st.offsets.size(); ++k) {
      d1[i] += st.d1[k] * f[i + st.offsets[k]];
      d2[i] += st.d2[k] * f[i + st.offsets[k]];
    }
    d1[i] /= dt;
    d2[i] /= dt * dt;
  }
}

/// int_0^{y_max} y^b |Delta_b f|^2 dy for a mode with squared wavenumber k2.
/// Simpson in t on the grid; on (0, y_min) Delta_b f is continued as
/// P + Q y^{2 alpha - 2}, the two leading Frobenius branches, fitted to the
/// first two levels and integrated exactly.
template <class T>
double mode_energy(const std::vector<T>& f, const YGrid& yg, double k2, double b) {
  std::vector<T> d1, d2;
  t_derivatives(f, yg.dt, d1, d2);
  const int n = static_cast<int>(f.size());
  std::vector<double> integrand(n);
  Complex lap0{}, lap1{};
  for (int i = 0; i < n; ++i) {
    const double y = yg.y[i];
    const T lap = (d2[i] + (b - 1.0) * d1[i]) / (y * y) - k2 * f[i];
    integrand[i] = std::pow(y, b + 1.0) * std::norm(Complex(lap));
    if (i == 0) lap0 = Complex(lap);
    if (i == 1) lap1 = Complex(lap);
  }
  const double c = 1.0 - b;  // 2 alpha - 2
  const double y0 = yg.y[0], y1 = yg.y[1];
  const Complex Q = (lap1 - lap0) / (std::pow(y1, c) - std::pow(y0, c));
  const Complex P = lap0 - Q * std::pow(y0, c);
  const double head = std::norm(P) * std::pow(y0, b + 1.0) / (b + 1.0) +
                      2.0 * (std::conj(P) * Q).real() * std::pow(y0, b + c + 1.0) / (b + c + 1.0) +
                      std::norm(Q) * std::pow(y0, b + 2.0 * c + 1.0) / (b + 2.0 * c + 1.0);
  return extension::detail::simpson(integrand, yg.dt) + head;
}

inline void check_resolution(const ExtendedField& e) {
  const auto [kmin, kmax] = active_wavenumbers(e.base);
  const auto& yg = e.y_grid;
  if (kmax * yg.y_min() > 0.05 || kmin * yg.y_max() < 20.0 || yg.dt > 0.1)
    fail(ErrorCode::QuadratureUnresolved,
         "y grid must satisfy k_max y_min <= 0.05, k_min y_max >= 20 and ln-spacing <= 0.1");
}

}  // namespace detail

/// int_{T^3 x (0, inf)} y^b |Delta_b u*|^2 dx dy.
inline double weighted_energy(const ExtendedField& e, const AlphaParams& a) {
  detail::check_resolution(e);
  const auto& g = *e.base.grid;
  const auto& yg = e.y_grid;
  const double b = a.b();
  const int n = g.n();

  // Unperturbed modes factor as |u_hat|^2 times a function of |xi| alone.
  std::map<double, double> factor_by_k2;
  auto factor = [&](double k2) {
    auto it = factor_by_k2.find(k2);
    if (it != factor_by_k2.end()) return it->second;
    const double k = std::sqrt(k2);
    std::vector<double> f(yg.y.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = e.profile->phi_at(k * yg.y[i]);
    const double v = detail::mode_energy(f, yg, k2, b);
    factor_by_k2.emplace(k2, v);
    return v;
  };

  std::vector<char> perturbed(g.spectral_size() * 3, 0);
  for (const auto& p : e.perturbations) perturbed[p.mode * 3 + p.component] = 1;

  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < g.nzh(); ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        const double k2 = g.k2(idx);
        const double w = g.hermitian_weight(k);
        for (int c = 0; c < 3; ++c) {
          if (perturbed[idx * 3 + c]) {
            std::vector<Complex> f(yg.y.size());
            for (std::size_t q = 0; q < f.size(); ++q) f[q] = e.mode_value(c, idx, yg.y[q]);
            total += w * detail::mode_energy(f, yg, k2, b);
            continue;
          }
          const double amp2 = std::norm(e.base.u_hat[c][idx]);
          if (amp2 == 0.0 || k2 == 0.0) continue;
          total += w * amp2 * factor(k2);
        }
      }
  return g.volume() * total;
}

/// |lhs - c_alpha rhs| / lhs with lhs = int |xi|^{2 alpha} |u_hat|^2.
inline double energy_identity_residual(const VelocityState& u, const ExtensionProfile& p,
                                       double levels_per_efold = 32.0) {
  const AlphaParams a(p.alpha);
  const double lhs = spectral::dissipation(u, a);
  if (!(lhs > 0.0)) fail(ErrorCode::ZeroField, "energy identity needs a nonzero field");
  auto shared = std::make_shared<const ExtensionProfile>(p);
  const auto e = extend_field(u, shared, default_y_grid(u, levels_per_efold));
  const double rhs = weighted_energy(e, a);
  return std::abs(lhs - p.c_alpha * rhs) / lhs;
}

/// The constant recovered from one field: lhs / int y^b |Delta_b u*|^2.
inline double recovered_constant(const VelocityState& u, const ExtensionProfile& p,
                                 double levels_per_efold = 32.0) {
  const AlphaParams a(p.alpha);
  const double lhs = spectral::dissipation(u, a);
  if (!(lhs > 0.0)) fail(ErrorCode::ZeroField, "energy identity needs a nonzero field");
  auto shared = std::make_shared<const ExtensionProfile>(p);
  return lhs / weighted_energy(extend_field(u, shared, default_y_grid(u, levels_per_efold)), a);
}

// ---------------------------------------------------------------- minimality

/// Random perturbations on `modes` nonzero modes strictly inside the half
/// spectrum, supported well inside the y grid, scaled against max |u_hat|.
inline std::vector<Perturbation> random_perturbations(const ExtendedField& e, std::uint64_t seed,
                                                      int modes = 3, double amplitude = 0.1) {
  const auto& g = *e.base.grid;
  std::vector<std::size_t> candidates;
  double umax = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 1; k < g.nzh() - 1; ++k) {
        const std::size_t idx = g.sindex(i, j, k);
        if (g.retained(idx)) candidates.push_back(idx);
      }
  for (const auto& c : e.base.u_hat)
    for (const auto& z : c) umax = std::max(umax, std::abs(z));
  if (umax == 0.0) umax = 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::uniform_int_distribution<int> comp(0, 2);
  std::normal_distribution<double> gauss;
  const double lo = std::log(e.y_grid.y_min()) + 1.5, hi = std::log(e.y_grid.y_max()) - 1.5;
  std::uniform_real_distribution<double> centre(lo, std::max(lo, hi));
  std::vector<Perturbation> out;
  for (int m = 0; m < modes; ++m) {
    Perturbation p;
    p.mode = candidates[pick(rng)];
    p.component = comp(rng);
    p.amplitude = amplitude * umax * Complex(gauss(rng), gauss(rng));
    p.center = centre(rng);
    p.width = 1.0;
    out.push_back(p);
  }
  return out;
}

inline std::vector<Perturbation> scaled(std::vector<Perturbation> ps, double factor) {
  for (auto& p : ps) p.amplitude *= factor;
  return ps;
}

struct MinimalityReport {
  int trials = 0;
  int passed = 0;
  double min_gap = 0.0;
  double tolerance = 0.0;
  std::vector<double> gaps;
};

/// weighted_energy(u* + w) - weighted_energy(u*) over random w with w(., 0) = 0
/// and compact support in y.
inline MinimalityReport minimality_test(const ExtendedField& e, const AlphaParams& a, int n_trials,
                                        std::uint64_t seed = 1, double amplitude = 0.1,
                                        double tolerance = 1e-6) {
  require(n_trials >= 1, ErrorCode::DomainViolation, "minimality_test needs n_trials >= 1");
  MinimalityReport rep;
  rep.trials = n_trials;
  rep.tolerance = tolerance;
  const double base = weighted_energy(e, a);
  rep.min_gap = INFINITY;
  for (int t = 0; t < n_trials; ++t) {
    ExtendedField pert = e;
    pert.perturbations = random_perturbations(e, seed + static_cast<std::uint64_t>(t) * 7919u, 3, amplitude);
    const double gap = weighted_energy(pert, a) - base;
    rep.gaps.push_back(gap);
    rep.min_gap = std::min(rep.min_gap, gap);
    if (gap >= -tolerance) ++rep.passed;
  }
  return rep;
}

// ---------------------------------------------------------------- boundary flux

/// max over modes with |xi| y_min <= 0.01 of |c_alpha y^b d_y Delta_b u*_hat(y_min) / (|xi|^{2 alpha} u_hat) - 1|,
/// with the y-derivative taken by one-sided differences on the first grid levels.
inline double flux_diagnostic(const ExtendedField& e, const AlphaParams& a) {
  const auto& g = *e.base.grid;
  const auto& yg = e.y_grid;
  const double b = a.b();
  const auto st = detail::stencil_for(0, static_cast<int>(yg.y.size()));
  double worst = 0.0;
  std::map<double, double> cache;
  for (std::size_t idx = 0; idx < g.spectral_size(); ++idx) {
    const double k2 = g.k2(idx);
    if (k2 == 0.0) continue;
    double amp = 0.0;
    for (int c = 0; c < 3; ++c) amp = std::max(amp, std::abs(e.base.u_hat[c][idx]));
    if (amp == 0.0) continue;
    const double k = std::sqrt(k2);
    if (k * yg.y_min() > 0.01) continue;
    auto it = cache.find(k2);
    if (it == cache.end()) {
      double dlap = 0.0;
      for (std::size_t q = 0; q < st.offsets.size(); ++q)
        dlap += st.d1[q] * k2 * e.profile->psi_at(k * yg.y[st.offsets[q]]);
      dlap /= yg.dt;  // d/dt at level 0; y d/dy = d/dt
      const double y0 = yg.y_min();
      const double flux = std::pow(y0, b - 1.0) * dlap;
      const double ratio = e.profile->c_alpha * flux / std::pow(k2, a.alpha());
      it = cache.emplace(k2, std::abs(ratio - 1.0)).first;
    }
    worst = std::max(worst, it->second);
  }
  return worst;
}

}  // namespace fracreg::extension

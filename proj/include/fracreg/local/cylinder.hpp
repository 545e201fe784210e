#pragma once

// Parabolic cylinders Q_r(z) = B_r(x) x (t - r^{2 alpha}, t] on stored
// trajectories. A grid point belongs to B_r(x) when its periodic distance to x
// is at most r. Time integrals interpolate slice values linearly between
// snapshots; a one-snapshot trajectory is treated as frozen in time.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"
#include "fracreg/spectral/grid.hpp"
#include "fracreg/spectral/solver.hpp"

namespace fracreg::local {

using spectral::RealField;
using spectral::SnapshotPtr;
using spectral::SpectralGrid;
using spectral::Trajectory;

struct SpaceTimePoint {
  std::array<double, 3> x{};
  double t = 0.0;
};

/// Flat indices of the grid points in the closed periodic ball B_r(x).
inline std::vector<std::size_t> ball_members(const SpectralGrid& g, const std::array<double, 3>& x, double r) {
  const int n = g.n();
  const double h = g.dx(), L = g.box_length();
  std::array<std::vector<std::pair<int, double>>, 3> axis;
  for (int d = 0; d < 3; ++d) {
    std::vector<double> best(n, INFINITY);
    for (int i = 0; i < n; ++i) {
      double off = i * h - x[d];
      off -= L * std::round(off / L);
      best[i] = off;
    }
    for (int i = 0; i < n; ++i)
      if (std::abs(best[i]) <= r) axis[d].push_back({i, best[i]});
  }
  std::vector<std::size_t> out;
  const double r2 = r * r;
  for (const auto& [i, dx] : axis[0])
    for (const auto& [j, dy] : axis[1])
      for (const auto& [k, dz] : axis[2])
        if (dx * dx + dy * dy + dz * dz <= r2) out.push_back(g.rindex(i, j, k));
  std::sort(out.begin(), out.end());
  return out;
}

/// Signed periodic offset of grid index i from x along one axis.
inline double periodic_offset(const SpectralGrid& g, int i, double x) {
  double off = i * g.dx() - x;
  off -= g.box_length() * std::round(off / g.box_length());
  return off;
}

inline double time_tolerance(const Trajectory& tr) {
  return 1e-12 * std::max(1.0, std::abs(tr.t_end()));
}

/// Snapshot indices whose slices influence a window integral over [a, b].
inline std::vector<std::size_t> window_slices(const Trajectory& tr, double a, double b) {
  std::vector<std::size_t> idx;
  const auto& s = tr.snapshots;
  if (s.size() == 1) return {0};
  const double tol = time_tolerance(tr);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double ti = s[i]->time();
    const bool inside = ti >= a - tol && ti <= b + tol;
    const bool left_neighbour = i + 1 < s.size() && ti < a && s[i + 1]->time() > a;
    const bool right_neighbour = i > 0 && ti > b && s[i - 1]->time() < b;
    if (inside || left_neighbour || right_neighbour) idx.push_back(i);
  }
  return idx;
}

/// Slices strictly inside the closed window (for sup-type quantities).
inline std::vector<std::size_t> slices_in(const Trajectory& tr, double a, double b) {
  if (tr.snapshots.size() == 1) return {0};
  const double tol = time_tolerance(tr);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    const double ti = tr.snapshots[i]->time();
    if (ti >= a - tol && ti <= b + tol) idx.push_back(i);
  }
  return idx;
}

/// int_a^b S(t) dt with S linear between snapshots; value(i) gives S at snapshot i.
inline double integrate_window(const Trajectory& tr, double a, double b,
                               const std::function<double(std::size_t)>& value) {
  if (b <= a) return 0.0;
  const auto& s = tr.snapshots;
  if (s.size() == 1) return (b - a) * value(0);
  const auto idx = window_slices(tr, a, b);
  std::vector<double> vals(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = value(idx[k]);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double t0 = s[idx[k]]->time(), t1 = s[idx[k + 1]]->time();
    const double lo = std::max(a, t0), hi = std::min(b, t1);
    if (hi <= lo) continue;
    auto interp = [&](double t) { return vals[k] + (vals[k + 1] - vals[k]) * (t - t0) / (t1 - t0); };
    acc += 0.5 * (hi - lo) * (interp(lo) + interp(hi));
  }
  return acc;
}

/// Checks Q_r(z) against the stored window and the grid.
inline void check_cylinder(const Trajectory& tr, const SpaceTimePoint& z, double r) {
  const auto& g = tr.grid();
  require(r > 0.0, ErrorCode::DomainViolation, "radius must be positive");
  if (r > 0.25 * g.box_length() * (1.0 + 1e-12))
    fail(ErrorCode::CylinderOutOfWindow, "radius " + std::to_string(r) + " exceeds box_length/4");
  if (2.0 * r < 4.0 * g.dx() * (1.0 - 1e-12))
    fail(ErrorCode::RadiusUnresolved, "fewer than 4 grid cells across B_r for r = " + std::to_string(r));
  if (tr.snapshots.size() == 1) return;
  const double tol = time_tolerance(tr);
  const double start = z.t - tr.alpha.time_scale(r);
  if (start < tr.t_begin() - tol || z.t > tr.t_end() + tol)
    fail(ErrorCode::CylinderOutOfWindow, "cylinder time interval leaves the stored window");
}

/// sum_{i in members} f(i) times the cell volume.
template <class F>
double ball_integral(const SpectralGrid& g, const std::vector<std::size_t>& members, F&& f) {
  double acc = 0.0;
  for (std::size_t i : members) acc += f(i);
  return acc * g.cell_volume();
}

inline double speed2(const spectral::Snapshot& s, std::size_t i) {
  return s.u_real[0][i] * s.u_real[0][i] + s.u_real[1][i] * s.u_real[1][i] + s.u_real[2][i] * s.u_real[2][i];
}

}  // namespace fracreg::local

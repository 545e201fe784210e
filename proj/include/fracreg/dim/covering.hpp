#pragma once

// Covering numbers by an anisotropic grid: cells of side r in space and
// r^{2 alpha} in time. Spatial cells [k r, (k+1) r) start at the window's lower
// corner; time cells (t1 - (k+1) r^{2a}, t1 - k r^{2a}] end at the latest time
// t1, mirroring the half-open cylinders (t - r^{2a}, t].
//
// With N the minimal number of cylinders Q_r: N <= count (a cell fits in one
// cylinder because its half-diagonal sqrt(d) r / 2 <= r) and count <= 2 3^d N
// (a cylinder meets at most 3 cells per spatial axis and 2 in time).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <vector>

#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/dim/pointset.hpp"

namespace fracreg::dim {

inline constexpr double kCellSlack = 1e-9;  // points this close to a cell face count as on it

using CellKey = std::array<std::int64_t, 4>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::int64_t space_cell(double x, double origin, double r) {
  return static_cast<std::int64_t>(std::floor((x - origin) / r + kCellSlack));
}
inline std::int64_t time_cell(double t, double t_top, double tau) {
  return static_cast<std::int64_t>(std::ceil((t - t_top) / tau - kCellSlack));
}

/// Occupied-cell count with explicit anchors (origin for space, t_top for time).
inline std::uint64_t count_cells(const ParabolicPointSet& s, double r, const std::array<double, 3>& origin,
                                 double t_top) {
  const auto& pts = s.points();
  const double tau = s.alpha().time_scale(r);
  std::vector<CellKey> keys;
  keys.reserve(pts.size());
  for (const auto& p : pts) {
    CellKey k{0, 0, 0, time_cell(p.t, t_top, tau)};
    for (int d = 0; d < s.spatial_dim(); ++d) k[d] = space_cell(p.x[d], origin[d], r);
    keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

/// N(E, r) by the window-anchored grid; 0 for the empty set.
inline std::uint64_t covering_number(const ParabolicPointSet& s, double r) {
  require(r > 0.0 && std::isfinite(r), ErrorCode::DomainViolation, "covering radius must be positive");
  if (s.empty()) return 0;
  return count_cells(s, r, s.origin(), s.time_range().second);
}

inline std::uint64_t axis_cells(const std::vector<double>& v, double width, double anchor, bool time_axis) {
  std::vector<std::int64_t> c;
  c.reserve(v.size());
  for (double x : v) c.push_back(time_axis ? time_cell(x, anchor, width) : space_cell(x, anchor, width));
  std::sort(c.begin(), c.end());
  return static_cast<std::uint64_t>(std::unique(c.begin(), c.end()) - c.begin());
}

/// For a product set the occupied cells form a product, so the count factorizes.
inline double covering_number(const ProductLattice& p, double r) {
  require(r > 0.0 && std::isfinite(r), ErrorCode::DomainViolation, "covering radius must be positive");
  if (p.axis.empty() || p.times.empty()) return 0.0;
  const double lo = *std::min_element(p.axis.begin(), p.axis.end());
  const double top = *std::max_element(p.times.begin(), p.times.end());
  const double per_axis = static_cast<double>(axis_cells(p.axis, r, lo, false));
  return std::pow(per_axis, p.d) * static_cast<double>(axis_cells(p.times, p.alpha.time_scale(r), top, true));
}

// ---------------------------------------------------------------- dimension fit

struct DimensionEstimate {
  std::vector<double> radii;  // decreasing
  std::vector<double> counts;
  std::size_t fit_begin = 0, fit_end = 0;  // fitted slice [begin, end)
  double dimension = 0.0;
  double residual = 0.0;  // rms of the log-count misfit over the fit window
};

/// Dyadic radii 2^k with r_min <= 2^k <= r_max, largest first.
inline std::vector<double> dyadic_radii(double r_min, double r_max) {
  require(r_min > 0.0 && r_max >= r_min, ErrorCode::DomainViolation, "need 0 < r_min <= r_max");
  std::vector<double> out;
  for (int k = static_cast<int>(std::floor(std::log2(r_max) + 1e-12)); std::exp2(k) >= r_min * (1.0 - 1e-12); --k)
    out.push_back(std::exp2(k));
  return out;
}

inline DimensionEstimate fit_dimension(std::vector<double> radii, std::vector<double> counts, double upper) {
  DimensionEstimate est;
  const std::size_t n = radii.size();
  if (n < 6) fail(ErrorCode::WindowTooNarrow, "dimension fit needs at least 6 dyadic radii, got " + std::to_string(n));
  est.fit_begin = n / 6;
  est.fit_end = n - n / 6;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(est.fit_end - est.fit_begin);
  for (std::size_t i = est.fit_begin; i < est.fit_end; ++i) {
    const double x = -std::log(radii[i]), y = std::log(counts[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / m;
  double ss = 0.0;
  for (std::size_t i = est.fit_begin; i < est.fit_end; ++i) {
    const double e = std::log(counts[i]) - (icpt - slope * std::log(radii[i]));
    ss += e * e;
  }
  est.residual = std::sqrt(ss / m);
  est.dimension = std::clamp(slope, 0.0, upper);
  est.radii = std::move(radii);
  est.counts = std::move(counts);
  return est;
}

/// Least-squares slope of log N against -log r over the middle two-thirds of the dyadic window.
inline DimensionEstimate box_dimension(const ParabolicPointSet& s, double r_min, double r_max) {
  if (s.empty()) fail(ErrorCode::EmptySet, "box dimension of the empty set");
  auto radii = dyadic_radii(r_min, r_max);
  if (radii.size() < 6) fail(ErrorCode::WindowTooNarrow, "dimension fit needs at least 6 dyadic radii");
  std::vector<double> counts(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) { counts[i] = static_cast<double>(covering_number(s, radii[i])); });
  return fit_dimension(std::move(radii), std::move(counts), s.spatial_dim() + 2.0 * s.alpha().alpha());
}

inline DimensionEstimate box_dimension(const ProductLattice& p, double r_min, double r_max) {
  if (p.axis.empty() || p.times.empty()) fail(ErrorCode::EmptySet, "box dimension of the empty set");
  auto radii = dyadic_radii(r_min, r_max);
  if (radii.size() < 6) fail(ErrorCode::WindowTooNarrow, "dimension fit needs at least 6 dyadic radii");
  std::vector<double> counts(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) { counts[i] = covering_number(p, radii[i]); });
  return fit_dimension(std::move(radii), std::move(counts), p.d + 2.0 * p.alpha.alpha());
}

inline std::string dimension_csv(const DimensionEstimate& e) {
  std::string out = "r,count\n";
  char buf[128];
  for (std::size_t i = 0; i < e.radii.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", e.radii[i], e.counts[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "dimension,residual\n%.12g,%.6g\n", e.dimension, e.residual);
  return out + buf;
}

// ---------------------------------------------------------------- oracles for tiny sets

/// Minimum occupied-cell count over `steps` anchor shifts per axis (shift 0 included).
inline std::uint64_t min_over_anchors(const ParabolicPointSet& s, double r, int steps) {
  if (s.empty()) return 0;
  const auto o = s.origin();
  const double top = s.time_range().second, tau = s.alpha().time_scale(r);
  const int d = s.spatial_dim();
  std::uint64_t best = UINT64_MAX;
  std::array<int, 4> idx{0, 0, 0, 0};
  const int axes = d + 1;
  for (;;) {
    std::array<double, 3> origin = o;
    for (int k = 0; k < d; ++k) origin[k] -= r * idx[k] / steps;
    best = std::min(best, count_cells(s, r, origin, top + tau * idx[d] / steps));
    int k = 0;
    while (k < axes && ++idx[k] == steps) idx[k++] = 0;
    if (k == axes) break;
  }
  return best;
}

/// Exact minimum number of cylinders Q_r(z) covering a set of at most 16
/// points in d = 1: a subset fits in one cylinder iff its spatial spread is
/// at most 2r and its time spread is below r^{2 alpha}.
inline std::uint64_t exact_min_cover_1d(const ParabolicPointSet& s, double r) {
  require(s.spatial_dim() == 1, ErrorCode::DomainViolation, "exact cover oracle is one-dimensional");
  const auto& p = s.points();
  const std::size_t n = p.size();
  require(n <= 16, ErrorCode::DomainViolation, "exact cover oracle handles at most 16 points");
  if (n == 0) return 0;
  const double tau = s.alpha().time_scale(r);
  const std::uint32_t full = (1u << n) - 1;
  std::vector<char> fits(full + 1, 0);
  for (std::uint32_t m = 1; m <= full; ++m) {
    double xlo = INFINITY, xhi = -INFINITY, tlo = INFINITY, thi = -INFINITY;
    for (std::size_t i = 0; i < n; ++i)
      if (m >> i & 1u) {
        xlo = std::min(xlo, p[i].x[0]), xhi = std::max(xhi, p[i].x[0]);
        tlo = std::min(tlo, p[i].t), thi = std::max(thi, p[i].t);
      }
    fits[m] = (xhi - xlo <= 2.0 * r) && (thi - tlo < tau);
  }
  std::vector<std::uint8_t> best(full + 1, 255);
  best[0] = 0;
  for (std::uint32_t m = 1; m <= full; ++m) {
    const std::uint32_t low = m & (~m + 1);  // the lowest point must be covered by some fitting subset
    for (std::uint32_t sub = m; sub; sub = (sub - 1) & m)
      if ((sub & low) && fits[sub] && best[m ^ sub] + 1 < best[m]) best[m] = static_cast<std::uint8_t>(best[m ^ sub] + 1);
  }
  return best[full];
}

// ---------------------------------------------------------------- separated families

/// Packing constant: N(s, a) <= c_d |F| for any maximal a-separated F.
inline double packing_constant(int d) { return std::pow(3.0, d + 1); }

/// Greedy maximal subset (in sorted point order) with pairwise parabolic
/// distance >= a; every rejected point lies within distance < a of a kept one.
inline ParabolicPointSet separated_family(const ParabolicPointSet& s, double a) {
  require(a > 0.0 && std::isfinite(a), ErrorCode::DomainViolation, "separation must be positive");
  ParabolicPointSet out(s.spatial_dim(), s.alpha());
  const double tau = s.alpha().time_scale(a);
  const int d = s.spatial_dim();
  std::unordered_map<CellKey, std::vector<ParabolicPoint>, CellKeyHash> grid;
  auto key_of = [&](const ParabolicPoint& p) {
    CellKey k{0, 0, 0, static_cast<std::int64_t>(std::floor(p.t / tau))};
    for (int c = 0; c < d; ++c) k[c] = static_cast<std::int64_t>(std::floor(p.x[c] / a));
    return k;
  };
  for (const auto& p : s.points()) {
    const CellKey k = key_of(p);
    bool clash = false;
    std::array<int, 4> off{-1, -1, -1, -1};
    for (int c = d; c < 3; ++c) off[c] = 0;
    for (;;) {
      CellKey q = k;
      for (int c = 0; c < 4; ++c) q[c] += off[c];
      if (auto it = grid.find(q); it != grid.end())
        for (const auto& o : it->second)
          if (s.distance(o, p) < a) {
            clash = true;
            break;
          }
      if (clash) break;
      int c = 0;
      while (c < 4) {
        if (c < 3 && c >= d) {
          ++c;
          continue;
        }
        if (++off[c] <= 1) break;
        off[c] = -1;
        ++c;
      }
      if (c == 4) break;
    }
    if (!clash) {
      grid[k].push_back(p);
      out.add(p);
    }
  }
  return out;
}

}  // namespace fracreg::dim

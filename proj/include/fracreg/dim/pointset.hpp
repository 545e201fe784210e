#pragma once

// Space-time point sets with the parabolic metric
//   dist(z, z') = max(|x - x'|, |t - t'|^{1/(2 alpha)}).

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"

namespace fracreg::dim {

struct ParabolicPoint {
  std::array<double, 3> x{};  // unused trailing components stay 0 when d = 1
  double t = 0.0;
  friend auto operator<=>(const ParabolicPoint&, const ParabolicPoint&) = default;
};

class ParabolicPointSet {
 public:
  ParabolicPointSet(int d, AlphaParams alpha, std::vector<ParabolicPoint> pts = {}) : d_(d), alpha_(alpha) {
    require(d == 1 || d == 3, ErrorCode::DomainViolation, "spatial dimension must be 1 or 3");
    for (auto& p : pts) add(p);
  }

  void add(ParabolicPoint p) {
    for (int k = d_; k < 3; ++k) p.x[k] = 0.0;
    for (int k = 0; k < d_; ++k)
      require(std::isfinite(p.x[k]), ErrorCode::DomainViolation, "point coordinates must be finite");
    require(std::isfinite(p.t), ErrorCode::DomainViolation, "point times must be finite");
    pts_.push_back(p);
    sorted_ = false;
  }

  /// Sorts and removes duplicates; called lazily by every reader.
  const std::vector<ParabolicPoint>& points() const {
    if (!sorted_) {
      std::sort(pts_.begin(), pts_.end());
      pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
      sorted_ = true;
    }
    return pts_;
  }

  std::size_t size() const { return points().size(); }
  bool empty() const { return pts_.empty(); }
  int spatial_dim() const { return d_; }
  const AlphaParams& alpha() const { return alpha_; }

  /// Bounding window: lower spatial corner and time range.
  std::array<double, 3> origin() const {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    const auto& p = points();
    if (p.empty()) return lo;
    lo = p.front().x;
    for (const auto& q : p)
      for (int k = 0; k < d_; ++k) lo[k] = std::min(lo[k], q.x[k]);
    return lo;
  }
  std::pair<double, double> time_range() const {
    const auto& p = points();
    if (p.empty()) return {0.0, 0.0};
    double a = p.front().t, b = a;
    for (const auto& q : p) a = std::min(a, q.t), b = std::max(b, q.t);
    return {a, b};
  }

  double distance(const ParabolicPoint& a, const ParabolicPoint& b) const {
    double s = 0.0;
    for (int k = 0; k < d_; ++k) s += (a.x[k] - b.x[k]) * (a.x[k] - b.x[k]);
    return std::max(std::sqrt(s), std::pow(std::abs(a.t - b.t), 1.0 / (2.0 * alpha_.alpha())));
  }

 private:
  int d_;
  AlphaParams alpha_;
  mutable std::vector<ParabolicPoint> pts_;
  mutable bool sorted_ = true;
};

// ---------------------------------------------------------------- CSV: x1[,x2,x3],t

inline std::string points_csv(const ParabolicPointSet& s) {
  std::string out = s.spatial_dim() == 1 ? "x1,t\n" : "x1,x2,x3,t\n";
  char buf[160];
  for (const auto& p : s.points()) {
    if (s.spatial_dim() == 1)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x[0], p.t);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.x[0], p.x[1], p.x[2], p.t);
    out += buf;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::ConfigError, "bad number '" + std::string(s) + "' on line " + std::to_string(line));
  return v;
}

/// Reads `x1,t` or `x1,x2,x3,t` rows; the header fixes the dimension.
inline ParabolicPointSet parse_points_csv(const std::string& text, AlphaParams alpha) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ConfigError, "point file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int d = 0;
  if (line == "x1,t")
    d = 1;
  else if (line == "x1,x2,x3,t")
    d = 3;
  else
    fail(ErrorCode::ConfigError, "point file header must be 'x1,t' or 'x1,x2,x3,t'");
  ParabolicPointSet s(d, alpha);
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string_view> cols;
    std::string_view v(line);
    for (std::size_t pos; (pos = v.find(',')) != std::string_view::npos; v.remove_prefix(pos + 1))
      cols.push_back(v.substr(0, pos));
    cols.push_back(v);
    if (static_cast<int>(cols.size()) != d + 1)
      fail(ErrorCode::ConfigError, "expected " + std::to_string(d + 1) + " columns on line " + std::to_string(no));
    ParabolicPoint p;
    for (int k = 0; k < d; ++k) p.x[k] = parse_double(cols[k], no);
    p.t = parse_double(cols[d], no);
    s.add(p);
  }
  return s;
}

/// Product of per-axis samples {x_1} x ... x {x_d} x {t}, kept implicit so
/// that dense space-time fills never materialize.
struct ProductLattice {
  int d = 3;
  AlphaParams alpha{1.1};
  std::vector<double> axis;   // shared by every spatial axis
  std::vector<double> times;

  static ProductLattice uniform(int d, AlphaParams a, std::size_t space_points, std::size_t time_points) {
    ProductLattice p{d, a, {}, {}};
    for (std::size_t i = 0; i < space_points; ++i) p.axis.push_back(static_cast<double>(i) / space_points);
    for (std::size_t i = 0; i < time_points; ++i) p.times.push_back(static_cast<double>(i) / time_points);
    return p;
  }

  ParabolicPointSet materialize() const {
    ParabolicPointSet s(d, alpha);
    const std::size_t m = axis.size();
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= m;
    for (std::size_t idx = 0; idx < total; ++idx) {
      ParabolicPoint p;
      std::size_t rest = idx;
      for (int k = 0; k < d; ++k) {
        p.x[k] = axis[rest % m];
        rest /= m;
      }
      for (double t : times) {
        p.t = t;
        s.add(p);
      }
    }
    return s;
  }
};

}  // namespace fracreg::dim

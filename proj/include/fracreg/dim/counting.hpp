#pragma once

// Desk-scale version of the counting argument: smallness-test failures on a
// lattice of cylinders, and the summed local budgets over separated families
// compared with |family| a^{L - gamma} eps.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fracreg/bounds/closed_forms.hpp"
#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/dim/covering.hpp"
#include "fracreg/dim/pointset.hpp"
#include "fracreg/local/provider.hpp"
#include "fracreg/local/quantities.hpp"
#include "fracreg/spectral/maximal.hpp"

namespace fracreg::dim {

using local::SpaceTimePoint;
using spectral::Trajectory;

struct CandidateOptions {
  int stride = 4;        // spatial lattice spacing in grid cells
  int time_stride = 1;   // use every k-th admissible snapshot time
};

/// Lattice centers z whose cylinder Q_r(z) fails C + D + T < epsilon_0.
inline ParabolicPointSet singular_candidates(const Trajectory& tr, double epsilon_0, double r,
                                             const CandidateOptions& opt = {}) {
  require(epsilon_0 > 0.0, ErrorCode::ConfigError, "epsilon_0 must be positive");
  require(opt.stride >= 1 && opt.time_stride >= 1, ErrorCode::ConfigError, "strides must be >= 1");
  const auto& g = tr.grid();
  std::vector<double> times;
  const double tol = local::time_tolerance(tr);
  int seen = 0;
  for (const auto& s : tr.snapshots) {
    const bool fits = tr.snapshots.size() == 1 || s->time() - tr.alpha.time_scale(r) >= tr.t_begin() - tol;
    if (fits && seen++ % opt.time_stride == 0) times.push_back(s->time());
  }
  std::vector<SpaceTimePoint> centers;
  for (double t : times)
    for (int i = 0; i < g.n(); i += opt.stride)
      for (int j = 0; j < g.n(); j += opt.stride)
        for (int k = 0; k < g.n(); k += opt.stride) centers.push_back({g.position(i, j, k), t});
  std::vector<char> failed(centers.size(), 0);
  parallel_for(centers.size(), [&](std::size_t q) {
    failed[q] = !local::epsilon_criterion(tr, centers[q], r, epsilon_0).pass;
  });
  ParabolicPointSet out(3, tr.alpha);
  for (std::size_t q = 0; q < centers.size(); ++q)
    if (failed[q]) out.add({centers[q].x, centers[q].t});
  return out;
}

/// Per-snapshot integrands of the budget that do not depend on the cylinder:
/// |grad u|^2 + (M|u|^2)^{(3+2a)/3} + |grad p|^{(3+2a)/4}.
class BudgetFields {
 public:
  explicit BudgetFields(double alpha) : alpha_(alpha) {}

  std::shared_ptr<const spectral::RealField> get(const spectral::SnapshotPtr& s) const {
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(s.get()); it != cache_.end()) return it->second.second;
    }
    auto f = std::make_shared<const spectral::RealField>(compute(*s));
    std::lock_guard lock(mutex_);
    return cache_.emplace(s.get(), std::make_pair(s, f)).first->second.second;
  }

  double pressure_exponent() const { return (3.0 + 2.0 * alpha_) / 3.0; }

 private:
  spectral::RealField compute(const spectral::Snapshot& s) const {
    const auto& g = s.grid();
    const std::size_t m = g.spectral_size(), nr = g.real_size();
    spectral::RealField out(nr, 0.0), speed(nr);
    spectral::SpectralField f(m);
    spectral::RealField gp2(nr, 0.0);
    for (int d = 0; d < 3; ++d) {
      for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < m; ++i) f[i] = spectral::Complex(0.0, g.wavevector_component(i, d)) * s.u.u_hat[c][i];
        const auto du = g.inverse(f);
        for (std::size_t i = 0; i < nr; ++i) out[i] += du[i] * du[i];
      }
      for (std::size_t i = 0; i < m; ++i) f[i] = spectral::Complex(0.0, g.wavevector_component(i, d)) * s.p.p_hat[i];
      const auto dp = g.inverse(f);
      for (std::size_t i = 0; i < nr; ++i) gp2[i] += dp[i] * dp[i];
    }
    for (std::size_t i = 0; i < nr; ++i) speed[i] = local::speed2(s, i);
    const auto mf = spectral::maximal_function(s.u.grid, speed);
    const double e_m = (3.0 + 2.0 * alpha_) / 3.0, e_p = (3.0 + 2.0 * alpha_) / 8.0;  // |grad p|^{(3+2a)/4} = (|grad p|^2)^{(3+2a)/8}
    for (std::size_t i = 0; i < nr; ++i) out[i] += std::pow(mf[i], e_m) + std::pow(gp2[i], e_p);
    return out;
  }

  double alpha_;
  mutable std::mutex mutex_;
  mutable std::map<const spectral::Snapshot*,
                   std::pair<spectral::SnapshotPtr, std::shared_ptr<const spectral::RealField>>>
      cache_;
};

/// Budget integral over Q_a(z) (time window clipped to the stored range), plus
/// the extension energy over Q_a(z) x [0, a) when a provider is given. The
/// pressure oscillation is taken against the mean over B_{a/4}.
inline double cylinder_budget(const Trajectory& tr, const BudgetFields& fields, const local::ExtensionProvider* prov,
                              const SpaceTimePoint& z, double a) {
  const auto& g = tr.grid();
  if (a > 0.25 * g.box_length() * (1.0 + 1e-12))
    fail(ErrorCode::CylinderOutOfWindow, "separation scale exceeds box_length/4");
  if (2.0 * a < 4.0 * g.dx() * (1.0 - 1e-12))
    fail(ErrorCode::RadiusUnresolved, "fewer than 4 grid cells across the separation scale");
  const auto mem = local::ball_members(g, z.x, a);
  const auto inner = local::ball_members(g, z.x, 0.25 * a);
  const double lo = std::max(tr.t_begin(), z.t - tr.alpha.time_scale(a));
  const double hi = tr.snapshots.size() == 1 ? z.t : std::min(z.t, tr.t_end());
  const double span = tr.snapshots.size() == 1 ? tr.alpha.time_scale(a) : hi - lo;
  const double e_p = fields.pressure_exponent();
  auto slice = [&](std::size_t k) {
    const auto& s = tr.snapshots[k];
    const auto f = fields.get(s);
    const double mean = inner.empty() ? 0.0 : local::ball_mean(s->p_real, inner);
    double v = local::ball_integral(g, mem, [&](std::size_t i) {
      return (*f)[i] + std::pow(std::abs(s->p_real[i] - mean), e_p);
    });
    if (prov) {
      const auto col = prov->column(s, a);
      v += local::ball_integral(g, mem, [&](std::size_t i) { return (*col)[i]; });
    }
    return v;
  };
  if (tr.snapshots.size() == 1) return span * slice(0);
  return local::integrate_window(tr, lo, hi, slice);
}

struct CountingRow {
  double a = 0.0;
  std::uint64_t cover = 0;       // N(s, a)
  std::size_t family = 0;        // |F|, F maximal a-separated
  double k_budget = 0.0;         // sum of cylinder budgets over F
  double lower_bound = 0.0;      // |F| a^{L - gamma} eps
  bool holds = true;             // k_budget >= lower_bound
  double ceiling = 0.0;          // k_budget / (a^{L - gamma} eps)
  std::size_t premise = 0;       // members whose own budget exceeds a^{L - gamma} eps
};

struct CountingReport {
  double gamma = 0.0, epsilon = 0.0, l_value = 0.0;
  std::vector<CountingRow> rows;
  double dimension_estimate = NAN;  // least-squares slope of log N(s, a) against -log a
  double residual = NAN;
  double delta = NAN;               // max over the schedule of log N(s, a) / (-log a)
};

inline CountingReport counting_demo(const Trajectory& tr, const local::ExtensionProvider* prov,
                                    const ParabolicPointSet& s, double gamma, double epsilon,
                                    const std::vector<double>& a_schedule) {
  require(epsilon > 0.0, ErrorCode::ConfigError, "epsilon must be positive");
  require(gamma >= 0.0, ErrorCode::ConfigError, "gamma must be nonnegative");
  require(!a_schedule.empty(), ErrorCode::ConfigError, "a_schedule is empty");
  CountingReport rep;
  rep.gamma = gamma;
  rep.epsilon = epsilon;
  rep.l_value = bounds::eval_L(tr.alpha);
  BudgetFields fields(tr.alpha.alpha());
  for (double a : a_schedule) {
    require(a > 0.0, ErrorCode::ConfigError, "separation scales must be positive");
    CountingRow row;
    row.a = a;
    const double unit = std::pow(a, rep.l_value - gamma) * epsilon;
    if (!s.empty()) {
      row.cover = covering_number(s, a);
      const auto fam = separated_family(s, a);
      row.family = fam.size();
      const auto& members = fam.points();
      std::vector<double> budgets(members.size());
      parallel_for(members.size(), [&](std::size_t q) {
        const auto& p = members[q];
        budgets[q] = cylinder_budget(tr, fields, prov, {p.x, p.t}, a);
      });
      for (double b : budgets) {
        row.k_budget += b;
        if (b > unit) ++row.premise;
      }
    }
    row.lower_bound = static_cast<double>(row.family) * unit;
    row.holds = row.k_budget >= row.lower_bound;
    row.ceiling = row.k_budget / unit;
    rep.rows.push_back(row);
  }
  // Log-log summary over the schedule where counts are positive.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (const auto& row : rep.rows)
    if (row.cover > 0 && row.a < 1.0) {
      const double x = -std::log(row.a), y = std::log(static_cast<double>(row.cover));
      sx += x, sy += y, sxx += x * x, sxy += x * y, m += 1;
      rep.delta = std::isnan(rep.delta) ? y / x : std::max(rep.delta, y / x);
    }
  if (m >= 2 && m * sxx - sx * sx > 0) {
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx), icpt = (sy - slope * sx) / m;
    double ss = 0;
    for (const auto& row : rep.rows)
      if (row.cover > 0 && row.a < 1.0) {
        const double e = std::log(static_cast<double>(row.cover)) - icpt + slope * std::log(row.a);
        ss += e * e;
      }
    rep.dimension_estimate = slope;
    rep.residual = std::sqrt(ss / m);
  }
  return rep;
}

inline std::string counting_csv(const CountingReport& rep) {
  std::string out = "a,cover,family,k_budget,lower_bound,holds,ceiling,premise\n";
  char buf[256];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%llu,%zu,%.12g,%.12g,%d,%.12g,%zu\n", r.a,
                  static_cast<unsigned long long>(r.cover), r.family, r.k_budget, r.lower_bound, r.holds ? 1 : 0,
                  r.ceiling, r.premise);
    out += buf;
  }
  return out;
}

}  // namespace fracreg::dim

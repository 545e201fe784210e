#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fracreg/bounds/closed_forms.hpp"
#include "fracreg/bounds/optimizer.hpp"
#include "fracreg/core/parallel.hpp"

namespace fracreg::bounds {

struct BoundRow {
  double alpha = 0.0;
  double L = 0.0;
  double J = 0.0;
  double gamma_star = 0.0;
};

struct BoundCurve {
  std::vector<BoundRow> rows;
};

/// alpha_k = lo + k (hi - lo) / (points + 1), k = 1..points (endpoints excluded).
inline std::vector<double> interior_alpha_grid(int points, double lo = kAlphaLower,
                                               double hi = kAlphaUpper) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int k = 1; k <= points; ++k) grid.push_back(lo + (hi - lo) * k / (points + 1));
  return grid;
}

/// One row per grid point. With include_closure the alpha = 1 endpoint row is
/// prepended (closed forms evaluated exactly at 1, gamma_star from the clamped
/// optimizer).
inline BoundCurve bound_curve(const std::vector<double>& alpha_grid, bool include_closure = false,
                              const std::vector<double>& zeta_schedule = default_zeta_schedule()) {
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    AlphaParams check(alpha_grid[i]);
    (void)check;
    if (i > 0)
      require(alpha_grid[i] > alpha_grid[i - 1], ErrorCode::DomainViolation,
              "alpha grid must be strictly increasing");
  }
  BoundCurve curve;
  const std::size_t offset = include_closure ? 1 : 0;
  curve.rows.resize(alpha_grid.size() + offset);
  if (include_closure) {
    const auto a = AlphaParams::closure(kAlphaLower);
    curve.rows[0] = {1.0, eval_L(a), eval_J(a), optimize_gamma(1.0, zeta_schedule).gamma_star};
  }
  parallel_for(alpha_grid.size(), [&](std::size_t i) {
    const AlphaParams a(alpha_grid[i]);
    curve.rows[i + offset] = {a.alpha(), eval_L(a), eval_J(a),
                              optimize_gamma(a.alpha(), zeta_schedule).gamma_star};
  });
  return curve;
}

inline std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// `alpha,L,J,gamma_star`, LF line endings.
inline std::string curve_csv(const BoundCurve& curve) {
  std::string out = "alpha,L,J,gamma_star\n";
  for (const auto& r : curve.rows) {
    out += format_g12(r.alpha) + ',' + format_g12(r.L) + ',' + format_g12(r.J) + ',' +
           format_g12(r.gamma_star) + '\n';
  }
  return out;
}

/// Fixed-viewBox SVG with exactly two polylines (L and J).
inline std::string curve_svg(const BoundCurve& curve) {
  constexpr double width = 640, height = 480, left = 70, right = 20, top = 20, bottom = 60;
  constexpr double x_lo = 1.0, x_hi = 1.3, y_lo = 0.0, y_hi = 2.0;
  auto px = [&](double a) { return left + (a - x_lo) / (x_hi - x_lo) * (width - left - right); };
  auto py = [&](double v) { return height - bottom - (v - y_lo) / (y_hi - y_lo) * (height - top - bottom); };
  auto pt = [&](double a, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", px(a), py(v));
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
      << "\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << px(x_lo) << "\" y1=\"" << py(y_lo) << "\" x2=\"" << px(x_hi)
      << "\" y2=\"" << py(y_lo) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << px(x_lo) << "\" y1=\"" << py(y_lo) << "\" x2=\"" << px(x_lo)
      << "\" y2=\"" << py(y_hi) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 6; ++k) {
    const double a = x_lo + 0.05 * k;
    svg << "<text x=\"" << px(a) << "\" y=\"" << py(y_lo) + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_g12(a) << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = 0.5 * k;
    svg << "<text x=\"" << px(x_lo) - 8 << "\" y=\"" << py(v) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << format_g12(v) << "</text>\n";
  }
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15
      << "\" font-size=\"14\" text-anchor=\"middle\">alpha</text>\n";
  svg << "<text x=\"18\" y=\"" << (top + height - bottom) / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + height - bottom) / 2 << ")\">dim_B(S)</text>\n";

  auto polyline = [&](const char* id, const char* colour, auto value) {
    svg << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& r : curve.rows) {
      if (!first) svg << ' ';
      svg << pt(r.alpha, value(r));
      first = false;
    }
    svg << "\"/>\n";
  };
  polyline("L", "#1f77b4", [](const BoundRow& r) { return r.L; });
  polyline("J", "#d62728", [](const BoundRow& r) { return r.J; });
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fracreg::bounds

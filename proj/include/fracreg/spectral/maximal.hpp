#pragma once

// Discrete Hardy-Littlewood maximal function over dyadic radii
// r_k = dx 2^k <= L/2 with the unnormalized 1/r^3 convention:
//   Mf(x) = max_k r_k^{-3} int_{B_{r_k}(x)} f.
// Ball integrals are FFT convolutions with stencils that weight each cell by
// the fraction of its volume inside the ball.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fracreg/core/error.hpp"
#include "fracreg/core/parallel.hpp"
#include "fracreg/spectral/grid.hpp"

namespace fracreg::spectral {

/// Fraction of the cube [c - h/2, c + h/2]^3 lying in the ball |y| < r.
inline double cell_ball_fraction(double cx, double cy, double cz, double h, double r, int sub) {
  const double half = 0.5 * h;
  auto clamp_dist = [&](double c) { return std::max(0.0, std::abs(c) - half); };
  const double near2 = clamp_dist(cx) * clamp_dist(cx) + clamp_dist(cy) * clamp_dist(cy) +
                       clamp_dist(cz) * clamp_dist(cz);
  if (near2 >= r * r) return 0.0;
  auto far = [&](double c) { return std::abs(c) + half; };
  const double far2 = far(cx) * far(cx) + far(cy) * far(cy) + far(cz) * far(cz);
  if (far2 <= r * r) return 1.0;
  int inside = 0;
  const double step = h / sub;
  for (int a = 0; a < sub; ++a) {
    const double x = cx - half + (a + 0.5) * step;
    for (int b = 0; b < sub; ++b) {
      const double y = cy - half + (b + 0.5) * step;
      for (int c = 0; c < sub; ++c) {
        const double z = cz - half + (c + 0.5) * step;
        if (x * x + y * y + z * z < r * r) ++inside;
      }
    }
  }
  return static_cast<double>(inside) / (static_cast<double>(sub) * sub * sub);
}

class MaximalOperator {
 public:
  explicit MaximalOperator(GridPtr grid, int subsamples = 12) : grid_(std::move(grid)) {
    const auto& g = *grid_;
    for (double r = g.dx(); r <= 0.5 * g.box_length() * (1.0 + 1e-12); r *= 2.0) radii_.push_back(r);
    kernels_.resize(radii_.size());
    parallel_for(radii_.size(), [&](std::size_t q) {
      const double r = radii_[q];
      const int reach = static_cast<int>(std::ceil(r / g.dx())) + 1;
      const int n = g.n();
      RealField ker(g.real_size(), 0.0);
      for (int a = -reach; a <= reach; ++a)
        for (int b = -reach; b <= reach; ++b)
          for (int c = -reach; c <= reach; ++c) {
            const double w = cell_ball_fraction(a * g.dx(), b * g.dx(), c * g.dx(), g.dx(), r, subsamples);
            if (w == 0.0) continue;
            auto wrap = [n](int v) { return ((v % n) + n) % n; };
            ker[g.rindex(wrap(a), wrap(b), wrap(c))] += w * g.cell_volume();
          }
      kernels_[q] = g.forward(ker);
    });
  }

  const std::vector<double>& radii() const noexcept { return radii_; }

  /// r^{-3} int_{B_r(x)} f for every dyadic radius, indexed [radius][cell].
  std::vector<RealField> ball_averages(std::span<const double> f) const {
    const auto& g = *grid_;
    for (double v : f)
      if (v < 0.0 || !std::isfinite(v)) fail(ErrorCode::NegativeInput, "maximal_function needs f >= 0");
    const SpectralField fh = g.forward(f);
    const double n3 = static_cast<double>(g.real_size());
    std::vector<RealField> out(radii_.size());
    parallel_for(radii_.size(), [&](std::size_t q) {
      SpectralField prod(fh.size());
      // kernels_ and fh both carry 1/n^3; the convolution sum needs one n^3 back.
      for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = fh[i] * kernels_[q][i] * n3;
      RealField conv = g.inverse(prod);
      const double inv = 1.0 / std::pow(radii_[q], 3);
      for (auto& v : conv) v = std::max(0.0, v * inv);
      out[q] = std::move(conv);
    });
    return out;
  }

  RealField apply(std::span<const double> f) const {
    auto avg = ball_averages(f);
    RealField m(grid_->real_size(), 0.0);
    for (const auto& a : avg)
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::max(m[i], a[i]);
    return m;
  }

 private:
  GridPtr grid_;
  std::vector<double> radii_;
  std::vector<SpectralField> kernels_;
};

inline RealField maximal_function(const GridPtr& grid, std::span<const double> f) {
  return MaximalOperator(grid).apply(f);
}

}  // namespace fracreg::spectral

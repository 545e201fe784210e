#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "fracreg/core/error.hpp"

namespace fracreg {

inline constexpr double kAlphaLower = 1.0;
inline constexpr double kAlphaUpper = 1.25;

/// Dissipation exponent of (-Delta)^alpha restricted to the hyperdissipative
/// window 1 < alpha < 5/4, together with the extension weight b = 3 - 2 alpha.
class AlphaParams {
 public:
  explicit AlphaParams(double alpha) : alpha_(alpha) {
    require(std::isfinite(alpha) && alpha > kAlphaLower && alpha < kAlphaUpper,
            ErrorCode::DomainViolation,
            "alpha must lie strictly inside (1, 5/4), got " + std::to_string(alpha));
  }

  /// Skips the open-interval check; only the closed forms accept this so that
  /// endpoint probes (alpha = 1, alpha = 5/4) can be evaluated.
  static AlphaParams closure(double alpha) {
    require(std::isfinite(alpha) && alpha >= kAlphaLower && alpha <= kAlphaUpper,
            ErrorCode::DomainViolation,
            "alpha must lie in [1, 5/4], got " + std::to_string(alpha));
    AlphaParams a;
    a.alpha_ = alpha;
    return a;
  }

  double alpha() const noexcept { return alpha_; }
  double b() const noexcept { return 3.0 - 2.0 * alpha_; }

  /// Time exponent of parabolic cylinders: Q_r = B_r x (t - r^{2 alpha}, t].
  double time_scale(double r) const { return std::pow(r, 2.0 * alpha_); }

  friend bool operator==(const AlphaParams&, const AlphaParams&) = default;

 private:
  AlphaParams() = default;
  double alpha_ = 1.125;
};

}  // namespace fracreg

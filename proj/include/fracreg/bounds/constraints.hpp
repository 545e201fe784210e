#pragma once

// Exponent bookkeeping of the radius iteration r_k = rho^{eta + k zeta},
// k = 0..N. Regularity at the center follows once the three exponents J1
// (tail), J2 (pressure) and J3 (convection) are nonnegative, eta >= 1, and
// gamma <= (4a-3)/(4a) L.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "fracreg/bounds/closed_forms.hpp"
#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"

namespace fracreg::bounds {

/// Iteration quadruple (eta, zeta, N, gamma) plus the optional base radius rho.
struct IterParams {
  double eta = 1.0;
  double zeta = 0.0;
  long n_steps = 1;
  double gamma = 0.0;
  std::optional<double> rho;

  /// Common ratio rho^zeta of the radius sequence; 1/2 when rho is unset,
  /// which is the largest ratio the decay lemmas tolerate.
  double theta() const { return rho ? std::pow(*rho, zeta) : 0.5; }

  double n_zeta() const { return static_cast<double>(n_steps) * zeta; }

  /// r_k = rho^{eta + k zeta}; requires rho.
  double radius(long k) const {
    require(rho.has_value(), ErrorCode::DomainViolation, "radius needs rho");
    return std::pow(*rho, eta + static_cast<double>(k) * zeta);
  }

  void validate() const {
    require(eta >= 1.0 - 1e-12, ErrorCode::DomainViolation, "eta must be >= 1");
    require(zeta > 0.0, ErrorCode::DomainViolation, "zeta must be > 0");
    require(n_steps >= 1, ErrorCode::DomainViolation, "N must be >= 1");
    require(gamma >= 0.0, ErrorCode::DomainViolation, "gamma must be >= 0");
    if (rho) {
      require(*rho > 0.0 && *rho < 1.0, ErrorCode::DomainViolation, "rho must be in (0,1)");
      require(theta() <= 0.5, ErrorCode::ThetaOutOfRange, "theta = rho^zeta must be <= 1/2");
    }
  }
};

struct ExponentTriplet {
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
};

/// Slack of each gamma upper bound (positive = satisfied) with the raw
/// exponents and the eta they were computed with.
struct ConstraintMargins {
  std::array<double, 5> m{};
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
  double eta = 1.0;

  double min_margin() const { return *std::min_element(m.begin(), m.end()); }
  bool feasible(double tol = 0.0) const { return min_margin() >= -tol; }
};

/// eta chosen so that the two exponents of rho in the convection sum coincide.
template <class T>
T eta_from_of(const T& a, const T& zeta, const T& n_zeta, const T& gamma) {
  const T gap = L_of(a) - gamma;
  return T(2) / T(9) *
         ((T(6) - T(2) * a) * zeta + (T(2) * a - T(6)) * n_zeta + T(9) / T(2) +
          gap * T(2) * a / (T(3) + T(2) * a));
}

/// Residual of the equated-exponents relation that defines eta:
/// (6-2a) zeta + (L-gamma) 2a/(3+2a) - [N zeta (3/2 - 2a) + 9/2 (eta + N zeta) - 9/2].
template <class T>
T eta_relation_residual_of(const T& a, const T& zeta, const T& n_zeta, const T& gamma,
                           const T& eta) {
  const T gap = L_of(a) - gamma;
  const T lhs = (T(6) - T(2) * a) * zeta + gap * T(2) * a / (T(3) + T(2) * a);
  const T rhs = n_zeta * (T(3) / T(2) - T(2) * a) + T(9) / T(2) * (eta + n_zeta) - T(9) / T(2);
  return lhs - rhs;
}

template <class T>
T j1_of(const T& a, const T& zeta, const T& n_zeta, const T& gamma) {
  const T eta = eta_from_of(a, zeta, n_zeta, gamma);
  return (eta + n_zeta) * (T(4) * a - T(2)) + (L_of(a) - gamma) * T(3) / (T(3) + T(2) * a);
}

template <class T>
T j2_of(const T& a, const T& zeta, const T& n_zeta, const T& gamma) {
  const T eta = eta_from_of(a, zeta, n_zeta, gamma);
  return (T(4) * a - T(3) / T(2)) * n_zeta + (T(6) * a - T(15) / T(2)) * eta + L_of(a) - gamma;
}

template <class T>
T j3_of(const T& a, const T& zeta, const T& n_zeta, const T& gamma) {
  return (T(-16) * a * a + T(56) * a - T(51)) / T(6) * zeta +
         (T(4) * a - T(5)) * (T(4) * a - T(3)) / T(6) * n_zeta +
         q27_of(a) / (T(6) * (T(3) + T(2) * a)) * (L_of(a) - gamma) +
         T(3) * (T(4) * a - T(5)) / T(2);
}

/// The five upper bounds on gamma, each obtained by solving the corresponding
/// condition (J1 >= 0, J2 >= 0, J3 >= 0, eta >= 1, energy-step cap) for gamma
/// with eta given by eta_from_of. All are affine in (zeta, N zeta).
template <class T>
std::array<T, 5> gamma_caps_of(const T& a, const T& zeta, const T& n_zeta) {
  const T L = L_of(a);
  const T s = T(3) + T(2) * a;
  const T q27 = q27_of(a);
  const T q18 = T(16) * a * a - T(8) * a + T(18);
  return {
      L + T(2) * (T(2) * a - T(1)) * s *
              ((T(4) * a - T(3)) * n_zeta + (T(12) - T(4) * a) * zeta + T(9)) / q27,
      L + s *
              ((T(16) * a * a - T(44) * a + T(51)) * n_zeta +
               (T(-16) * a * a + T(68) * a - T(60)) * zeta + T(36) * a - T(45)) /
              q18,
      L + s *
              ((T(16) * a * a - T(32) * a + T(15)) * n_zeta +
               (T(-16) * a * a + T(56) * a - T(51)) * zeta + T(36) * a - T(45)) /
              q27,
      L + s * (a - T(3)) * (n_zeta - zeta) / a,
      (T(4) * a - T(3)) / (T(4) * a) * L,
  };
}

// ---- double-precision operations -------------------------------------------

inline double eta_from(const AlphaParams& a, double zeta, double n_zeta, double gamma) {
  require(zeta >= 0.0, ErrorCode::DomainViolation, "zeta must be >= 0");
  require(n_zeta >= 0.0, ErrorCode::DomainViolation, "N zeta must be >= 0");
  require(gamma >= 0.0, ErrorCode::DomainViolation, "gamma must be >= 0");
  return eta_from_of(a.alpha(), zeta, n_zeta, gamma);
}

inline ExponentTriplet exponent_triplet(const AlphaParams& a, double gamma, double zeta,
                                        double n_zeta) {
  const double al = a.alpha();
  return {j1_of(al, zeta, n_zeta, gamma), j2_of(al, zeta, n_zeta, gamma),
          j3_of(al, zeta, n_zeta, gamma)};
}

inline ConstraintMargins constraint_margins(const AlphaParams& a, double gamma, double zeta,
                                            double n_zeta) {
  const auto caps = gamma_caps_of(a.alpha(), zeta, n_zeta);
  const auto j = exponent_triplet(a, gamma, zeta, n_zeta);
  ConstraintMargins out;
  for (std::size_t i = 0; i < caps.size(); ++i) out.m[i] = caps[i] - gamma;
  out.j1 = j.j1;
  out.j2 = j.j2;
  out.j3 = j.j3;
  out.eta = eta_from_of(a.alpha(), zeta, n_zeta, gamma);
  return out;
}

/// Largest zeta for which the iteration closes at a given gamma < L - J:
/// zeta <= q27 / (9 (3+2a)(5-4a)) * (L - J - gamma).
inline double zeta_admissibility_cap(const AlphaParams& a, double gamma) {
  const double al = a.alpha();
  return q27_of(al) / (9.0 * (3.0 + 2.0 * al) * (5.0 - 4.0 * al)) *
         (eval_L(a) - eval_J(a) - gamma);
}

/// Right-hand side of the pressure/convection iteration with unit constants:
/// sum_{i=1}^{N} theta^{(4a-3/2)(i-1) + 4a-6} C(r_{N-i}) + theta^{(4a-3/2) N} D(r_0).
/// c_values[k] holds C(r_k) for k = 0..N-1.
inline double iteration_bound(double theta, std::span<const double> c_values, double d0,
                              const AlphaParams& a) {
  require(theta > 0.0 && theta <= 0.5, ErrorCode::ThetaOutOfRange,
          "theta must lie in (0, 1/2], got " + std::to_string(theta));
  require(!c_values.empty(), ErrorCode::DomainViolation, "need N >= 1 C values");
  const double al = a.alpha();
  const double decay = 4.0 * al - 1.5;
  const double lead = 4.0 * al - 6.0;
  const std::size_t n = c_values.size();
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum += std::pow(theta, decay * static_cast<double>(i - 1) + lead) * c_values[n - i];
  }
  return sum + std::pow(theta, decay * static_cast<double>(n)) * d0;
}

}  // namespace fracreg::bounds

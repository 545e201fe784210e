#pragma once

// Closed-form dimension bounds for the singular set of suitable weak solutions
// of the alpha-fractional Navier-Stokes system, 1 < alpha < 5/4.
//
// Every formula is a template over the scalar type so that the same expression
// is evaluated both in double and in exact rational arithmetic (Rational below).

#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"

namespace fracreg::bounds {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kDenominatorFloor = 1e-12;

/// Previously known bound L(alpha) = (15 - 2 alpha - 8 alpha^2) / 3.
template <class T>
T L_of(const T& a) {
  return (T(15) - T(2) * a - T(8) * a * a) / T(3);
}

/// Denominator shared by J and N*zeta: -64 a^3 + 272 a^2 - 300 a + 369.
/// Positive on [1, 5/4] (277 at a = 1, 294 at a = 5/4).
template <class T>
T j_denominator_of(const T& a) {
  return T(-64) * a * a * a + T(272) * a * a - T(300) * a + T(369);
}

template <class T>
T j_numerator_of(const T& a) {
  return T(36) * (T(3) - a) * (T(3) + T(2) * a) * (T(5) - T(4) * a);
}

/// Improved bound J(alpha).
template <class T>
T J_of(const T& a) {
  return j_numerator_of(a) / j_denominator_of(a);
}

/// The same rational function written with expanded, negated numerator and
/// denominator (the form used to plot the improved curve).
template <class T>
T J_expanded_of(const T& a) {
  const T num = T(-288) * a * a * a + T(792) * a * a + T(756) * a - T(1620);
  const T den = T(64) * a * a * a - T(272) * a * a + T(300) * a - T(369);
  return num / den;
}

/// Optimal continuous iteration length N*zeta: where the J2 and J3 caps on
/// gamma cross in the zeta -> 0 limit.
template <class T>
T nzeta_star_of(const T& a) {
  return T(27) * (T(4) * a - T(5)) /
         (T(64) * a * a * a - T(272) * a * a + T(300) * a - T(369));
}

/// Common quadratic 16 a^2 - 8 a + 27.
template <class T>
T q27_of(const T& a) {
  return T(16) * a * a - T(8) * a + T(27);
}

/// Left-hand side of the identity chain that produces L - J:
/// L + 9(4a-5)(3+2a)/q27 + (3+2a)(4a-5)(4a-3)/q27 * N*zeta.
template <class T>
T identity_chain_of(const T& a) {
  const T q = q27_of(a);
  return L_of(a) + T(9) * (T(4) * a - T(5)) * (T(3) + T(2) * a) / q +
         (T(3) + T(2) * a) * (T(4) * a - T(5)) * (T(4) * a - T(3)) / q * nzeta_star_of(a);
}

/// Exact rational from a decimal or fraction literal, e.g. "9/8" or "1.05".
inline Rational rational_from_string(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    return Rational(boost::multiprecision::cpp_int(text.substr(0, slash)),
                    boost::multiprecision::cpp_int(text.substr(slash + 1)));
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  boost::multiprecision::cpp_int scale = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
  return Rational(boost::multiprecision::cpp_int(digits), scale);
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// ---- double-precision entry points on validated parameters ----------------

inline double eval_L(const AlphaParams& a) { return L_of(a.alpha()); }

inline double eval_J(const AlphaParams& a) {
  const double den = j_denominator_of(a.alpha());
  require(std::abs(den) >= kDenominatorFloor, ErrorCode::DenominatorNearZero,
          "J denominator vanishes at alpha = " + std::to_string(a.alpha()));
  return j_numerator_of(a.alpha()) / den;
}

inline double nzeta_star(const AlphaParams& a) {
  const double den = -j_denominator_of(a.alpha());
  require(std::abs(den) >= kDenominatorFloor, ErrorCode::DenominatorNearZero,
          "N*zeta denominator vanishes at alpha = " + std::to_string(a.alpha()));
  return 27.0 * (4.0 * a.alpha() - 5.0) / den;
}

/// Minimum of the J denominator over a uniform grid of [1, 5/4]. A positive
/// result certifies that eval_J and nzeta_star never divide by ~0 in-domain.
inline double denominator_grid_minimum(int points = 10001) {
  double lo = j_denominator_of(kAlphaLower);
  for (int k = 0; k < points; ++k) {
    const double a = kAlphaLower + (kAlphaUpper - kAlphaLower) * k / (points - 1);
    lo = std::min(lo, j_denominator_of(a));
  }
  return lo;
}

}  // namespace fracreg::bounds

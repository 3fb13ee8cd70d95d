#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errest/errors.hpp"

namespace errest {

using Vector = std::vector<double>;

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

} // namespace detail

// Sequential accumulation, left to right.
inline double dot(std::span<const double> u, std::span<const double> v) {
  detail::require_same_length(u.size(), v.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  detail::require_same_length(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

/// y = x + a * y
inline void xpay(std::span<const double> x, double a, std::span<double> y) {
  detail::require_same_length(x.size(), y.size(), "xpay");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + a * y[i];
}

inline void scale(double a, std::span<double> x) {
  for (double& xi : x) xi *= a;
}

inline Vector subtract(std::span<const double> u, std::span<const double> v) {
  detail::require_same_length(u.size(), v.size(), "subtract");
  Vector w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] - v[i];
  return w;
}

/// A squared norm that is zero or has underflowed below the normal range.
inline bool negligible_sq(double v) noexcept { return v < std::numeric_limits<double>::min(); }

namespace detail {

// Working-precision convergence of a least-squares iteration with s = A^T r:
// ||s|| <= eps ||A|| ||r||, or ||r|| <= eps (||b|| + ||A|| ||x||).
inline bool at_rounding_level(double ss, double rr, double norm_A, double norm_b,
                              double norm_x) noexcept {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double normal_floor = eps * norm_A;
  const double residual_floor = eps * (norm_b + norm_A * norm_x);
  return ss <= normal_floor * normal_floor * rr || rr <= residual_floor * residual_floor;
}

} // namespace detail

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

} // namespace errest

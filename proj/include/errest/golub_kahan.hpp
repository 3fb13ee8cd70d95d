#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>

#include "errest/operators.hpp"
#include "errest/vector_ops.hpp"

namespace errest {

enum class GKBreakdown { none, beta, alpha };

/**
 * Current step of the Golub-Kahan bidiagonalization
 *   beta_1 u_1 = b,  alpha_1 v_1 = A^T u_1,
 *   beta_{k+1} u_{k+1} = A v_k - alpha_k u_k,
 *   alpha_{k+1} v_{k+1} = A^T u_{k+1} - beta_{k+1} v_k.
 * u and v are unit vectors unless the matching coefficient is zero, in which
 * case the vector is left zero and `breakdown` names the coefficient.
 */
struct BidiagState {
  Vector u;
  Vector v;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t k = 1;
  GKBreakdown breakdown = GKBreakdown::none;
};

namespace detail {

// Normalizes w in place; returns the norm, or 0 when ||w|| <= tol * reference.
inline double normalize_or_zero(Vector& w, double reference, double tol) {
  const double nrm = norm2(w);
  if (nrm == 0.0 || nrm <= tol * reference) {
    std::fill(w.begin(), w.end(), 0.0);
    return 0.0;
  }
  scale(1.0 / nrm, w);
  return nrm;
}

} // namespace detail

template <LinearOperator Op>
BidiagState golub_kahan_start(const Op& A, std::span<const double> b,
                              double tol = 64.0 * std::numeric_limits<double>::epsilon()) {
  detail::require_same_length(b.size(), A.rows(), "golub_kahan_start");
  BidiagState s;
  s.u.assign(b.begin(), b.end());
  s.beta = detail::normalize_or_zero(s.u, 0.0, tol);
  if (s.beta == 0.0) {
    s.v.assign(A.cols(), 0.0);
    s.breakdown = GKBreakdown::beta;
    return s;
  }
  s.v = A.apply_transpose(s.u);
  s.alpha = detail::normalize_or_zero(s.v, 0.0, tol);
  if (s.alpha == 0.0) s.breakdown = GKBreakdown::alpha;
  return s;
}

/// Advances from (u_k, v_k, alpha_k) to (u_{k+1}, v_{k+1}, alpha_{k+1}, beta_{k+1}).
template <LinearOperator Op>
BidiagState golub_kahan_step(const BidiagState& cur, const Op& A,
                             double tol = 64.0 * std::numeric_limits<double>::epsilon()) {
  BidiagState next;
  next.k = cur.k + 1;
  next.u = A.apply(cur.v);
  const double av_norm = norm2(next.u);
  axpy(-cur.alpha, cur.u, next.u);
  next.beta = detail::normalize_or_zero(next.u, av_norm, tol);
  if (next.beta == 0.0) {
    next.v.assign(A.cols(), 0.0);
    next.breakdown = GKBreakdown::beta;
    return next;
  }
  next.v = A.apply_transpose(next.u);
  const double atu_norm = norm2(next.v);
  axpy(-next.beta, cur.v, next.v);
  next.alpha = detail::normalize_or_zero(next.v, atu_norm, tol);
  if (next.alpha == 0.0) next.breakdown = GKBreakdown::alpha;
  return next;
}

} // namespace errest

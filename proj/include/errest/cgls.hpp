#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "errest/errors.hpp"
#include "errest/operators.hpp"
#include "errest/trace.hpp"

namespace errest {

/**
 * CGLS: CG on A^T A x = A^T b without forming A^T A.
 *
 * Delta_k = gamma_k ||s_k||^2 with s_k = A^T r_k; the accepted estimates
 * approximate ||x - x_ell||^2_{A^T A} = ||r_ell||^2 - ||r||^2. With
 * record_local_orthogonality the term -s_{k+1}^T p_k / ||s_k||^2 is stored.
 *
 * Besides a zero s_k the solve counts as converged once
 * ||s_k|| <= eps ||A|| ||r_k|| or ||r_k|| <= eps (||b|| + ||A|| ||x_k||), with
 * ||A|| estimated from below by max ||A p|| / ||p||. Past that point the
 * recurrence only amplifies rounding noise and can diverge.
 */
template <LinearOperator Op>
SolverTrace cgls_solve(const Op& A, std::span<const double> b, std::span<const double> x0,
                       const SolverConfig& cfg, double normA) {
  cfg.validate();
  detail::require_same_length(b.size(), A.rows(), "cgls_solve rhs");
  detail::require_same_length(x0.size(), A.cols(), "cgls_solve x0");

  SolverTrace trace;
  const double norm_b = norm2(b);
  detail::EstimatorHost host(cfg, trace, normA, norm_b);
  Vector x(x0.begin(), x0.end());
  Vector r = subtract(b, A.apply(x));
  Vector s = A.apply_transpose(r);
  Vector p = s;
  double ss = dot(s, s);
  if (cfg.store_iterates) trace.iterates.push_back(x);

  double norm_est = 0.0;
  if (negligible_sq(ss)) trace.status = SolveStatus::converged;
  for (std::size_t k = 0; k < cfg.max_iter && !negligible_sq(ss); ++k) {
    const Vector q = A.apply(p);
    const double qq = dot(q, q);
    if (qq == 0.0) throw BreakdownError("cgls_solve: A p_k = 0 with s_k != 0");
    const double gamma = ss / qq;
    norm_est = std::max(norm_est, std::sqrt(qq / dot(p, p)));

    IterationRecord rec;
    rec.res_norm = norm2(r);
    rec.gamma = gamma;
    rec.delta = gamma * ss;

    axpy(gamma, p, x);
    axpy(-gamma, q, r);
    s = A.apply_transpose(r);
    const double ss_next = dot(s, s);
    if (cfg.record_local_orthogonality) rec.local_orth = -dot(s, p) / ss;

    const bool stop = host.push(rec, [&] { return norm2(x); });
    if (cfg.store_iterates) trace.iterates.push_back(x);
    if (negligible_sq(ss_next) ||
        detail::at_rounding_level(ss_next, dot(r, r), norm_est, norm_b, norm2(x))) {
      trace.status = SolveStatus::converged;
      host.flush();
      break;
    }
    if (stop) {
      trace.status = SolveStatus::stopping_criterion;
      break;
    }
    xpay(s, ss_next / ss, p);
    ss = ss_next;
  }
  trace.x = std::move(x);
  return trace;
}

inline SolverTrace cgls_solve(const SparseMatrix& A, std::span<const double> b,
                              std::span<const double> x0, const SolverConfig& cfg) {
  return cgls_solve(A, b, x0, cfg, A.frobenius_norm());
}

inline SolverTrace cgls_solve(const SparseMatrix& A, std::span<const double> b,
                              const SolverConfig& cfg) {
  const Vector x0(A.cols(), 0.0);
  return cgls_solve(A, b, x0, cfg);
}

} // namespace errest

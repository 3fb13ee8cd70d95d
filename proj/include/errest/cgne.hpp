#pragma once

#include <cmath>
#include <span>

#include "errest/errors.hpp"
#include "errest/operators.hpp"
#include "errest/trace.hpp"

namespace errest {

/**
 * CGNE (Craig's method in Hestenes-Stiefel form) for the consistent
 * least-norm problem min ||z|| s.t. Az = b.
 *
 * Delta_k = gamma_k ||r_k||^2 estimates the Euclidean error ||x - x_ell||^2.
 */
template <LinearOperator Op>
SolverTrace cgne_solve(const Op& A, std::span<const double> b, std::span<const double> x0,
                       const SolverConfig& cfg, double normA) {
  cfg.validate();
  detail::require_same_length(b.size(), A.rows(), "cgne_solve rhs");
  detail::require_same_length(x0.size(), A.cols(), "cgne_solve x0");

  SolverTrace trace;
  detail::EstimatorHost host(cfg, trace, normA, norm2(b));
  Vector x(x0.begin(), x0.end());
  Vector r = subtract(b, A.apply(x));
  Vector p = A.apply_transpose(r);
  double rr = dot(r, r);
  if (cfg.store_iterates) trace.iterates.push_back(x);

  if (negligible_sq(rr)) trace.status = SolveStatus::converged;
  for (std::size_t k = 0; k < cfg.max_iter && !negligible_sq(rr); ++k) {
    const double pp = dot(p, p);
    if (pp == 0.0) throw BreakdownError("cgne_solve: p_k = 0 with r_k != 0 (is b in R(A)?)");
    const double gamma = rr / pp;

    IterationRecord rec;
    rec.res_norm = std::sqrt(rr);
    rec.gamma = gamma;
    rec.delta = gamma * rr;

    axpy(gamma, p, x);
    axpy(-gamma, A.apply(p), r);
    const double rr_next = dot(r, r);

    const bool stop = host.push(rec, [&] { return norm2(x); });
    if (cfg.store_iterates) trace.iterates.push_back(x);
    if (negligible_sq(rr_next)) {
      trace.status = SolveStatus::converged;
      host.flush();
      break;
    }
    if (stop) {
      trace.status = SolveStatus::stopping_criterion;
      break;
    }
    xpay(A.apply_transpose(r), rr_next / rr, p);
    rr = rr_next;
  }
  trace.x = std::move(x);
  return trace;
}

inline SolverTrace cgne_solve(const SparseMatrix& A, std::span<const double> b,
                              std::span<const double> x0, const SolverConfig& cfg) {
  return cgne_solve(A, b, x0, cfg, A.frobenius_norm());
}

inline SolverTrace cgne_solve(const SparseMatrix& A, std::span<const double> b,
                              const SolverConfig& cfg) {
  const Vector x0(A.cols(), 0.0);
  return cgne_solve(A, b, x0, cfg);
}

} // namespace errest

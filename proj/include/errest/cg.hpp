#pragma once

#include <span>

#include "errest/errors.hpp"
#include "errest/operators.hpp"
#include "errest/trace.hpp"

namespace errest {

/**
 * Hestenes-Stiefel CG for a symmetric positive (semi-)definite A with the
 * adaptive estimate of ||x - x_ell||_A^2 driven by Delta_k = gamma_k ||r_k||^2.
 * For singular A the system must be consistent and x0 in R(A).
 */
template <LinearOperator Op>
SolverTrace cg_solve(const Op& A, std::span<const double> b, std::span<const double> x0,
                     const SolverConfig& cfg, double normA) {
  cfg.validate();
  if (A.rows() != A.cols()) throw DimensionError("cg_solve: matrix must be square");
  detail::require_same_length(b.size(), A.rows(), "cg_solve rhs");
  detail::require_same_length(x0.size(), A.cols(), "cg_solve x0");

  SolverTrace trace;
  detail::EstimatorHost host(cfg, trace, normA, norm2(b));
  Vector x(x0.begin(), x0.end());
  Vector r = subtract(b, A.apply(x));
  Vector p = r;
  double rr = dot(r, r);
  if (cfg.store_iterates) trace.iterates.push_back(x);

  if (negligible_sq(rr)) {
    trace.status = SolveStatus::converged;
  }
  for (std::size_t k = 0; k < cfg.max_iter && !negligible_sq(rr); ++k) {
    const Vector Ap = A.apply(p);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) throw BreakdownError("cg_solve: matrix not SPD on Krylov space");
    const double gamma = rr / pAp;

    IterationRecord rec;
    rec.res_norm = std::sqrt(rr);
    rec.gamma = gamma;
    rec.delta = gamma * rr;

    axpy(gamma, p, x);
    axpy(-gamma, Ap, r);
    const double rr_next = dot(r, r);
    if (cfg.record_local_orthogonality) rec.local_orth = -dot(r, p) / rr;

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
    const double delta = rr_next / rr;
    xpay(r, delta, p);
    rr = rr_next;
  }
  trace.x = std::move(x);
  return trace;
}

inline SolverTrace cg_solve(const SparseMatrix& A, std::span<const double> b,
                            std::span<const double> x0, const SolverConfig& cfg) {
  return cg_solve(A, b, x0, cfg, A.frobenius_norm());
}

inline SolverTrace cg_solve(const SparseMatrix& A, std::span<const double> b,
                            const SolverConfig& cfg) {
  const Vector x0(A.cols(), 0.0);
  return cg_solve(A, b, x0, cfg);
}

} // namespace errest

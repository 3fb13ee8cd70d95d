#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "errest/errors.hpp"
#include "errest/golub_kahan.hpp"
#include "errest/trace.hpp"

namespace errest {

/**
 * CRAIG: Craig's method via Golub-Kahan bidiagonalization, x_0 = y_0 = 0.
 *
 * zeta_k = -(beta_k / alpha_k) zeta_{k-1}, x_k = x_{k-1} + zeta_k v_k, and
 * ||x - x_{k-1}||^2 - ||x - x_k||^2 = zeta_k^2 while d_k and u_{k+1} stay
 * locally orthogonal, so zeta_k^2 is pushed as Delta_{k-1}.
 *
 * With `want_y` the iterates y_k of A A^T y = b are formed as well (x_k = A^T y_k)
 * and, if requested, the local term -2 beta_{k+1} d_k^T u_{k+1} is recorded.
 * `norm_b` overrides ||b|| in the stopping test (the preconditioned variant
 * passes the original right-hand side norm).
 */
template <LinearOperator Op>
SolverTrace craig_solve(const Op& A, std::span<const double> b, const SolverConfig& cfg,
                        double normA, bool want_y = false, double norm_b = -1.0) {
  cfg.validate();
  detail::require_same_length(b.size(), A.rows(), "craig_solve rhs");

  SolverTrace trace;
  detail::EstimatorHost host(cfg, trace, normA, norm_b < 0.0 ? norm2(b) : norm_b);
  Vector x(A.cols(), 0.0);
  Vector y, d;
  if (want_y) {
    y.assign(A.rows(), 0.0);
    d.assign(A.rows(), 0.0);
  }
  auto store = [&] {
    if (cfg.store_iterates) trace.iterates.push_back(x);
    if (want_y) trace.y_iterates.push_back(y);
  };
  store();

  BidiagState gk = golub_kahan_start(A, b, cfg.breakdown_tol);
  if (gk.breakdown == GKBreakdown::beta) throw std::invalid_argument("craig_solve: b must be nonzero");
  if (gk.breakdown == GKBreakdown::alpha) throw BreakdownError("craig_solve: alpha_1 = 0 (A^T b = 0)");

  double zeta_prev = -1.0;
  double res_norm = gk.beta;
  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    const double zeta = -(gk.beta / gk.alpha) * zeta_prev;
    axpy(zeta, gk.v, x);
    if (want_y) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = (gk.u[i] - gk.beta * d[i]) / gk.alpha;
      axpy(zeta, d, y);
    }
    BidiagState next = golub_kahan_step(gk, A, cfg.breakdown_tol);

    IterationRecord rec;
    rec.res_norm = res_norm; // ||r_{k-1}||
    rec.delta = zeta * zeta;
    rec.zeta = zeta;
    rec.alpha = gk.alpha;
    rec.beta = gk.beta;
    if (want_y && cfg.record_local_orthogonality) {
      rec.local_orth = -2.0 * next.beta * dot(d, next.u);
    }

    const bool stop = host.push(rec, [&] { return norm2(x); });
    store();
    if (next.breakdown == GKBreakdown::beta) {
      trace.status = SolveStatus::converged;
      host.flush();
      break;
    }
    if (next.breakdown == GKBreakdown::alpha) {
      throw BreakdownError("craig_solve: alpha_" + std::to_string(k + 1) + " = 0");
    }
    if (stop) {
      trace.status = SolveStatus::stopping_criterion;
      break;
    }
    res_norm = std::abs(zeta) * next.beta;
    zeta_prev = zeta;
    gk = std::move(next);
  }
  trace.x = std::move(x);
  return trace;
}

inline SolverTrace craig_solve(const SparseMatrix& A, std::span<const double> b,
                               const SolverConfig& cfg, bool want_y = false) {
  return craig_solve(A, b, cfg, A.frobenius_norm(), want_y);
}

} // namespace errest

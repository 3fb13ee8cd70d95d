#pragma once

#include <cmath>
#include <span>

#include "errest/golub_kahan.hpp"
#include "errest/trace.hpp"

namespace errest {

namespace detail {

struct IdentityMap {
  Vector operator()(std::span<const double> v) const { return Vector(v.begin(), v.end()); }
};

} // namespace detail

/**
 * LSQR (Paige-Saunders) with x_0 = 0.
 *
 * Step k produces phi_k with ||x - x_{k-1}||^2_{A^T A} - ||x - x_k||^2_{A^T A}
 * = phi_k^2 as long as local orthogonality holds, so phi_k^2 is pushed as
 * Delta_{k-1}. The optional local orthogonality term is
 * l_k = (theta_{k+1} / rho_k) v_{k+1}^T w_k.
 *
 * `to_original` maps the operator's iterate back to the caller's coordinates
 * (identity for plain LSQR, x = L^{-T} x_hat for the preconditioned variant);
 * it is applied to stored iterates and to the final solution.
 */
template <LinearOperator Op, class ToOriginal = detail::IdentityMap>
SolverTrace lsqr_solve(const Op& A, std::span<const double> b, const SolverConfig& cfg,
                       double normA, ToOriginal to_original = {}, bool keep_hat = false) {
  cfg.validate();
  detail::require_same_length(b.size(), A.rows(), "lsqr_solve rhs");

  SolverTrace trace;
  detail::EstimatorHost host(cfg, trace, normA, norm2(b));
  Vector x(A.cols(), 0.0);
  auto store = [&] {
    if (!cfg.store_iterates) return;
    trace.iterates.push_back(to_original(x));
    if (keep_hat) trace.hat_iterates.push_back(x);
  };
  store();

  BidiagState gk = golub_kahan_start(A, b, cfg.breakdown_tol);
  if (gk.breakdown != GKBreakdown::none) {
    // b = 0 or A^T b = 0: x_0 = 0 already solves the problem.
    trace.status = SolveStatus::converged;
    trace.x = to_original(x);
    return trace;
  }
  Vector w = gk.v;
  double phi_bar = gk.beta;
  double rho_bar = gk.alpha;

  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    BidiagState next = golub_kahan_step(gk, A, cfg.breakdown_tol);

    const double rho = std::hypot(rho_bar, next.beta);
    const double c = rho_bar / rho;
    const double s = next.beta / rho;
    const double theta = s * next.alpha;
    const double rho_bar_next = -c * next.alpha;
    const double phi = c * phi_bar;
    const double phi_bar_next = s * phi_bar;

    IterationRecord rec;
    rec.res_norm = phi_bar; // ||r_{k-1}||
    rec.delta = phi * phi;
    rec.alpha = gk.alpha;
    rec.beta = gk.beta;
    rec.rho = rho;
    rec.theta = theta;
    rec.phi = phi;
    if (cfg.record_local_orthogonality) rec.local_orth = theta / rho * dot(next.v, w);

    axpy(phi / rho, w, x);
    xpay(next.v, -theta / rho, w);

    const bool stop = host.push(rec, [&] { return norm2(to_original(x)); });
    store();
    if (cfg.store_iterates) trace.v_next.push_back(next.v);

    if (next.breakdown != GKBreakdown::none) {
      trace.status = SolveStatus::converged;
      host.flush();
      break;
    }
    if (stop) {
      trace.status = SolveStatus::stopping_criterion;
      break;
    }
    gk = std::move(next);
    phi_bar = phi_bar_next;
    rho_bar = rho_bar_next;
  }
  trace.x = to_original(x);
  return trace;
}

inline SolverTrace lsqr_solve(const SparseMatrix& A, std::span<const double> b,
                              const SolverConfig& cfg) {
  return lsqr_solve(A, b, cfg, A.frobenius_norm());
}

} // namespace errest

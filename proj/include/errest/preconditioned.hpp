#pragma once

// Split-preconditioned CGLS, LSQR, CGNE and CRAIG. The least-squares variants
// work with A_hat = A L^{-T}; since ||x_hat - x_hat_k||_{A_hat^T A_hat} equals
// ||x - x_k||_{A^T A}, their increments estimate the error of the original
// problem. The least-norm variants work with A_hat = L^{-1} A and update x
// in original coordinates directly.

#include <algorithm>
#include <cmath>
#include <span>

#include "errest/cgls.hpp"
#include "errest/craig.hpp"
#include "errest/errors.hpp"
#include "errest/lsqr.hpp"
#include "errest/precond.hpp"
#include "errest/trace.hpp"

namespace errest {

/// A L^{-T}, never formed.
class RightPreconditioned {
public:
  RightPreconditioned(const SparseMatrix& A, const SplitPreconditioner& M) : A_(A), M_(M) {
    if (M.size() != A.cols()) throw DimensionError("A L^{-T}: L must be cols(A) x cols(A)");
  }
  std::size_t rows() const noexcept { return A_.rows(); }
  std::size_t cols() const noexcept { return A_.cols(); }
  Vector apply(std::span<const double> v) const { return mat_vec(A_, M_.solve_upper(v)); }
  Vector apply_transpose(std::span<const double> u) const {
    return M_.solve_lower(mat_vec_transpose(A_, u));
  }

private:
  const SparseMatrix& A_;
  const SplitPreconditioner& M_;
};

/// L^{-1} A, never formed.
class LeftPreconditioned {
public:
  LeftPreconditioned(const SparseMatrix& A, const SplitPreconditioner& M) : A_(A), M_(M) {
    if (M.size() != A.rows()) throw DimensionError("L^{-1} A: L must be rows(A) x rows(A)");
  }
  std::size_t rows() const noexcept { return A_.rows(); }
  std::size_t cols() const noexcept { return A_.cols(); }
  Vector apply(std::span<const double> v) const { return M_.solve_lower(mat_vec(A_, v)); }
  Vector apply_transpose(std::span<const double> u) const {
    return mat_vec_transpose(A_, M_.solve_upper(u));
  }

private:
  const SparseMatrix& A_;
  const SplitPreconditioner& M_;
};

static_assert(LinearOperator<RightPreconditioned>);
static_assert(LinearOperator<LeftPreconditioned>);

/**
 * Preconditioned CGLS with explicit x_k and r_k = b - A x_k:
 *   t_k = L^{-T} p_k, q_k = A t_k, gamma_k = ||s_k||^2 / ||q_k||^2,
 *   x_{k+1} = x_k + gamma_k t_k, r_{k+1} = r_k - gamma_k q_k, s_{k+1} = L^{-1} A^T r_{k+1}.
 * Delta_k = gamma_k ||s_k||^2. The rounding-level stop of cgls_solve is
 * applied to A_hat with x_hat_k = L^T x_k carried alongside.
 */
inline SolverTrace pcgls_solve(const SparseMatrix& A, std::span<const double> b,
                               std::span<const double> x0, const SplitPreconditioner& M,
                               const SolverConfig& cfg) {
  cfg.validate();
  detail::require_same_length(b.size(), A.rows(), "pcgls_solve rhs");
  detail::require_same_length(x0.size(), A.cols(), "pcgls_solve x0");
  if (M.size() != A.cols()) throw DimensionError("pcgls_solve: L must be cols(A) x cols(A)");

  SolverTrace trace;
  detail::EstimatorHost host(cfg, trace, A.frobenius_norm(), norm2(b));
  Vector x(x0.begin(), x0.end());
  Vector r = subtract(b, mat_vec(A, x));
  Vector s = M.solve_lower(mat_vec_transpose(A, r));
  Vector p = s;
  double ss = dot(s, s);
  if (cfg.store_iterates) trace.iterates.push_back(x);

  Vector xhat = mat_vec_transpose(M.factor(), x); // L^T x
  double norm_est = 0.0;
  if (negligible_sq(ss)) trace.status = SolveStatus::converged;
  for (std::size_t k = 0; k < cfg.max_iter && !negligible_sq(ss); ++k) {
    const Vector t = M.solve_upper(p);
    const Vector q = mat_vec(A, t);
    const double qq = dot(q, q);
    if (qq == 0.0) throw BreakdownError("pcgls_solve: A t_k = 0 with s_k != 0");
    const double gamma = ss / qq;
    norm_est = std::max(norm_est, std::sqrt(qq / dot(p, p)));

    IterationRecord rec;
    rec.res_norm = norm2(r);
    rec.gamma = gamma;
    rec.delta = gamma * ss;

    axpy(gamma, t, x);
    axpy(gamma, p, xhat);
    axpy(-gamma, q, r);
    s = M.solve_lower(mat_vec_transpose(A, r));
    const double ss_next = dot(s, s);
    if (cfg.record_local_orthogonality) rec.local_orth = -dot(s, p) / ss;

    const bool stop = host.push(rec, [&] { return norm2(x); });
    if (cfg.store_iterates) trace.iterates.push_back(x);
    if (negligible_sq(ss_next) ||
        detail::at_rounding_level(ss_next, dot(r, r), norm_est, norm2(b), norm2(xhat))) {
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

inline SolverTrace pcgls_solve(const SparseMatrix& A, std::span<const double> b,
                               const SplitPreconditioner& M, const SolverConfig& cfg) {
  const Vector x0(A.cols(), 0.0);
  return pcgls_solve(A, b, x0, M, cfg);
}

/// LSQR on A L^{-T}; x_k = L^{-T} x_hat_k. Stored iterates are in original
/// coordinates, the transformed ones go to `hat_iterates`.
inline SolverTrace plsqr_solve(const SparseMatrix& A, std::span<const double> b,
                               const SplitPreconditioner& M, const SolverConfig& cfg) {
  const RightPreconditioned op(A, M);
  return lsqr_solve(op, b, cfg, A.frobenius_norm(),
                    [&M](std::span<const double> xh) { return M.solve_upper(xh); },
                    /*keep_hat=*/true);
}

struct PcgneOptions {
  /// Carry r_k = b - A x_k explicitly and set r_hat_k = L^{-1} r_k.
  bool unpreconditioned_residual = false;
};

/**
 * Preconditioned CGNE:
 *   gamma_k = ||r_hat_k||^2 / ||p_k||^2, x_{k+1} = x_k + gamma_k p_k,
 *   r_hat_{k+1} = r_hat_k - gamma_k L^{-1} A p_k,
 *   p_{k+1} = A^T L^{-T} r_hat_{k+1} + (||r_hat_{k+1}||^2 / ||r_hat_k||^2) p_k.
 * Delta_k = gamma_k ||r_hat_k||^2 estimates ||x - x_ell||^2.
 */
inline SolverTrace pcgne_solve(const SparseMatrix& A, std::span<const double> b,
                               std::span<const double> x0, const SplitPreconditioner& M,
                               const SolverConfig& cfg, PcgneOptions opts = {}) {
  cfg.validate();
  detail::require_same_length(b.size(), A.rows(), "pcgne_solve rhs");
  detail::require_same_length(x0.size(), A.cols(), "pcgne_solve x0");
  if (M.size() != A.rows()) throw DimensionError("pcgne_solve: L must be rows(A) x rows(A)");

  SolverTrace trace;
  detail::EstimatorHost host(cfg, trace, A.frobenius_norm(), norm2(b));
  Vector x(x0.begin(), x0.end());
  Vector r = subtract(b, mat_vec(A, x));
  Vector rh = M.solve_lower(r);
  Vector p = mat_vec_transpose(A, M.solve_upper(rh));
  double rr = dot(rh, rh);
  if (cfg.store_iterates) trace.iterates.push_back(x);

  if (negligible_sq(rr)) trace.status = SolveStatus::converged;
  for (std::size_t k = 0; k < cfg.max_iter && !negligible_sq(rr); ++k) {
    const double pp = dot(p, p);
    if (pp == 0.0) throw BreakdownError("pcgne_solve: p_k = 0 with r_k != 0 (is b in R(A)?)");
    const double gamma = rr / pp;

    IterationRecord rec;
    rec.res_norm = opts.unpreconditioned_residual ? norm2(r) : std::sqrt(rr);
    rec.gamma = gamma;
    rec.delta = gamma * rr;

    axpy(gamma, p, x);
    const Vector Ap = mat_vec(A, p);
    if (opts.unpreconditioned_residual) {
      axpy(-gamma, Ap, r);
      rh = M.solve_lower(r);
    } else {
      axpy(-gamma, M.solve_lower(Ap), rh);
    }
    const double rr_next = dot(rh, rh);

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
    xpay(mat_vec_transpose(A, M.solve_upper(rh)), rr_next / rr, p);
    rr = rr_next;
  }
  trace.x = std::move(x);
  return trace;
}

inline SolverTrace pcgne_solve(const SparseMatrix& A, std::span<const double> b,
                               const SplitPreconditioner& M, const SolverConfig& cfg,
                               PcgneOptions opts = {}) {
  const Vector x0(A.cols(), 0.0);
  return pcgne_solve(A, b, x0, M, cfg, opts);
}

/// CRAIG on L^{-1} A with right-hand side L^{-1} b; x is updated in original coordinates.
inline SolverTrace pcraig_solve(const SparseMatrix& A, std::span<const double> b,
                                const SplitPreconditioner& M, const SolverConfig& cfg) {
  const LeftPreconditioned op(A, M);
  const Vector bh = M.solve_lower(b);
  return craig_solve(op, bh, cfg, A.frobenius_norm(), /*want_y=*/false, norm2(b));
}

} // namespace errest

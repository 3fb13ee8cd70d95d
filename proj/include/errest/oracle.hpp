#pragma once

// Dense ground truth for desk-scale problems: the minimum-norm solution by
// SVD, true error trajectories, ideal delays and estimator audits.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "errest/errors.hpp"
#include "errest/precond.hpp"
#include "errest/sparse_matrix.hpp"
#include "errest/trace.hpp"

namespace errest {

enum class ErrorNorm { energy_AtA, euclidean };

inline constexpr std::size_t kMaxDenseDimension = 2000;

inline Eigen::MatrixXd to_dense(const SparseMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(A.rows()),
                                            static_cast<Eigen::Index>(A.cols()));
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto val = A.values();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) D(i, ci[k]) = val[k];
  }
  return D;
}

inline Vector to_vector(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct MinNormSolution {
  Vector x;
  double r_norm = 0.0; ///< ||b - A x||
  std::size_t rank = 0;
};

/// x = A^+ b by SVD; singular values <= 1e-12 * max(m, n) * sigma_max are dropped.
inline MinNormSolution min_norm_solve(const SparseMatrix& A, std::span<const double> b) {
  detail::require_same_length(b.size(), A.rows(), "min_norm_solve rhs");
  if (std::min(A.rows(), A.cols()) > kMaxDenseDimension) {
    throw std::invalid_argument("min_norm_solve: min(m, n) = " +
                                std::to_string(std::min(A.rows(), A.cols())) +
                                " exceeds the dense limit " + std::to_string(kMaxDenseDimension) +
                                "; subsample the problem");
  }
  const Eigen::MatrixXd D = to_dense(A);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = s.size() == 0 ? 0.0
                                      : 1e-12 * static_cast<double>(std::max(A.rows(), A.cols())) * s(0);
  const Eigen::VectorXd utb = svd.matrixU().transpose() * to_eigen(b);
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(s.size());
  MinNormSolution out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      coef(i) = utb(i) / s(i);
      ++out.rank;
    }
  }
  out.x = to_vector(svd.matrixV() * coef);
  out.r_norm = norm2(subtract(b, mat_vec(A, out.x)));
  return out;
}

/// err(x_k)^2 for every stored iterate: ||A (x - x_k)||^2 or ||x - x_k||^2.
inline std::vector<double> true_error_trajectory(const SolverTrace& trace, std::span<const double> x_true,
                                                 const SparseMatrix& A, ErrorNorm norm) {
  if (trace.iterates.empty()) {
    throw std::invalid_argument("true_error_trajectory: trace has no stored iterates");
  }
  std::vector<double> out;
  out.reserve(trace.iterates.size());
  for (const auto& xk : trace.iterates) {
    const Vector e = subtract(x_true, xk);
    if (norm == ErrorNorm::energy_AtA) {
      const Vector Ae = mat_vec(A, e);
      out.push_back(dot(Ae, Ae));
    } else {
      out.push_back(dot(e, e));
    }
  }
  return out;
}

/// ||x_hat - x_hat_k||^2 with the matrix A L^{-T} formed densely and x_hat = L^T x.
inline std::vector<double> transformed_energy_errors(const SparseMatrix& A, const SplitPreconditioner& M,
                                                     std::span<const double> x_true,
                                                     const std::vector<Vector>& hat_iterates) {
  if (M.size() != A.cols()) throw DimensionError("transformed_energy_errors: L must be n x n");
  const Eigen::MatrixXd L = to_dense(M.factor());
  // A_hat = A L^{-T}  <=>  L A_hat^T = A^T
  const Eigen::MatrixXd Ahat =
      L.triangularView<Eigen::Lower>().solve(to_dense(A).transpose()).transpose();
  const Eigen::VectorXd xhat = L.transpose() * to_eigen(x_true);
  std::vector<double> out;
  out.reserve(hat_iterates.size());
  for (const auto& xk : hat_iterates) out.push_back((Ahat * (xhat - to_eigen(xk))).squaredNorm());
  return out;
}

struct IdealDelay {
  std::size_t delay = 0;
  bool finite = true;
};

/**
 * Minimal d >= 0 with (E_l^2 - E_{l+d+1}^2) / E_l^2 >= 1 - tau. When no such
 * d exists within the trajectory the delay is the remaining length plus one
 * and `finite` is false. A zero error needs no delay.
 */
inline std::vector<IdealDelay> ideal_delay(std::span<const double> true_errors, double tau) {
  if (true_errors.empty()) throw std::invalid_argument("ideal_delay: empty trajectory");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  const std::size_t n = true_errors.size();
  std::vector<IdealDelay> out(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double el = true_errors[l];
    if (el == 0.0) continue;
    out[l] = {n - l, false};
    for (std::size_t j = l + 1; j < n; ++j) {
      if ((el - true_errors[j]) / el >= 1.0 - tau) {
        out[l] = {j - l - 1, true};
        break;
      }
    }
  }
  return out;
}

/**
 * |(E_j^2 - E_{j+1}^2) - Delta_j| / (E_j^2 - E_{j+1}^2) for each increment
 * Delta_j; NaN where the denominator's magnitude is below 1e-300.
 */
inline std::vector<double> hs_relative_error(std::span<const double> true_errors,
                                             std::span<const double> increments) {
  if (true_errors.size() != increments.size() + 1) {
    throw DimensionError("hs_relative_error: need one more error value than increments");
  }
  std::vector<double> out(increments.size());
  for (std::size_t j = 0; j < increments.size(); ++j) {
    const double drop = true_errors[j] - true_errors[j + 1];
    out[j] = std::abs(drop) < 1e-300 ? std::numeric_limits<double>::quiet_NaN()
                                     : std::abs(drop - increments[j]) / std::abs(drop);
  }
  return out;
}

inline constexpr std::size_t kPlateauWindow = 10;
inline constexpr double kPlateauDecrease = 1e-3;

/// First i >= 10 whose error decreased by less than 0.1% relative to i - 10; the length if none.
inline std::size_t detect_plateau(std::span<const double> true_errors) {
  for (std::size_t i = kPlateauWindow; i < true_errors.size(); ++i) {
    const double before = true_errors[i - kPlateauWindow];
    if (before == 0.0 || (before - true_errors[i]) / before < kPlateauDecrease) return i;
  }
  return true_errors.size();
}

struct OracleReport {
  Vector x_true;
  double r_true_norm = 0.0;
  ErrorNorm norm = ErrorNorm::energy_AtA;
  std::vector<double> true_errors;    ///< index j: err(x_j)^2
  std::vector<IdealDelay> ideal_delays;
  std::vector<double> hs_rel_errors;  ///< index j: relative error of Delta_j
  std::size_t plateau_index = 0;
};

inline std::vector<double> trace_deltas(const SolverTrace& trace) {
  std::vector<double> d;
  d.reserve(trace.records.size());
  for (const auto& r : trace.records) d.push_back(r.delta);
  return d;
}

inline OracleReport make_oracle_report(const SparseMatrix& A, std::span<const double> b,
                                       const SolverTrace& trace, ErrorNorm norm, double tau) {
  OracleReport rep;
  auto sol = min_norm_solve(A, b);
  rep.x_true = std::move(sol.x);
  rep.r_true_norm = sol.r_norm;
  rep.norm = norm;
  rep.true_errors = true_error_trajectory(trace, rep.x_true, A, norm);
  rep.ideal_delays = ideal_delay(rep.true_errors, tau);
  if (rep.true_errors.size() == trace.records.size() + 1) {
    rep.hs_rel_errors = hs_relative_error(rep.true_errors, trace_deltas(trace));
  }
  rep.plateau_index = detect_plateau(rep.true_errors);
  return rep;
}

struct EstimateViolation {
  EstimateEvent event;
  double true_error = 0.0;
};

struct EstimateAudit {
  std::size_t checked = 0; ///< events with ell before the plateau
  std::vector<EstimateViolation> lower_bound;
  std::vector<EstimateViolation> accuracy;

  double accuracy_rate() const {
    return checked == 0 ? 1.0
                        : 1.0 - static_cast<double>(accuracy.size()) / static_cast<double>(checked);
  }
};

/**
 * Checks every accepted estimate with ell < plateau against the true error:
 * estimate <= (1 + guard) E_ell^2 and (E_ell^2 - estimate) / E_ell^2 <= tau.
 */
inline EstimateAudit audit_estimates(std::span<const EstimateEvent> events,
                                     std::span<const double> true_errors, std::size_t plateau,
                                     double tau, double guard = 1e-6) {
  EstimateAudit audit;
  for (const auto& ev : events) {
    if (ev.ell >= plateau || ev.ell >= true_errors.size()) continue;
    ++audit.checked;
    const double e = true_errors[ev.ell];
    if (ev.estimate > (1.0 + guard) * e) audit.lower_bound.push_back({ev, e});
    if (e > 0.0 ? (e - ev.estimate) / e > tau : ev.estimate != 0.0) audit.accuracy.push_back({ev, e});
  }
  return audit;
}

} // namespace errest

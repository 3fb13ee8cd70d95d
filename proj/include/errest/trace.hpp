#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "errest/estimate.hpp"
#include "errest/vector_ops.hpp"

namespace errest {

struct SolverConfig {
  std::size_t max_iter = 1000;
  double tau = 0.25;
  double tol_est = 1e-4;
  double stop_alpha = 0.0;
  double stop_beta = 0.0;
  bool record_local_orthogonality = false;
  /// Keep every iterate (and auxiliary vectors) in the trace for offline checks.
  bool store_iterates = false;
  /// Relative size below which a Golub-Kahan normalization coefficient is zero.
  double breakdown_tol = 64.0 * std::numeric_limits<double>::epsilon();

  void validate() const {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
    if (!(tol_est > 0.0)) throw std::invalid_argument("tol_est must be positive");
    if (stop_alpha < 0.0 || stop_beta < 0.0) {
      throw std::invalid_argument("stopping tolerances must be nonnegative");
    }
  }

  EstimatorParams estimator() const { return {tau, tol_est}; }
};

enum class SolveStatus {
  max_iterations,     ///< ran out of iterations
  converged,          ///< zero residual or lucky breakdown: iterate is exact
  stopping_criterion, ///< error estimate met the alpha/beta criterion
};

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::max_iterations: return "max_iterations";
  case SolveStatus::converged: return "converged";
  case SolveStatus::stopping_criterion: return "stopping_criterion";
  }
  return "unknown";
}

constexpr double kNotRecorded = std::numeric_limits<double>::quiet_NaN();

/**
 * One record per pushed increment. Record j describes iterate x_j and holds
 * Delta_j, the solver's computable approximation of err(j)^2 - err(j+1)^2.
 * Scalars that a solver does not produce stay NaN.
 */
struct IterationRecord {
  std::size_t k = 0;
  double res_norm = kNotRecorded; ///< ||r_j|| (||L^{-1} r_j|| for PCGNE)
  double delta = kNotRecorded;    ///< Delta_j after clamping
  double local_orth = kNotRecorded;

  double gamma = kNotRecorded;  // CG/CGLS/CGNE step length gamma_j
  double alpha = kNotRecorded;  // Golub-Kahan alpha_{j+1}
  double beta = kNotRecorded;   // Golub-Kahan beta_{j+1}
  double rho = kNotRecorded;    // LSQR rho_{j+1}
  double theta = kNotRecorded;  // LSQR theta_{j+2}
  double phi = kNotRecorded;    // LSQR phi_{j+1}
  double zeta = kNotRecorded;   // CRAIG zeta_{j+1}
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  std::vector<EstimateEvent> events;
  /// x_0 ... x_N in original coordinates (only with store_iterates).
  std::vector<Vector> iterates;
  /// Transformed iterates hat{x}_j of PLSQR (only with store_iterates).
  std::vector<Vector> hat_iterates;
  /// LSQR: v_{j+2}, the vector in A^T r_{j+1} = -theta phi v (store_iterates).
  std::vector<Vector> v_next;
  /// CRAIG: y_j with x_j = A^T y_j (only when requested).
  std::vector<Vector> y_iterates;

  Vector x;
  SolveStatus status = SolveStatus::max_iterations;
  std::size_t clamped_deltas = 0;

  std::size_t iterations() const noexcept { return records.size(); }
};

namespace detail {

// Owns the DeltaBuffer of one solve and applies the stopping criterion.
class EstimatorHost {
public:
  EstimatorHost(const SolverConfig& cfg, SolverTrace& trace, double normA, double norm_b)
      : cfg_(cfg), trace_(trace), buffer_(cfg.estimator()), normA_(normA), norm_b_(norm_b) {}

  /// Pushes the record's delta; true when the stopping criterion fired.
  /// `x_norm` yields ||x_current|| and is only called when an estimate is accepted.
  template <class XNorm>
  bool push(IterationRecord rec, XNorm&& x_norm) {
    rec.k = trace_.records.size();
    auto events = buffer_.push(rec.k, rec.delta);
    rec.delta = buffer_.deltas().back();
    trace_.records.push_back(rec);
    trace_.events.insert(trace_.events.end(), events.begin(), events.end());
    trace_.clamped_deltas = buffer_.clamped_count();
    if (events.empty()) return false;
    return check_stopping(events.back().estimate, normA_, x_norm(), norm_b_,
                          cfg_.stop_alpha, cfg_.stop_beta);
  }

  void flush() {
    auto events = buffer_.flush();
    trace_.events.insert(trace_.events.end(), events.begin(), events.end());
  }

  const DeltaBuffer& buffer() const noexcept { return buffer_; }

private:
  const SolverConfig& cfg_;
  SolverTrace& trace_;
  DeltaBuffer buffer_;
  double normA_;
  double norm_b_;
};

} // namespace detail

} // namespace errest

#pragma once

// Adaptive error estimation from telescoped Hestenes-Stiefel increments.
//
// A solver pushes one nonnegative increment Delta_k per iteration, where
// Delta_k approximates err(k)^2 - err(k+1)^2 for the norm it minimizes. The
// sum Delta_{l:k} = Delta_l + ... + Delta_k is then a lower bound on err(l)^2,
// and the adaptive rule below decides how far back l may lag behind k so that
// the bound is accurate to a relative tolerance tau.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "errest/errors.hpp"

namespace errest {

struct EstimatorParams {
  double tau = 0.25;
  double tol = 1e-4;
};

struct EstimateEvent {
  std::size_t ell = 0;     ///< iteration whose error is estimated
  std::size_t k = 0;       ///< iteration at which the estimate was accepted
  double estimate = 0.0;   ///< Delta_{ell:k}
  std::size_t delay() const noexcept { return k - ell; }

  friend bool operator==(const EstimateEvent&, const EstimateEvent&) = default;
};

class DeltaBuffer {
public:
  explicit DeltaBuffer(EstimatorParams params = {}) : params_(params) {
    if (!(params.tau > 0.0 && params.tau < 1.0)) {
      throw std::invalid_argument("tau must lie in (0, 1)");
    }
    if (!(params.tol > 0.0)) throw std::invalid_argument("TOL must be positive");
  }

  /**
   * Appends Delta_k and runs the adaptive delay rule:
   *   m = largest j < k with Delta_{ell:k} / Delta_{j:k} <= TOL (else 0),
   *   S = max_{m <= j < k} Delta_{j:k} / Delta_j,
   *   while ell < k and S * Delta_k / Delta_{ell:k-1} <= tau:
   *     accept Delta_{ell:k} for iteration ell; ++ell.
   * A ratio with a zero denominator counts as +inf, so it never passes a test.
   * Returns the events accepted by this push.
   */
  std::vector<EstimateEvent> push(std::size_t k, double delta) {
    if (closed_) throw std::logic_error("DeltaBuffer: push after flush");
    if (k != deltas_.size()) {
      throw std::invalid_argument("DeltaBuffer: expected iteration " +
                                  std::to_string(deltas_.size()) + ", got " + std::to_string(k));
    }
    if (!std::isfinite(delta)) throw NumericError("DeltaBuffer: non-finite increment");
    if (delta < 0.0) {
      delta = 0.0;
      ++clamped_;
    }

    // Delta_{j:k-1} for j >= ell, needed by the loop guard after the update.
    lagged_.assign(suffix_.begin() + static_cast<std::ptrdiff_t>(ell_), suffix_.end());

    deltas_.push_back(delta);
    for (double& s : suffix_) s += delta;
    suffix_.push_back(delta);

    std::vector<EstimateEvent> events;
    if (k == 0) return events;

    const double sum_ell = suffix_[ell_];
    std::size_t m = 0;
    for (std::size_t j = k; j-- > 0;) {
      if (ratio(sum_ell, suffix_[j]) <= params_.tol) {
        m = j;
        break;
      }
    }
    double S = 0.0;
    for (std::size_t j = m; j < k; ++j) S = std::max(S, ratio(suffix_[j], deltas_[j]));

    while (ell_ < k) {
      const double lagged = lagged_[ell_ - (k - lagged_.size())];
      if (std::isinf(S) || lagged == 0.0) break;
      if (!(S * delta / lagged <= params_.tau)) break;
      events.push_back({ell_, k, suffix_[ell_]});
      ++ell_;
    }
    accepted_.insert(accepted_.end(), events.begin(), events.end());
    return events;
  }

  /**
   * Accepts Delta_{ell:k} for every pending ell, with k the last pushed
   * iteration. Only valid when the solver has reached the exact solution, so
   * that err(k+1) = 0 and the telescoped sums are exact. Closes the buffer.
   */
  std::vector<EstimateEvent> flush() {
    std::vector<EstimateEvent> events;
    if (!deltas_.empty()) {
      const std::size_t k = deltas_.size() - 1;
      for (; ell_ <= k; ++ell_) events.push_back({ell_, k, suffix_[ell_]});
    }
    closed_ = true;
    accepted_.insert(accepted_.end(), events.begin(), events.end());
    return events;
  }

  /// Delta_{ell:k} by sequential summation.
  double lower_bound(std::size_t ell, std::size_t k) const {
    if (ell > k || k >= deltas_.size()) {
      throw std::out_of_range("lower_bound: need ell <= k < " + std::to_string(deltas_.size()));
    }
    double s = 0.0;
    for (std::size_t j = ell; j <= k; ++j) s += deltas_[j];
    return s;
  }

  std::size_t ell() const noexcept { return ell_; }
  std::size_t size() const noexcept { return deltas_.size(); }
  std::size_t clamped_count() const noexcept { return clamped_; }
  const EstimatorParams& params() const noexcept { return params_; }
  const std::vector<double>& deltas() const noexcept { return deltas_; }
  const std::vector<EstimateEvent>& accepted() const noexcept { return accepted_; }

private:
  static double ratio(double num, double den) {
    return den == 0.0 ? std::numeric_limits<double>::infinity() : num / den;
  }

  EstimatorParams params_;
  std::vector<double> deltas_;
  std::vector<double> suffix_; // suffix_[j] = Delta_{j:k}, k = last pushed
  std::vector<double> lagged_;
  std::vector<EstimateEvent> accepted_;
  std::size_t ell_ = 0;
  std::size_t clamped_ = 0;
  bool closed_ = false;
};

inline std::vector<EstimateEvent> push_delta(DeltaBuffer& buf, std::size_t k, double delta) {
  return buf.push(k, delta);
}

inline double lower_bound(const DeltaBuffer& buf, std::size_t ell, std::size_t k) {
  return buf.lower_bound(ell, k);
}

/// Delta_{ell:k} / (1 - tau) bounds err(ell)^2 from above when the estimate
/// meets its relative tolerance.
inline double upper_bound(double estimate, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  return estimate / (1.0 - tau);
}

/**
 * estimate <= alpha*||A||*||x_k|| + beta*||b||. The left side is a squared
 * error norm and the right side is not; alpha and beta are scaled by the
 * caller with that in mind.
 */
inline bool check_stopping(double estimate, double normA, double norm_xk, double norm_b,
                           double alpha, double beta) {
  return estimate <= alpha * normA * norm_xk + beta * norm_b;
}

} // namespace errest

#pragma once

// Split preconditioners L for the Gram matrices A^T A (least squares) and
// A A^T (least norm), exposed as the operator pair (L^{-1} y, L^{-T} y).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "errest/errors.hpp"
#include "errest/sparse_matrix.hpp"

namespace errest {

enum class PrecondKind { identity, jacobi, ic0 };

/// gram_cols: L L^T ~ A^T A (n x n). gram_rows: L L^T ~ A A^T (m x m).
enum class GramSide { gram_cols, gram_rows };

inline std::string_view to_string(PrecondKind k) {
  switch (k) {
  case PrecondKind::identity: return "identity";
  case PrecondKind::jacobi: return "jacobi";
  case PrecondKind::ic0: return "ic0";
  }
  return "unknown";
}

class SplitPreconditioner {
public:
  /// `L` must be lower triangular with a strictly positive diagonal stored last in each row.
  SplitPreconditioner(SparseMatrix L, PrecondKind kind, GramSide side, double shift = 0.0)
      : L_(std::move(L)), kind_(kind), side_(side), shift_(shift) {
    if (L_.rows() != L_.cols()) throw DimensionError("preconditioner factor must be square");
    const auto rp = L_.row_ptr();
    const auto ci = L_.col_idx();
    const auto val = L_.values();
    for (std::size_t i = 0; i < L_.rows(); ++i) {
      if (rp[i] == rp[i + 1] || ci[rp[i + 1] - 1] != i) {
        throw std::invalid_argument("preconditioner factor must be lower triangular with a "
                                    "stored diagonal (row " + std::to_string(i) + ")");
      }
      if (!(val[rp[i + 1] - 1] > 0.0)) {
        throw std::invalid_argument("preconditioner diagonal must be positive (row " +
                                    std::to_string(i) + ")");
      }
    }
  }

  static SplitPreconditioner identity(std::size_t n, GramSide side) {
    return SplitPreconditioner(SparseMatrix::identity(n), PrecondKind::identity, side);
  }

  std::size_t size() const noexcept { return L_.rows(); }
  const SparseMatrix& factor() const noexcept { return L_; }
  PrecondKind kind() const noexcept { return kind_; }
  GramSide side() const noexcept { return side_; }
  /// Diagonal shift that made the incomplete factorization succeed (0 if none).
  double shift() const noexcept { return shift_; }

  /// z = L^{-1} y (forward substitution).
  Vector solve_lower(std::span<const double> y) const {
    detail::require_same_length(y.size(), size(), "solve_lower");
    const auto rp = L_.row_ptr();
    const auto ci = L_.col_idx();
    const auto val = L_.values();
    Vector z(y.begin(), y.end());
    for (std::size_t i = 0; i < size(); ++i) {
      const std::size_t diag = rp[i + 1] - 1;
      double s = z[i];
      for (std::size_t k = rp[i]; k < diag; ++k) s -= val[k] * z[ci[k]];
      z[i] = s / val[diag];
    }
    return z;
  }

  /// z = L^{-T} y (backward substitution, column sweep over the rows of L).
  Vector solve_upper(std::span<const double> y) const {
    detail::require_same_length(y.size(), size(), "solve_upper");
    const auto rp = L_.row_ptr();
    const auto ci = L_.col_idx();
    const auto val = L_.values();
    Vector z(y.begin(), y.end());
    for (std::size_t i = size(); i-- > 0;) {
      const std::size_t diag = rp[i + 1] - 1;
      z[i] /= val[diag];
      for (std::size_t k = rp[i]; k < diag; ++k) z[ci[k]] -= val[k] * z[i];
    }
    return z;
  }

private:
  SparseMatrix L_;
  PrecondKind kind_;
  GramSide side_;
  double shift_;
};

inline std::size_t gram_dimension(const SparseMatrix& A, GramSide side) {
  return side == GramSide::gram_cols ? A.cols() : A.rows();
}

/// L = diag(sqrt(d)), d the diagonal of A^T A or A A^T, without forming the Gram matrix.
inline SplitPreconditioner build_jacobi(const SparseMatrix& A, GramSide side) {
  const Vector d = side == GramSide::gram_cols ? A.column_norms_sq() : A.row_norms_sq();
  Vector diag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) {
      throw std::invalid_argument(std::string("build_jacobi: ") +
                                  (side == GramSide::gram_cols ? "column " : "row ") +
                                  std::to_string(i) + " of A is zero");
    }
    diag[i] = std::sqrt(d[i]);
  }
  return SplitPreconditioner(SparseMatrix::diagonal(diag), PrecondKind::jacobi, side);
}

/// Lower triangle (diagonal included) of A^T A or A A^T.
inline SparseMatrix gram_lower(const SparseMatrix& A, GramSide side) {
  const SparseMatrix B = side == GramSide::gram_cols ? A : A.transpose();
  // Gram = B^T B = sum over rows of B of outer products.
  const auto rp = B.row_ptr();
  const auto ci = B.col_idx();
  const auto val = B.values();
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < B.rows(); ++i) {
    for (std::size_t a = rp[i]; a < rp[i + 1]; ++a) {
      for (std::size_t c = rp[i]; c <= a; ++c) t.push_back({ci[a], ci[c], val[a] * val[c]});
    }
  }
  return SparseMatrix::from_triplets(B.cols(), B.cols(), std::move(t));
}

namespace detail {

// Zero-fill incomplete Cholesky on the pattern of G (lower triangle, sorted
// rows, diagonal last). Returns false on a nonpositive pivot.
inline bool ic0_factor(const SparseMatrix& G, double shift, std::vector<double>& out) {
  const auto rp = G.row_ptr();
  const auto ci = G.col_idx();
  const auto gv = G.values();
  out.assign(gv.begin(), gv.end());
  for (std::size_t i = 0; i < G.rows(); ++i) {
    const std::size_t diag_i = rp[i + 1] - 1;
    for (std::size_t a = rp[i]; a < diag_i; ++a) {
      const std::size_t j = ci[a];
      const std::size_t diag_j = rp[j + 1] - 1;
      // sum_{k<j} L_ik L_jk over the shared pattern
      double s = out[a];
      std::size_t p = rp[i], q = rp[j];
      while (p < a && q < diag_j) {
        if (ci[p] == ci[q]) {
          s -= out[p] * out[q];
          ++p;
          ++q;
        } else if (ci[p] < ci[q]) {
          ++p;
        } else {
          ++q;
        }
      }
      out[a] = s / out[diag_j];
    }
    double d = out[diag_i] + shift;
    for (std::size_t a = rp[i]; a < diag_i; ++a) d -= out[a] * out[a];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    out[diag_i] = std::sqrt(d);
  }
  return true;
}

} // namespace detail

inline constexpr std::size_t kMaxExplicitGram = 5000;

/**
 * IC(0) of the explicitly formed Gram matrix. On a nonpositive pivot the
 * factorization is retried on G + sigma I with sigma = 1e-3 * max diag(G),
 * then 2 sigma, 4 sigma, 8 sigma; the shift used is kept in the result.
 */
inline SplitPreconditioner build_ic0(const SparseMatrix& A, GramSide side) {
  const std::size_t n = gram_dimension(A, side);
  if (n > kMaxExplicitGram) {
    throw std::invalid_argument("build_ic0: Gram dimension " + std::to_string(n) +
                                " exceeds the explicit-formation limit " +
                                std::to_string(kMaxExplicitGram));
  }
  const SparseMatrix G = gram_lower(A, side);
  const auto rp = G.row_ptr();
  const auto ci = G.col_idx();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rp[i] == rp[i + 1] || ci[rp[i + 1] - 1] != i) {
      throw std::invalid_argument("build_ic0: zero " +
                                  std::string(side == GramSide::gram_cols ? "column " : "row ") +
                                  std::to_string(i) + " in A");
    }
    max_diag = std::max(max_diag, G.values()[rp[i + 1] - 1]);
  }

  std::vector<double> values;
  const double sigma = 1e-3 * max_diag;
  const double shifts[] = {0.0, sigma, 2.0 * sigma, 4.0 * sigma, 8.0 * sigma};
  for (double shift : shifts) {
    if (detail::ic0_factor(G, shift, values)) {
      SparseMatrix L(n, n, std::vector<std::size_t>(rp.begin(), rp.end()),
                     std::vector<std::size_t>(ci.begin(), ci.end()), std::move(values));
      return SplitPreconditioner(std::move(L), PrecondKind::ic0, side, shift);
    }
  }
  throw std::runtime_error("build_ic0: incomplete Cholesky broke down after 3 shift doublings; "
                           "use the jacobi preconditioner instead");
}

inline SplitPreconditioner build_preconditioner(const SparseMatrix& A, PrecondKind kind,
                                                GramSide side) {
  switch (kind) {
  case PrecondKind::identity: return SplitPreconditioner::identity(gram_dimension(A, side), side);
  case PrecondKind::jacobi: return build_jacobi(A, side);
  case PrecondKind::ic0: return build_ic0(A, side);
  }
  throw std::invalid_argument("unknown preconditioner kind");
}

} // namespace errest

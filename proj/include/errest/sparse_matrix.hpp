#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errest/errors.hpp"
#include "errest/vector_ops.hpp"

namespace errest {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/**
 * Immutable compressed sparse row matrix.
 *
 * Invariants checked at construction: row_ptr has rows+1 nondecreasing
 * offsets ending at nnz, column indices are in range and strictly increasing
 * within each row, and every stored value is finite.
 */
class SparseMatrix {
public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values)
      : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
        values_(std::move(values)) {
    validate();
  }

  /// Builds from unordered triplets; duplicates are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries) {
    for (const auto& t : entries) {
      if (t.row >= rows || t.col >= cols) {
        throw DimensionError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                             ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
      }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& t = entries[i];
      if (i > 0 && entries[i - 1].row == t.row && entries[i - 1].col == t.col) {
        values.back() += t.value;
        continue;
      }
      col_idx.push_back(t.col);
      values.push_back(t.value);
      ++row_ptr[t.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) row_ptr[r + 1] += row_ptr[r];
    return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1);
    std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
    std::vector<std::size_t> col_idx(n);
    std::iota(col_idx.begin(), col_idx.end(), std::size_t{0});
    return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
  }

  static SparseMatrix diagonal(std::span<const double> d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
    return from_triplets(d.size(), d.size(), std::move(t));
  }

  /// Dense row-major input; exact zeros are not stored.
  static SparseMatrix from_dense(std::size_t rows, std::size_t cols,
                                 std::span<const double> row_major) {
    detail::require_same_length(row_major.size(), rows * cols, "from_dense");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        double v = row_major[i * cols + j];
        if (v != 0.0) t.push_back({i, j, v});
      }
    }
    return from_triplets(rows, cols, std::move(t));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }

  /// Diagonal of A^T A.
  Vector column_norms_sq() const {
    Vector d(cols_, 0.0);
    for (std::size_t k = 0; k < values_.size(); ++k) d[col_idx_[k]] += values_[k] * values_[k];
    return d;
  }

  /// Diagonal of A A^T.
  Vector row_norms_sq() const {
    Vector d(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d[i] += values_[k] * values_[k];
    }
    return d;
  }

  SparseMatrix transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        t.push_back({col_idx_[k], i, values_[k]});
      }
    }
    return from_triplets(cols_, rows_, std::move(t));
  }

  std::vector<Triplet> to_triplets() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        t.push_back({i, col_idx_[k], values_[k]});
      }
    }
    return t;
  }

  Vector apply(std::span<const double> v) const;
  Vector apply_transpose(std::span<const double> u) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
  void validate() const {
    if (row_ptr_.size() != rows_ + 1) throw DimensionError("row_ptr must have rows+1 entries");
    if (row_ptr_.front() != 0 || row_ptr_.back() != values_.size() ||
        col_idx_.size() != values_.size()) {
      throw DimensionError("row_ptr does not match nnz");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1]) throw DimensionError("row_ptr must be nondecreasing");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (col_idx_[k] >= cols_) {
          throw DimensionError("column index out of range in row " + std::to_string(i));
        }
        if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
          throw DimensionError("column indices not strictly increasing in row " +
                               std::to_string(i));
        }
      }
    }
    if (!all_finite(values_)) throw NumericError("matrix contains a non-finite value");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// y = A v, accumulated left to right within each row.
inline Vector mat_vec(const SparseMatrix& A, std::span<const double> v) {
  if (v.size() != A.cols()) {
    throw DimensionError("mat_vec: vector has length " + std::to_string(v.size()) +
                         ", matrix has " + std::to_string(A.cols()) + " columns");
  }
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto val = A.values();
  Vector y(A.rows(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += val[k] * v[ci[k]];
    y[i] = s;
  }
  if (!all_finite(y)) throw NumericError("mat_vec: non-finite result (overflow)");
  return y;
}

/// z = A^T u by a scatter pass over the rows of A.
inline Vector mat_vec_transpose(const SparseMatrix& A, std::span<const double> u) {
  if (u.size() != A.rows()) {
    throw DimensionError("mat_vec_transpose: vector has length " + std::to_string(u.size()) +
                         ", matrix has " + std::to_string(A.rows()) + " rows");
  }
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto val = A.values();
  Vector z(A.cols(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double ui = u[i];
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) z[ci[k]] += val[k] * ui;
  }
  if (!all_finite(z)) throw NumericError("mat_vec_transpose: non-finite result (overflow)");
  return z;
}

inline Vector SparseMatrix::apply(std::span<const double> v) const { return mat_vec(*this, v); }

inline Vector SparseMatrix::apply_transpose(std::span<const double> u) const {
  return mat_vec_transpose(*this, u);
}

} // namespace errest

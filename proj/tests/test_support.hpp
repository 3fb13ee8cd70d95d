#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errest/rng.hpp"
#include "errest/sparse_matrix.hpp"

namespace errest::test {

using Dense = std::vector<std::vector<double>>;

// Random m x n matrix, each entry present with probability `density`.
inline SparseMatrix random_sparse(std::size_t m, std::size_t n, double density, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() < density) t.push_back({i, j, rng.normal()});
    }
  }
  return SparseMatrix::from_triplets(m, n, std::move(t));
}

inline SparseMatrix random_dense(std::size_t m, std::size_t n, std::uint64_t seed) {
  return random_sparse(m, n, 2.0, seed);
}

inline Dense to_rows(const SparseMatrix& A) {
  Dense D(A.rows(), std::vector<double>(A.cols(), 0.0));
  for (const auto& t : A.to_triplets()) D[t.row][t.col] = t.value;
  return D;
}

inline SparseMatrix from_rows(const Dense& D) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < D.size(); ++i) {
    for (std::size_t j = 0; j < D[i].size(); ++j) {
      if (D[i][j] != 0.0) t.push_back({i, j, D[i][j]});
    }
  }
  return SparseMatrix::from_triplets(D.size(), D.empty() ? 0 : D[0].size(), std::move(t));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

} // namespace errest::test

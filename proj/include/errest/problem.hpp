#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "errest/rng.hpp"
#include "errest/sparse_matrix.hpp"

namespace errest {

enum class ProblemKind { least_squares, least_norm };

inline std::string_view to_string(ProblemKind k) {
  return k == ProblemKind::least_squares ? "least_squares" : "least_norm";
}

struct ProblemInstance {
  SparseMatrix matrix;
  Vector rhs;
  ProblemKind kind = ProblemKind::least_squares;
  std::uint64_t seed = 0;
  /// The generating solution (only meaningful for generated right-hand sides).
  Vector x_gen;
};

/// ones(n); every 2nd entry (1-based) set to -2, then every 5th set to 0.
inline Vector generating_solution(std::size_t n) {
  Vector x(n, 1.0);
  for (std::size_t i = 2; i <= n; i += 2) x[i - 1] = -2.0;
  for (std::size_t i = 5; i <= n; i += 5) x[i - 1] = 0.0;
  return x;
}

/**
 * Least-norm right-hand side b = A x_gen. For least squares the consistent
 * part is perturbed by g * ||b||, g a standard normal vector drawn from `seed`.
 */
inline ProblemInstance generate_rhs(const SparseMatrix& A, ProblemKind kind, std::uint64_t seed) {
  if (A.rows() == 0 || A.cols() == 0) throw DimensionError("generate_rhs: empty matrix");
  ProblemInstance p;
  p.matrix = A;
  p.kind = kind;
  p.seed = seed;
  p.x_gen = generating_solution(A.cols());
  p.rhs = mat_vec(A, p.x_gen);
  if (kind == ProblemKind::least_squares) {
    const double nb = norm2(p.rhs);
    CounterRng rng(seed);
    const Vector g = rng.normal_vector(A.rows());
    for (std::size_t i = 0; i < p.rhs.size(); ++i) p.rhs[i] += g[i] * nb;
  }
  return p;
}

} // namespace errest

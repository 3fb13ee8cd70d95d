#pragma once

#include <concepts>
#include <cstddef>
#include <span>

#include "errest/sparse_matrix.hpp"

namespace errest {

/// Anything that can form y = A v and z = A^T u without exposing its entries.
template <class Op>
concept LinearOperator = requires(const Op& op, std::span<const double> v) {
  { op.rows() } -> std::convertible_to<std::size_t>;
  { op.cols() } -> std::convertible_to<std::size_t>;
  { op.apply(v) } -> std::same_as<Vector>;
  { op.apply_transpose(v) } -> std::same_as<Vector>;
};

static_assert(LinearOperator<SparseMatrix>);

} // namespace errest

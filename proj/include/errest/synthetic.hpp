#pragma once

// Synthetic test matrices, addressed by a short text spec:
//   identity:N
//   diag:d1,d2,...
//   svd:m,n,cond,seed          U diag(sigma) V^T, sigma geometric from 1 down to 1/cond
//   sparse:m,n,nnz,spread,seed random sparse N(0,1) entries, column j scaled by spread^{-j/(n-1)}
//   survey:m,points,control,scaled,seed
//                              linearized 2-D surveying network (distances and angles)

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "errest/rng.hpp"
#include "errest/sparse_matrix.hpp"

namespace errest {

namespace detail {

// Matrix generators draw from a stream disjoint from generate_rhs with the
// same seed; otherwise the noise vector of svd:...,s with rhs seed s is the
// first column of U and the least-squares problem becomes consistent.
inline CounterRng matrix_stream(std::uint64_t seed) {
  return CounterRng(CounterRng::mix(seed ^ 0x6d61747269785f31ULL));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.emplace_back(s.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_real(const std::string& tok, std::string_view spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != tok.size() || !std::isfinite(v)) {
    throw std::invalid_argument("synthetic spec '" + std::string(spec) + "': bad number '" + tok + "'");
  }
  return v;
}

inline std::uint64_t parse_count(const std::string& tok, std::string_view spec) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("synthetic spec '" + std::string(spec) + "': bad integer '" + tok + "'");
  }
  return std::stoull(tok);
}

// Q factor of an m x p Gaussian matrix, columns signed so that diag(R) > 0.
inline Eigen::MatrixXd random_orthonormal(std::size_t m, std::size_t p, CounterRng& rng) {
  Eigen::MatrixXd G(m, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < m; ++i) G(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, p);
  const Eigen::MatrixXd R = qr.matrixQR();
  for (std::size_t j = 0; j < p; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

} // namespace detail

/// m x n matrix with singular values 1 = sigma_1 > ... > sigma_p = 1/cond, p = min(m, n).
inline SparseMatrix make_svd_matrix(std::size_t m, std::size_t n, double cond, std::uint64_t seed) {
  if (m == 0 || n == 0) throw DimensionError("svd: empty shape");
  if (!(cond >= 1.0)) throw std::invalid_argument("svd: cond must be >= 1");
  const std::size_t p = std::min(m, n);
  CounterRng rng = detail::matrix_stream(seed);
  const Eigen::MatrixXd U = detail::random_orthonormal(m, p, rng);
  const Eigen::MatrixXd V = detail::random_orthonormal(n, p, rng);
  Eigen::VectorXd sigma(p);
  for (std::size_t i = 0; i < p; ++i) {
    sigma(i) = p == 1 ? 1.0 : std::pow(cond, -static_cast<double>(i) / static_cast<double>(p - 1));
  }
  const Eigen::MatrixXd A = U * sigma.asDiagonal() * V.transpose();
  std::vector<double> dense(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = A(i, j);
  }
  return SparseMatrix::from_dense(m, n, dense);
}

/**
 * Random sparse m x n matrix: one entry per column at a random row, then
 * about `nnz_per_row` entries per row at random columns (duplicates summed),
 * all N(0,1). Column j is scaled by spread^{-j/(n-1)}, which sets the
 * conditioning.
 */
inline SparseMatrix make_sparse_matrix(std::size_t m, std::size_t n, double nnz_per_row,
                                       double spread, std::uint64_t seed) {
  if (m == 0 || n == 0) throw DimensionError("sparse: empty shape");
  if (!(nnz_per_row >= 0.0) || !(spread >= 1.0)) {
    throw std::invalid_argument("sparse: need nnz_per_row >= 0 and spread >= 1");
  }
  CounterRng rng = detail::matrix_stream(seed);
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < n; ++j) t.push_back({rng.next() % m, j, rng.normal()});
  const auto whole = static_cast<std::size_t>(nnz_per_row);
  const double frac = nnz_per_row - static_cast<double>(whole);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t count = whole + (rng.uniform() <= frac ? 1 : 0);
    for (std::size_t c = 0; c < count; ++c) t.push_back({i, rng.next() % n, rng.normal()});
  }
  for (auto& e : t) {
    const double u = n == 1 ? 0.0 : static_cast<double>(e.col) / static_cast<double>(n - 1);
    e.value *= std::pow(spread, -u);
  }
  return SparseMatrix::from_triplets(m, n, std::move(t));
}

inline constexpr double kSurveyAngleFraction = 0.3;
inline constexpr std::size_t kSurveyNeighbours = 6;

/**
 * Observation equations of a planar surveying network: `points` stations at
 * uniform random positions in the unit square, unknowns (x_i, y_i) in column
 * pairs. The first `control` stations get direct coordinate observations,
 * then rows are drawn until there are m: with probability 0.3 an angle at a
 * random station between two of its six nearest neighbours (six entries),
 * otherwise a distance to one neighbour (four entries, unit direction).
 * Unscaled angles are in radians, so their rows carry 1/distance
 * magnitudes; `scaled` multiplies them by the mean leg length.
 */
inline SparseMatrix make_survey_matrix(std::size_t m, std::size_t points, std::size_t control,
                                       bool scaled, std::uint64_t seed) {
  if (points <= kSurveyNeighbours) throw std::invalid_argument("survey: need more than 6 points");
  if (control > points || 2 * control > m) {
    throw std::invalid_argument("survey: too many control points for the row count");
  }
  CounterRng rng(seed);
  std::vector<std::array<double, 2>> P(points);
  for (auto& p : P) p = {rng.uniform(), rng.uniform()};

  auto dist = [&](std::size_t a, std::size_t b) { return std::hypot(P[b][0] - P[a][0], P[b][1] - P[a][1]); };
  std::vector<std::array<std::size_t, kSurveyNeighbours>> nbr(points);
  std::vector<std::size_t> others(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    std::iota(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(i), std::size_t{0});
    std::iota(others.begin() + static_cast<std::ptrdiff_t>(i), others.end(), i + 1);
    std::partial_sort(others.begin(), others.begin() + kSurveyNeighbours, others.end(),
                      [&](std::size_t a, std::size_t b) { return dist(i, a) < dist(i, b); });
    std::copy_n(others.begin(), kSurveyNeighbours, nbr[i].begin());
  }

  std::vector<Triplet> t;
  std::size_t row = 0;
  for (; row < 2 * control; ++row) t.push_back({row, row, 1.0});
  // gradient of the bearing a -> b with respect to station a
  auto bearing_grad = [&](std::size_t a, std::size_t b) {
    const double dx = P[b][0] - P[a][0], dy = P[b][1] - P[a][1];
    const double r2 = dx * dx + dy * dy;
    return std::array<double, 2>{dy / r2, -dx / r2};
  };
  for (; row < m; ++row) {
    const std::size_t i = rng.next() % points;
    const std::size_t j = nbr[i][rng.next() % kSurveyNeighbours];
    if (rng.uniform() < kSurveyAngleFraction) {
      std::size_t k = nbr[i][rng.next() % (kSurveyNeighbours - 1)];
      if (k == j) k = nbr[i][kSurveyNeighbours - 1];
      const auto gj = bearing_grad(i, j);
      const auto gk = bearing_grad(i, k);
      const double s = scaled ? 0.5 * (dist(i, j) + dist(i, k)) : 1.0;
      for (std::size_t c = 0; c < 2; ++c) {
        t.push_back({row, 2 * i + c, s * (gk[c] - gj[c])});
        t.push_back({row, 2 * j + c, s * gj[c]});
        t.push_back({row, 2 * k + c, -s * gk[c]});
      }
    } else {
      const double d = dist(i, j);
      for (std::size_t c = 0; c < 2; ++c) {
        const double u = (P[j][c] - P[i][c]) / d;
        t.push_back({row, 2 * i + c, -u});
        t.push_back({row, 2 * j + c, u});
      }
    }
  }
  return SparseMatrix::from_triplets(m, 2 * points, std::move(t));
}

/// Builds the matrix named by a synthetic spec (see the grammar at the top of this file).
inline SparseMatrix make_synthetic(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("synthetic spec '" + std::string(spec) + "': expected kind:args");
  }
  const std::string_view kind = spec.substr(0, colon);
  const auto args = detail::split_list(spec.substr(colon + 1));
  auto need = [&](std::size_t count) {
    if (args.size() != count) {
      throw std::invalid_argument("synthetic spec '" + std::string(spec) + "': expected " +
                                  std::to_string(count) + " arguments");
    }
  };

  if (kind == "identity") {
    need(1);
    const auto n = detail::parse_count(args[0], spec);
    if (n == 0) throw std::invalid_argument("identity: N must be positive");
    return SparseMatrix::identity(n);
  }
  if (kind == "diag") {
    std::vector<double> d;
    for (const auto& a : args) d.push_back(detail::parse_real(a, spec));
    return SparseMatrix::diagonal(d);
  }
  if (kind == "svd") {
    need(4);
    return make_svd_matrix(detail::parse_count(args[0], spec), detail::parse_count(args[1], spec),
                           detail::parse_real(args[2], spec), detail::parse_count(args[3], spec));
  }
  if (kind == "sparse") {
    need(5);
    return make_sparse_matrix(detail::parse_count(args[0], spec), detail::parse_count(args[1], spec),
                              detail::parse_real(args[2], spec), detail::parse_real(args[3], spec),
                              detail::parse_count(args[4], spec));
  }
  if (kind == "survey") {
    need(5);
    const auto flag = detail::parse_count(args[3], spec);
    if (flag > 1) throw std::invalid_argument("survey: scaled must be 0 or 1");
    return make_survey_matrix(detail::parse_count(args[0], spec), detail::parse_count(args[1], spec),
                              detail::parse_count(args[2], spec), flag == 1,
                              detail::parse_count(args[4], spec));
  }
  throw std::invalid_argument("synthetic spec '" + std::string(spec) + "': unknown kind '" +
                              std::string(kind) + "'");
}

} // namespace errest

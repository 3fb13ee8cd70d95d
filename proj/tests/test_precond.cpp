#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "errest/cgne.hpp"
#include "errest/matrix_market.hpp"
#include "errest/oracle.hpp"
#include "errest/preconditioned.hpp"
#include "errest/problem.hpp"
#include "errest/synthetic.hpp"
#include "test_support.hpp"

using namespace errest;

namespace {

SolverConfig storing(std::size_t max_iter = 1000) {
  SolverConfig cfg;
  cfg.max_iter = max_iter;
  cfg.store_iterates = true;
  return cfg;
}

Eigen::MatrixXd gram(const SparseMatrix& A, GramSide side) {
  const Eigen::MatrixXd D = to_dense(A);
  return side == GramSide::gram_cols ? Eigen::MatrixXd(D.transpose() * D)
                                     : Eigen::MatrixXd(D * D.transpose());
}

// Scalars and iterates agree elementwise to `tol` relative to their magnitudes.
void expect_same_trace(const SolverTrace& a, const SolverTrace& b, double tol) {
  ASSERT_EQ(a.iterations(), b.iterations());
  auto close = [tol](double x, double y) {
    if (std::isnan(x) && std::isnan(y)) return true;
    return std::abs(x - y) <= tol * std::max({std::abs(x), std::abs(y), 1e-300});
  };
  for (std::size_t j = 0; j < a.iterations(); ++j) {
    EXPECT_TRUE(close(a.records[j].delta, b.records[j].delta)) << "delta at " << j;
    EXPECT_TRUE(close(a.records[j].res_norm, b.records[j].res_norm)) << "res at " << j;
  }
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t j = 0; j < a.iterates.size(); ++j) {
    EXPECT_LE(test::max_abs_diff(a.iterates[j], b.iterates[j]), tol * (norm2(a.iterates[j]) + 1e-300));
  }
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(a.events[i].ell, b.events[i].ell);
    EXPECT_EQ(a.events[i].k, b.events[i].k);
    EXPECT_TRUE(close(a.events[i].estimate, b.events[i].estimate));
  }
}

} // namespace

TEST(Jacobi, IdentityGivesIdentity) {
  const auto M = build_jacobi(SparseMatrix::identity(3), GramSide::gram_cols);
  EXPECT_EQ(test::to_rows(M.factor()), test::to_rows(SparseMatrix::identity(3)));
  EXPECT_EQ(M.kind(), PrecondKind::jacobi);
}

TEST(Jacobi, ColumnNorms) {
  const auto A = test::from_rows({{1, 0}, {0, 2}, {0, 0}});
  const auto M = build_jacobi(A, GramSide::gram_cols);
  EXPECT_EQ(test::to_rows(M.factor()), (test::Dense{{1, 0}, {0, 2}}));
  // the zero third row is fatal on the row side
  EXPECT_THROW(build_jacobi(A, GramSide::gram_rows), std::invalid_argument);
}

TEST(Jacobi, ZeroColumnNamesTheIndex) {
  const auto A = test::from_rows({{1, 0, 3}, {2, 0, 1}});
  try {
    build_jacobi(A, GramSide::gram_cols);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos) << e.what();
  }
}

TEST(IC0, IdentityGivesIdentity) {
  const auto M = build_ic0(SparseMatrix::identity(4), GramSide::gram_rows);
  EXPECT_EQ(test::to_rows(M.factor()), test::to_rows(SparseMatrix::identity(4)));
  EXPECT_EQ(M.shift(), 0.0);
}

TEST(IC0, TwoByTwoByHand) {
  // A^T A = [[5, 1], [1, 1]]
  const auto M = build_ic0(test::from_rows({{2, 0}, {1, 1}}), GramSide::gram_cols);
  const auto L = test::to_rows(M.factor());
  EXPECT_NEAR(L[0][0], std::sqrt(5.0), 1e-15);
  EXPECT_EQ(L[0][1], 0.0);
  EXPECT_NEAR(L[1][0], 1.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(L[1][1], std::sqrt(0.8), 1e-15);
}

TEST(IC0, TridiagonalGramIsExactCholesky) {
  // upper bidiagonal A gives a tridiagonal A^T A, where IC(0) has no fill to drop
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CounterRng rng(seed);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < 12; ++i) {
      t.push_back({i, i, 1.0 + rng.uniform()});
      if (i + 1 < 12) t.push_back({i, i + 1, rng.normal()});
    }
    const auto A = SparseMatrix::from_triplets(12, 12, std::move(t));
    const auto M = build_ic0(A, GramSide::gram_cols);
    const Eigen::MatrixXd L_exact = gram(A, GramSide::gram_cols).llt().matrixL();
    EXPECT_LE((to_dense(M.factor()) - L_exact).cwiseAbs().maxCoeff(), 1e-12 * L_exact.norm());
  }
}

TEST(IC0, ReproducesGramOnItsPattern) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto A = make_sparse_matrix(40, 15, 2.0, 10.0, seed);
    for (auto side : {GramSide::gram_cols, GramSide::gram_rows}) {
      const auto src = side == GramSide::gram_cols ? A : SparseMatrix::identity(15);
      const auto M = build_ic0(src, side);
      if (M.shift() != 0.0) continue;
      const Eigen::MatrixXd L = to_dense(M.factor());
      const Eigen::MatrixXd LLt = L * L.transpose();
      const Eigen::MatrixXd G = gram(src, side);
      for (const auto& e : M.factor().to_triplets()) {
        EXPECT_NEAR(LLt(e.row, e.col), G(e.row, e.col), 1e-12 * G.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST(IC0, FactorRetriesWithShift) {
  // symmetric indefinite [[1, 2], [2, 1]]: the second pivot 1 - 4 fails without a shift
  const auto G = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 2.0}, {1, 1, 1.0}});
  std::vector<double> out;
  EXPECT_FALSE(detail::ic0_factor(G, 0.0, out));
  EXPECT_TRUE(detail::ic0_factor(G, 2.0, out));
  EXPECT_NEAR(out[0], std::sqrt(3.0), 1e-15);
}

TEST(IC0, RejectsOversizedGramAndZeroColumns) {
  EXPECT_THROW(build_ic0(SparseMatrix::identity(kMaxExplicitGram + 1), GramSide::gram_cols),
               std::invalid_argument);
  EXPECT_THROW(build_ic0(test::from_rows({{1, 0}, {1, 0}}), GramSide::gram_cols), std::invalid_argument);
}

TEST(SplitPreconditioner, RejectsBadFactors) {
  EXPECT_THROW(SplitPreconditioner(test::from_rows({{1, 1}, {0, 1}}), PrecondKind::ic0, GramSide::gram_cols),
               std::invalid_argument);
  EXPECT_THROW(SplitPreconditioner(test::from_rows({{-1, 0}, {0, 1}}), PrecondKind::ic0, GramSide::gram_cols),
               std::invalid_argument);
  EXPECT_THROW(SplitPreconditioner(test::from_rows({{1, 0, 0}, {0, 1, 0}}), PrecondKind::ic0,
                                   GramSide::gram_cols),
               DimensionError);
}

TEST(SplitPreconditioner, TriangularSolvesInvertTheFactor) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto A = make_sparse_matrix(60, 25, 3.0, 100.0, seed);
    const auto M = build_ic0(A, GramSide::gram_cols);
    CounterRng rng(seed);
    const Vector y = rng.normal_vector(25);
    const Vector lower = mat_vec(M.factor(), M.solve_lower(y));
    const Vector upper = mat_vec_transpose(M.factor(), M.solve_upper(y));
    EXPECT_LE(norm2(subtract(lower, y)), 1e-13 * norm2(y));
    EXPECT_LE(norm2(subtract(upper, y)), 1e-13 * norm2(y));
  }
}

TEST(Preconditioned, IdentityReducesToPlainSolvers) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto A = make_svd_matrix(30, 10, 50.0, seed);
    const auto ls = generate_rhs(A, ProblemKind::least_squares, seed);
    const auto Icols = SplitPreconditioner::identity(10, GramSide::gram_cols);
    SolverConfig cfg = storing(40);
    expect_same_trace(pcgls_solve(A, ls.rhs, Icols, cfg), cgls_solve(A, ls.rhs, cfg), 1e-14);
    expect_same_trace(plsqr_solve(A, ls.rhs, Icols, cfg), lsqr_solve(A, ls.rhs, cfg), 1e-14);

    const auto W = make_svd_matrix(10, 30, 50.0, seed);
    const auto ln = generate_rhs(W, ProblemKind::least_norm, seed);
    const auto Irows = SplitPreconditioner::identity(10, GramSide::gram_rows);
    expect_same_trace(pcgne_solve(W, ln.rhs, Irows, cfg), cgne_solve(W, ln.rhs, cfg), 1e-14);
    expect_same_trace(pcraig_solve(W, ln.rhs, Irows, cfg), craig_solve(W, ln.rhs, cfg), 1e-14);
  }
}

TEST(Preconditioned, JacobiPcglsReachesTheSameSolution) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto A = test::random_dense(5, 3, seed);
    const auto p = generate_rhs(A, ProblemKind::least_squares, seed);
    const auto M = build_jacobi(A, GramSide::gram_cols);
    const Vector x_p = pcgls_solve(A, p.rhs, M, storing(50)).x;
    const Vector x = cgls_solve(A, p.rhs, storing(50)).x;
    EXPECT_LE(norm2(subtract(x_p, x)), 1e-8 * norm2(x)) << "seed " << seed;
  }
}

TEST(Preconditioned, PcraigOnScaledRow) {
  const auto A = test::from_rows({{1, 0}});
  const SplitPreconditioner M(test::from_rows({{2}}), PrecondKind::jacobi, GramSide::gram_rows);
  const auto t = pcraig_solve(A, Vector{1}, M, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  EXPECT_NEAR(t.x[0], 1.0, 1e-15);
  EXPECT_EQ(t.x[1], 0.0);
  // b_hat = 1/2 and A_hat = [1/2 0]: zeta_1 = beta_1 / alpha_1 = 1, so the sum is ||x||^2
  ASSERT_EQ(t.iterations(), 1u);
  EXPECT_NEAR(t.records[0].delta, 1.0, 1e-15);
}

TEST(Preconditioned, PcgneWithJacobiFindsMinimumNormSolution) {
  const auto A = test::from_rows({{1, 0, 0}, {0, 2, 0}});
  const auto M = build_jacobi(A, GramSide::gram_rows);
  for (bool explicit_residual : {false, true}) {
    const auto t = pcgne_solve(A, Vector{1, 2}, M, storing(), PcgneOptions{explicit_residual});
    EXPECT_EQ(t.status, SolveStatus::converged);
    EXPECT_NEAR(t.x[0], 1.0, 1e-15);
    EXPECT_NEAR(t.x[1], 1.0, 1e-15);
    EXPECT_EQ(t.x[2], 0.0);
    double sum = 0.0;
    for (const auto& r : t.records) sum += r.delta;
    EXPECT_NEAR(sum, 2.0, 1e-14);
  }
}

class PreconditionedEquivalence : public ::testing::TestWithParam<std::tuple<PrecondKind, std::uint64_t>> {};

TEST_P(PreconditionedEquivalence, PcglsMatchesPlsqr) {
  const auto [kind, seed] = GetParam();
  const auto A = make_sparse_matrix(40, 12, 4.0, 3.0, seed);
  const auto p = generate_rhs(A, ProblemKind::least_squares, seed);
  const auto M = build_preconditioner(A, kind, GramSide::gram_cols);
  const auto c = pcgls_solve(A, p.rhs, M, storing(60));
  const auto l = plsqr_solve(A, p.rhs, M, storing(60));
  const auto sol = min_norm_solve(A, p.rhs);
  const auto E = true_error_trajectory(c, sol.x, A, ErrorNorm::energy_AtA);
  const std::size_t P = std::min({detect_plateau(E), c.iterates.size(), l.iterates.size()});
  for (std::size_t j = 0; j < P; ++j) {
    EXPECT_LE(test::max_abs_diff(c.iterates[j], l.iterates[j]), 1e-10 * norm2(sol.x)) << "j=" << j;
  }
}

TEST_P(PreconditionedEquivalence, PcgneMatchesPcraig) {
  const auto [kind, seed] = GetParam();
  const auto A = make_sparse_matrix(40, 12, 4.0, 3.0, seed).transpose();
  const auto p = generate_rhs(A, ProblemKind::least_norm, seed);
  const auto M = build_preconditioner(A, kind, GramSide::gram_rows);
  const auto c = pcgne_solve(A, p.rhs, M, storing(60));
  const auto k = pcraig_solve(A, p.rhs, M, storing(60));
  const auto sol = min_norm_solve(A, p.rhs);
  const auto E = true_error_trajectory(c, sol.x, A, ErrorNorm::euclidean);
  const std::size_t P = std::min({detect_plateau(E), c.iterates.size(), k.iterates.size()});
  for (std::size_t j = 0; j < P; ++j) {
    EXPECT_LE(test::max_abs_diff(c.iterates[j], k.iterates[j]), 1e-10 * norm2(sol.x)) << "j=" << j;
  }
}

TEST_P(PreconditionedEquivalence, TransformedEnergyNormEqualsOriginal) {
  // ||x_hat - x_hat_k||_{A_hat^T A_hat} = ||x - x_k||_{A^T A}. Both sides carry an
  // absolute rounding error of order eps ||A|| ||x|| ||A e_k||, so the relative
  // check applies while the error is well above that level.
  const auto [kind, seed] = GetParam();
  const auto A = make_sparse_matrix(200, 60, 2.5, 1000.0, seed);
  const auto p = generate_rhs(A, ProblemKind::least_squares, seed);
  const auto M = build_preconditioner(A, kind, GramSide::gram_cols);
  const auto sol = min_norm_solve(A, p.rhs);

  const auto l = plsqr_solve(A, p.rhs, M, storing(150));
  const auto c = pcgls_solve(A, p.rhs, M, storing(150));
  std::vector<Vector> c_hat;
  for (const auto& x : c.iterates) c_hat.push_back(mat_vec_transpose(M.factor(), x));

  for (const auto* run : {&l, &c}) {
    const auto& hats = run == &l ? l.hat_iterates : c_hat;
    const auto transformed = transformed_energy_errors(A, M, sol.x, hats);
    const auto original = true_error_trajectory(*run, sol.x, A, ErrorNorm::energy_AtA);
    ASSERT_EQ(transformed.size(), original.size());
    const std::size_t P = detect_plateau(original);
    ASSERT_GT(P, 10u);
    for (std::size_t j = 0; j < P; ++j) {
      EXPECT_LE(std::abs(transformed[j] - original[j]), 1e-14 * original[0]) << "j=" << j;
      if (original[j] >= 1e-8 * original[0]) {
        EXPECT_LE(test::rel_diff(transformed[j], original[j]), 1e-10) << "j=" << j;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(KindsAndSeeds, PreconditionedEquivalence,
                         ::testing::Combine(::testing::Values(PrecondKind::jacobi, PrecondKind::ic0),
                                            ::testing::Range<std::uint64_t>(1, 4)));

TEST(Preconditioned, Well1033WithIc0GivesLowerBounds) {
  const auto A = load_matrix_market(ERREST_TEST_DATA_DIR "/well1033.mtx");
  const auto b = load_vector_market(ERREST_TEST_DATA_DIR "/well1033_b.mtx");
  const auto M = build_ic0(A, GramSide::gram_cols);
  const auto t = pcgls_solve(A, b, M, storing(2000));
  const auto rep = make_oracle_report(A, b, t, ErrorNorm::energy_AtA, 0.25);
  const auto audit = audit_estimates(t.events, rep.true_errors, rep.plateau_index, 0.25);
  EXPECT_GT(audit.checked, 10u);
  EXPECT_TRUE(audit.lower_bound.empty());
  // the preconditioned run needs far fewer iterations than the plain one
  EXPECT_LT(t.iterations(), cgls_solve(A, b, storing(2000)).iterations());
}

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "errest/cg.hpp"
#include "errest/cgls.hpp"
#include "errest/cgne.hpp"
#include "errest/craig.hpp"
#include "errest/lsqr.hpp"
#include "errest/oracle.hpp"
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

double delta_sum(const SolverTrace& t) {
  double s = 0.0;
  for (const auto& r : t.records) s += r.delta;
  return s;
}

// A^T A and A A^T solutions by normal equations in extended precision-free
// dense form; only used on small, well conditioned matrices.
Vector normal_equations_solution(const SparseMatrix& A, const Vector& b) {
  const Eigen::MatrixXd D = to_dense(A);
  return to_vector((D.transpose() * D).ldlt().solve(D.transpose() * to_eigen(b)));
}

Vector row_gram_solution(const SparseMatrix& A, const Vector& b) {
  const Eigen::MatrixXd D = to_dense(A);
  return to_vector((D * D.transpose()).ldlt().solve(to_eigen(b)));
}

} // namespace

TEST(CG, IdentityConvergesInOneStep) {
  const auto I = SparseMatrix::identity(3);
  const Vector b{1, 2, 3};
  const auto t = cg_solve(I, b, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  ASSERT_EQ(t.iterations(), 1u);
  EXPECT_EQ(t.x, b);
  EXPECT_DOUBLE_EQ(t.records[0].delta, 14.0);
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.events[0], (EstimateEvent{0, 0, 14.0}));
}

TEST(CG, DiagonalTwoByTwo) {
  const auto A = make_synthetic("diag:1,2");
  const Vector b{1, 1};
  const auto t = cg_solve(A, b, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  EXPECT_EQ(t.iterations(), 2u);
  EXPECT_NEAR(t.x[0], 1.0, 1e-15);
  EXPECT_NEAR(t.x[1], 0.5, 1e-15);
  // ||x||_A^2 = 1 + 2 / 4
  EXPECT_NEAR(delta_sum(t), 1.5, 1e-15);
  // energy errors by hand from the stored iterates
  for (std::size_t j = 0; j < t.iterations(); ++j) {
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double d = i == 0 ? 1.0 : 2.0;
      const double x = i == 0 ? 1.0 : 0.5;
      before += d * (x - t.iterates[j][i]) * (x - t.iterates[j][i]);
      after += d * (x - t.iterates[j + 1][i]) * (x - t.iterates[j + 1][i]);
    }
    EXPECT_NEAR(t.records[j].delta, before - after, 1e-15);
  }
}

TEST(CG, IndefiniteMatrixBreaksDown) {
  const auto A = make_synthetic("diag:1,-1");
  EXPECT_THROW(cg_solve(A, Vector{0, 1}, SolverConfig{}), BreakdownError);
}

TEST(CG, NonzeroStartingGuess) {
  const auto A = make_synthetic("diag:1,2");
  const Vector b{1, 1}, x0{1, 0};
  const auto t = cg_solve(A, b, x0, storing());
  EXPECT_EQ(t.iterations(), 1u);
  EXPECT_NEAR(t.x[1], 0.5, 1e-15);
  EXPECT_NEAR(delta_sum(t), 0.5, 1e-15);
}

TEST(CGLS, IdentityGivesRhs) {
  const auto I = SparseMatrix::identity(2);
  const Vector b{3, 4};
  const auto t = cgls_solve(I, b, storing());
  EXPECT_EQ(t.iterations(), 1u);
  EXPECT_EQ(t.x, b);
  EXPECT_DOUBLE_EQ(t.records[0].delta, 25.0);
}

TEST(CGLS, TallColumnLeastSquares) {
  const auto A = test::from_rows({{1}, {1}});
  const auto t = cgls_solve(A, Vector{1, 0}, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  ASSERT_EQ(t.iterations(), 1u);
  EXPECT_DOUBLE_EQ(t.x[0], 0.5);
  EXPECT_DOUBLE_EQ(t.records[0].delta, 0.5);
  EXPECT_DOUBLE_EQ(t.records[0].res_norm, 1.0);
}

TEST(LSQR, IdentityGivesRhs) {
  const auto I = SparseMatrix::identity(3);
  const Vector b{1, -2, 2};
  const auto t = lsqr_solve(I, b, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  ASSERT_EQ(t.iterations(), 1u);
  EXPECT_NEAR(t.records[0].phi * t.records[0].phi, 9.0, 1e-14);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(t.x[i], b[i], 1e-15);
}

TEST(LSQR, ZeroRhsIsAlreadySolved) {
  const auto A = test::random_dense(4, 3, 1);
  const auto t = lsqr_solve(A, Vector(4, 0.0), storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  EXPECT_EQ(t.iterations(), 0u);
  EXPECT_EQ(t.x, Vector(3, 0.0));
}

TEST(CGNE, WideRowMatrix) {
  const auto A = test::from_rows({{1, 0}});
  const auto t = cgne_solve(A, Vector{1}, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  EXPECT_EQ(t.x, (Vector{1, 0}));
  EXPECT_DOUBLE_EQ(t.records[0].delta, 1.0);
}

TEST(CGNE, MinimumNormSolution) {
  const auto A = test::from_rows({{1, 0, 0}, {0, 2, 0}});
  const auto t = cgne_solve(A, Vector{1, 2}, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  EXPECT_NEAR(t.x[0], 1.0, 1e-15);
  EXPECT_NEAR(t.x[1], 1.0, 1e-15);
  EXPECT_EQ(t.x[2], 0.0);
  EXPECT_NEAR(delta_sum(t), 2.0, 1e-14);
}

TEST(CGNE, InconsistentSystemBreaksDown) {
  // b is orthogonal to R(A), so A^T b = 0 while b != 0
  const auto A = test::from_rows({{1}, {1}});
  EXPECT_THROW(cgne_solve(A, Vector{1, -1}, SolverConfig{}), BreakdownError);
}

TEST(CRAIG, IdentityGivesRhs) {
  const auto I = SparseMatrix::identity(2);
  const auto t = craig_solve(I, Vector{3, 4}, storing());
  EXPECT_EQ(t.status, SolveStatus::converged);
  ASSERT_EQ(t.iterations(), 1u);
  EXPECT_NEAR(t.records[0].zeta * t.records[0].zeta, 25.0, 1e-13);
  EXPECT_NEAR(t.x[0], 3.0, 1e-15);
  EXPECT_NEAR(t.x[1], 4.0, 1e-15);
}

TEST(CRAIG, WideRowMatrix) {
  const auto A = test::from_rows({{1, 0}});
  const auto t = craig_solve(A, Vector{1}, storing());
  EXPECT_EQ(t.x, (Vector{1, 0}));
  EXPECT_DOUBLE_EQ(t.records[0].delta, 1.0);
}

TEST(CRAIG, RejectsZeroRhsAndFlagsAlphaBreakdown) {
  const auto A = test::from_rows({{1}, {1}});
  EXPECT_THROW(craig_solve(A, Vector{0, 0}, SolverConfig{}), std::invalid_argument);
  EXPECT_THROW(craig_solve(A, Vector{1, -1}, SolverConfig{}), BreakdownError);
}

TEST(Solvers, InvalidConfigurationRejected) {
  const auto A = SparseMatrix::identity(2);
  SolverConfig cfg;
  cfg.max_iter = 0;
  EXPECT_THROW(cgls_solve(A, Vector{1, 1}, cfg), std::invalid_argument);
  cfg = {};
  cfg.tau = 1.0;
  EXPECT_THROW(lsqr_solve(A, Vector{1, 1}, cfg), std::invalid_argument);
  EXPECT_THROW(cgne_solve(A, Vector{1, 1, 1}, SolverConfig{}), DimensionError);
}

TEST(Solvers, MaxIterationsIsReported) {
  const auto A = make_synthetic("svd:40,20,100,1");
  const auto p = generate_rhs(A, ProblemKind::least_squares, 1);
  SolverConfig cfg;
  cfg.max_iter = 3;
  for (const auto& t : {cgls_solve(A, p.rhs, cfg), lsqr_solve(A, p.rhs, cfg)}) {
    EXPECT_EQ(t.status, SolveStatus::max_iterations);
    EXPECT_EQ(t.iterations(), 3u);
  }
}

// Least-squares solvers: the increments telescope the A^T A-norm error.
class LeastSquaresProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LeastSquaresProperties, CglsAndLsqrAgreeBeforeThePlateau) {
  const auto A = make_svd_matrix(30, 8, 4.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_squares, GetParam());
  const auto c = cgls_solve(A, p.rhs, storing(30));
  const auto l = lsqr_solve(A, p.rhs, storing(30));
  const auto sol = min_norm_solve(A, p.rhs);
  const auto E = true_error_trajectory(c, sol.x, A, ErrorNorm::energy_AtA);
  const std::size_t P = std::min({detect_plateau(E), c.iterates.size(), l.iterates.size()});
  for (std::size_t j = 0; j < P; ++j) {
    EXPECT_LE(test::max_abs_diff(c.iterates[j], l.iterates[j]), 1e-10 * norm2(sol.x)) << "j=" << j;
  }
}

TEST_P(LeastSquaresProperties, StepLengthAndPivotIdentity) {
  // gamma_{k-1} rho_k^2 = 1 and ||s_k||^2 = theta_{k+1}^2 phi_k^2
  const auto A = make_svd_matrix(30, 8, 20.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_squares, GetParam());
  const auto c = cgls_solve(A, p.rhs, storing(7));
  const auto l = lsqr_solve(A, p.rhs, storing(7));
  ASSERT_EQ(c.iterations(), l.iterations());
  for (std::size_t j = 0; j < c.iterations(); ++j) {
    EXPECT_NEAR(c.records[j].gamma * l.records[j].rho * l.records[j].rho, 1.0, 1e-10);
    if (j + 1 < c.iterations()) {
      const double ss = c.records[j + 1].delta / c.records[j + 1].gamma;
      const double tp = l.records[j].theta * l.records[j].phi;
      EXPECT_NEAR(tp * tp / ss, 1.0, 1e-10);
    }
  }
}

TEST_P(LeastSquaresProperties, NormalResidualIsAlongNextLanczosVector) {
  // A^T r_k = -theta_{k+1} phi_k v_{k+1}
  const auto A = make_svd_matrix(30, 8, 20.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_squares, GetParam());
  const auto l = lsqr_solve(A, p.rhs, storing(7));
  for (std::size_t j = 0; j < l.iterations(); ++j) {
    const Vector r = subtract(p.rhs, mat_vec(A, l.iterates[j + 1]));
    Vector s = mat_vec_transpose(A, r);
    const double ns = norm2(s);
    axpy(l.records[j].theta * l.records[j].phi, l.v_next[j], s);
    EXPECT_LE(norm2(s), 1e-10 * (ns + norm2(p.rhs) * A.frobenius_norm())) << "j=" << j;
  }
}

TEST_P(LeastSquaresProperties, EnergyErrorIsResidualGap) {
  const auto A = make_svd_matrix(25, 6, 10.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_squares, GetParam());
  const auto t = cgls_solve(A, p.rhs, storing());
  const Vector x = normal_equations_solution(A, p.rhs);
  const double r2 = dot(subtract(p.rhs, mat_vec(A, x)), subtract(p.rhs, mat_vec(A, x)));
  for (const auto& xk : t.iterates) {
    const Vector rk = subtract(p.rhs, mat_vec(A, xk));
    const Vector e = mat_vec(A, subtract(x, xk));
    EXPECT_NEAR(dot(e, e), dot(rk, rk) - r2, 1e-10 * dot(p.rhs, p.rhs));
  }
}

TEST_P(LeastSquaresProperties, ErrorsDecreaseAndIncrementsMatchBeforePlateau) {
  const auto A = make_svd_matrix(30, 8, 20.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_squares, GetParam());
  SolverConfig cfg = storing(8);
  cfg.record_local_orthogonality = true;
  for (const auto& t : {cgls_solve(A, p.rhs, cfg), lsqr_solve(A, p.rhs, cfg)}) {
    const auto E = true_error_trajectory(t, min_norm_solve(A, p.rhs).x, A, ErrorNorm::energy_AtA);
    const std::size_t P = detect_plateau(E);
    for (std::size_t j = 0; j + 1 < std::min(P, E.size()); ++j) {
      EXPECT_LE(E[j + 1], E[j] * (1.0 + 1e-12));
      EXPECT_NEAR(t.records[j].delta, E[j] - E[j + 1], 1e-8 * E[0]);
      EXPECT_LT(std::abs(t.records[j].local_orth), 1e-8);
    }
  }
}

TEST_P(LeastSquaresProperties, ConsistentSystemErrorIsResidualNorm) {
  const auto A = make_svd_matrix(20, 6, 10.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_norm, GetParam());
  const auto t = lsqr_solve(A, p.rhs, storing(6));
  for (std::size_t j = 0; j < t.iterations(); ++j) {
    const Vector e = mat_vec(A, subtract(p.x_gen, t.iterates[j]));
    EXPECT_NEAR(t.records[j].res_norm * t.records[j].res_norm, dot(e, e), 1e-10 * dot(p.rhs, p.rhs));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, LeastSquaresProperties, ::testing::Range<std::uint64_t>(1, 6));

// Least-norm solvers: the increments telescope the Euclidean error.
class LeastNormProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LeastNormProperties, CgneAndCraigAgreeBeforeThePlateau) {
  const auto A = make_svd_matrix(8, 30, 4.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_norm, GetParam());
  const auto c = cgne_solve(A, p.rhs, storing(30));
  const auto k = craig_solve(A, p.rhs, storing(30));
  const auto sol = min_norm_solve(A, p.rhs);
  const auto E = true_error_trajectory(c, sol.x, A, ErrorNorm::euclidean);
  const std::size_t P = std::min({detect_plateau(E), c.iterates.size(), k.iterates.size()});
  for (std::size_t j = 0; j < P; ++j) {
    EXPECT_LE(test::max_abs_diff(c.iterates[j], k.iterates[j]), 1e-10 * norm2(sol.x)) << "j=" << j;
  }
}

TEST_P(LeastNormProperties, DualIterateEnergyEqualsPrimalError) {
  // ||y - y_k||^2_{A A^T} = ||x - x_k||^2
  const auto A = make_svd_matrix(8, 30, 20.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_norm, GetParam());
  SolverConfig cfg = storing(8);
  cfg.record_local_orthogonality = true;
  const auto t = craig_solve(A, p.rhs, cfg, /*want_y=*/true);
  const Vector y = row_gram_solution(A, p.rhs);
  const Vector x = mat_vec_transpose(A, y);
  ASSERT_EQ(t.y_iterates.size(), t.iterates.size());
  for (std::size_t j = 0; j < t.iterates.size(); ++j) {
    const Vector ey = mat_vec_transpose(A, subtract(y, t.y_iterates[j]));
    const Vector ex = subtract(x, t.iterates[j]);
    EXPECT_NEAR(dot(ey, ey), dot(ex, ex), 1e-10 * dot(x, x));
    EXPECT_LE(test::max_abs_diff(mat_vec_transpose(A, t.y_iterates[j]), t.iterates[j]), 1e-12 * norm2(x));
  }
  for (const auto& r : t.records) EXPECT_LT(std::abs(r.local_orth), 1e-8);
}

TEST_P(LeastNormProperties, IncrementsMatchErrorDrops) {
  const auto A = make_svd_matrix(8, 30, 20.0, GetParam());
  const auto p = generate_rhs(A, ProblemKind::least_norm, GetParam());
  for (const auto& t : {cgne_solve(A, p.rhs, storing(8)), craig_solve(A, p.rhs, storing(8))}) {
    const auto E = true_error_trajectory(t, min_norm_solve(A, p.rhs).x, A, ErrorNorm::euclidean);
    const std::size_t P = detect_plateau(E);
    for (std::size_t j = 0; j + 1 < std::min(P, E.size()); ++j) {
      EXPECT_LE(E[j + 1], E[j] * (1.0 + 1e-12));
      EXPECT_NEAR(t.records[j].delta, E[j] - E[j + 1], 1e-8 * E[0]);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, LeastNormProperties, ::testing::Range<std::uint64_t>(1, 6));

TEST(Solvers, ConvergenceFlushesPendingEstimates) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto A = make_svd_matrix(12, 5, 10.0, seed);
    for (auto kind : {ProblemKind::least_norm, ProblemKind::least_squares}) {
      const auto t = cgls_solve(A, generate_rhs(A, kind, seed).rhs, storing());
      EXPECT_EQ(t.status, SolveStatus::converged);
      ASSERT_EQ(t.events.size(), t.iterations());
      for (std::size_t i = 0; i < t.events.size(); ++i) EXPECT_EQ(t.events[i].ell, i);
    }
  }
}

TEST(Solvers, StoppingCriterionHaltsEarly) {
  const auto A = make_synthetic("svd:200,80,1000,4");
  const auto p = generate_rhs(A, ProblemKind::least_squares, 4);
  SolverConfig cfg;
  cfg.max_iter = 500;
  cfg.stop_beta = 1e-2;
  for (const auto& t : {cgls_solve(A, p.rhs, cfg), lsqr_solve(A, p.rhs, cfg)}) {
    ASSERT_EQ(t.status, SolveStatus::stopping_criterion);
    ASSERT_FALSE(t.events.empty());
    const auto& last = t.events.back();
    EXPECT_EQ(last.k + 1, t.iterations());
    // squared estimate against the unsquared bound
    EXPECT_LE(last.estimate, cfg.stop_beta * norm2(p.rhs));
  }
  cfg.stop_beta = 0.0;
  EXPECT_EQ(cgls_solve(A, p.rhs, cfg).status, SolveStatus::max_iterations);
}

TEST(CGLS, StopsAtRoundingLevelInsteadOfDiverging) {
  SolverConfig cfg = storing(2000);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto A = make_svd_matrix(25, 6, 10.0, seed);
    for (auto kind : {ProblemKind::least_norm, ProblemKind::least_squares}) {
      const auto p = generate_rhs(A, kind, seed + 100);
      const auto t = cgls_solve(A, p.rhs, cfg);
      const Vector x = min_norm_solve(A, p.rhs).x;
      EXPECT_EQ(t.status, SolveStatus::converged) << "seed " << seed;
      EXPECT_LT(t.iterations(), 100u);
      for (const auto& xk : t.iterates) ASSERT_LE(norm2(xk), 10.0 * norm2(x)) << "seed " << seed;
      EXPECT_LE(norm2(subtract(t.x, x)), 1e-12 * 10.0 * 10.0 * norm2(x));
    }
  }
}

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "grushin/spectral.hpp"

using namespace grushin;

namespace {

// Dense generalized-eigensolver oracle for the smallest eigenvalue of
// A u = lambda B u at coarse resolution.
double dense_lambda1(double k, double beta, const std::shared_ptr<const Grid2D>& g) {
  const int n = g->n_interior;
  Eigen::MatrixXd A(n, n);
  for (int c = 0; c < n; ++c) {
    GridFunction e(g);
    e.v[c] = 1.0;
    auto col = apply_grushin(e, k);
    for (int r = 0; r < n; ++r) A(r, c) = col.v[r];
  }
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  const auto wb = g->column_weights(beta);
  for (int d = 0; d < n; ++d) B(d, d) = wb[g->col_of_dof(d)] / g->hx;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  return es.eigenvalues()(0);
}

}  // namespace

TEST(PrincipalEigenpair, LaplacianUnitSquare) {
  auto g = build_grid(DomainShape::rectangle(0, 1, 0, 1), 128, 128);
  auto rep = principal_eigenpair(0.0, 0.0, g, 1e-8);
  ASSERT_TRUE(rep.converged);
  const double exact = 2.0 * M_PI * M_PI;  // separable sine-series oracle
  EXPECT_NEAR(rep.lambda1, exact, 0.01 * exact);
  EXPECT_GT(rep.lambda1, 0.0);
  // normalized and nonnegative
  EXPECT_NEAR(norm_Lqbeta(rep.phi1, 2.0, 0.0), 1.0, 1e-10);
  for (double v : rep.phi1.v) EXPECT_GE(v, 0.0);
}

TEST(PrincipalEigenpair, LaplacianRectangle) {
  auto g = build_grid(DomainShape::rectangle(0, 2, 0, 1), 128, 64);
  auto rep = principal_eigenpair(0.0, 0.0, g, 1e-8);
  const double exact = M_PI * M_PI * (0.25 + 1.0);  // 5 pi^2 / 4
  EXPECT_NEAR(rep.lambda1, exact, 0.01 * exact);
}

TEST(PrincipalEigenpair, GrushinMatchesDenseOracle) {
  auto g = build_grid(DomainShape::rectangle(-1, 1, -1, 1), 32, 32);
  auto rep = principal_eigenpair(1.0, 0.0, g, 1e-10);
  ASSERT_TRUE(rep.converged);
  const double oracle = dense_lambda1(1.0, 0.0, g);
  EXPECT_NEAR(rep.lambda1, oracle, 0.005 * oracle);
}

TEST(PrincipalEigenpair, WeightedMatchesDenseOracle) {
  auto g = build_grid(DomainShape::rectangle(-1, 1, 0, 1), 16, 16);
  auto rep = principal_eigenpair(1.0, -0.2, g, 1e-10);
  ASSERT_TRUE(rep.converged);
  const double oracle = dense_lambda1(1.0, -0.2, g);
  EXPECT_NEAR(rep.lambda1, oracle, 0.005 * oracle);
}

TEST(PrincipalEigenpair, RejectsBadParameters) {
  auto g = build_grid(DomainShape::rectangle(0, 1, 0, 1), 16, 16);
  EXPECT_THROW(principal_eigenpair(-1.0, 0.0, g), std::invalid_argument);
  EXPECT_THROW(principal_eigenpair(1.0, -0.5, g), std::invalid_argument);
}

TEST(WeakForm, ResidualAtEigenfunction) {
  auto g = build_grid(DomainShape::rectangle(0, 1, 0, 1), 48, 48);
  auto rep = principal_eigenpair(0.0, 0.0, g, 1e-9);
  // phi = phi1: residual is |‖phi1‖_S^2 - lambda1| / ‖phi1‖_S^2
  const double s2 = s_norm_sq(rep.phi1, 0.0);
  const double expected = std::fabs(s2 - rep.lambda1) / s2;
  EXPECT_LE(expected, 10 * rep.tol);
}

TEST(WeakForm, RandomTestFunctionsSmallResidual) {
  auto g = build_grid(DomainShape::rectangle(-1, 1, 0, 1), 48, 48);
  auto rep = principal_eigenpair(1.0, 0.0, g, 1e-9);
  ASSERT_TRUE(rep.converged);
  EXPECT_LE(weak_form_residual(rep, 50, 1234), 1e-6);
}

TEST(WeakForm, LooseToleranceGivesLargerResidual) {
  auto g = build_grid(DomainShape::rectangle(-1, 1, 0, 1), 32, 32);
  auto loose = principal_eigenpair(1.0, 0.0, g, 1e-1, 2);
  auto tight = principal_eigenpair(1.0, 0.0, g, 1e-9);
  const double r_loose = weak_form_residual(loose, 20, 7);
  const double r_tight = weak_form_residual(tight, 20, 7);
  EXPECT_GT(r_loose, 10 * r_tight);
}

TEST(WeakForm, DeterministicGivenSeed) {
  auto g = build_grid(DomainShape::rectangle(0, 1, 0, 1), 32, 32);
  auto rep = principal_eigenpair(0.0, 0.0, g, 1e-9);
  EXPECT_EQ(weak_form_residual(rep, 10, 99), weak_form_residual(rep, 10, 99));
}

TEST(Variational, RayleighQuotientBoundedBelow) {
  auto g = build_grid(DomainShape::rectangle(-1, 1, 0, 1), 48, 48);
  auto rep = principal_eigenpair(1.0, 0.2, g, 1e-9);
  for (unsigned seed = 0; seed < 20; ++seed) {
    auto u = random_bump_function(g, 5000 + seed);
    const double m = weighted_inner(u, u, 0.2);
    if (m == 0) continue;
    EXPECT_GE(s_norm_sq(u, 1.0) / m, rep.lambda1 - 10 * rep.tol * rep.lambda1);
  }
}

TEST(Variational, DomainMonotonicity) {
  // shrinking the domain never decreases lambda1
  auto g_big = build_grid(DomainShape::rectangle(-1, 1, -1, 1), 64, 64);
  auto g_mid = build_grid(DomainShape::rectangle(-0.8, 0.8, -0.8, 0.8), 64, 64);
  auto g_small = build_grid(DomainShape::rectangle(-0.5, 0.5, -0.6, 0.6), 64, 64);
  const double l_big = principal_eigenpair(1.0, 0.0, g_big, 1e-8).lambda1;
  const double l_mid = principal_eigenpair(1.0, 0.0, g_mid, 1e-8).lambda1;
  const double l_small = principal_eigenpair(1.0, 0.0, g_small, 1e-8).lambda1;
  EXPECT_LT(l_big, l_mid);
  EXPECT_LT(l_mid, l_small);
}

TEST(Variational, BetaContinuity) {
  auto g = build_grid(DomainShape::rectangle(-1, 1, 0, 1), 32, 32);
  std::vector<double> betas = {-0.1, -0.05, 0.0, 0.05, 0.1};
  std::vector<double> lams;
  for (double b : betas) lams.push_back(principal_eigenpair(1.0, b, g, 1e-9).lambda1);
  for (std::size_t i = 1; i < lams.size(); ++i) {
    const double jump = std::fabs(lams[i] - lams[i - 1]) / lams[i - 1];
    EXPECT_LT(jump, 10.0 * 0.05);  // O(Δβ) variation, no jumps
    // On (-1,1)x(0,1) the weight |x|^{2β} is pointwise decreasing in β,
    // so λ₁ increases with β.
    EXPECT_GT(lams[i], lams[i - 1]);
  }
}

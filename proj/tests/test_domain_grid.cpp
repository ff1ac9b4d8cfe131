#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "grushin/domain.hpp"
#include "grushin/grid.hpp"

using namespace grushin;

TEST(CellWeightIntegral, UnweightedIsLength) {
  EXPECT_NEAR(cell_weight_integral(0.0, 0.1, 0.2), 0.1, 1e-15);
}

TEST(CellWeightIntegral, LinearWeight) {
  // 2a = 1: ∫_0^h x dx = h^2/2
  const double h = 0.03125;
  EXPECT_NEAR(cell_weight_integral(0.5, 0.0, h), h * h / 2.0, 1e-16);
}

TEST(CellWeightIntegral, SingularWeight) {
  // 2a = -0.5: ∫_0^0.1 x^{-1/2} dx = 2 sqrt(0.1)
  EXPECT_NEAR(cell_weight_integral(-0.25, 0.0, 0.1), 2.0 * std::sqrt(0.1), 1e-14);
}

TEST(CellWeightIntegral, StraddlingCell) {
  // symmetric cell across 0, weight x^2 (a=1): 2 * h^3/3
  EXPECT_NEAR(cell_weight_integral(1.0, -0.2, 0.2), 2.0 * std::pow(0.2, 3) / 3.0, 1e-15);
}

TEST(CellWeightIntegral, RejectsNonIntegrable) {
  EXPECT_THROW(cell_weight_integral(-0.5, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(cell_weight_integral(-0.75, -1.0, 1.0), std::invalid_argument);
}

TEST(CellWeightIntegral, Additive) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> A(-0.45, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    double l = U(rng), r = U(rng), m;
    if (l > r) std::swap(l, r);
    if (l == r) continue;
    m = l + (r - l) * 0.3;
    const double a = A(rng);
    const double whole = cell_weight_integral(a, l, r);
    const double split = cell_weight_integral(a, l, m) + cell_weight_integral(a, m, r);
    EXPECT_NEAR(split, whole, 1e-13 * std::max(1.0, std::fabs(whole)));
  }
}

TEST(BuildGrid, UnitSquareUniform) {
  auto g = build_grid(DomainShape::rectangle(0, 1, 0, 1), 16, 16, {0.0});
  EXPECT_EQ(g->n_interior, 256);
  EXPECT_DOUBLE_EQ(g->hx, 1.0 / 16);
  EXPECT_DOUBLE_EQ(g->hy, 1.0 / 16);
}

TEST(BuildGrid, StaggerAvoidsAxis) {
  auto g = build_grid(DomainShape::rectangle(-1, 1, 0, 1), 16, 8, {-0.2});
  for (int i = 0; i < g->nx; ++i) EXPECT_GT(std::fabs(g->x(i)), 1e-12);
}

TEST(BuildGrid, EllipseAreaFraction) {
  // x^2 + 4 y^2 < 1: area pi/2; bounding box [-1,1]x[-1/2,1/2] area 2.
  auto dom = DomainShape::ellipse(0, 0, 1, 0.5);
  auto g = build_grid(dom, 64, 64);
  // Monte-Carlo area oracle over the bounding box.
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> UX(-1, 1), UY(-0.5, 0.5);
  int hits = 0;
  const int n = 400000;
  for (int t = 0; t < n; ++t) hits += dom.inside(UX(rng), UY(rng)) ? 1 : 0;
  const double frac_mc = static_cast<double>(hits) / n;
  const double frac_grid = static_cast<double>(g->n_interior) / (64.0 * 64.0);
  EXPECT_NEAR(frac_grid, frac_mc, 0.03 * frac_mc);
}

TEST(BuildGrid, RejectsBadInput) {
  EXPECT_THROW(build_grid(DomainShape::rectangle(0, 1, 0, 1), 4, 16), std::invalid_argument);
  EXPECT_THROW(build_grid(DomainShape::rectangle(0, 1, 0, 1), 16, 16, {-0.6}),
               std::invalid_argument);
  auto empty = DomainShape::indicator(0, 1, 0, 1, [](double, double) { return false; });
  EXPECT_THROW(build_grid(empty, 16, 16), std::invalid_argument);
}

TEST(BuildGrid, CellAreaSumsToDomainArea) {
  // a=0: sum of W_0 * hy over interior cells approximates |Ω|.
  auto gr = build_grid(DomainShape::rectangle(-1, 1, 0, 1), 64, 32);
  auto w = gr->column_weights(0.0);
  double area = 0;
  for (int d = 0; d < gr->n_interior; ++d) area += w[gr->col_of_dof(d)] * gr->hy;
  EXPECT_NEAR(area, 2.0, 1e-12);

  auto ge = build_grid(DomainShape::ellipse(0, 0, 1, 0.5), 128, 128);
  auto we = ge->column_weights(0.0);
  double area_e = 0;
  for (int d = 0; d < ge->n_interior; ++d) area_e += we[ge->col_of_dof(d)] * ge->hy;
  EXPECT_NEAR(area_e, M_PI / 2.0, 0.05);
}

TEST(BoundarySamples, SquarePerimeter) {
  auto s = boundary_samples(DomainShape::rectangle(0, 1, 0, 1), 400);
  double per = 0;
  for (const auto& b : s) {
    per += b.ds;
    EXPECT_NEAR(std::hypot(b.nu1, b.nu2), 1.0, 1e-12);
  }
  EXPECT_NEAR(per, 4.0, 1e-10);
}

TEST(BoundarySamples, DiskCircumference) {
  auto s = boundary_samples(DomainShape::ellipse(0, 0, 1, 1), 1000);
  double per = 0;
  for (const auto& b : s) per += b.ds;
  EXPECT_NEAR(per, 2.0 * M_PI, 1e-4);
}

TEST(BoundarySamples, EllipseArclengthOracle) {
  auto dom = DomainShape::ellipse(0, 0, 1, 0.5);
  auto s = boundary_samples(dom, 2000);
  double per = 0;
  for (const auto& b : s) per += b.ds;
  // independent adaptive arclength quadrature
  const double oracle = adaptive_simpson(
      [](double t) { return std::hypot(-std::sin(t), 0.5 * std::cos(t)); }, 0, 2 * M_PI, 1e-12);
  EXPECT_NEAR(per, oracle, 1e-4);
}

TEST(BoundarySamples, IndicatorUnsupported) {
  auto dom = DomainShape::indicator(0, 1, 0, 1, [](double x, double y) {
    return x > 0 && x < 1 && y > 0 && y < 1;
  });
  EXPECT_THROW(boundary_samples(dom, 100), std::invalid_argument);
}

TEST(Starshape, CenteredSquare) {
  auto rep = starshape_check(DomainShape::rectangle(-1, 1, -1, 1), 1.0, 400);
  EXPECT_NEAR(rep.min_t_dot_nu, 1.0, 1e-12);
  EXPECT_TRUE(rep.g_starshaped);
  EXPECT_TRUE(rep.strictly);
  EXPECT_NEAR(rep.eps0, 1.0, 1e-12);
}

TEST(Starshape, CenteredRectanglesAllK) {
  for (double k = 0; k <= 6; k += 1)
    EXPECT_TRUE(starshape_check(DomainShape::rectangle(-0.7, 0.7, -2, 2), k, 256).g_starshaped);
}

TEST(Starshape, ShiftedRectangleFails) {
  // (1,2)x(-1,1): on the edge x=1 the normal is (-1,0) and T.nu = -1.
  auto rep = starshape_check(DomainShape::rectangle(1, 2, -1, 1), 1.0, 400);
  EXPECT_NEAR(rep.min_t_dot_nu, -1.0, 1e-12);
  EXPECT_FALSE(rep.g_starshaped);
}

TEST(Starshape, RefinementNeverFlipsFalseToTrue) {
  auto dom = DomainShape::rectangle(0.5, 2, -1, 1);
  bool coarse = starshape_check(dom, 1.0, 64).g_starshaped;
  ASSERT_FALSE(coarse);
  for (int m : {128, 256, 512, 1024})
    EXPECT_FALSE(starshape_check(dom, 1.0, m).g_starshaped);
}

TEST(Starshape, IndicatorReportsUnsupported) {
  auto annulus = DomainShape::indicator(-1, 1, -1, 1, [](double x, double y) {
    const double r2 = x * x + y * y;
    return r2 > 0.25 && r2 < 1.0;
  });
  EXPECT_THROW(starshape_check(annulus, 1.0, 100), std::invalid_argument);
}

TEST(Domain, MeetsXAxis) {
  EXPECT_TRUE(DomainShape::rectangle(-1, 1, 0, 1).meets_x_axis());
  EXPECT_FALSE(DomainShape::rectangle(1, 2, 0, 1).meets_x_axis());
  EXPECT_TRUE(DomainShape::ellipse(0.5, 0, 1, 1).meets_x_axis());
  EXPECT_FALSE(DomainShape::ellipse(2, 0, 1, 1).meets_x_axis());
}

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "grushin/grid.hpp"

namespace grushin {

/// Real values on the interior nodes of a grid; implicitly 0 on masked-out
/// nodes (discrete homogeneous Dirichlet condition).
struct GridFunction {
  std::shared_ptr<const Grid2D> grid;
  std::vector<double> v;

  GridFunction() = default;
  explicit GridFunction(std::shared_ptr<const Grid2D> g)
      : grid(std::move(g)), v(grid->n_interior, 0.0) {}

  static GridFunction sample(std::shared_ptr<const Grid2D> g,
                             const std::function<double(double, double)>& f) {
    GridFunction u(std::move(g));
    for (int d = 0; d < u.grid->n_interior; ++d)
      u.v[d] = f(u.grid->x(u.grid->col_of_dof(d)), u.grid->y(u.grid->row_of_dof(d)));
    return u;
  }

  /// Value at node (i,j); 0 outside the interior mask.
  double at(int i, int j) const {
    if (!grid->is_interior(i, j)) return 0.0;
    return v[static_cast<std::size_t>(grid->dof_of_node[grid->flat(i, j)])];
  }

  double max_abs() const {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }

  bool finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

inline void check_same_grid(const GridFunction& a, const GridFunction& b) {
  if (a.grid != b.grid) throw std::invalid_argument("grid functions live on different grids");
}

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  check_same_grid(a, b);
  GridFunction r = a;
  for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += b.v[i];
  return r;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  check_same_grid(a, b);
  GridFunction r = a;
  for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] -= b.v[i];
  return r;
}

inline GridFunction operator*(double c, const GridFunction& a) {
  GridFunction r = a;
  for (double& x : r.v) x *= c;
  return r;
}

/// Raw (unweighted, measure-free) dot product over interior dofs.
inline double dot(const GridFunction& a, const GridFunction& b) {
  check_same_grid(a, b);
  double s = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

/// L2(Ω) inner product (Lebesgue measure, midpoint quadrature).
inline double l2_inner(const GridFunction& a, const GridFunction& b) {
  return a.grid->hx * a.grid->hy * dot(a, b);
}

inline double l2_norm(const GridFunction& a) { return std::sqrt(l2_inner(a, a)); }

/// Weighted mass pairing ∫ |x|^{2a} u v using cell-exact x-integrals.
inline double weighted_inner(const GridFunction& u, const GridFunction& w, double a) {
  check_same_grid(u, w);
  const auto wa = u.grid->column_weights(a);
  const double hy = u.grid->hy;
  double s = 0;
  for (int d = 0; d < u.grid->n_interior; ++d)
    s += wa[u.grid->col_of_dof(d)] * u.v[d] * w.v[d];
  return s * hy;
}

/// ||u||_{L^q_beta} = (∫ |x|^{2beta} |u|^q)^{1/q} with cell-exact weights.
inline double norm_Lqbeta(const GridFunction& u, double q, double beta) {
  if (q < 1.0) throw std::invalid_argument("norm_Lqbeta: q >= 1 required");
  if (2.0 * beta <= -1.0) throw std::invalid_argument("norm_Lqbeta: 2*beta > -1 required");
  const auto wb = u.grid->column_weights(beta);
  const double hy = u.grid->hy;
  double s = 0;
  for (int d = 0; d < u.grid->n_interior; ++d)
    s += wb[u.grid->col_of_dof(d)] * std::pow(std::fabs(u.v[d]), q);
  return std::pow(s * hy, 1.0 / q);
}

/// Degenerate gradient (u_x, |x|^k u_y): centered differences where both
/// neighbors exist, one-sided at the mask edge.
inline std::pair<GridFunction, GridFunction> grad_G(const GridFunction& u, double k) {
  if (k < 0) throw std::invalid_argument("grad_G: k >= 0 required");
  const Grid2D& g = *u.grid;
  GridFunction g1(u.grid), g2(u.grid);
  for (int d = 0; d < g.n_interior; ++d) {
    const int i = g.col_of_dof(d), j = g.row_of_dof(d);
    const double uc = u.v[d];
    // Centered differences with mirrored ghosts (-u) across Dirichlet faces.
    const double ul = g.is_interior(i - 1, j) ? u.at(i - 1, j) : -uc;
    const double ur = g.is_interior(i + 1, j) ? u.at(i + 1, j) : -uc;
    const double ud = g.is_interior(i, j - 1) ? u.at(i, j - 1) : -uc;
    const double uu = g.is_interior(i, j + 1) ? u.at(i, j + 1) : -uc;
    const double ux = (ur - ul) / (2.0 * g.hx);
    const double uy = (uu - ud) / (2.0 * g.hy);
    g1.v[d] = ux;
    g2.v[d] = std::pow(std::fabs(g.x(i)), k) * uy;
  }
  return {std::move(g1), std::move(g2)};
}

/// Discrete -Δ_G u: 5-point stencil, y-second-difference scaled by |x|^{2k}
/// at the node. Symmetric positive definite under Dirichlet masking.
inline GridFunction apply_grushin(const GridFunction& u, double k) {
  if (k < 0) throw std::invalid_argument("apply_grushin: k >= 0 required");
  const Grid2D& g = *u.grid;
  GridFunction out(u.grid);
  const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);
  std::vector<double> w2k(g.nx);
  for (int i = 0; i < g.nx; ++i) w2k[i] = std::pow(std::fabs(g.x(i)), 2.0 * k);
  for (int d = 0; d < g.n_interior; ++d) {
    const int i = g.col_of_dof(d), j = g.row_of_dof(d);
    const double uc = u.v[d];
    // Missing neighbors are mirrored ghosts (-u), putting the zero Dirichlet
    // value on the cell face halfway between the nodes.
    const double ul = g.is_interior(i - 1, j) ? u.at(i - 1, j) : -uc;
    const double ur = g.is_interior(i + 1, j) ? u.at(i + 1, j) : -uc;
    const double ud = g.is_interior(i, j - 1) ? u.at(i, j - 1) : -uc;
    const double uu = g.is_interior(i, j + 1) ? u.at(i, j + 1) : -uc;
    out.v[d] = ihx2 * (2.0 * uc - ul - ur) + w2k[i] * ihy2 * (2.0 * uc - ud - uu);
  }
  return out;
}

/// Energy inner product a(u,v) = (-Δ_G u, v)_{L2}: the bilinear form every
/// variational routine uses. Exactly symmetric and positive definite.
inline double s_inner(const GridFunction& u, const GridFunction& w, double k) {
  return l2_inner(apply_grushin(u, k), w);
}

inline double s_norm_sq(const GridFunction& u, double k) { return s_inner(u, u, k); }

/// ||u||_{S^2_{1,0}} via the gradient quadrature (matches the energy inner
/// product up to discretization error).
inline double norm_S210(const GridFunction& u, double k) {
  auto [g1, g2] = grad_G(u, k);
  return std::sqrt(l2_inner(g1, g1) + l2_inner(g2, g2));
}

struct SolveResult {
  GridFunction u;
  int iterations = 0;
  double relative_residual = 0;
  bool converged = false;
};

/// Jacobi-preconditioned CG for (-Δ_G + sigma |x|^{2a}) u = rhs, matrix-free.
inline SolveResult solve_spd(double k, double sigma, double a_shift, const GridFunction& rhs,
                             double tol = 1e-10, int max_iter = 0) {
  if (sigma < 0) throw std::invalid_argument("solve_spd: sigma >= 0 required (SPD)");
  if (!(tol > 1e-14 && tol < 1e-2)) throw std::invalid_argument("solve_spd: tol in (1e-14, 1e-2)");
  const Grid2D& g = *rhs.grid;
  if (max_iter <= 0) max_iter = 20 * (g.nx + g.ny) + 200;

  std::vector<double> w2k(g.nx), wshift(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    w2k[i] = std::pow(std::fabs(g.x(i)), 2.0 * k);
    wshift[i] = sigma > 0 ? sigma * std::pow(std::fabs(g.x(i)), 2.0 * a_shift) : 0.0;
  }
  auto apply = [&](const GridFunction& u) {
    GridFunction out = apply_grushin(u, k);
    if (sigma > 0)
      for (int d = 0; d < g.n_interior; ++d) out.v[d] += wshift[g.col_of_dof(d)] * u.v[d];
    return out;
  };
  std::vector<double> inv_diag(g.n_interior);
  const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);
  for (int d = 0; d < g.n_interior; ++d) {
    const int i = g.col_of_dof(d), j = g.row_of_dof(d);
    const double mx = 2.0 + !g.is_interior(i - 1, j) + !g.is_interior(i + 1, j);
    const double my = 2.0 + !g.is_interior(i, j - 1) + !g.is_interior(i, j + 1);
    inv_diag[d] = 1.0 / (mx * ihx2 + my * w2k[i] * ihy2 + wshift[i]);
  }

  SolveResult res;
  res.u = GridFunction(rhs.grid);
  GridFunction r = rhs;  // residual (u starts at 0)
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) {
    res.converged = true;
    return res;
  }
  GridFunction z(rhs.grid), p(rhs.grid);
  for (int d = 0; d < g.n_interior; ++d) z.v[d] = inv_diag[d] * r.v[d];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    GridFunction ap = apply(p);
    const double alpha = rz / dot(p, ap);
    for (int d = 0; d < g.n_interior; ++d) {
      res.u.v[d] += alpha * p.v[d];
      r.v[d] -= alpha * ap.v[d];
    }
    res.iterations = it;
    res.relative_residual = std::sqrt(dot(r, r)) / rhs_norm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    for (int d = 0; d < g.n_interior; ++d) z.v[d] = inv_diag[d] * r.v[d];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int d = 0; d < g.n_interior; ++d) p.v[d] = z.v[d] + beta * p.v[d];
  }
  res.converged = false;  // caller sees the achieved residual
  return res;
}

/// Bilinear interpolation of u (extended by 0 outside the interior mask)
/// at an arbitrary point of the bounding box.
inline double interpolate(const GridFunction& u, double px, double py) {
  const Grid2D& g = *u.grid;
  const double fx = (px - g.domain.x_lo) / g.hx - 0.5;
  const double fy = (py - g.domain.y_lo) / g.hy - 0.5;
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0, ty = fy - j0;
  return (1 - tx) * (1 - ty) * u.at(i0, j0) + tx * (1 - ty) * u.at(i0 + 1, j0) +
         (1 - tx) * ty * u.at(i0, j0 + 1) + tx * ty * u.at(i0 + 1, j0 + 1);
}

/// Bilinear prolongation of a coarse-grid function onto a finer grid of the
/// same domain (used to warm-start refinement studies).
inline GridFunction prolongate(const GridFunction& coarse, std::shared_ptr<const Grid2D> fine) {
  GridFunction out(std::move(fine));
  for (int d = 0; d < out.grid->n_interior; ++d)
    out.v[d] = interpolate(coarse, out.grid->x(out.grid->col_of_dof(d)),
                           out.grid->y(out.grid->row_of_dof(d)));
  return out;
}

}  // namespace grushin

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "grushin/domain.hpp"

namespace grushin {

/// Cell-centered tensor grid over the bounding box of a domain.  Nodes sit at
/// cell centers, so for symmetric boxes and even nx no node lies on {x=0}.
/// Interior nodes are those whose center lies in the open domain; all other
/// nodes carry the homogeneous Dirichlet value 0.
struct Grid2D {
  DomainShape domain;
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;
  std::vector<double> exponents;     // weight exponents a validated at build
  std::vector<std::uint8_t> interior;  // nx*ny mask, row-major (j*nx+i)
  std::vector<int> dof_of_node;      // flat node -> dof index or -1
  std::vector<int> node_of_dof;      // dof -> flat node
  int n_interior = 0;

  double x(int i) const { return domain.x_lo + (i + 0.5) * hx; }
  double y(int j) const { return domain.y_lo + (j + 0.5) * hy; }
  int flat(int i, int j) const { return j * nx + i; }
  int col_of_dof(int d) const { return node_of_dof[d] % nx; }
  int row_of_dof(int d) const { return node_of_dof[d] / nx; }

  bool is_interior(int i, int j) const {
    return i >= 0 && i < nx && j >= 0 && j < ny && interior[flat(i, j)];
  }

  /// Per-column exact weight integrals W_a(i) = ∫_{cell i} |x|^{2a} dx.
  std::vector<double> column_weights(double a) const {
    if (2.0 * a <= -1.0)
      throw std::invalid_argument("Grid2D::column_weights: need 2a > -1");
    std::vector<double> w(nx);
    for (int i = 0; i < nx; ++i)
      w[i] = cell_weight_integral(a, domain.x_lo + i * hx, domain.x_lo + (i + 1) * hx);
    return w;
  }
};

inline std::shared_ptr<const Grid2D> build_grid(const DomainShape& domain, int nx, int ny,
                                                const std::vector<double>& exponents = {}) {
  if (nx < 8 || ny < 8) throw std::invalid_argument("build_grid: nx, ny >= 8 required");
  bool has_negative = false;
  for (double a : exponents) {
    if (2.0 * a <= -1.0)
      throw std::invalid_argument("build_grid: exponent with 2a <= -1 rejected (non-integrable weight)");
    if (a < 0) has_negative = true;
  }
  auto g = std::make_shared<Grid2D>();
  g->domain = domain;
  g->nx = nx;
  g->ny = ny;
  g->hx = (domain.x_hi - domain.x_lo) / nx;
  g->hy = (domain.y_hi - domain.y_lo) / ny;
  g->exponents = exponents;

  if (has_negative) {
    for (int i = 0; i < nx; ++i)
      if (std::fabs(g->x(i)) < 1e-13 * domain.diameter())
        throw std::invalid_argument(
            "build_grid: a node sits on {x=0} while a negative weight exponent is in use; "
            "change nx so cell centers stagger off the axis");
  }

  g->interior.assign(static_cast<std::size_t>(nx) * ny, 0);
  g->dof_of_node.assign(static_cast<std::size_t>(nx) * ny, -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (domain.inside(g->x(i), g->y(j))) {
        g->interior[g->flat(i, j)] = 1;
        g->dof_of_node[g->flat(i, j)] = g->n_interior++;
        g->node_of_dof.push_back(g->flat(i, j));
      }
  if (g->n_interior == 0) throw std::invalid_argument("build_grid: domain has empty interior on this grid");
  return g;
}

}  // namespace grushin

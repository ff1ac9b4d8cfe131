#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "grushin/grid_function.hpp"

namespace grushin {

/// Principal eigenpair of -Δ_G u = λ |x|^{2β} u with Dirichlet conditions.
struct EigenReport {
  double lambda1 = 0;
  GridFunction phi1;
  double residual = 0;  // ||A phi - lambda B phi||_{L2}
  int iterations = 0;
  bool converged = false;
  double k = 0, beta = 0;
  double tol = 0;
};

/// Smooth compactly supported bump: (1-t^2)^3 on |t|<1.
inline double bump_profile(double t) {
  const double s = 1.0 - t * t;
  return s > 0 ? s * s * s : 0.0;
}

/// Seeded random smooth test function: a few tensor bumps with random
/// centers, widths and signs. Vanishes near ∂Ω by construction of at().
inline GridFunction random_bump_function(std::shared_ptr<const Grid2D> grid, unsigned seed) {
  std::mt19937 rng(seed);
  const auto& dom = grid->domain;
  std::uniform_real_distribution<double> UX(dom.x_lo, dom.x_hi), UY(dom.y_lo, dom.y_hi);
  std::uniform_real_distribution<double> US(0.1, 0.4), UC(-1.0, 1.0);
  const int n_bumps = 3 + static_cast<int>(rng() % 4);
  struct Bump {
    double cx, cy, sx, sy, amp;
  };
  std::vector<Bump> bumps(n_bumps);
  for (auto& b : bumps)
    b = {UX(rng), UY(rng), US(rng) * (dom.x_hi - dom.x_lo), US(rng) * (dom.y_hi - dom.y_lo),
         UC(rng)};
  return GridFunction::sample(std::move(grid), [bumps](double x, double y) {
    double s = 0;
    for (const auto& b : bumps)
      s += b.amp * bump_profile((x - b.cx) / b.sx) * bump_profile((y - b.cy) / b.sy);
    return s;
  });
}

inline EigenReport principal_eigenpair(double k, double beta,
                                       std::shared_ptr<const Grid2D> grid, double tol = 1e-8,
                                       int max_outer = 400) {
  if (k < 0) throw std::invalid_argument("principal_eigenpair: k >= 0 required");
  if (2.0 * beta <= -1.0) throw std::invalid_argument("principal_eigenpair: 2*beta > -1 required");
  EigenReport rep;
  rep.k = k;
  rep.beta = beta;
  rep.tol = tol;

  const Grid2D& g = *grid;
  // Diagonal weighted mass: B_ii = W_beta(col)/hx (cell average of |x|^{2β}).
  const auto wb = g.column_weights(beta);
  std::vector<double> bdiag(g.n_interior);
  for (int d = 0; d < g.n_interior; ++d) bdiag[d] = wb[g.col_of_dof(d)] / g.hx;

  auto mass_norm = [&](const GridFunction& u) { return std::sqrt(weighted_inner(u, u, beta)); };

  // Positive product-bump start.
  GridFunction u = GridFunction::sample(grid, [&](double x, double y) {
    const double tx = 2.0 * (x - g.domain.x_lo) / (g.domain.x_hi - g.domain.x_lo) - 1.0;
    const double ty = 2.0 * (y - g.domain.y_lo) / (g.domain.y_hi - g.domain.y_lo) - 1.0;
    return bump_profile(tx) * bump_profile(ty);
  });
  {
    const double n0 = mass_norm(u);
    if (n0 == 0) throw std::runtime_error("principal_eigenpair: degenerate start");
    u = (1.0 / n0) * u;
  }

  double lambda = s_norm_sq(u, k);
  for (int it = 1; it <= max_outer; ++it) {
    GridFunction rhs(grid);
    for (int d = 0; d < g.n_interior; ++d) rhs.v[d] = bdiag[d] * u.v[d];
    auto sol = solve_spd(k, 0.0, 0.0, rhs, 1e-11);
    if (!sol.converged)
      throw std::runtime_error("principal_eigenpair: inner CG failed to converge");
    const double n1 = mass_norm(sol.u);
    GridFunction u_new = (1.0 / n1) * sol.u;
    const double lambda_new = s_norm_sq(u_new, k) / weighted_inner(u_new, u_new, beta);
    rep.iterations = it;
    // Require both the eigenvalue and the eigenvector to settle; the value
    // converges quadratically, so a value-only test leaves the vector loose.
    const double du = std::sqrt(weighted_inner(u_new - u, u_new - u, beta));
    const bool done = std::fabs(lambda_new - lambda) <= tol * std::fabs(lambda_new) &&
                      du <= 50.0 * tol;
    lambda = lambda_new;
    u = std::move(u_new);
    if (done) {
      rep.converged = true;
      break;
    }
  }
  rep.lambda1 = lambda;

  // Sign-fix: node of maximal |phi| positive, clamp machine-scale undershoots.
  int arg = 0;
  for (int d = 0; d < g.n_interior; ++d)
    if (std::fabs(u.v[d]) > std::fabs(u.v[arg])) arg = d;
  if (u.v[arg] < 0) u = -1.0 * u;
  for (double& x : u.v)
    if (x < 0 && x >= -1e-10) x = 0;
  u = (1.0 / mass_norm(u)) * u;

  // Recomputed residual ||A phi - lambda B phi||_{L2}.
  GridFunction r = apply_grushin(u, k);
  for (int d = 0; d < g.n_interior; ++d) r.v[d] -= lambda * bdiag[d] * u.v[d];
  rep.residual = l2_norm(r);
  rep.phi1 = std::move(u);
  return rep;
}

/// Max over seeded random smooth test functions phi of the normalized weak
/// form defect |a(phi, phi1) - lambda1 (phi, phi1)_{L2_beta}|.
inline double weak_form_residual(const EigenReport& rep, int trial_count, unsigned seed) {
  const double phi1_s = std::sqrt(s_norm_sq(rep.phi1, rep.k));
  double worst = 0;
  for (int t = 0; t < trial_count; ++t) {
    GridFunction phi = random_bump_function(rep.phi1.grid, seed + 1000 * t);
    const double phi_s = std::sqrt(s_norm_sq(phi, rep.k));
    if (phi_s == 0) continue;
    const double defect = s_inner(phi, rep.phi1, rep.k) -
                          rep.lambda1 * weighted_inner(phi, rep.phi1, rep.beta);
    worst = std::max(worst, std::fabs(defect) / (phi_s * phi1_s));
  }
  return worst;
}

}  // namespace grushin

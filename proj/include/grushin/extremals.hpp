#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grushin/grid_function.hpp"
#include "grushin/quadrature.hpp"

namespace grushin {

/// p = (4+5k)/k, the critical power for |x|^{2k} u^p.
inline double critical_exponent(double k) {
  if (!(k >= 1.0)) throw std::invalid_argument("critical_exponent: k >= 1 required");
  return (4.0 + 5.0 * k) / k;
}

/// Anisotropic radius r = (|x|^{2(k+1)} + (k+1)^2 y^2)^{1/2}.
inline double homogeneous_radius(double x, double y, double k) {
  return std::sqrt(std::pow(std::fabs(x), 2.0 * (k + 1.0)) + (k + 1.0) * (k + 1.0) * y * y);
}

struct ExtremalSpec {
  double k;
  double eps;
  ExtremalSpec(double k_, double eps_) : k(k_), eps(eps_) {
    if (!(eps > 0)) throw std::invalid_argument("ExtremalSpec: eps > 0 required");
    if (!(k >= 1)) throw std::invalid_argument("ExtremalSpec: k >= 1 required");
  }
};

/// U_eps(x,y) = (eps^2 + r^2)^{-k/(2(k+1))}.
inline double extremal_U(const ExtremalSpec& s, double x, double y) {
  const double r = homogeneous_radius(x, y, s.k);
  return std::pow(s.eps * s.eps + r * r, -s.k / (2.0 * (s.k + 1.0)));
}

/// Angular factor of the polar reduction: with x = (r cos t)^{1/(k+1)},
/// y = r sin t / (k+1), every whole-plane integral of |x|^{2k} g(r) equals
/// angular_factor(k) * ∫_0^inf g(r) r^{(2k+1)/(k+1)} dr.
inline double angular_factor(double k) {
  const double e = k / (k + 1.0);
  auto f = [e](double t) { return std::pow(std::cos(t), e); };
  // cos^e is only Hoelder at t = pi/2; geometric panels toward the endpoint
  // restore spectral accuracy of the Gauss rule.
  double integral = 0;
  double a = M_PI / 2;
  for (int j = 0; j < 64; ++j) {
    const double b = a * 0.5;
    integral += gauss16(f, M_PI / 2 - a, M_PI / 2 - b);
    a = b;
  }
  return 2.0 * (2.0 / ((k + 1.0) * (k + 1.0))) * integral;
}

struct RadialValue {
  double value = 0;
  double error_bar = 0;  // truncation bracket + resolution difference
};

namespace detail {

// ∫_0^inf r^c (eps^2+r^2)^{-b} dr by panelled Gauss-Legendre on [0, r_max]
// (panels geometric in r from the eps scale) plus a bracketed analytic tail.
inline RadialValue radial_integral(double c, double b, double eps, int resolution, double r_max) {
  if (2.0 * b - c - 1.0 <= 0) throw std::invalid_argument("radial_integral: divergent integral");
  if (!(r_max > eps)) throw std::invalid_argument("radial_integral: r_max > eps required");
  auto f = [c, b, eps](double r) {
    return std::pow(r, c) * std::pow(eps * eps + r * r, -b);
  };
  auto integrate = [&](int res) {
    // r^c is only Hoelder at r = 0; grade the first panel geometrically.
    double s = 0;
    double a = eps;
    for (int j = 0; j < 64; ++j) {
      const double b_lo = a * 0.5;
      s += gauss16_composite(f, b_lo, a, std::max(1, res / 8));
      a = b_lo;
    }
    double lo = eps;
    while (lo < r_max) {
      const double hi = std::min(2.0 * lo, r_max);
      s += gauss16_composite(f, lo, hi, res);
      lo = hi;
    }
    return s;
  };
  const double coarse = integrate(std::max(1, resolution / 2));
  const double fine = integrate(resolution);
  // tail bracket: (eps^2+r^2)^{-b} in [ (1+eps^2/rmax^2)^{-b} r^{-2b}, r^{-2b} ]
  const double tail_hi = std::pow(r_max, c - 2.0 * b + 1.0) / (2.0 * b - c - 1.0);
  const double tail_lo = tail_hi * std::pow(1.0 + eps * eps / (r_max * r_max), -b);
  RadialValue out;
  out.value = fine + 0.5 * (tail_lo + tail_hi);
  out.error_bar = std::fabs(fine - coarse) + 0.5 * (tail_hi - tail_lo);
  return out;
}

}  // namespace detail

/// Whole-plane integrals of the extremal family, radial path:
///   grad: ∫ |∇_G U_eps|^2,  pow: ∫ |x|^{2k} U_eps^{p+1}.
struct ExtremalIntegrals {
  RadialValue grad;
  RadialValue pow;
};

inline ExtremalIntegrals extremal_integrals(double k, double eps, int resolution = 64,
                                            double r_max = 100.0) {
  const double a = (2.0 * k + 1.0) / (k + 1.0);
  const double b = (2.0 + 3.0 * k) / (k + 1.0);
  const double ang = angular_factor(k);
  ExtremalIntegrals out;
  // |∇_G U|^2 = (k+1)^2 |x|^{2k} Phi'(r)^2 with Phi' = -k/(k+1) r (eps^2+r^2)^{-k/(2(k+1))-1}
  out.grad = detail::radial_integral(a + 2.0, b, eps, resolution, r_max);
  out.grad.value *= k * k * ang;
  out.grad.error_bar *= k * k * ang;
  out.pow = detail::radial_integral(a, b, eps, resolution, r_max);
  out.pow.value *= ang;
  out.pow.error_bar *= ang;
  return out;
}

/// Sobolev quotient Q(u) = ||u||_S^2 / ||u||_{L^{p+1}_k}^2, radial path.
inline RadialValue sobolev_quotient_radial(double k, double eps, int resolution = 64,
                                           double r_max = 100.0) {
  const double p = critical_exponent(k);
  const auto I = extremal_integrals(k, eps, resolution, r_max);
  RadialValue q;
  const double denom = std::pow(I.pow.value, 2.0 / (p + 1.0));
  q.value = I.grad.value / denom;
  const double rel = I.grad.error_bar / I.grad.value +
                     (2.0 / (p + 1.0)) * I.pow.error_bar / I.pow.value;
  q.error_bar = q.value * rel;
  return q;
}

/// Sobolev quotient of a grid competitor (zero-extended to the plane).
inline double sobolev_quotient(const GridFunction& u, double k) {
  const double p = critical_exponent(k);
  const double denom = norm_Lqbeta(u, p + 1.0, k);
  if (denom == 0) throw std::invalid_argument("sobolev_quotient: u must be nonzero");
  return s_norm_sq(u, k) / (denom * denom);
}

/// Best-constant estimate S = Q(U_1) with truncation/resolution error bars,
/// cross-checked at two resolutions.
struct SEstimate {
  double value = 0;
  double error_bar = 0;
  double r_max = 0;
  int resolution = 0;
};

inline SEstimate estimate_S(double k, int resolution = 64, double r_max = 100.0) {
  const auto q1 = sobolev_quotient_radial(k, 1.0, resolution, r_max);
  const auto q2 = sobolev_quotient_radial(k, 1.0, 2 * resolution, 2.0 * r_max);
  SEstimate s;
  s.value = q2.value;
  s.error_bar = std::max(q2.error_bar, std::fabs(q2.value - q1.value));
  s.r_max = r_max;
  s.resolution = resolution;
  if (s.error_bar > 1e-4 * s.value)
    throw std::runtime_error("estimate_S: truncation error too large, increase r_max");
  return s;
}

/// Largest R such that the bounding box of the anisotropic ball
/// B_R = {r(x, y-yc) < R} is contained in the domain.
inline double max_ball_radius(const DomainShape& dom, double k, double yc = 0.0) {
  auto box_inside = [&](double R) {
    const double wx = std::pow(R, 1.0 / (k + 1.0));
    const double wy = R / (k + 1.0);
    if (dom.kind == DomainShape::Kind::rectangle)
      return -wx > dom.x_lo && wx < dom.x_hi && yc - wy > dom.y_lo && yc + wy < dom.y_hi;
    // corner check (exact for convex ellipses, sampled for indicators)
    for (double sx : {-1.0, 1.0})
      for (double sy : {-1.0, 1.0})
        if (!dom.inside(sx * wx, yc + sy * wy)) return false;
    if (dom.kind == DomainShape::Kind::indicator) {
      for (int i = 0; i <= 16; ++i)
        for (int j = 0; j <= 16; ++j)
          if (!dom.inside(-wx + 2 * wx * i / 16.0, yc - wy + 2 * wy * j / 16.0)) return false;
    }
    return true;
  };
  double lo = 0.0, hi = std::pow(dom.diameter(), k + 1.0) + (k + 1.0) * dom.diameter();
  if (!box_inside(1e-9 * dom.diameter())) return 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (box_inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// C^1 cubic ramp: 1 on [0,R], smoothstep down to 0 at Rc.
inline double cutoff_profile(double r, double R, double Rc) {
  if (r <= R) return 1.0;
  if (r >= Rc) return 0.0;
  const double t = (r - R) / (Rc - R);
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

/// u_eps = phi(r) U_eps sampled on the grid; phi = 1 in B_R, 0 outside
/// B_{Rc}, Rc = min(2R, largest inscribed ball radius).
inline GridFunction cutoff_family(double eps, double R, std::shared_ptr<const Grid2D> grid,
                                  double k, double yc = 0.0) {
  const double R_dom = max_ball_radius(grid->domain, k, yc);
  if (!(R > 0) || R >= R_dom)
    throw std::invalid_argument("cutoff_family: B_R does not fit inside the domain");
  if (!(eps > 0)) throw std::invalid_argument("cutoff_family: eps > 0 required");
  const double Rc = std::min(2.0 * R, R_dom);
  const ExtremalSpec spec(k, eps);
  return GridFunction::sample(std::move(grid), [=](double x, double y) {
    const double r = homogeneous_radius(x, y - yc, k);
    const double phi = cutoff_profile(r, R, Rc);
    return phi == 0.0 ? 0.0 : phi * extremal_U(spec, x, y - yc);
  });
}

enum class L2BetaRegime { supercritical /*k>2(β+1)*/, log /*k=2(β+1)*/, bounded /*k<2(β+1)*/ };

inline L2BetaRegime classify_l2beta_regime(double k, double beta) {
  const double d = k - 2.0 * (beta + 1.0);
  if (std::fabs(d) < 1e-12) return L2BetaRegime::log;
  return d > 0 ? L2BetaRegime::supercritical : L2BetaRegime::bounded;
}

/// Offset-robust power fit f(eps) = B + A eps^s for a geometric eps list:
/// the ratio of consecutive differences is q^s.  Returns NaN when the list
/// is not geometric or the differences are degenerate.
inline double diff_power_slope(const std::vector<double>& eps, const std::vector<double>& f) {
  if (eps.size() != f.size() || eps.size() < 3) return std::nan("");
  const double q = eps[1] / eps[0];
  for (std::size_t i = 1; i + 1 < eps.size(); ++i)
    if (std::fabs(eps[i + 1] / eps[i] - q) > 1e-6 * q) return std::nan("");
  double sum = 0;
  int n = 0;
  for (std::size_t i = 0; i + 2 < eps.size(); ++i) {
    const double d1 = f[i + 1] - f[i], d2 = f[i + 2] - f[i + 1];
    if (d1 == 0 || d2 / d1 <= 0) return std::nan("");
    sum += std::log(d2 / d1) / std::log(q);
    ++n;
  }
  return sum / n;
}

struct AsymptoticsReport {
  std::vector<double> eps;           // strictly decreasing, resolved entries only
  std::vector<double> excluded_eps;  // under-resolved, left out of the fits
  std::vector<double> s2_sq, lp_sq, l2b_sq;  // squared norms per eps
  double slope_s2 = 0, slope_lp = 0, slope_l2b = 0;
  // offset-robust exponents (geometric eps lists only, else NaN)
  double diff_slope_s2 = 0, diff_slope_lp = 0, diff_slope_l2b = 0;
  double r2_s2 = 0, r2_lp = 0, r2_l2b = 0;
  double log_coeff_l2b = 0;  // slope of l2b_sq vs |ln eps| in the log regime
  L2BetaRegime regime = L2BetaRegime::bounded;
  bool under_resolved = false;
  double k = 0, beta = 0, R = 0;
};

/// Squared norms of the cutoff family over an eps sweep with log-log slope
/// fits.  Entries with h_y > eps/8 (or h_x > eps^{1/(k+1)}/8) are excluded.
inline AsymptoticsReport asymptotic_slopes(double k, double beta,
                                           const std::vector<double>& eps_list,
                                           std::shared_ptr<const Grid2D> grid,
                                           double R = 0.0) {
  if (eps_list.size() < 3) throw std::invalid_argument("asymptotic_slopes: need >= 3 scales");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("asymptotic_slopes: eps list must be strictly decreasing");
  const double p = critical_exponent(k);
  AsymptoticsReport rep;
  rep.k = k;
  rep.beta = beta;
  rep.regime = classify_l2beta_regime(k, beta);
  const double R_dom = max_ball_radius(grid->domain, k);
  rep.R = R > 0 ? R : 0.6 * R_dom;

  for (double eps : eps_list) {
    const bool resolved =
        grid->hy <= eps / 8.0 && grid->hx <= std::pow(eps, 1.0 / (k + 1.0)) / 8.0;
    if (!resolved) {
      rep.excluded_eps.push_back(eps);
      continue;
    }
    GridFunction u = cutoff_family(eps, rep.R, grid, k);
    rep.eps.push_back(eps);
    rep.s2_sq.push_back(s_norm_sq(u, k));
    const double np = norm_Lqbeta(u, p + 1.0, k);
    rep.lp_sq.push_back(np * np);
    const double nb = norm_Lqbeta(u, 2.0, beta);
    rep.l2b_sq.push_back(nb * nb);
  }
  if (rep.eps.size() < 3) {
    rep.under_resolved = true;
    return rep;
  }
  std::vector<double> lx, labs;
  for (double e : rep.eps) {
    lx.push_back(std::log(e));
    labs.push_back(std::fabs(std::log(e)));
  }
  auto logv = [](const std::vector<double>& v) {
    std::vector<double> o;
    for (double x : v) o.push_back(std::log(x));
    return o;
  };
  rep.slope_s2 = ls_slope(lx, logv(rep.s2_sq));
  rep.r2_s2 = ls_r2(lx, logv(rep.s2_sq));
  rep.slope_lp = ls_slope(lx, logv(rep.lp_sq));
  rep.r2_lp = ls_r2(lx, logv(rep.lp_sq));
  rep.slope_l2b = ls_slope(lx, logv(rep.l2b_sq));
  rep.r2_l2b = ls_r2(lx, logv(rep.l2b_sq));
  rep.log_coeff_l2b = ls_slope(labs, rep.l2b_sq);
  rep.diff_slope_s2 = diff_power_slope(rep.eps, rep.s2_sq);
  rep.diff_slope_lp = diff_power_slope(rep.eps, rep.lp_sq);
  rep.diff_slope_l2b = diff_power_slope(rep.eps, rep.l2b_sq);
  return rep;
}

/// Expected decay exponent of ||v_eps||^{q+1}_{L^{q+1}_beta} off the log
/// branch (the smaller exponent dominates as eps -> 0).
inline double q_decay_exponent(double k, double beta, double q) {
  const double p = critical_exponent(k);
  const double e1 = (q + 1.0) * k / (2.0 * (k + 1.0));
  const double e2 = k * ((p - 1.0) * (beta + 1.0) - (q - 1.0) * (k + 1.0)) /
                    (2.0 * (k + 1.0) * (k + 1.0));
  return std::min(e1, e2);
}

struct QFamilyReport {
  std::vector<double> eps;
  std::vector<double> vq;       // ||v_eps||^{q+1}_{L^{q+1}_beta}
  std::vector<double> lp_norm;  // ||v_eps||_{L^{p+1}_k} (should be 1)
  double slope = 0;             // fitted log-log slope of vq
  double r2 = 0;
  bool log_branch = false;      // 2beta+2 == q k
  bool vanishing_condition = false;  // 2k(q-1)+q < 2beta(p-1)+p
  bool under_resolved = false;
};

inline QFamilyReport q_family_decay(double k, double beta, double q,
                                    const std::vector<double>& eps_list,
                                    std::shared_ptr<const Grid2D> grid, double R = 0.0) {
  const double p = critical_exponent(k);
  if (!(q > 1 && q < p)) throw std::invalid_argument("q_family_decay: need 1 < q < p");
  QFamilyReport rep;
  rep.log_branch = std::fabs(2.0 * beta + 2.0 - q * k) < 1e-12;
  rep.vanishing_condition = 2.0 * k * (q - 1.0) + q < 2.0 * beta * (p - 1.0) + p;
  const double R_dom = max_ball_radius(grid->domain, k);
  const double R_use = R > 0 ? R : 0.6 * R_dom;
  for (double eps : eps_list) {
    const bool resolved =
        grid->hy <= eps / 8.0 && grid->hx <= std::pow(eps, 1.0 / (k + 1.0)) / 8.0;
    if (!resolved) continue;
    GridFunction u = cutoff_family(eps, R_use, grid, k);
    const double np = norm_Lqbeta(u, p + 1.0, k);
    GridFunction v = (1.0 / np) * u;
    rep.eps.push_back(eps);
    rep.lp_norm.push_back(norm_Lqbeta(v, p + 1.0, k));
    rep.vq.push_back(std::pow(norm_Lqbeta(v, q + 1.0, beta), q + 1.0));
  }
  if (rep.eps.size() < 3) {
    rep.under_resolved = true;
    return rep;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    lx.push_back(std::log(rep.eps[i]));
    ly.push_back(std::log(rep.vq[i]));
  }
  rep.slope = ls_slope(lx, ly);
  rep.r2 = ls_r2(lx, ly);
  return rep;
}

}  // namespace grushin

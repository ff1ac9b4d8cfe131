#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "grushin/quadrature.hpp"

namespace grushin {

/// Bounded open planar domain: an axis-aligned rectangle, an ellipse, or a
/// general indicator function over a bounding box. Rectangles and ellipses
/// carry a boundary parameterization; indicator domains support interior
/// quadrature only.
struct DomainShape {
  enum class Kind { rectangle, ellipse, indicator };

  Kind kind = Kind::rectangle;
  // Bounding box (the domain itself for rectangles).
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  // Ellipse data.
  double cx = 0, cy = 0, ax = 1, ay = 1;
  std::function<bool(double, double)> indicator_fn;
  // Hint for default boundary sample counts.
  int boundary_resolution = 256;

  static DomainShape rectangle(double x_lo, double x_hi, double y_lo, double y_hi) {
    if (!(x_lo < x_hi) || !(y_lo < y_hi))
      throw std::invalid_argument("DomainShape::rectangle: degenerate bounds");
    DomainShape d;
    d.kind = Kind::rectangle;
    d.x_lo = x_lo;
    d.x_hi = x_hi;
    d.y_lo = y_lo;
    d.y_hi = y_hi;
    return d;
  }

  static DomainShape ellipse(double cx, double cy, double ax, double ay) {
    if (!(ax > 0) || !(ay > 0)) throw std::invalid_argument("DomainShape::ellipse: semi-axes must be positive");
    DomainShape d;
    d.kind = Kind::ellipse;
    d.cx = cx;
    d.cy = cy;
    d.ax = ax;
    d.ay = ay;
    d.x_lo = cx - ax;
    d.x_hi = cx + ax;
    d.y_lo = cy - ay;
    d.y_hi = cy + ay;
    return d;
  }

  static DomainShape indicator(double x_lo, double x_hi, double y_lo, double y_hi,
                               std::function<bool(double, double)> inside) {
    if (!(x_lo < x_hi) || !(y_lo < y_hi))
      throw std::invalid_argument("DomainShape::indicator: degenerate bounding box");
    DomainShape d;
    d.kind = Kind::indicator;
    d.x_lo = x_lo;
    d.x_hi = x_hi;
    d.y_lo = y_lo;
    d.y_hi = y_hi;
    d.indicator_fn = std::move(inside);
    return d;
  }

  bool inside(double x, double y) const {
    switch (kind) {
      case Kind::rectangle:
        return x > x_lo && x < x_hi && y > y_lo && y < y_hi;
      case Kind::ellipse: {
        const double u = (x - cx) / ax, v = (y - cy) / ay;
        return u * u + v * v < 1.0;
      }
      case Kind::indicator:
        return indicator_fn(x, y);
    }
    return false;
  }

  bool has_boundary_param() const { return kind != Kind::indicator; }

  double diameter() const { return std::hypot(x_hi - x_lo, y_hi - y_lo); }

  /// Whether the closure of the domain intersects the degeneracy line {x=0},
  /// decided from the bounding box and (for indicator domains) by sampling.
  bool meets_x_axis() const {
    if (x_lo > 0 || x_hi < 0) return false;
    if (kind == Kind::rectangle) return true;
    if (kind == Kind::ellipse) return std::fabs(cx) <= ax;
    const int m = 512;
    for (int j = 0; j <= m; ++j) {
      const double y = y_lo + (y_hi - y_lo) * j / m;
      if (indicator_fn(0.0, y)) return true;
    }
    return false;
  }
};

/// One boundary quadrature point: location, outward unit normal, arclength weight.
struct BoundarySample {
  double x, y;
  double nu1, nu2;
  double ds;
};

/// Closed-form ∫_{x_lo}^{x_hi} |x|^{2a} dx.  Requires 2a > -1 so the weight
/// is integrable across x = 0; exact for cells straddling the origin.
inline double cell_weight_integral(double a, double x_lo, double x_hi) {
  if (2.0 * a <= -1.0)
    throw std::invalid_argument("cell_weight_integral: need 2a > -1 for an integrable weight");
  if (!(x_lo < x_hi)) throw std::invalid_argument("cell_weight_integral: need x_lo < x_hi");
  const double e = 2.0 * a + 1.0;
  auto antider = [e](double x) {
    // |x|^{2a+1} sign(x) / (2a+1)
    return std::copysign(std::pow(std::fabs(x), e), x) / e;
  };
  return antider(x_hi) - antider(x_lo);
}

/// Boundary samples (midpoint rule in the parameter) for rectangle and
/// ellipse domains. Total ds converges to |∂Ω| as m grows.
inline std::vector<BoundarySample> boundary_samples(const DomainShape& domain, int m) {
  if (m < 16) throw std::invalid_argument("boundary_samples: m >= 16 required");
  if (!domain.has_boundary_param())
    throw std::invalid_argument("boundary_samples: unsupported for boundary integrals (indicator domain has no parameterization)");
  std::vector<BoundarySample> out;
  out.reserve(static_cast<std::size_t>(m));
  if (domain.kind == DomainShape::Kind::rectangle) {
    const double lx = domain.x_hi - domain.x_lo, ly = domain.y_hi - domain.y_lo;
    const double per = 2.0 * (lx + ly);
    // Distribute samples proportionally to edge length; at least one per edge.
    auto edge = [&](double px, double py, double qx, double qy, double n1, double n2) {
      const double len = std::hypot(qx - px, qy - py);
      const int me = std::max(1, static_cast<int>(std::lround(m * len / per)));
      for (int i = 0; i < me; ++i) {
        const double t = (i + 0.5) / me;
        out.push_back({px + t * (qx - px), py + t * (qy - py), n1, n2, len / me});
      }
    };
    edge(domain.x_lo, domain.y_lo, domain.x_hi, domain.y_lo, 0, -1);
    edge(domain.x_hi, domain.y_lo, domain.x_hi, domain.y_hi, 1, 0);
    edge(domain.x_hi, domain.y_hi, domain.x_lo, domain.y_hi, 0, 1);
    edge(domain.x_lo, domain.y_hi, domain.x_lo, domain.y_lo, -1, 0);
  } else {
    // Ellipse (cx + ax cos t, cy + ay sin t); midpoint rule in t with the
    // exact arclength density |gamma'(t)|.
    for (int i = 0; i < m; ++i) {
      const double t = 2.0 * M_PI * (i + 0.5) / m;
      const double ct = std::cos(t), st = std::sin(t);
      const double x = domain.cx + domain.ax * ct, y = domain.cy + domain.ay * st;
      const double gx = -domain.ax * st, gy = domain.ay * ct;
      const double speed = std::hypot(gx, gy);
      // Outward normal from the gradient of the implicit equation.
      double n1 = ct / domain.ax, n2 = st / domain.ay;
      const double nn = std::hypot(n1, n2);
      out.push_back({x, y, n1 / nn, n2 / nn, speed * 2.0 * M_PI / m});
    }
  }
  return out;
}

struct StarshapeReport {
  double min_t_dot_nu = 0;
  bool g_starshaped = false;
  bool strictly = false;
  double eps0 = 0;             // certified lower bound when strictly starshaped
  double worst_x = 0, worst_y = 0;
  double tol = 0;
};

/// Minimum of T.nu over boundary samples with T = (x, (1+k)y).
inline StarshapeReport starshape_check(const DomainShape& domain, double k, int m) {
  const auto samples = boundary_samples(domain, m);
  StarshapeReport rep;
  rep.min_t_dot_nu = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    const double t_dot_nu = s.x * s.nu1 + (1.0 + k) * s.y * s.nu2;
    if (t_dot_nu < rep.min_t_dot_nu) {
      rep.min_t_dot_nu = t_dot_nu;
      rep.worst_x = s.x;
      rep.worst_y = s.y;
    }
  }
  rep.tol = 1e-10 * domain.diameter();
  rep.g_starshaped = rep.min_t_dot_nu >= -rep.tol;
  rep.strictly = rep.min_t_dot_nu > rep.tol;
  rep.eps0 = rep.strictly ? rep.min_t_dot_nu : 0.0;
  return rep;
}

}  // namespace grushin

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grushin/solver.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Pohozaev identity evaluation
// ---------------------------------------------------------------------------

struct PohozaevReport {
  double lhs = 0;  // boundary integral
  double rhs = 0;  // volume integral
  double gap = 0;  // |lhs - rhs| / max(|lhs|, |rhs|, floor)
  int samples = 0;
  int nx = 0, ny = 0;
};

/// Second-order one-sided normal derivative at a homogeneous Dirichlet
/// boundary point: with u(b) = 0,
///   du/dnu ~ -(4 u(b - delta nu) - u(b - 2 delta nu)) / (2 delta),
/// values taken by bilinear interpolation from interior nodes.
inline double normal_derivative(const GridFunction& u, const BoundarySample& b, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("normal_derivative: delta > 0 required");
  const double u1 = interpolate(u, b.x - delta * b.nu1, b.y - delta * b.nu2);
  const double u2 = interpolate(u, b.x - 2.0 * delta * b.nu1, b.y - 2.0 * delta * b.nu2);
  return -(4.0 * u1 - u2) / (2.0 * delta);
}

namespace detail {

/// (1/2) oint (T.nu)(nu1^2 + |x|^{2k} nu2^2) |du/dnu|^2 ds with T = (x, (1+k)y).
inline double pohozaev_boundary_integral(const GridFunction& u, double k, int m, int& samples) {
  const Grid2D& g = *u.grid;
  if (!g.domain.has_boundary_param())
    throw std::invalid_argument(
        "pohozaev: unsupported for boundary integrals (indicator domain has no parameterization)");
  const auto bs = boundary_samples(g.domain, m);
  samples = static_cast<int>(bs.size());
  const double delta = 2.0 * std::max(g.hx, g.hy);
  double acc = 0;
  for (const auto& b : bs) {
    const double t_dot_nu = b.x * b.nu1 + (1.0 + k) * b.y * b.nu2;
    const double w = b.nu1 * b.nu1 + std::pow(std::fabs(b.x), 2.0 * k) * b.nu2 * b.nu2;
    const double dn = normal_derivative(u, b, delta);
    acc += t_dot_nu * w * dn * dn * b.ds;
  }
  return 0.5 * acc;
}

inline PohozaevReport make_pohozaev_report(double lhs, double rhs, int samples, const Grid2D& g) {
  PohozaevReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.samples = samples;
  rep.nx = g.nx;
  rep.ny = g.ny;
  const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
  const double floor = 1e-14 * scale;
  rep.gap = std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), floor});
  return rep;
}

}  // namespace detail

/// Case 1 identity:
///   (1/2) oint (T.nu)(nu1^2 + |x|^{2k} nu2^2) |du/dnu|^2 ds
///     = lambda (1 + beta) int |x|^{2 beta} u^2.
inline PohozaevReport pohozaev_case1(const GridFunction& u, const ProblemSpec& spec, int m = 0) {
  if (spec.tag != CaseTag::case1) throw std::invalid_argument("pohozaev_case1: Case 1 spec required");
  spec.validate();
  const Grid2D& g = *u.grid;
  if (m <= 0) m = 4 * (g.nx + g.ny);
  int samples = 0;
  const double lhs = detail::pohozaev_boundary_integral(u, spec.k, m, samples);
  const double rhs = spec.lambda * (1.0 + spec.beta) * weighted_inner(u, u, spec.beta);
  return detail::make_pohozaev_report(lhs, rhs, samples, g);
}

/// Case 2 identity (h = 0 only): same boundary integral,
///   rhs = mu [4(beta+1) - (q-1)k] / (2(q+1)) int |x|^{2 beta} |u|^{q+1}.
inline PohozaevReport pohozaev_case2(const GridFunction& u, const ProblemSpec& spec, int m = 0) {
  if (spec.tag != CaseTag::case2) throw std::invalid_argument("pohozaev_case2: Case 2 spec required");
  if (!spec.nl.zero()) throw std::invalid_argument("pohozaev_case2: unsupported for h != 0");
  spec.validate();
  const Grid2D& g = *u.grid;
  if (m <= 0) m = 4 * (g.nx + g.ny);
  int samples = 0;
  const double lhs = detail::pohozaev_boundary_integral(u, spec.k, m, samples);
  const double bracket = 4.0 * (spec.beta + 1.0) - (spec.q - 1.0) * spec.k;
  const double qq = spec.q;
  const double vol = detail::weighted_sum(u, spec.beta, [qq](double v) {
    return std::pow(std::fabs(v), qq + 1.0);
  });
  const double rhs = spec.mu * bracket / (2.0 * (spec.q + 1.0)) * vol;
  return detail::make_pohozaev_report(lhs, rhs, samples, g);
}

// ---------------------------------------------------------------------------
// Inequality harness
// ---------------------------------------------------------------------------

/// Interpolation ratio ||u||_{L^q_beta} / (||u||^theta_{L^q1_b1} ||u||^{1-theta}_{L^q2_b2})
/// where q and beta are derived from 1/q = theta/q1 + (1-theta)/q2 and
/// beta/q = theta b1/q1 + (1-theta) b2/q2.  Should not exceed 1 up to
/// quadrature slack (the pairing uses one cell-exact weight per norm).
inline double interpolation_check(const GridFunction& u, double q1, double b1, double q2,
                                  double b2, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("interpolation_check: theta in [0,1] required");
  if (q1 < 1.0 || q2 < 1.0) throw std::invalid_argument("interpolation_check: q1, q2 >= 1 required");
  if (2.0 * b1 <= -1.0 || 2.0 * b2 <= -1.0)
    throw std::invalid_argument("interpolation_check: 2*beta_i > -1 required");
  const double inv_q = theta / q1 + (1.0 - theta) / q2;
  const double q = 1.0 / inv_q;
  const double beta = q * (theta * b1 / q1 + (1.0 - theta) * b2 / q2);
  if (2.0 * beta <= -1.0)
    throw std::invalid_argument("interpolation_check: derived weight not integrable (2*beta <= -1)");
  const double num = norm_Lqbeta(u, q, beta);
  if (num == 0.0) return 0.0;
  const double den =
      std::pow(norm_Lqbeta(u, q1, b1), theta) * std::pow(norm_Lqbeta(u, q2, b2), 1.0 - theta);
  return num / den;
}

struct HardyReport {
  double near = 0;        // int_{|x|<eps} |x|^{2 beta} u^2
  double far = 0;         // int_{|x|>=eps} |x|^{2 beta} u^2
  double bound = 0;       // eps^{gamma+2 beta} int_Omega u^2 / |x|^gamma
  double hardy_ratio = 0;  // (int u^2 / |x|^gamma) / ||u||_S^2  (empirical C_{Omega,gamma})
  double s_norm_sq = 0;
  bool holds = false;      // near <= bound (exact at the quadrature level)
};

/// Split of the weighted mass near the degeneracy line:
///   int_{|x|<eps} |x|^{2 beta} u^2 <= eps^{gamma+2 beta} int_Omega u^2/|x|^gamma,
/// valid cell-by-cell since |x|^{gamma+2 beta} <= eps^{gamma+2 beta} on |x|<eps.
/// The empirical constant pairs the right integral against ||u||_S^2.
inline HardyReport hardy_check(const GridFunction& u, double gamma, double eps, double beta,
                               double k) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("hardy_check: gamma in (0,1) required");
  if (!(gamma + 2.0 * beta > 0.0))
    throw std::invalid_argument("hardy_check: gamma + 2*beta > 0 required");
  if (!(eps > 0.0)) throw std::invalid_argument("hardy_check: eps > 0 required");
  if (2.0 * beta <= -1.0) throw std::invalid_argument("hardy_check: 2*beta > -1 required");
  const Grid2D& g = *u.grid;
  HardyReport rep;
  // Per-column cell-exact weight integrals clipped to {|x| < eps}.
  std::vector<double> w_near(g.nx, 0.0), w_full(g.nx, 0.0);
  for (int i = 0; i < g.nx; ++i) {
    const double lo = g.domain.x_lo + i * g.hx, hi = lo + g.hx;
    w_full[i] = cell_weight_integral(beta, lo, hi);
    const double clo = std::max(lo, -eps), chi = std::min(hi, eps);
    if (clo < chi) w_near[i] = cell_weight_integral(beta, clo, chi);
  }
  const auto w_gamma = g.column_weights(-gamma / 2.0);  // |x|^{-gamma} cell integrals
  double inv_gamma_mass = 0;
  for (int d = 0; d < g.n_interior; ++d) {
    const int i = g.col_of_dof(d);
    const double u2 = u.v[d] * u.v[d];
    rep.near += w_near[i] * u2;
    rep.far += (w_full[i] - w_near[i]) * u2;
    inv_gamma_mass += w_gamma[i] * u2;
  }
  rep.near *= g.hy;
  rep.far *= g.hy;
  inv_gamma_mass *= g.hy;
  rep.bound = std::pow(eps, gamma + 2.0 * beta) * inv_gamma_mass;
  rep.s_norm_sq = s_norm_sq(u, k);
  rep.hardy_ratio = rep.s_norm_sq > 0 ? inv_gamma_mass / rep.s_norm_sq : 0.0;
  rep.holds = rep.near <= rep.bound * (1.0 + 1e-12) + 1e-300;
  return rep;
}

/// ||u||_{L^{s,infty}_k} = sup_{lambda>0} lambda (int_{|u|>lambda} |x|^{2k})^{1/s}.
/// The sup over lambda is attained in the limit lambda -> v^- at one of the
/// distinct values v of |u|, where the superlevel set is {|u| >= v}.
inline double weak_lorentz_norm(const GridFunction& u, double s, double k) {
  if (!(s > 0.0)) throw std::invalid_argument("weak_lorentz_norm: s > 0 required");
  const Grid2D& g = *u.grid;
  const auto wk = g.column_weights(k);
  std::vector<std::pair<double, double>> level;  // (|u|, cell measure)
  level.reserve(u.v.size());
  for (int d = 0; d < g.n_interior; ++d) {
    const double a = std::fabs(u.v[d]);
    if (a > 0.0) level.emplace_back(a, wk[g.col_of_dof(d)] * g.hy);
  }
  std::sort(level.begin(), level.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0, mass = 0;
  for (std::size_t i = 0; i < level.size(); ++i) {
    mass += level[i].second;
    if (i + 1 < level.size() && level[i + 1].first == level[i].first) continue;
    best = std::max(best, level[i].first * std::pow(mass, 1.0 / s));
  }
  return best;
}

/// theta = (q0 + 1 - s) p / ((p - s)(q0 + 1)).
inline double teq_theta(double p, double q0, double s) {
  return (q0 + 1.0 - s) * p / ((p - s) * (q0 + 1.0));
}

struct TeqReport {
  double theta = 0;
  double lhs = 0;      // ||u||^{q+1}_{L^{q+1}_beta}
  double factor_p = 0;  // (int |x|^{2k} |u|^p)^{theta (q+1)/p}
  double factor_w = 0;  // ||u||^{(1-theta)(q+1)}_{L^{s,infty}_k}
  double ratio = 0;     // lhs / (factor_p * factor_w): the required constant C_s
};

/// Interpolation-against-weak-norm ratio behind the truncation estimate:
///   ||u||^{q+1}_{L^{q+1}_beta} <= C_s (int |x|^{2k}|u|^p)^{theta(q+1)/p}
///                                      ||u||^{(1-theta)(q+1)}_{L^{s,infty}_k}.
/// Admissibility checks name the violated condition.
inline TeqReport teq_ratio(const GridFunction& u, double q, double q0, double s, double beta,
                           double k) {
  const double p = critical_exponent(k);
  if (!(beta > -0.5)) throw std::invalid_argument("teq_ratio: beta > -1/2 violated");
  if (!(q >= 1.0 && q < p - 2.0))
    throw std::invalid_argument("teq_ratio: 1 <= q < p-2 violated");
  if (!((p - 1.0) * (beta + 0.5) > (q + 1.0) * (k + 0.5)))
    throw std::invalid_argument("teq_ratio: (p-1)(beta+1/2) > (q+1)(k+1/2) violated");
  if (!(q0 >= q && q0 < p - 2.0))
    throw std::invalid_argument("teq_ratio: q <= q0 < p-2 violated");
  if (!(s >= 1.0 && s < q0 + 1.0))
    throw std::invalid_argument("teq_ratio: s in [1, q0+1) violated");
  TeqReport rep;
  rep.theta = teq_theta(p, q0, s);
  rep.lhs = detail::weighted_sum(u, beta, [q](double v) { return std::pow(std::fabs(v), q + 1.0); });
  const double pk_mass =
      detail::weighted_sum(u, k, [p](double v) { return std::pow(std::fabs(v), p); });
  rep.factor_p = std::pow(pk_mass, rep.theta * (q + 1.0) / p);
  rep.factor_w = std::pow(weak_lorentz_norm(u, s, k), (1.0 - rep.theta) * (q + 1.0));
  const double den = rep.factor_p * rep.factor_w;
  rep.ratio = den > 0 ? rep.lhs / den : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Regime classifier
// ---------------------------------------------------------------------------

enum class Verdict {
  existence,                // existence per a cited theorem
  nonexistence,             // nonexistence per a cited theorem
  nonexistence_small_mu,    // nonexistence for sufficiently small mu > 0 (no numeric mu1)
  outside_known_regimes,
};

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::existence: return "existence-per-theorem";
    case Verdict::nonexistence: return "nonexistence-per-theorem";
    case Verdict::nonexistence_small_mu: return "nonexistence for sufficiently small mu>0";
    case Verdict::outside_known_regimes: return "outside-known-regimes";
  }
  return "?";
}

struct RegimeVerdict {
  CaseTag tag = CaseTag::case1;
  double k = 0, beta = 0, lambda = 0, mu = 0, q = 0;
  Verdict verdict = Verdict::outside_known_regimes;
  std::string rule;  // exactly one citing rule
  std::string note;
  bool embedding_condition = false;  // compactness condition checked (sufficient, not known sharp)
};

/// Sufficient condition for the compact embedding S^2 -> L^{q+1}_beta:
/// 2k(q-1) + q < 2 beta (p-1) + p.  Checked, not known to be sharp.
inline bool embedding_condition(double k, double beta, double q) {
  const double p = critical_exponent(k);
  return 2.0 * k * (q - 1.0) + q < 2.0 * beta * (p - 1.0) + p;
}

/// Pure decision table over the published existence/nonexistence conditions.
/// lambda1_est is required for Case 1 (pass the discrete principal eigenvalue).
inline RegimeVerdict regime_classify(const ProblemSpec& spec, const StarshapeReport& geometry,
                                     double lambda1_est = 0.0) {
  spec.validate();
  RegimeVerdict out;
  out.tag = spec.tag;
  out.k = spec.k;
  out.beta = spec.beta;
  out.lambda = spec.lambda;
  out.mu = spec.mu;
  out.q = spec.q;
  const double p = spec.p();

  if (spec.tag == CaseTag::case1) {
    if (!(lambda1_est > 0.0) || !std::isfinite(lambda1_est))
      throw std::invalid_argument("regime_classify: Case 1 needs a positive lambda1 estimate");
    if (spec.lambda >= lambda1_est) {
      out.verdict = Verdict::nonexistence;
      out.rule = "no solution for lambda >= lambda1";
      return out;
    }
    if (spec.lambda <= 0.0 && geometry.g_starshaped) {
      out.verdict = Verdict::nonexistence;
      out.rule = "no solution for lambda <= 0 on a G-starshaped domain";
      return out;
    }
    if (spec.lambda > 0.0 && spec.k >= 2.0 * (spec.beta + 1.0)) {
      out.verdict = Verdict::existence;
      out.rule = "existence for 0 < lambda < lambda1 and k >= 2(beta+1)";
      return out;
    }
    out.verdict = Verdict::outside_known_regimes;
    out.rule = spec.lambda <= 0.0 ? "lambda <= 0 but the domain is not known to be G-starshaped"
                                  : "0 < lambda < lambda1 with k < 2(beta+1): no published rule";
    return out;
  }

  // Case 2.
  if (!spec.nl.zero()) {
    out.verdict = Verdict::outside_known_regimes;
    out.rule = "h != 0: the classifier covers only the pure-power perturbation";
    out.note = "existence with a general h depends on a mountain-pass threshold check, "
               "not on a closed-form parameter condition";
    return out;
  }
  const double bracket = 4.0 * (spec.beta + 1.0) - (spec.q - 1.0) * spec.k;
  out.embedding_condition = embedding_condition(spec.k, spec.beta, spec.q);
  const std::string embed_note =
      "compact embedding condition 2k(q-1)+q < 2beta(p-1)+p checked; the condition is "
      "sufficient, not known to be sharp";

  if (spec.mu * bracket <= 0.0 && geometry.g_starshaped) {
    out.verdict = Verdict::nonexistence;
    out.rule = "nonexistence of nontrivial solutions: mu[4(beta+1)-(q-1)k] <= 0 on a "
               "G-starshaped domain";
    return out;
  }
  if (spec.mu > 0.0 && out.embedding_condition && (spec.q + 1.0) * spec.k > 4.0 * (spec.beta + 1.0)) {
    out.verdict = Verdict::existence;
    out.rule = "existence for mu > 0 and (q+1)k > 4(beta+1)";
    out.note = embed_note;
    return out;
  }
  if (spec.mu > 0.0 && geometry.strictly && spec.q > 1.0 && spec.q < p - 2.0) {
    const bool cond_i =
        spec.k <= spec.beta && spec.q <= p - 2.0 * (p - 1.0) / (p - 5.0);
    const bool cond_ii =
        spec.k > spec.beta &&
        (spec.k + 0.5) / (spec.beta + 0.5) <
            (p - 1.0) * (p - 3.0) / (2.0 * (p + 3.0) + (spec.q + 1.0) * (p - 5.0));
    if (cond_i || cond_ii) {
      out.verdict = Verdict::nonexistence_small_mu;
      out.rule = cond_i ? "nonexistence for 0 < mu < mu1 on a strictly G-starshaped domain: "
                          "k <= beta and q <= p - 2(p-1)/(p-5)"
                        : "nonexistence for 0 < mu < mu1 on a strictly G-starshaped domain: "
                          "k > beta and (k+1/2)/(beta+1/2) < (p-1)(p-3)/(2(p+3)+(q+1)(p-5))";
      out.note = "mu1 > 0 exists but is nonconstructive; no numeric threshold is claimed";
      return out;
    }
  }
  out.verdict = Verdict::outside_known_regimes;
  if (spec.mu > 0.0 && out.embedding_condition)
    out.note = "existence holds for mu > mu0 with some mu0 > 0 (nonconstructive); " + embed_note;
  out.rule = "no published rule covers this parameter point";
  return out;
}

}  // namespace grushin

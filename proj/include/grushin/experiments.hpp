#pragma once

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "grushin/identities.hpp"
#include "grushin/io.hpp"
#include "grushin/spectral.hpp"

namespace grushin {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_flagged = 2 };

struct ExperimentReport {
  ExperimentConfig config;
  nlohmann::json results;
  std::vector<std::string> files;  // relative to the output directory
  int exit_code = exit_ok;
};

namespace detail {

/// Writes artifacts under one declared directory and keeps the manifest.
struct ArtifactSink {
  std::filesystem::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / name, content);
    files.push_back(name);
  }
};

inline std::shared_ptr<const Grid2D> square_grid(const ExperimentConfig& c, int n) {
  return build_grid(c.domain(), n, n);
}

inline ProblemSpec case1_spec(const ExperimentConfig& c) {
  auto s = ProblemSpec::case1(c.k, c.beta, c.lambda);
  s.p_override = c.p_override;
  return s;
}

inline ProblemSpec case2_spec(const ExperimentConfig& c) {
  auto s = ProblemSpec::case2(c.k, c.beta, c.mu, c.q);
  s.p_override = c.p_override;
  return s;
}

/// Richardson-style observed order from three successive values on grids
/// refined by the factor r: log(|v1-v2|/|v2-v3|)/log(r).
inline double richardson_rate(double v1, double v2, double v3, double r) {
  const double e1 = std::fabs(v1 - v2), e2 = std::fabs(v2 - v3);
  if (!(e1 > 0) || !(e2 > 0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(e1 / e2) / std::log(r);
}

// ---- individual experiments ----

inline nlohmann::json run_eigen(const ExperimentConfig& c, ArtifactSink& sink, int& exit_code) {
  nlohmann::json out;
  const std::vector<double> betas = c.betas.empty() ? std::vector<double>{c.beta} : c.betas;
  std::vector<std::vector<double>> rows, sweep;
  bool all_converged = true;
  GridFunction phi_finest;
  for (int n : c.resolutions) {
    auto g = square_grid(c, n);
    for (double b : betas) {
      auto rep = principal_eigenpair(c.k, b, g, c.tol);
      all_converged = all_converged && rep.converged;
      rows.push_back({static_cast<double>(n), b, rep.lambda1});
      if (n == c.resolutions.back()) {
        sweep.push_back({b, rep.lambda1});
        if (b == betas.front()) phi_finest = rep.phi1;
      }
      out["runs"].push_back({{"resolution", n}, {"beta", b}, {"lambda1", rep.lambda1},
                             {"iterations", rep.iterations}, {"converged", rep.converged}});
    }
  }
  sink.write("eigen.csv", csv_table("principal eigenvalue per resolution and weight exponent",
                                    {"resolution", "beta", "lambda1"}, rows));
  sink.write("eigen_sweep.csv",
             csv_table("beta sweep at the finest resolution", {"beta", "lambda1"}, sweep));
  if (!phi_finest.v.empty()) sink.write("phi1.dump", dump_field(phi_finest));
  out["lambda1"] = rows.back()[2];
  if (!all_converged) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_sobolev(const ExperimentConfig& c, ArtifactSink& sink, int& exit_code) {
  nlohmann::json out;
  const auto S = estimate_S(c.k);
  out["S_radial"] = S.value;
  out["S_radial_error"] = S.error_bar;
  auto spec = case1_spec(c);
  spec.lambda = 0.0;
  std::vector<std::vector<double>> rows;
  double last = 0;
  for (int n : c.resolutions) {
    auto g = square_grid(c, n);
    auto m = minimize_Slambda(spec, g, c.tol);
    rows.push_back({static_cast<double>(n), m.value});
    last = m.value;
    out["runs"].push_back({{"resolution", n}, {"S0_discrete", m.value},
                           {"iterations", m.iterations}});
  }
  sink.write("sobolev.csv",
             csv_table("discrete best-constant minimization per resolution",
                       {"resolution", "S0_discrete"}, rows));
  out["S0_discrete"] = last;
  // the bounded-domain value must stay above the whole-space constant
  if (last < S.value - S.error_bar) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_asymptotics(const ExperimentConfig& c, ArtifactSink& sink,
                                      int& exit_code) {
  auto g = square_grid(c, c.resolutions.back());
  auto rep = asymptotic_slopes(c.k, c.beta, c.eps, g);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.eps.size(); ++i)
    rows.push_back({rep.eps[i], rep.s2_sq[i], rep.lp_sq[i], rep.l2b_sq[i]});
  sink.write("asymptotics.csv",
             csv_table("cutoff-extremal norms against the concentration scale",
                       {"eps", "norm_S2_sq", "norm_Lp1k_sq", "norm_L2beta_sq"}, rows));
  nlohmann::json out;
  out["slope_s2"] = rep.slope_s2;
  out["slope_lp"] = rep.slope_lp;
  out["slope_l2b"] = rep.slope_l2b;
  out["diff_slope_s2"] = rep.diff_slope_s2;
  out["diff_slope_lp"] = rep.diff_slope_lp;
  out["diff_slope_l2b"] = rep.diff_slope_l2b;
  out["log_coeff_l2b"] = rep.log_coeff_l2b;
  out["regime"] = rep.regime == L2BetaRegime::supercritical ? "supercritical"
                 : rep.regime == L2BetaRegime::log          ? "log"
                                                            : "bounded";
  out["under_resolved"] = rep.under_resolved;
  out["excluded_eps"] = rep.excluded_eps;
  if (rep.under_resolved) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_case1(const ExperimentConfig& c, ArtifactSink& sink, int& exit_code) {
  auto spec = case1_spec(c);
  nlohmann::json out;
  std::vector<std::vector<double>> rows;
  SolveReport prev;
  bool have_prev = false, flagged = false;
  for (int n : c.resolutions) {
    // independent cold start per grid; warm starts inherit coarse bias and can
    // slide off the solution shelf in the delicate small-k regime
    auto g = square_grid(c, n);
    auto rep = case1_solution(spec, g, c.tol, 4000);
    rows.push_back({static_cast<double>(n), rep.lambda_tilde, rep.psi, rep.residual,
                    rep.concentration.r50, rep.concentration.max_value});
    out["runs"].push_back({{"resolution", n},
                           {"lambda_tilde", rep.lambda_tilde},
                           {"psi", rep.psi},
                           {"residual", rep.residual},
                           {"r50", rep.concentration.r50},
                           {"max_value", rep.concentration.max_value},
                           {"nonexistence_consistent", rep.nonexistence_consistent}});
    if (rep.nonexistence_consistent) flagged = true;
    if (have_prev && concentration_flag(prev.concentration, rep.concentration)) flagged = true;
    prev = std::move(rep);
    have_prev = true;
  }
  sink.write("case1.csv",
             csv_table("ground-state solve per resolution",
                       {"resolution", "lambda_tilde", "psi", "residual", "r50", "max_value"},
                       rows));
  if (have_prev && !prev.u.v.empty()) sink.write("u.dump", dump_field(prev.u));
  out["concentration_flag"] = flagged && !prev.nonexistence_consistent;
  out["nonexistence_consistent"] = prev.nonexistence_consistent;
  if (flagged) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_case2(const ExperimentConfig& c, ArtifactSink& sink, int& exit_code) {
  auto spec = case2_spec(c);
  auto g = square_grid(c, c.resolutions.back());
  nlohmann::json out;

  // low-energy endpoint: scale a positive bump beyond its Nehari maximum
  auto v = GridFunction::sample(g, [&](double x, double y) {
    const double sx = (2 * x - (c.x_lo + c.x_hi)) / (c.x_hi - c.x_lo);
    const double sy = (2 * y - (c.y_lo + c.y_hi)) / (c.y_hi - c.y_lo);
    const double bx = std::max(0.0, 1 - sx * sx), by = std::max(0.0, 1 - sy * sy);
    return bx * bx * by * by;
  });
  auto ray = nehari_ray_max(v, spec);
  out["nehari_ok"] = ray.ok;
  if (!ray.ok) {
    exit_code = exit_flagged;
    return out;
  }
  out["nehari_t_star"] = ray.t_star;
  out["nehari_level"] = ray.Y;

  double t = 2.0 * ray.t_star;
  while (energy_Phi(t * v, spec) >= 0 && t < 1e8) t *= 2.0;
  const auto S = estimate_S(c.k);
  auto mp = mountain_pass(spec, t * v, 21, std::max(c.tol, 1e-6), 600, S.value);
  out["mountain_pass_level"] = mp.c;
  out["mountain_pass_converged"] = mp.converged;
  out["dual_norm"] = mp.dual_norm;
  out["rho"] = mp.rho;
  out["threshold"] = threshold_value(c.k, S.value);
  out["threshold_exceeded"] = mp.threshold_exceeded;
  sink.write("u.dump", dump_field(mp.u));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < mp.path.size(); ++i)
    rows.push_back({static_cast<double>(i), energy_Phi(mp.path[i], spec)});
  sink.write("path.csv", csv_table("energy along the final mountain-pass path",
                                   {"index", "phi"}, rows));
  if (mp.threshold_exceeded || !(mp.rho > 0)) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_pohozaev(const ExperimentConfig& c, ArtifactSink& sink,
                                   int& exit_code) {
  auto spec = case1_spec(c);
  nlohmann::json out;
  std::vector<std::vector<double>> rows;
  std::vector<double> gaps;
  for (int n : c.resolutions) {
    auto g = square_grid(c, n);
    auto rep = case1_solution(spec, g, c.tol, 4000);
    if (rep.nonexistence_consistent) {
      out["nonexistence_consistent"] = true;
      exit_code = exit_flagged;
      return out;
    }
    auto po = pohozaev_case1(rep.u, spec);
    rows.push_back({static_cast<double>(n), po.lhs, po.rhs, po.gap});
    gaps.push_back(po.gap);
    out["runs"].push_back({{"resolution", n}, {"lhs", po.lhs}, {"rhs", po.rhs}, {"gap", po.gap}});
  }
  sink.write("pohozaev.csv", csv_table("boundary-flux identity per resolution",
                                       {"resolution", "lhs", "rhs", "gap"}, rows));
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];
  out["gap_decreasing"] = decreasing;
  out["final_gap"] = gaps.back();
  if (!decreasing) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_starshape(const ExperimentConfig& c, ArtifactSink& sink,
                                    int& exit_code) {
  auto rep = starshape_check(c.domain(), c.k, std::max(64, c.samples));
  nlohmann::json out;
  out["min_t_dot_nu"] = rep.min_t_dot_nu;
  out["g_starshaped"] = rep.g_starshaped;
  out["strictly"] = rep.strictly;
  out["worst_x"] = rep.worst_x;
  out["worst_y"] = rep.worst_y;
  const std::string verdict = rep.strictly       ? "strictly G-starshaped"
                              : rep.g_starshaped ? "G-starshaped"
                                                 : "not G-starshaped";
  out["verdict"] = verdict;
  sink.write("verdict.txt", verdict + "\n");
  if (!rep.g_starshaped) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_inequalities(const ExperimentConfig& c, ArtifactSink& sink,
                                       int& exit_code) {
  auto g = square_grid(c, c.resolutions.back());
  nlohmann::json out;
  bool ok = true;

  // interpolation: randomized family at the configured triple
  std::vector<std::vector<double>> interp_rows;
  double worst = 0;
  for (int i = 0; i < c.samples; ++i) {
    auto u = random_bump_function(g, c.seed + static_cast<unsigned>(i));
    const double r = interpolation_check(u, c.q1, c.beta1, c.q2, c.beta2, c.theta);
    interp_rows.push_back({static_cast<double>(i), r});
    worst = std::max(worst, r);
  }
  sink.write("interpolation.csv",
             csv_table("interpolation ratio per random sample", {"sample", "ratio"}, interp_rows));
  out["interpolation_max_ratio"] = worst;
  ok = ok && worst <= 1.0 + 1e-8;

  // Hardy split over a shrinking family near the degeneracy line
  std::vector<std::vector<double>> hardy_rows;
  const std::vector<double> widths = {0.4, 0.2, 0.1};
  const double yc = 0.5 * (c.y_lo + c.y_hi), wy = 0.4 * (c.y_hi - c.y_lo);
  for (double w : widths) {
    auto u = GridFunction::sample(g, [&](double x, double y) {
      const double sx = x / w, sy = (y - yc) / wy;
      if (std::fabs(sx) >= 1 || std::fabs(sy) >= 1) return 0.0;
      return (1 - sx * sx) * (1 - sx * sx) * (1 - sy * sy) * (1 - sy * sy);
    });
    auto rep = hardy_check(u, c.gamma, c.split_eps, c.beta, c.k);
    hardy_rows.push_back({w, rep.near, rep.bound, rep.hardy_ratio});
    ok = ok && rep.holds;
  }
  sink.write("hardy.csv", csv_table("Hardy split over shrinking bump widths",
                                    {"width", "near", "bound", "hardy_ratio"}, hardy_rows));

  // weak Lorentz norm against the constant-function closed form
  auto one = GridFunction::sample(g, [](double, double) { return 1.0; });
  const double wl = weak_lorentz_norm(one, c.s, c.k);
  out["weak_lorentz_constant"] = wl;

  // truncation-estimate constant over the same family, when configured
  if (c.q0 > 0) {
    std::vector<std::vector<double>> teq_rows;
    for (double w : widths) {
      auto u = GridFunction::sample(g, [&](double x, double y) {
        const double sx = x / w, sy = (y - yc) / wy;
        if (std::fabs(sx) >= 1 || std::fabs(sy) >= 1) return 0.0;
        return (1 - sx * sx) * (1 - sx * sx) * (1 - sy * sy) * (1 - sy * sy);
      });
      auto rep = teq_ratio(u, c.q, c.q0, c.s, c.beta, c.k);
      teq_rows.push_back({w, rep.ratio});
    }
    sink.write("teq.csv",
               csv_table("truncation-estimate constant over bump widths", {"width", "ratio"},
                         teq_rows));
  }

  out["all_inequalities_hold"] = ok;
  if (!ok) exit_code = exit_flagged;
  return out;
}

inline nlohmann::json run_classify(const ExperimentConfig& c, ArtifactSink& sink, int&) {
  auto star = starshape_check(c.domain(), c.k, std::max(64, c.samples));
  const bool is_case2 = c.q > 0;
  auto spec = is_case2 ? case2_spec(c) : case1_spec(c);
  double lam1 = 0;
  if (!is_case2) {
    auto g = square_grid(c, c.resolutions.back());
    lam1 = principal_eigenpair(c.k, c.beta, g, c.tol).lambda1;
  }
  auto v = regime_classify(spec, star, is_case2 ? 0.0 : lam1);
  nlohmann::json out;
  out["verdict"] = verdict_name(v.verdict);
  out["rule"] = v.rule;
  out["note"] = v.note;
  out["g_starshaped"] = star.g_starshaped;
  out["embedding_condition"] = v.embedding_condition;
  if (!is_case2) out["lambda1"] = lam1;
  sink.write("verdict.txt", verdict_name(v.verdict) + "\n" + v.rule + "\n");
  return out;
}

inline nlohmann::json run_convergence(const ExperimentConfig& c, ArtifactSink& sink,
                                      int& exit_code) {
  nlohmann::json out;
  const double r = static_cast<double>(c.resolutions[1]) / c.resolutions[0];

  std::ostringstream csv;
  csv << "# observed convergence of eigenvalue, energy and identity gap\n";
  csv << "resolution,quantity,value,rate\n";
  auto emit = [&](int n, const std::string& what, double value, double rate) {
    csv << n << "," << what << "," << grushin::detail::fmt_double(value) << ",";
    if (std::isfinite(rate)) csv << grushin::detail::fmt_double(rate);
    csv << "\n";
  };

  // principal eigenvalue: always available
  std::vector<double> lams;
  for (int n : c.resolutions) lams.push_back(principal_eigenpair(c.k, c.beta, square_grid(c, n), c.tol).lambda1);
  for (std::size_t i = 0; i < lams.size(); ++i) {
    const double rate = i >= 2 ? richardson_rate(lams[i - 2], lams[i - 1], lams[i], r)
                               : std::numeric_limits<double>::quiet_NaN();
    emit(c.resolutions[i], "lambda1", lams[i], rate);
    if (i >= 2 && std::isfinite(rate)) out["lambda1_rate"] = rate;
  }
  out["lambda1"] = lams.back();

  // ground-state solves: energy and identity-gap rates, skipped for k < 1
  bool flagged = false;
  if (c.k >= 1) {
    auto spec = case1_spec(c);
    std::vector<double> psis, gaps;
    std::vector<ConcentrationIndex> conc;
    SolveReport prev;
    bool have_prev = false, concentrated = false, nonexistence = false;
    for (int n : c.resolutions) {
      auto g = square_grid(c, n);
      auto rep = case1_solution(spec, g, c.tol, 4000);
      nonexistence = nonexistence || rep.nonexistence_consistent;
      conc.push_back(rep.concentration);
      if (have_prev && concentration_flag(prev.concentration, rep.concentration))
        concentrated = true;
      psis.push_back(rep.psi);
      if (!rep.nonexistence_consistent) {
        gaps.push_back(pohozaev_case1(rep.u, spec).gap);
      }
      prev = std::move(rep);
      have_prev = true;
    }
    // the bubble may sharpen slowly, so also compare the endpoints
    if (conc.size() >= 2 && concentration_flag(conc.front(), conc.back())) concentrated = true;
    bool gap_monotone = gaps.size() == c.resolutions.size();
    for (std::size_t i = 1; i < gaps.size(); ++i)
      gap_monotone = gap_monotone && gaps[i] < gaps[i - 1];
    const bool suspect = concentrated || nonexistence || !gap_monotone;
    out["concentration_flag"] = concentrated;
    out["nonexistence_consistent"] = nonexistence;
    out["pohozaev_gap_monotone"] = gap_monotone;
    // a collapsing, absent, or non-converging solution has no trustworthy rate
    for (std::size_t i = 0; i < psis.size(); ++i) {
      const double rate = (!suspect && i >= 2)
                              ? richardson_rate(psis[i - 2], psis[i - 1], psis[i], r)
                              : std::numeric_limits<double>::quiet_NaN();
      emit(c.resolutions[i], "psi", psis[i], rate);
      if (std::isfinite(rate)) out["psi_rate"] = rate;
    }
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      double rate = std::numeric_limits<double>::quiet_NaN();
      if (!suspect && i >= 1 && gaps[i] > 0)
        rate = std::log(gaps[i - 1] / gaps[i]) / std::log(r);
      emit(c.resolutions[i], "pohozaev_gap", gaps[i], rate);
      if (i + 1 == gaps.size() && std::isfinite(rate)) out["pohozaev_gap_rate"] = rate;
    }
    if (suspect) flagged = true;
  }
  sink.write("convergence.csv", csv.str());
  if (flagged) exit_code = exit_flagged;
  return out;
}

}  // namespace detail

/// Dispatch a validated config to its module, write all artifacts under the
/// configured output directory, and assemble the report (also written there
/// as report.json). Wall-clock is deliberately not part of any artifact so
/// identical (config, seed) reruns are byte-identical.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport rep;
  rep.config = config;
  detail::ArtifactSink sink{config.out, {}};
  int code = exit_ok;
  nlohmann::json results;
  if (config.kind == "eigen") results = detail::run_eigen(config, sink, code);
  else if (config.kind == "sobolev") results = detail::run_sobolev(config, sink, code);
  else if (config.kind == "asymptotics") results = detail::run_asymptotics(config, sink, code);
  else if (config.kind == "case1") results = detail::run_case1(config, sink, code);
  else if (config.kind == "case2") results = detail::run_case2(config, sink, code);
  else if (config.kind == "pohozaev") results = detail::run_pohozaev(config, sink, code);
  else if (config.kind == "starshape") results = detail::run_starshape(config, sink, code);
  else if (config.kind == "inequalities") results = detail::run_inequalities(config, sink, code);
  else if (config.kind == "classify") results = detail::run_classify(config, sink, code);
  else if (config.kind == "convergence") results = detail::run_convergence(config, sink, code);
  else throw std::invalid_argument("run_experiment: unknown kind " + config.kind);

  nlohmann::json report;
  report["kind"] = config.kind;
  report["config"] = config.echo();
  report["results"] = results;
  report["exit_code"] = code;
  report["version"] = "grushin 1.0.0";
  std::vector<std::string> manifest = sink.files;
  manifest.push_back("report.json");
  report["files"] = manifest;
  sink.write("report.json", report.dump(2) + "\n");

  rep.results = std::move(results);
  rep.files = std::move(manifest);
  rep.exit_code = code;
  return rep;
}

}  // namespace grushin

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grushin/extremals.hpp"
#include "grushin/grid_function.hpp"

namespace grushin {

/// Carries every problem found while parsing or validating a config, so the
/// caller sees all of them at once instead of fixing one per run.
struct ConfigError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ConfigError(std::vector<std::string> list)
      : std::runtime_error(join(list)), issues(std::move(list)) {}

  static std::string join(const std::vector<std::string>& list) {
    std::string s = "invalid config:";
    for (const auto& e : list) s += "\n  - " + e;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Flat key = value text with [section] headers; keys are reported as
/// "section.key". Comment lines start with '#'. Syntax problems are
/// collected, not thrown one at a time.
inline std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                           std::vector<std::string>& issues) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        issues.push_back("line " + std::to_string(lineno) + ": malformed section header '" + t + "'");
        continue;
      }
      section = t.substr(1, t.size() - 2);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      issues.push_back("line " + std::to_string(lineno) + ": expected 'key = value', got '" + t + "'");
      continue;
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) {
      issues.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full))
      issues.push_back("line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
    out[full] = value;
  }
  return out;
}

/// Everything a run needs, parsed from the flat config plus CLI overrides.
struct ExperimentConfig {
  std::string kind;  // eigen | sobolev | asymptotics | case1 | case2 |
                     // pohozaev | starshape | inequalities | classify | convergence
  // problem parameters
  double k = 1, beta = 0, lambda = 0, mu = 0, q = 0, p_override = 0;
  // domain
  std::string shape = "rectangle";
  double x_lo = -1, x_hi = 1, y_lo = -1, y_hi = 1;
  double cx = 0, cy = 0, ax = 1, ay = 1;
  // grid / sweeps
  std::vector<int> resolutions = {64};
  std::vector<double> eps;
  std::vector<double> betas;  // optional beta sweep for eigen
  // run controls
  std::string out = "out";
  unsigned seed = 0;
  double tol = 1e-8;
  int samples = 200;
  // inequality harness parameters
  double gamma = 0.5, split_eps = 0.1, s = 3, q0 = 0, theta = 0.5;
  double q1 = 10, beta1 = 1, q2 = 2, beta2 = 0;

  DomainShape domain() const {
    if (shape == "ellipse") return DomainShape::ellipse(cx, cy, ax, ay);
    return DomainShape::rectangle(x_lo, x_hi, y_lo, y_hi);
  }

  /// Canonical config text; parsing it back yields an equal config.
  std::string echo() const {
    using detail::fmt_double;
    std::ostringstream o;
    o << "[experiment]\nkind = " << kind << "\n\n";
    o << "[problem]\n";
    o << "k = " << fmt_double(k) << "\nbeta = " << fmt_double(beta) << "\n";
    o << "lambda = " << fmt_double(lambda) << "\nmu = " << fmt_double(mu) << "\n";
    o << "q = " << fmt_double(q) << "\np_override = " << fmt_double(p_override) << "\n\n";
    o << "[domain]\nshape = " << shape << "\n";
    if (shape == "ellipse") {
      o << "cx = " << fmt_double(cx) << "\ncy = " << fmt_double(cy) << "\n";
      o << "ax = " << fmt_double(ax) << "\nay = " << fmt_double(ay) << "\n";
    } else {
      o << "x_lo = " << fmt_double(x_lo) << "\nx_hi = " << fmt_double(x_hi) << "\n";
      o << "y_lo = " << fmt_double(y_lo) << "\ny_hi = " << fmt_double(y_hi) << "\n";
    }
    o << "\n[grid]\nresolutions =";
    for (std::size_t i = 0; i < resolutions.size(); ++i)
      o << (i ? "," : " ") << resolutions[i];
    o << "\n";
    if (!eps.empty()) {
      o << "eps =";
      for (std::size_t i = 0; i < eps.size(); ++i) o << (i ? "," : " ") << fmt_double(eps[i]);
      o << "\n";
    }
    if (!betas.empty()) {
      o << "betas =";
      for (std::size_t i = 0; i < betas.size(); ++i) o << (i ? "," : " ") << fmt_double(betas[i]);
      o << "\n";
    }
    // `out` is a run-location detail, deliberately not part of the canonical
    // echo: the same experiment written to two directories stays byte-equal
    o << "\n[run]\nseed = " << seed << "\n";
    o << "tol = " << fmt_double(tol) << "\nsamples = " << samples << "\n";
    o << "\n[inequalities]\n";
    o << "gamma = " << fmt_double(gamma) << "\nsplit_eps = " << fmt_double(split_eps) << "\n";
    o << "s = " << fmt_double(s) << "\nq0 = " << fmt_double(q0) << "\n";
    o << "theta = " << fmt_double(theta) << "\n";
    o << "q1 = " << fmt_double(q1) << "\nbeta1 = " << fmt_double(beta1) << "\n";
    o << "q2 = " << fmt_double(q2) << "\nbeta2 = " << fmt_double(beta2) << "\n";
    return o.str();
  }

  static ExperimentConfig parse(const std::string& text, const std::string& subcommand);
};

namespace detail {

struct ConfigReader {
  std::map<std::string, std::string> kv;
  std::set<std::string> seen;
  std::vector<std::string>& issues;

  double number(const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    seen.insert(key);
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0') {
      issues.push_back(key + ": expected a number, got '" + it->second + "'");
      return fallback;
    }
    return v;
  }

  std::string word(const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    seen.insert(key);
    return it->second;
  }

  template <typename T, typename Parse>
  std::vector<T> list(const std::string& key, std::vector<T> fallback, Parse parse) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    seen.insert(key);
    std::vector<T> out;
    std::istringstream in(it->second);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      T v;
      if (!parse(tok, v)) {
        issues.push_back(key + ": bad list entry '" + tok + "'");
        return fallback;
      }
      out.push_back(v);
    }
    if (out.empty()) issues.push_back(key + ": empty list");
    return out;
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) {
    return list<int>(key, std::move(fallback), [](const std::string& t, int& v) {
      char* end = nullptr;
      const long n = std::strtol(t.c_str(), &end, 10);
      if (end == t.c_str() || *end != '\0') return false;
      v = static_cast<int>(n);
      return true;
    });
  }

  std::vector<double> double_list(const std::string& key, std::vector<double> fallback) {
    return list<double>(key, std::move(fallback), [](const std::string& t, double& v) {
      char* end = nullptr;
      v = std::strtod(t.c_str(), &end);
      return end != t.c_str() && *end == '\0';
    });
  }
};

}  // namespace detail

inline ExperimentConfig ExperimentConfig::parse(const std::string& text,
                                                const std::string& subcommand) {
  std::vector<std::string> issues;
  auto kv = parse_key_values(text, issues);
  detail::ConfigReader r{std::move(kv), {}, issues};

  ExperimentConfig c;
  c.kind = r.word("experiment.kind", subcommand);
  if (!subcommand.empty() && c.kind != subcommand)
    issues.push_back("experiment.kind = " + c.kind + " does not match the subcommand '" +
                     subcommand + "'");
  static const std::set<std::string> kinds = {"eigen",     "sobolev",   "asymptotics", "case1",
                                              "case2",     "pohozaev",  "starshape",
                                              "inequalities", "classify", "convergence"};
  if (!kinds.count(c.kind)) issues.push_back("unknown experiment kind '" + c.kind + "'");

  c.k = r.number("problem.k", c.k);
  c.beta = r.number("problem.beta", c.beta);
  c.lambda = r.number("problem.lambda", c.lambda);
  c.mu = r.number("problem.mu", c.mu);
  c.q = r.number("problem.q", c.q);
  c.p_override = r.number("problem.p_override", c.p_override);

  c.shape = r.word("domain.shape", c.shape);
  c.x_lo = r.number("domain.x_lo", c.x_lo);
  c.x_hi = r.number("domain.x_hi", c.x_hi);
  c.y_lo = r.number("domain.y_lo", c.y_lo);
  c.y_hi = r.number("domain.y_hi", c.y_hi);
  c.cx = r.number("domain.cx", c.cx);
  c.cy = r.number("domain.cy", c.cy);
  c.ax = r.number("domain.ax", c.ax);
  c.ay = r.number("domain.ay", c.ay);

  c.resolutions = r.int_list("grid.resolutions", c.resolutions);
  c.eps = r.double_list("grid.eps", c.eps);
  c.betas = r.double_list("grid.betas", c.betas);

  c.out = r.word("run.out", c.out);
  c.seed = static_cast<unsigned>(r.number("run.seed", c.seed));
  c.tol = r.number("run.tol", c.tol);
  c.samples = static_cast<int>(r.number("run.samples", c.samples));

  c.gamma = r.number("inequalities.gamma", c.gamma);
  c.split_eps = r.number("inequalities.split_eps", c.split_eps);
  c.s = r.number("inequalities.s", c.s);
  c.q0 = r.number("inequalities.q0", c.q0);
  c.theta = r.number("inequalities.theta", c.theta);
  c.q1 = r.number("inequalities.q1", c.q1);
  c.beta1 = r.number("inequalities.beta1", c.beta1);
  c.q2 = r.number("inequalities.q2", c.q2);
  c.beta2 = r.number("inequalities.beta2", c.beta2);

  for (const auto& [key, value] : r.kv)
    if (!r.seen.count(key)) issues.push_back("unknown key '" + key + "'");

  // cross-field validation, all findings reported together
  if (c.shape != "rectangle" && c.shape != "ellipse")
    issues.push_back("domain.shape must be rectangle or ellipse");
  if (c.shape == "rectangle" && (!(c.x_lo < c.x_hi) || !(c.y_lo < c.y_hi)))
    issues.push_back("domain bounds: x_lo < x_hi and y_lo < y_hi required");
  if (c.shape == "ellipse" && (!(c.ax > 0) || !(c.ay > 0)))
    issues.push_back("domain semi-axes: ax > 0 and ay > 0 required");
  for (int n : c.resolutions)
    if (n < 8) issues.push_back("grid.resolutions: every entry must be >= 8");
  if (!(c.tol > 1e-14 && c.tol < 1e-2)) issues.push_back("run.tol must lie in (1e-14, 1e-2)");
  if (c.samples < 1) issues.push_back("run.samples must be >= 1");

  const bool needs_k1 = c.kind != "eigen" && c.kind != "starshape" && c.kind != "convergence";
  if (needs_k1 && !(c.k >= 1)) issues.push_back("problem.k >= 1 required for this experiment");
  if (c.kind == "eigen" || c.kind == "convergence") {
    if (!(c.k >= 0)) issues.push_back("problem.k >= 0 required");
  }
  if (2.0 * c.beta <= -1.0) issues.push_back("problem.beta: 2*beta > -1 required");
  if (c.kind == "case2" || (c.kind == "classify" && c.q > 0)) {
    const double p = c.p_override > 0 ? c.p_override : (c.k >= 1 ? critical_exponent(c.k) : 0);
    if (!(c.q > 1 && c.q < p)) issues.push_back("problem.q: 1<q<p violated");
  }
  if (c.kind == "asymptotics" && c.eps.size() < 3)
    issues.push_back("grid.eps: at least 3 decreasing values required");
  if (c.kind == "convergence") {
    if (c.resolutions.size() < 3)
      issues.push_back("grid.resolutions: convergence study needs >= 3 resolutions");
    for (std::size_t i = 2; i < c.resolutions.size(); ++i) {
      const long a = c.resolutions[i - 1], b = c.resolutions[i - 2], d = c.resolutions[i];
      if (a * a != b * d) {
        issues.push_back("grid.resolutions: geometric refinement required");
        break;
      }
    }
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------

/// CSV with a '#' header comment documenting the columns; all numbers are
/// written with full precision so reruns are byte-identical.
inline std::string csv_table(const std::string& comment, const std::vector<std::string>& columns,
                             const std::vector<std::vector<double>>& rows) {
  std::ostringstream o;
  o << "# " << comment << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) o << (i ? "," : "") << columns[i];
  o << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      o << (i ? "," : "") << detail::fmt_double(row[i]);
    o << "\n";
  }
  return o.str();
}

/// Raw node dump: grid descriptor header, then one "i,j,x,y,value" line per
/// interior node in row-major order.
inline std::string dump_field(const GridFunction& u) {
  const Grid2D& g = *u.grid;
  std::ostringstream o;
  o << "# field dump: nx=" << g.nx << " ny=" << g.ny << " hx=" << detail::fmt_double(g.hx)
    << " hy=" << detail::fmt_double(g.hy) << " x_lo=" << detail::fmt_double(g.domain.x_lo)
    << " y_lo=" << detail::fmt_double(g.domain.y_lo) << "\n";
  o << "i,j,x,y,value\n";
  for (int d = 0; d < g.n_interior; ++d) {
    const int i = g.col_of_dof(d), j = g.row_of_dof(d);
    o << i << "," << j << "," << detail::fmt_double(g.x(i)) << "," << detail::fmt_double(g.y(j))
      << "," << detail::fmt_double(u.v[d]) << "\n";
  }
  return o.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream o;
  o << f.rdbuf();
  return o.str();
}

}  // namespace grushin

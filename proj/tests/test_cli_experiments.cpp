#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "grushin/experiments.hpp"

namespace fs = std::filesystem;
using namespace grushin;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "grushin_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

bool issues_mention(const ConfigError& e, const std::string& needle) {
  for (const auto& s : e.issues)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
  auto c = ExperimentConfig::parse("", "eigen");
  EXPECT_EQ(c.kind, "eigen");
  EXPECT_DOUBLE_EQ(c.k, 1.0);
  EXPECT_DOUBLE_EQ(c.beta, 0.0);
  EXPECT_EQ(c.resolutions, std::vector<int>{64});
  EXPECT_EQ(c.out, "out");
  EXPECT_EQ(c.seed, 0u);
}

TEST(Config, EchoRoundTripIsStable) {
  const std::string text =
      "[experiment]\nkind = case1\n"
      "[problem]\nk = 2\nbeta = 0.25\nlambda = 3.5\n"
      "[domain]\nx_lo = -2\nx_hi = 2\ny_lo = 0\ny_hi = 1\n"
      "[grid]\nresolutions = 16,32\n"
      "[run]\nseed = 7\ntol = 1e-7\n";
  auto c = ExperimentConfig::parse(text, "case1");
  const std::string echo1 = c.echo();
  auto c2 = ExperimentConfig::parse(echo1, "case1");
  EXPECT_EQ(echo1, c2.echo());
  EXPECT_DOUBLE_EQ(c2.lambda, 3.5);
  EXPECT_EQ(c2.resolutions, (std::vector<int>{16, 32}));
  EXPECT_EQ(c2.seed, 7u);
}

TEST(Config, AllProblemsReportedTogether) {
  const std::string text =
      "[experiment]\nkind = case2\n"
      "[problem]\nk = 1\nq = 0.5\nbogus = 1\n"
      "[grid]\nresolutions = 4\n"
      "[run]\ntol = 1\n";
  try {
    ExperimentConfig::parse(text, "case2");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(issues_mention(e, "unknown key 'problem.bogus'")) << e.what();
    EXPECT_TRUE(issues_mention(e, "1<q<p violated")) << e.what();
    EXPECT_TRUE(issues_mention(e, "every entry must be >= 8")) << e.what();
    EXPECT_TRUE(issues_mention(e, "run.tol")) << e.what();
    EXPECT_GE(e.issues.size(), 4u);
  }
}

TEST(Config, KindMustMatchSubcommand) {
  try {
    ExperimentConfig::parse("[experiment]\nkind = eigen\n", "case1");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(issues_mention(e, "does not match the subcommand"));
  }
}

TEST(Config, UnknownKindRejected) {
  EXPECT_THROW(ExperimentConfig::parse("[experiment]\nkind = banana\n", ""), ConfigError);
}

TEST(Config, ConvergenceNeedsGeometricResolutions) {
  const std::string head = "[problem]\nk = 0\n[grid]\nresolutions = ";
  EXPECT_NO_THROW(ExperimentConfig::parse(head + "16,32,64\n", "convergence"));
  try {
    ExperimentConfig::parse(head + "16,32,60\n", "convergence");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(issues_mention(e, "geometric refinement required"));
  }
  try {
    ExperimentConfig::parse(head + "16,32\n", "convergence");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(issues_mention(e, ">= 3 resolutions"));
  }
}

TEST(Config, ParserCollectsSyntaxIssues) {
  std::vector<std::string> issues;
  auto kv = parse_key_values(
      "# comment\n[run]\nseed = 1\nseed = 2\nnot-a-pair\n[broken\n", issues);
  EXPECT_EQ(kv.at("run.seed"), "2");
  ASSERT_EQ(issues.size(), 3u);
  EXPECT_NE(issues[0].find("duplicate key 'run.seed'"), std::string::npos);
  EXPECT_NE(issues[1].find("expected 'key = value'"), std::string::npos);
  EXPECT_NE(issues[2].find("malformed section header"), std::string::npos);
}

TEST(Artifacts, CsvTableFormat) {
  const std::string csv =
      csv_table("demo", {"a", "b"}, {{1.0, 0.5}, {2.0, 0.25}});
  EXPECT_EQ(csv, "# demo\na,b\n1,0.5\n2,0.25\n");
  EXPECT_EQ(csv_table("empty", {"x"}, {}), "# empty\nx\n");
}

TEST(Artifacts, DumpFieldHeaderAndShape) {
  auto g = build_grid(DomainShape::rectangle(0, 1, 0, 1), 8, 8);
  auto u = GridFunction::sample(g, [](double x, double y) { return x + y; });
  const std::string dump = dump_field(u);
  std::istringstream in(dump);
  std::string l0, l1;
  std::getline(in, l0);
  std::getline(in, l1);
  EXPECT_NE(l0.find("# field dump: nx=8 ny=8"), std::string::npos);
  EXPECT_NE(l0.find("x_lo=0"), std::string::npos);
  EXPECT_EQ(l1, "i,j,x,y,value");
  int data_lines = 0;
  for (std::string l; std::getline(in, l);) ++data_lines;
  EXPECT_EQ(data_lines, g->n_interior);
}

TEST(Experiments, EigenMatchesLaplacianOracle) {
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = eigen\n[problem]\nk = 0\nbeta = 0\n"
      "[domain]\nx_lo = 0\nx_hi = 1\ny_lo = 0\ny_hi = 1\n"
      "[grid]\nresolutions = 32,64\n",
      "eigen");
  c.out = fresh_dir("eigen").string();
  auto rep = run_experiment(c);
  EXPECT_EQ(rep.exit_code, exit_ok);
  const double lam = rep.results["lambda1"].get<double>();
  EXPECT_NEAR(lam, 2.0 * M_PI * M_PI, 0.01 * 2.0 * M_PI * M_PI);
}

TEST(Experiments, ManifestMatchesDirectoryExactly) {
  auto c = ExperimentConfig::parse("[problem]\nk = 0\n[grid]\nresolutions = 16\n", "eigen");
  c.out = fresh_dir("manifest").string();
  auto rep = run_experiment(c);
  std::set<std::string> on_disk;
  for (const auto& e : fs::directory_iterator(c.out))
    on_disk.insert(e.path().filename().string());
  std::set<std::string> manifest(rep.files.begin(), rep.files.end());
  EXPECT_EQ(on_disk, manifest);
  EXPECT_TRUE(manifest.count("report.json"));
  auto report = nlohmann::json::parse(slurp(fs::path(c.out) / "report.json"));
  EXPECT_EQ(report["exit_code"].get<int>(), rep.exit_code);
  EXPECT_EQ(report["kind"], "eigen");
}

TEST(Experiments, RerunsAreByteIdentical) {
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = inequalities\n[problem]\nk = 1\nbeta = -0.2\n"
      "[grid]\nresolutions = 24\n[run]\nseed = 5\nsamples = 8\n",
      "inequalities");
  auto run_into = [&](const std::string& name) {
    auto cc = c;
    cc.out = fresh_dir(name).string();
    return std::make_pair(run_experiment(cc), cc.out);
  };
  auto [ra, da] = run_into("det_a");
  auto [rb, db] = run_into("det_b");
  ASSERT_EQ(ra.files, rb.files);
  for (const auto& f : ra.files)
    EXPECT_EQ(slurp(fs::path(da) / f), slurp(fs::path(db) / f)) << f;
}

TEST(Experiments, SeedChangesRandomizedSamples) {
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = inequalities\n[problem]\nk = 1\n"
      "[grid]\nresolutions = 24\n[run]\nsamples = 8\n",
      "inequalities");
  c.out = fresh_dir("seed_a").string();
  c.seed = 1;
  run_experiment(c);
  const std::string a = slurp(fs::path(c.out) / "interpolation.csv");
  c.out = fresh_dir("seed_b").string();
  c.seed = 2;
  run_experiment(c);
  EXPECT_NE(a, slurp(fs::path(c.out) / "interpolation.csv"));
}

TEST(Experiments, InequalitiesHoldAndExitClean) {
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = inequalities\n[problem]\nk = 1\nbeta = -0.2\n"
      "[grid]\nresolutions = 32\n[run]\nsamples = 20\n"
      "[inequalities]\ngamma = 0.5\nsplit_eps = 0.1\ns = 3\n",
      "inequalities");
  c.out = fresh_dir("ineq").string();
  auto rep = run_experiment(c);
  EXPECT_EQ(rep.exit_code, exit_ok);
  EXPECT_TRUE(rep.results["all_inequalities_hold"].get<bool>());
  EXPECT_LE(rep.results["interpolation_max_ratio"].get<double>(), 1.0 + 1e-8);
}

TEST(Experiments, StarshapeVerdictsAndExitCodes) {
  auto shifted = ExperimentConfig::parse(
      "[experiment]\nkind = starshape\n[problem]\nk = 1\n"
      "[domain]\nx_lo = 0.5\nx_hi = 1.5\ny_lo = -1\ny_hi = 1\n",
      "starshape");
  shifted.out = fresh_dir("star_shifted").string();
  auto rep = run_experiment(shifted);
  EXPECT_EQ(rep.exit_code, exit_flagged);
  EXPECT_EQ(slurp(fs::path(shifted.out) / "verdict.txt"), "not G-starshaped\n");

  auto centered = ExperimentConfig::parse(
      "[experiment]\nkind = starshape\n[problem]\nk = 1\n", "starshape");
  centered.out = fresh_dir("star_centered").string();
  rep = run_experiment(centered);
  EXPECT_EQ(rep.exit_code, exit_ok);
  EXPECT_EQ(slurp(fs::path(centered.out) / "verdict.txt"), "strictly G-starshaped\n");
}

TEST(Experiments, ClassifyWritesVerdict) {
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = classify\n[problem]\nk = 4\nbeta = 0\nlambda = 1\n"
      "[grid]\nresolutions = 32\n",
      "classify");
  c.out = fresh_dir("classify").string();
  auto rep = run_experiment(c);
  EXPECT_EQ(rep.exit_code, exit_ok);
  EXPECT_EQ(rep.results["verdict"], "existence-per-theorem");
  const std::string v = slurp(fs::path(c.out) / "verdict.txt");
  EXPECT_NE(v.find("existence-per-theorem"), std::string::npos);
}

TEST(Experiments, Case1SolveWritesCsvAndDump) {
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = case1\n[problem]\nk = 1\nbeta = 0\nlambda = 1.39\n"
      "[grid]\nresolutions = 24,48\n[run]\ntol = 1e-9\n",
      "case1");
  c.out = fresh_dir("case1").string();
  auto rep = run_experiment(c);
  EXPECT_EQ(rep.exit_code, exit_ok);
  EXPECT_FALSE(rep.results["nonexistence_consistent"].get<bool>());
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "case1.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "u.dump"));
}

TEST(Experiments, ConvergenceHealthyRunReportsRates) {
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = convergence\n[problem]\nk = 1\nbeta = 0\nlambda = 1.39\n"
      "[grid]\nresolutions = 32,64,128\n[run]\ntol = 1e-9\n",
      "convergence");
  c.out = fresh_dir("conv_ok").string();
  auto rep = run_experiment(c);
  EXPECT_EQ(rep.exit_code, exit_ok);
  EXPECT_TRUE(rep.results["pohozaev_gap_monotone"].get<bool>());
  EXPECT_FALSE(rep.results["concentration_flag"].get<bool>());
  EXPECT_NEAR(rep.results["lambda1_rate"].get<double>(), 2.0, 0.3);
  EXPECT_GE(rep.results["pohozaev_gap_rate"].get<double>(), 1.0);
  EXPECT_TRUE(rep.results.contains("psi_rate"));
}

TEST(Experiments, ConvergenceSuspectRunClaimsNoRates) {
  // lambda = 0 has no ground state: the discrete minimizer concentrates and
  // no rate may be claimed for it
  auto c = ExperimentConfig::parse(
      "[experiment]\nkind = convergence\n[problem]\nk = 1\nbeta = 0\nlambda = 0\n"
      "[grid]\nresolutions = 16,32,64\n",
      "convergence");
  c.out = fresh_dir("conv_bad").string();
  auto rep = run_experiment(c);
  EXPECT_EQ(rep.exit_code, exit_flagged);
  EXPECT_FALSE(rep.results.contains("psi_rate"));
  EXPECT_FALSE(rep.results.contains("pohozaev_gap_rate"));
  // lambda1 rates are still reported: the eigenvalue does not depend on the solve
  EXPECT_TRUE(rep.results.contains("lambda1_rate"));
  // the csv leaves the rate column empty for the distrusted quantities
  const std::string csv = slurp(fs::path(c.out) / "convergence.csv");
  std::istringstream in(csv);
  for (std::string l; std::getline(in, l);)
    if (l.find(",psi,") != std::string::npos) EXPECT_EQ(l.back(), ',') << l;
}

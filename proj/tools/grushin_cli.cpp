#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "grushin/experiments.hpp"

namespace {

const std::map<std::string, std::string> kSubcommands = {
    {"eigen", "eigen"},           {"sobolev", "sobolev"},
    {"asymptotics", "asymptotics"}, {"solve-case1", "case1"},
    {"solve-case2", "case2"},     {"pohozaev", "pohozaev"},
    {"starshape", "starshape"},   {"inequalities", "inequalities"},
    {"classify", "classify"},     {"converge", "convergence"},
};

void usage() {
  std::cerr << "usage: grushin <subcommand> [--config PATH] [--out DIR] [--seed N] "
               "[--resolution N[,N...]]\n"
               "subcommands:";
  for (const auto& [name, kind] : kSubcommands) std::cerr << " " << name;
  std::cerr << "\n";
}

std::vector<int> parse_resolutions(const std::string& arg) {
  std::vector<int> out;
  std::string tok;
  std::istringstream in(arg);
  while (std::getline(in, tok, ',')) {
    const int n = std::stoi(tok);
    if (n < 8) throw std::invalid_argument("--resolution: every entry must be >= 8");
    out.push_back(n);
  }
  if (out.empty()) throw std::invalid_argument("--resolution: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace grushin;
  if (argc < 2) {
    usage();
    return exit_error;
  }
  const auto sub = kSubcommands.find(argv[1]);
  if (sub == kSubcommands.end()) {
    std::cerr << "unknown subcommand '" << argv[1] << "'\n";
    usage();
    return exit_error;
  }

  std::string config_path, out_override, resolution_override;
  bool have_seed = false;
  unsigned seed_override = 0;
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    auto need_value = [&](const char* flag) -> std::string {
      if (i + 1 >= argc) throw std::invalid_argument(std::string(flag) + " needs a value");
      return argv[++i];
    };
    try {
      if (a == "--config") config_path = need_value("--config");
      else if (a == "--out") out_override = need_value("--out");
      else if (a == "--seed") { seed_override = static_cast<unsigned>(std::stoul(need_value("--seed"))); have_seed = true; }
      else if (a == "--resolution") resolution_override = need_value("--resolution");
      else {
        std::cerr << "unknown flag '" << a << "'\n";
        usage();
        return exit_error;
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return exit_error;
    }
  }

  try {
    std::string text;
    if (!config_path.empty()) text = read_text_file(config_path);
    auto config = ExperimentConfig::parse(text, sub->second);
    if (!out_override.empty()) config.out = out_override;
    if (have_seed) config.seed = seed_override;
    if (!resolution_override.empty()) config.resolutions = parse_resolutions(resolution_override);

    const auto t0 = std::chrono::steady_clock::now();
    auto report = run_experiment(config);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cout << config.kind << ": exit " << report.exit_code << ", " << report.files.size()
              << " artifacts in " << config.out << ", " << ms << " ms\n";
    return report.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
}

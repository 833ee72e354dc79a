// skorokhod: report generator and acceptance runner.
//
//   skorokhod <subcommand> [--config FILE] [--out DIR] [--workers N] [--seed S] [--force]

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "skorokhod/runner.hpp"

using namespace skorokhod;

int main(int argc, char** argv) {
  CLI::App app{"Modulus, entropy-bound and CLT reports for lattice random fields"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = "out";
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  bool force = false;

  const std::map<std::string, std::string> about{
      {"simulate", "sample paths and covariance tables"},
      {"entropy", "covering numbers, fitted entropy exponent and sigma"},
      {"modulus", "kappa and omega curves, tail probabilities, arctan criterion"},
      {"gls", "moment-generating functions, yf tails, min-tail and Holder bounds"},
      {"bound", "entropy series, closed forms, envelopes and the natural kappa bound"},
      {"clt", "finite-dimensional, sup-law, Rosenthal and uniform-tail checks"},
      {"verify", "acceptance criteria 1-11"}};
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "flat key = value config file (defaults if omitted)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "parallel replicate workers (0 = all cores)");
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_flag("--force", force, "run even when the resource estimate exceeds the budget");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (workers) cfg.workers = *workers;
    if (seed) cfg.seed = *seed;
    RunOptions opt;
    opt.force = force;
    if (command == "verify")
      opt.on_criterion = [](const CriterionResult& r) {
        std::printf("[%s] %2d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                    r.seconds);
        std::fflush(stdout);
      };
    const auto res = run_subcommand(command, cfg, out_dir, opt);
    std::printf("%s, %zu files in %s\n", res.summary.c_str(), res.files.size(), out_dir.c_str());
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const ResourceError& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kExitRefused;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
}

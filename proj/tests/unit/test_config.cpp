#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "skorokhod/runner.hpp"

using namespace skorokhod;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("skorokhod-unit-" + name);
  fs::remove_all(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small_config() {
  auto c = parse_config("m = 21\nn = 10\nn_list = 5,10\npaths = 2\n");
  c.replicates = 200;
  return c;
}

}  // namespace

TEST(ParseConfig, DefaultsAndOverrides) {
  const auto c = parse_config("# comment only\n\n  d = 2  # trailing\nm=17\nalpha = 2\nu_grid = 0.5, 1, 2\n");
  EXPECT_EQ(c.d, 2u);
  EXPECT_EQ(c.m, 17u);
  EXPECT_EQ(c.alpha, std::vector<double>{2.0});
  EXPECT_EQ(c.u_grid, (std::vector<double>{0.5, 1, 2}));
  EXPECT_EQ(c.model, ExperimentConfig{}.model);
  EXPECT_TRUE(parse_config("h_grid = auto\n").h_grid.empty());
}

TEST(ParseConfig, ErrorsNameLineAndField) {
  EXPECT_NE(error_of("d = 1\nbogus = 3\n").find("t.cfg:2"), std::string::npos);
  EXPECT_NE(error_of("d = 1\nbogus = 3\n").find("bogus"), std::string::npos);
  EXPECT_NE(error_of("m = 5\nm = 6\n").find("set twice"), std::string::npos);
  EXPECT_NE(error_of("m = five\n").find("'m'"), std::string::npos);
  EXPECT_NE(error_of("just words\n").find("t.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("u_grid = 1, 0.5\n").find("increasing"), std::string::npos);
  EXPECT_NE(error_of("model = brownian\n").find("model"), std::string::npos);
  EXPECT_NE(error_of("q = anisotropic-sum\nd = 2\nalpha = 1\n").find("alpha"), std::string::npos);
  EXPECT_NE(error_of("gamma = 1\n").find("gamma"), std::string::npos);
  EXPECT_NE(error_of("key_replicates = 10\n").find("key_replicates"), std::string::npos);
}

TEST(LoadConfig, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/dir/x.cfg"), ConfigError);
}

TEST(Canonical, RoundTripsAndIgnoresWorkers) {
  auto c = parse_config("d = 2\nm = 9\nbound_u_grid = 1,3,9\nmarginal = beta:2:3\n");
  const auto again = parse_config(canonical(c));
  EXPECT_EQ(canonical(again), canonical(c));
  EXPECT_EQ(config_hash(again), config_hash(c));
  auto w = c;
  w.workers = 7;
  EXPECT_EQ(config_hash(w), config_hash(c));
  w.seed += 1;
  EXPECT_NE(config_hash(w), config_hash(c));
}

TEST(Canonical, SampleConfigMatchesDefaults) {
  const auto c = load_config(fs::path(SKOROKHOD_SOURCE_DIR) / "samples" / "default.cfg");
  EXPECT_EQ(canonical(c), canonical(ExperimentConfig{}));
}

TEST(Config, EstimatedTriples) {
  ExperimentConfig c;
  c.m = 3;
  c.replicates = 100;
  EXPECT_DOUBLE_EQ(c.estimated_triples(), 10 * 100.0);
}

TEST(RunSubcommand, EntropyWritesManifestedFiles) {
  const auto dir = scratch("entropy");
  const auto res = run_subcommand("entropy", small_config(), dir, RunOptions{false, false, {}});
  EXPECT_EQ(res.exit_code, kExitPass);
  std::size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++on_disk;
    EXPECT_NE(std::find(res.files.begin(), res.files.end(), e.path().filename().string()), res.files.end())
        << e.path();
  }
  EXPECT_EQ(on_disk, res.files.size());
  const auto manifest = Json::parse(read_text(dir / "manifest.json"));
  EXPECT_EQ(manifest["command"], "entropy");
  EXPECT_EQ(manifest["config_hash"], config_hash(small_config()));
  EXPECT_FALSE(manifest.contains("created_utc"));
  fs::remove_all(dir);
}

TEST(RunSubcommand, GlsIsDeterministic) {
  const auto a = scratch("gls-a"), b = scratch("gls-b");
  run_subcommand("gls", small_config(), a, RunOptions{false, false, {}});
  run_subcommand("gls", small_config(), b, RunOptions{false, false, {}});
  for (const auto& e : fs::directory_iterator(a))
    EXPECT_EQ(read_text(e.path()), read_text(b / e.path().filename())) << e.path().filename();
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunSubcommand, RefusesOverBudgetAndUnknownCommand) {
  auto c = small_config();
  c.m = 2001;
  c.replicates = 1000;
  const auto dir = scratch("refuse");
  EXPECT_THROW(run_subcommand("modulus", c, dir, RunOptions{false, false, {}}), ResourceError);
  EXPECT_THROW(run_subcommand("bogus", small_config(), dir, RunOptions{false, false, {}}), ConfigError);
  fs::remove_all(dir);
}

TEST(RunSubcommand, SimulatePathsCarryNodeCoordinates) {
  const auto dir = scratch("simulate");
  run_subcommand("simulate", small_config(), dir, RunOptions{false, false, {}});
  std::istringstream in(read_text(dir / "paths.csv"));
  std::string line;
  std::getline(in, line);
  const Lattice lat(1, 21);
  for (std::size_t k = 0; std::getline(in, line); ++k) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    EXPECT_DOUBLE_EQ(std::stod(line.substr(a + 1, b - a - 1)), lat.point(k)[0]) << line;
  }
  fs::remove_all(dir);
}

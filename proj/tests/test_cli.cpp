#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "drg/commands.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(DRG_TEST_WORKDIR) / "cli";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  const fs::path p = kWork / (name + ".cfg");
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

int drgame(const std::string& args) {
  const std::string cmd = std::string(DRG_CLI_PATH) + " " + args + " > " +
                          (kWork / "last_stdout.txt").string() + " 2> " +
                          (kWork / "last_stderr.txt").string();
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const char* kSmall =
    "[problem]\n"
    "preset = uncertain-volatility\n"
    "h = cos\n"
    "[grid]\n"
    "n_steps = 100\n"
    "n_nodes = 41\n"
    "[mc]\n"
    "n_paths = 500\n"
    "seed = 5\n"
    "[solver]\n"
    "samples = 200\n"
    "levels = 2\n"
    "dynkin_trees = 6\n"
    "dynkin_depth = 3\n"
    "sqrt_trials = 12\n";

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") files[e.path().filename().string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("every subcommand succeeds on a small configuration") {
  const auto cfg = write_config("small", kSmall);
  const std::map<std::string, std::vector<std::string>> artifacts = {
      {"validate", {"validate.csv"}},
      {"simulate", {"brownian.csv", "states.csv", "summary.csv"}},
      {"drbsde", {"drbsde.csv", "summary.csv"}},
      {"value", {"value.csv", "summary.csv"}},
      {"pde", {"pde.csv", "residual.csv", "convergence.csv", "summary.csv"}},
      {"dynkin-oracle", {"dynkin.csv"}},
      {"dpp-check", {"dpp.csv", "dpp_cross.csv"}},
      {"crosscheck", {"crosscheck.csv"}},
      {"sqrt-check", {"sqrt.csv"}},
  };
  REQUIRE(artifacts.size() == drg::subcommand_names().size());
  for (const auto& [sub, files] : artifacts) {
    CAPTURE(sub);
    const fs::path out = kWork / ("small_" + sub);
    fs::remove_all(out);
    CHECK(drgame(sub + " --config " + cfg.string() + " --out " + out.string()) == 0);
    for (const auto& f : files) CHECK(fs::exists(out / f));
    const auto manifest = slurp(out / "run.txt");
    CHECK(manifest.find("subcommand=" + sub + "\n") != std::string::npos);
    CHECK(manifest.find("exit_status=0\n") != std::string::npos);
    CHECK(manifest.find("version=" + std::string(drg::kVersion)) != std::string::npos);
  }
}

TEST_CASE("exit codes") {
  const auto cfg = write_config("small", kSmall);
  const auto cfl = write_config("cfl_violation",
                                "[problem]\npreset = uncertain-volatility\n[grid]\nn_steps = 10\n"
                                "n_nodes = 161\n[output]\ndir = " +
                                    (kWork / "cfl").string() + "\n");
  CHECK(drgame("pde --config " + cfl.string()) == 2);
  CHECK(slurp(kWork / "last_stderr.txt").find("CFL") != std::string::npos);
  CHECK(slurp(kWork / "cfl" / "run.txt").find("exit_status=2") != std::string::npos);

  const auto weak = write_config("weak_gamma",
                                 "[problem]\npreset = linear-quadratic\ngamma = 0.1\n[solver]\n"
                                 "samples = 100\n[output]\ndir = " +
                                     (kWork / "weak").string() + "\n");
  CHECK(drgame("validate --config " + weak.string()) == 1);

  CHECK(drgame("frobnicate --config " + cfg.string() + " --out " + (kWork / "unknown").string()) == 3);
  CHECK(drgame("value --config " + (kWork / "missing.cfg").string()) == 3);
  CHECK(drgame("value") == 3);
  CHECK(drgame("value --config " + cfg.string() + " --threads 0") == 3);
  CHECK(drgame("value --config " + write_config("bad", "[problem]\npreset = nope\n").string()) == 3);
  CHECK(drgame("--help") == 0);
  CHECK(drgame("--version") == 0);
  CHECK(slurp(kWork / "last_stdout.txt").find(drg::kVersion) != std::string::npos);
}

TEST_CASE("a run repeated from its manifest reproduces the artifacts") {
  const auto cfg = write_config("small", kSmall);
  const fs::path first = kWork / "manifest_first", second = kWork / "manifest_second";
  fs::remove_all(first);
  fs::remove_all(second);
  REQUIRE(drgame("drbsde --config " + cfg.string() + " --out " + first.string() + " --seed 77") == 0);
  REQUIRE(drgame("drbsde --manifest " + (first / "run.txt").string() + " --out " + second.string()) == 0);
  CHECK(csv_files(first) == csv_files(second));
  CHECK(slurp(second / "run.txt").find("mc.seed=77\n") != std::string::npos);
}

TEST_CASE("artifacts do not depend on the thread hint") {
  const auto small = write_config("small", kSmall);
  const auto lsmc = write_config(
      "lsmc_mode",
      "[problem]\npreset = linear-quadratic\n[grid]\nn_steps = 50\n[mc]\nn_paths = 6000\n[solver]\n"
      "mode = lsmc\n");
  for (const std::string sub : {"simulate", "drbsde", "value", "pde"}) {
    CAPTURE(sub);
    const fs::path a = kWork / ("threads1_" + sub), b = kWork / ("threads4_" + sub);
    fs::remove_all(a);
    fs::remove_all(b);
    const auto& doc = sub == "drbsde" ? lsmc : small;
    REQUIRE(drgame(sub + " --config " + doc.string() + " --out " + a.string() + " --threads 1") == 0);
    REQUIRE(drgame(sub + " --config " + doc.string() + " --out " + b.string() + " --threads 4") == 0);
    const auto fa = csv_files(a), fb = csv_files(b);
    CHECK(!fa.empty());
    CHECK(fa == fb);
  }
}

TEST_CASE("value reports both game orders") {
  const auto cfg = write_config(
      "lq", "[problem]\npreset = linear-quadratic\n[grid]\nn_steps = 200\nn_nodes = 41\nx_min = -2\nx_max = 2\n[solver]\norder = infsup\n");
  const fs::path out = kWork / "lq_value";
  fs::remove_all(out);
  REQUIRE(drgame("value --config " + cfg.string() + " --out " + out.string()) == 0);
  const auto summary = slurp(out / "summary.csv");
  for (const char* key : {"root,", "lower_root,", "upper_root,", "order_gap,"}) {
    CAPTURE(key);
    CHECK(summary.find(key) != std::string::npos);
  }
  CHECK(slurp(out / "value.csv").find("upper-game") != std::string::npos);
}

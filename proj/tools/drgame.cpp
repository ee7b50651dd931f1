// Command-line entry point: drgame <subcommand> --config run.cfg [--out dir]
// [--seed n] [--threads n], or --manifest run.txt to repeat an earlier run.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "drg/commands.hpp"
#include "drg/config.hpp"
#include "drg/error.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw drg::ConfigError("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Values of stochastic differential games with doubly reflected payoffs"};
  app.set_version_flag("--version", drg::kVersion);

  std::string subcommand;
  std::string config_path;
  std::string manifest_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;

  std::string names;
  for (const auto& n : drg::subcommand_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("subcommand", subcommand, "one of: " + names)->required();
  auto* config_opt = app.add_option("--config", config_path, "configuration document");
  auto* manifest_opt = app.add_option("--manifest", manifest_path, "run.txt of an earlier run");
  config_opt->excludes(manifest_opt);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
  auto* seed_opt = app.add_option("--seed", seed, "seed (overrides [mc] seed)");
  app.add_option("--threads", threads, "worker threads; never changes the output")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return drg::kExitConfig;
  }

  drg::RunConfig cfg;
  try {
    if (!config_opt->empty()) {
      cfg = drg::load_config(config_path);
    } else if (!manifest_opt->empty()) {
      cfg = drg::config_from_manifest(read_file(manifest_path));
    } else {
      throw drg::ConfigError("one of --config or --manifest is required");
    }
  } catch (const drg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return drg::kExitConfig;
  }
  if (!out_opt->empty()) cfg.output_dir = out_dir;
  if (!seed_opt->empty()) cfg.seed = seed;
  return drg::run(subcommand, cfg, threads, std::cout, std::cerr);
}

#pragma once

#include <cstdint>
#include <string>

#include "drg/model.hpp"

namespace drg {

// Effective settings of one batch run. Every field has a default except the
// preset name; preset parameters are stored merged with the preset defaults.
struct RunConfig {
  // [problem]
  std::string preset;
  ParamMap params;
  double x0 = 0.0;

  // [grid]
  int n_steps = 400;
  int n_nodes = 161;
  double x_min = -8.0;
  double x_max = 8.0;

  // [mc]
  int n_paths = 1000;
  std::uint64_t seed = 1;
  int u_index = 0;
  int v_index = 0;

  // [solver]
  std::string order = "supinf";
  std::string mode = "lattice";
  std::string basis = "polynomial";
  int basis_degree = 3;
  int n_bins = 32;
  int samples = 1000;
  int levels = 3;
  double t_mid = 0.5;
  int dynkin_trees = 20;
  int dynkin_depth = 4;
  int sqrt_trials = 100;
  int sqrt_max_dim = 4;
  double sqrt_condition = 100.0;
  int sqrt_terms = 20000;

  // [output]
  std::string output_dir = "out";

  // The document form: every section and key, values at full precision.
  std::string serialize() const;
  // section.key=value lines for run manifests.
  std::string manifest_lines() const;

  bool operator==(const RunConfig&) const = default;
};

// Parses the sectioned key = value format. Throws ConfigError with the line
// number for syntax errors, unknown sections or keys, malformed values and
// constraint violations.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Rebuilds a RunConfig from a run.txt manifest; the non-setting entries
// (version, wall time, subcommand, threads) are skipped.
RunConfig config_from_manifest(const std::string& text);

}  // namespace drg

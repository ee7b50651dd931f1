#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "drg/config.hpp"

namespace drg {

inline constexpr const char* kVersion = "0.3.0";

enum ExitStatus : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitNumerical = 2,
  kExitConfig = 3,
};

std::vector<std::string> subcommand_names();

// Runs one pipeline, writes its CSV artifacts and run.txt into
// cfg.output_dir and returns the exit status. Error messages go to `err`,
// a short summary to `out`. `threads` never changes any artifact.
int run(const std::string& subcommand, const RunConfig& cfg, int threads, std::ostream& out,
        std::ostream& err);

}  // namespace drg

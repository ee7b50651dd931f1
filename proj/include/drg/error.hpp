#pragma once

#include <stdexcept>
#include <string>

namespace drg {

// Invalid problem data or a violated precondition (bad preset parameters,
// mismatched dimensions, out-of-range indices).
class ProblemError : public std::invalid_argument {
 public:
  explicit ProblemError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure: CFL violation, non-finite values, rank-deficient
// regression, non-convergent series.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configuration document or command line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// printf-style helper used to build error messages.
std::string format_message(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace drg

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drg/model.hpp"

namespace drg {

// Uniform grid t0 < t1 < ... < tN = T.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t0, double T, int n_steps);

  double t0() const { return knots_.front(); }
  double T() const { return knots_.back(); }
  int n_steps() const { return static_cast<int>(knots_.size()) - 1; }
  double dt() const { return dt_; }
  double operator[](int j) const { return knots_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& knots() const { return knots_; }

  // Index of the knot equal to t (within 1e-9 * dt); throws ProblemError otherwise.
  int knot_index(double t) const;
  // The same knots restricted to [knots[j], T].
  TimeGrid tail(int j) const;
  // The same knots restricted to [t0, knots[j]].
  TimeGrid head(int j) const;

  bool operator==(const TimeGrid&) const = default;
  // Same step count and endpoints up to `tol` (grids built independently).
  bool matches(const TimeGrid& other, double tol = 1e-12) const;

 private:
  std::vector<double> knots_{0.0, 1.0};
  double dt_ = 1.0;
};

// Brownian increments dW[path][step][coord], each N(0, dt) per coordinate,
// keyed by (seed, path, step, coord) through the counter-based generator.
struct PathEnsemble {
  TimeGrid grid;
  int n_paths = 0;
  int noise_dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> dW;

  double dw(int path, int step, int coord) const {
    return dW[(static_cast<std::size_t>(path) * grid.n_steps() + step) * noise_dim + coord];
  }
  std::string to_csv() const;
};

// X[path][knot][coord].
struct StatePaths {
  TimeGrid grid;
  int n_paths = 0;
  int state_dim = 0;
  Vector x0;
  std::vector<double> X;

  double x(int path, int knot, int coord = 0) const {
    return X[(static_cast<std::size_t>(path) * (grid.n_steps() + 1) + knot) * state_dim + coord];
  }
  Vector state(int path, int knot) const;
  std::string to_csv() const;
};

// Control-grid indices per (path, step).
struct ControlPath {
  int n_paths = 0;
  int n_steps = 0;
  std::vector<std::uint32_t> values;

  static ControlPath constant(int n_paths, int n_steps, std::uint32_t index);

  std::uint32_t at(int path, int step) const {
    return values[static_cast<std::size_t>(path) * n_steps + step];
  }
  std::uint32_t& at(int path, int step) {
    return values[static_cast<std::size_t>(path) * n_steps + step];
  }
  bool operator==(const ControlPath&) const = default;
};

PathEnsemble simulate_brownian(const TimeGrid& grid, int n_paths, int noise_dim, std::uint64_t seed,
                               int threads = 1);

// Euler-Maruyama for dX = b dt + sigma dW under grid-valued controls.
// Throws NumericalError naming the path and step of the first non-finite state.
StatePaths euler_forward(const GameProblem& p, const PathEnsemble& ens, const Vector& x0,
                         const ControlPath& mu, const ControlPath& nu, int threads = 1);

// A path sampled on the knots of a grid: values[j] is the value at knot j.
struct DiscretePath {
  TimeGrid grid;
  std::vector<Vector> values;
};

// omega on [t, s) followed by omega(s) + tilde(r) on [s, T]. `tilde` must live
// on the restriction of omega's grid to [s, T] and start at zero.
DiscretePath concat_paths(const DiscretePath& omega, const DiscretePath& tilde, double s);

struct ControlReplacement {
  std::vector<int> paths;
  int knot = 0;
  // Indices for steps knot, knot+1, ..., N-1; n_steps must equal N - knot.
  ControlPath control;
};

// On each listed path set the result follows `control` from its knot onward
// and mu before it; unlisted paths keep mu.
ControlPath paste_controls(const ControlPath& mu, const std::vector<ControlReplacement>& replacements);

}  // namespace drg

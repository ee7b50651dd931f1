#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "drg/model.hpp"
#include "drg/paths.hpp"

namespace drg {

// One transition of the Markov chain: probability mass sent to a node.
struct Branch {
  int target = 0;
  double prob = 0.0;
};

// Three-point transition law at (time, node, u, v): down, stay, up. At the
// first and last node the branch that would leave the grid is mirrored onto
// the inner neighbour.
struct Stencil {
  std::array<Branch, 3> branch;
  int down = 0;         // node reached by the down move (after mirroring)
  int up = 0;           // node reached by the up move (after mirroring)
  Vector sigma;         // the 1 x d diffusion row at (t, x, u, v)
  double drift = 0.0;
  double variance = 0.0;  // sigma sigma^T
  bool folded = false;
};

// Kushner-Dupuis style Markov chain approximation of the controlled state
// equation on a uniform one-dimensional grid:
//   p_up   = (sigma^2 dt / dx^2 + b dt / dx) / 2
//   p_down = (sigma^2 dt / dx^2 - b dt / dx) / 2
//   p_stay = 1 - sigma^2 dt / dx^2
// Transition laws are evaluated on demand from the problem's drift and
// diffusion; the lattice keeps its own copy of the problem for that purpose.
class Lattice {
 public:
  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& nodes() const { return nodes_; }
  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  double dx() const { return dx_; }
  double x(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t n_u() const { return dynamics_.u_grid.size(); }
  std::size_t n_v() const { return dynamics_.v_grid.size(); }
  const GameProblem& dynamics() const { return dynamics_; }

  // Throws NumericalError if a probability is negative (beyond rounding).
  Stencil stencil(int j, int i, std::size_t ui, std::size_t vi) const;

  // Index of the node equal to x (within 1e-9 dx); ProblemError otherwise.
  int node_index(double x) const;

  // Same nodes, time grid restricted to [t_j, T].
  Lattice tail(int j) const;

  friend Lattice build_lattice(const GameProblem&, const TimeGrid&, double, double, int);

 private:
  GameProblem dynamics_;
  TimeGrid grid_;
  std::vector<double> nodes_;
  double dx_ = 1.0;
};

// Lattice on [0, T] with n_steps uniform steps and n_nodes nodes on
// [x_min, x_max]. Checks (at every node, every control pair and up to 65
// evenly spaced knots) that sigma^2 dt <= dx^2, |b| dt <= dx and gamma dt < 1;
// violations raise NumericalError naming the offending maximum.
Lattice build_lattice(const GameProblem& p, int n_steps, double x_min, double x_max, int n_nodes);
Lattice build_lattice(const GameProblem& p, const TimeGrid& grid, double x_min, double x_max,
                      int n_nodes);

// The stencil admissibility checks of build_lattice on an arbitrary node set.
void check_cfl(const GameProblem& p, const TimeGrid& grid, const std::vector<double>& nodes,
               double dx);

// Expected number of boundary folds for the chain started at `start_node`
// under constant controls: total probability mass mirrored back at x_min or
// x_max over the horizon. Bounds the probability of ever being folded.
double folded_mass(const Lattice& lat, int start_node, std::size_t ui, std::size_t vi);

// Control indices per (knot, node) for lattice solvers.
struct NodeControls {
  int n_steps = 0;
  int n_nodes = 0;
  std::vector<std::uint32_t> values;

  static NodeControls constant(const Lattice& lat, std::uint32_t index);
  std::uint32_t at(int j, int i) const {
    return values[static_cast<std::size_t>(j) * n_nodes + i];
  }
  std::uint32_t& at(int j, int i) { return values[static_cast<std::size_t>(j) * n_nodes + i]; }
};

// Result of one explicit backward step at a node under fixed controls.
struct NodeStep {
  double continuation = 0.0;  // sum_b p_b W(t_{j+1}, target_b)
  Vector z;                   // sigma^T (W(up) - W(down)) / (2 dx)
  double candidate = 0.0;     // continuation + f(t_j, x, continuation, z, u, v) dt
};

// The shared one-step update used by every lattice solver, so that the DRBSDE
// solver and the game induction produce bit-identical numbers.
NodeStep node_step(const GameProblem& p, const Lattice& lat, int j, int i, std::size_t ui,
                   std::size_t vi, const std::vector<double>& next_layer);

// min(upper, max(lower, value)).
inline double clamp_between(double value, double lower, double upper) {
  return value < lower ? lower : (value > upper ? upper : value);
}

// Throws ProblemError when p cannot be solved on lat (dimension or grid mismatch).
void check_compatible(const GameProblem& p, const Lattice& lat);

}  // namespace drg

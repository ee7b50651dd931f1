#pragma once

#include <string>
#include <vector>

#include "drg/lattice.hpp"
#include "drg/model.hpp"
#include "drg/paths.hpp"

namespace drg {

// supinf: the maximising player u moves first (lower value).
// infsup: the minimising player v moves first (upper value).
enum class Order { supinf, infsup };

enum class SurfaceKind { lower_game, upper_game, single_control, dynkin, pde };

const char* to_string(Order order);
const char* to_string(SurfaceKind kind);
Order parse_order(const std::string& text);

// Value function on a time grid times a 1D node set, W[j * n_nodes + i].
struct ValueSurface {
  TimeGrid grid;
  std::vector<double> x_nodes;
  std::vector<double> W;
  SurfaceKind kind = SurfaceKind::lower_game;

  int n_nodes() const { return static_cast<int>(x_nodes.size()); }
  double at(int j, int i) const { return W[static_cast<std::size_t>(j) * x_nodes.size() + i]; }
  double& at(int j, int i) { return W[static_cast<std::size_t>(j) * x_nodes.size() + i]; }
  std::vector<double> layer(int j) const;

  // Value at (t0, x0); linear interpolation between nodes. ProblemError
  // outside [x_min, x_max].
  double root(double x0) const;

  // time,x,value,kind
  std::string to_csv() const;
};

// Backward sup-inf (or inf-sup) induction on the lattice. At each node every
// control pair gets the explicit candidate of node_step, the optimum is taken
// in the requested order (ties keep the first grid index) and the result is
// clamped between the obstacles.
ValueSurface value_backward_induction(const GameProblem& p, const Lattice& lat, Order order,
                                      int threads = 1);

// The same induction over the whole lattice grid, started from `terminal`
// (one value per node) instead of h.
ValueSurface value_backward_induction(const GameProblem& p, const Lattice& lat, Order order,
                                      const std::vector<double>& terminal, int threads = 1);

// Value for a game whose second player is trivial: sup over u. Throws
// ProblemError unless v_grid is a singleton.
ValueSurface single_control_value(const GameProblem& p, const Lattice& lat, int threads = 1);

struct DppReport {
  double direct = 0.0;     // root from one solve on [t0, T]
  double composed = 0.0;   // root from [t0, t_mid] with terminal data from [t_mid, T]
  double gap = 0.0;        // |direct - composed|
  double layer_gap = 0.0;  // max over all nodes of the t0 layer
};

// Solve-compose-compare on one lattice. t_mid must be an interior knot.
DppReport dpp_check(const GameProblem& p, const Lattice& lat, double t_mid, Order order, double x0);

struct DppLevel {
  int n_steps = 0;
  int n_nodes = 0;
  double dt = 0.0;
  double dx = 0.0;
  double direct = 0.0;
  double composed = 0.0;
  double gap = 0.0;
};

struct DppStudy {
  std::vector<DppLevel> levels;
  double constant = 0.0;  // max over levels of gap / (dt + dx^2)
};

// Cross-resolution variant: at each level the [t_mid, T] part is solved on a
// lattice with dx / 2 and dt / 4, and its t_mid layer is interpolated
// linearly onto the coarse nodes before composing. Each successive level
// halves dx and quarters dt of the coarse lattice.
DppStudy dpp_cross_resolution(const GameProblem& p, double x_min, double x_max, int n_steps,
                              int n_nodes, double t_mid, Order order, double x0, int n_levels = 3);

// Piecewise-linear interpolation of (nodes, values) at x; constant beyond the ends.
double interpolate(const std::vector<double>& nodes, const std::vector<double>& values, double x);

}  // namespace drg

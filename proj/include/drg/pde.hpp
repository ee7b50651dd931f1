#pragma once

#include <string>
#include <vector>

#include "drg/game.hpp"
#include "drg/lattice.hpp"
#include "drg/model.hpp"
#include "drg/paths.hpp"

namespace drg {

// Uniform space-time grid for the explicit finite-difference solver.
class PdeGrid {
 public:
  // Checks sigma^2 dt <= dx^2, |b| dt <= dx and gamma dt < 1 for every grid
  // control pair (NumericalError naming the offending maximum).
  PdeGrid(const GameProblem& p, int n_steps, double x_min, double x_max, int n_nodes);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& nodes() const { return nodes_; }
  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  double dx() const { return dx_; }
  double x_min() const { return nodes_.front(); }
  double x_max() const { return nodes_.back(); }

 private:
  TimeGrid grid_;
  std::vector<double> nodes_;
  double dx_ = 1.0;
};

struct HamiltonianArgs {
  double t = 0.0;
  Vector x;
  double y = 0.0;
  Vector z;      // gradient in x
  Matrix gamma;  // Hessian in x, symmetric
  ControlPoint u;
  ControlPoint v;
};

// 1/2 tr(sigma sigma^T Gamma) + z . b + f(t, x, y, sigma^T z, u, v).
double hamiltonian(const GameProblem& p, const HamiltonianArgs& a);

// Optimum of the Hamiltonian over u_grid x v_grid in the given order (the
// u and v fields of `a` are ignored). Ties keep the first grid index.
double isaacs_hamiltonian(const GameProblem& p, const HamiltonianArgs& a, Order order);

// Explicit backward scheme for the double-obstacle Isaacs equation:
//   w(t_j) = clamp(w(t_{j+1}) + dt * opt_{u,v} H(t_j, x, y_pred, D w, D^2 w, u, v), lower, upper)
// with central differences of the t_{j+1} layer and a mirror ghost node at
// either end of the grid (D w = 0, D^2 w = 2 (w_1 - w_0) / dx^2). The y
// argument of f is the one-step predictor y_pred = w + dt (sigma^2 D^2 w / 2 + b D w).
// Throws NumericalError on a negative stencil weight or a non-finite layer.
ValueSurface solve_obstacle_pde(const GameProblem& p, const PdeGrid& g, Order order, int threads = 1);

struct ResidualField {
  TimeGrid grid;
  std::vector<double> x_nodes;
  // residual[j * n_nodes + i] for knots j < N; zero on the two boundary nodes.
  std::vector<double> residual;
  double max_abs = 0.0;
  int worst_knot = -1;
  int worst_node = -1;

  // time,x,residual over interior nodes and knots before T
  std::string to_csv() const;
};

// Finite-difference evaluation of
//   min{ w - lower, max{ -dw/dt - opt H(t, x, w, D w, D^2 w), w - upper } }
// at every interior node and knot j < N, using a forward time difference and
// spatial differences of layer j + 1.
ResidualField viscosity_residual(const GameProblem& p, const PdeGrid& g, const ValueSurface& w,
                                 Order order);

struct CrossCheckReport {
  double lattice_root = 0.0;
  double pde_root = 0.0;
  double rel_gap = 0.0;  // |a - b| / max(1, |a|, |b|)
};

// Compares the lattice induction with the PDE solver at (t0, x0). The two
// grids must cover the same interval and horizon.
CrossCheckReport cross_check(const GameProblem& p, const Lattice& lat, const PdeGrid& g, Order order,
                             double x0);

struct ConvergenceRow {
  int level = 0;
  int n_steps = 0;
  int n_nodes = 0;
  double root_value = 0.0;
  double diff = 0.0;  // change from the previous level; 0 on the first
};

// PDE solves with dx halved and dt quartered at each level.
std::vector<ConvergenceRow> pde_convergence(const GameProblem& p, Order order, int n_steps,
                                            double x_min, double x_max, int n_nodes, double x0,
                                            int n_levels = 3);

// resolution,root_value,diff
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

}  // namespace drg

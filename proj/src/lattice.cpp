#include "drg/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "drg/error.hpp"

namespace drg {

namespace {

// Rounding allowance when sigma^2 dt / dx^2 is 1 up to the last bit.
constexpr double kProbRounding = 1e-12;

double tidy_probability(double p, int j, int i) {
  if (p >= 0.0) return p;
  if (p > -kProbRounding) return 0.0;
  throw NumericalError(format_message(
      "negative transition probability %.17g at knot %d, node %d (CFL violated)", p, j, i));
}

}  // namespace

Stencil Lattice::stencil(int j, int i, std::size_t ui, std::size_t vi) const {
  const double t = grid_[j];
  const Vector x = Vector::Constant(1, nodes_[static_cast<std::size_t>(i)]);
  const ControlPoint& u = dynamics_.u_grid[ui];
  const ControlPoint& v = dynamics_.v_grid[vi];
  Stencil s;
  s.drift = dynamics_.drift(t, x, u, v)(0);
  s.sigma = dynamics_.diffusion(t, x, u, v).row(0).transpose();
  s.variance = s.sigma.squaredNorm();

  const double dt = grid_.dt();
  const double r = s.variance * dt / (dx_ * dx_);
  const double m = s.drift * dt / dx_;
  const double p_up = tidy_probability(0.5 * (r + m), j, i);
  const double p_down = tidy_probability(0.5 * (r - m), j, i);
  const double p_stay = tidy_probability(1.0 - r, j, i);

  const int last = n_nodes() - 1;
  s.down = i - 1;
  s.up = i + 1;
  if (i == 0) {
    s.down = 1;
    s.folded = p_down > 0.0;
  }
  if (i == last) {
    s.up = last - 1;
    s.folded = p_up > 0.0;
  }
  s.branch = {Branch{s.down, p_down}, Branch{i, p_stay}, Branch{s.up, p_up}};
  return s;
}

int Lattice::node_index(double x) const {
  const double pos = (x - nodes_.front()) / dx_;
  const long i = std::lround(pos);
  if (i < 0 || i >= n_nodes() || std::abs(pos - static_cast<double>(i)) > 1e-9)
    throw ProblemError(format_message("x = %.17g is not a lattice node", x));
  return static_cast<int>(i);
}

Lattice Lattice::tail(int j) const {
  Lattice out = *this;
  out.grid_ = grid_.tail(j);
  return out;
}

void check_cfl(const GameProblem& p, const TimeGrid& grid, const std::vector<double>& nodes,
               double dx) {
  const double dt = grid.dt();
  if (!(p.lipschitz * dt < 1.0))
    throw NumericalError(format_message("gamma * dt = %.17g must be below 1", p.lipschitz * dt));

  const int n = grid.n_steps();
  const int probes = std::min(n + 1, 65);
  const double dx2 = dx * dx;
  double max_var = 0.0, max_drift = 0.0;
  double min_margin = INFINITY, margin_drift = 0.0, margin_var = 0.0;
  for (int s = 0; s < probes; ++s) {
    const int j =
        probes == 1 ? 0 : static_cast<int>(std::lround(static_cast<double>(s) * n / (probes - 1)));
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      const Vector x = Vector::Constant(1, nodes[i]);
      for (std::size_t ui = 0; ui < p.u_grid.size(); ++ui)
        for (std::size_t vi = 0; vi < p.v_grid.size(); ++vi) {
          const double b = p.drift(grid[j], x, p.u_grid[ui], p.v_grid[vi])(0);
          const Matrix sig = p.diffusion(grid[j], x, p.u_grid[ui], p.v_grid[vi]);
          if (sig.rows() != 1 || sig.cols() != p.noise_dim)
            throw ProblemError("diffusion returns a matrix of the wrong shape");
          if (!std::isfinite(b) || !sig.allFinite())
            throw NumericalError(format_message("non-finite coefficient at knot %d, node %d", j, i));
          const double var = sig.row(0).squaredNorm();
          max_var = std::max(max_var, var);
          max_drift = std::max(max_drift, std::abs(b));
          // p_up and p_down are both nonnegative iff var dt / dx^2 >= |b| dt / dx.
          const double margin = var * dt / dx2 - std::abs(b) * dt / dx;
          if (margin < min_margin) {
            min_margin = margin;
            margin_drift = b;
            margin_var = var;
          }
        }
    }
  }
  if (max_var * dt > dx2 * (1.0 + kProbRounding))
    throw NumericalError(format_message(
        "CFL violated: dt * max sigma^2 = %.17g exceeds dx^2 = %.17g", max_var * dt, dx2));
  if (max_drift * dt > dx * (1.0 + kProbRounding))
    throw NumericalError(format_message(
        "CFL violated: dt * max |b| = %.17g exceeds dx = %.17g", max_drift * dt, dx));
  if (min_margin < -kProbRounding)
    throw NumericalError(format_message(
        "nonpositive probability: drift %.17g dominates sigma^2 = %.17g at dx = %.17g",
        margin_drift, margin_var, dx));
}

Lattice build_lattice(const GameProblem& p, int n_steps, double x_min, double x_max, int n_nodes) {
  return build_lattice(p, TimeGrid(0.0, p.horizon, n_steps), x_min, x_max, n_nodes);
}

Lattice build_lattice(const GameProblem& p, const TimeGrid& grid, double x_min, double x_max,
                      int n_nodes) {
  p.check_structure();
  if (p.state_dim != 1) throw ProblemError("lattice construction supports state_dim = 1 only");
  if (n_nodes < 3) throw ProblemError("lattice needs at least 3 nodes");
  if (!(x_max > x_min)) throw ProblemError("lattice needs x_max > x_min");
  if (std::abs(grid.T() - p.horizon) > 1e-12)
    throw ProblemError("lattice time grid must end at the problem horizon");

  Lattice lat;
  lat.dynamics_ = p;
  lat.grid_ = grid;
  lat.dx_ = (x_max - x_min) / (n_nodes - 1);
  lat.nodes_.resize(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) lat.nodes_[i] = (i == n_nodes - 1) ? x_max : x_min + i * lat.dx_;

  check_cfl(p, grid, lat.nodes_, lat.dx_);
  return lat;
}

double folded_mass(const Lattice& lat, int start_node, std::size_t ui, std::size_t vi) {
  if (start_node < 0 || start_node >= lat.n_nodes()) throw ProblemError("start node out of range");
  std::vector<double> mass(static_cast<std::size_t>(lat.n_nodes()), 0.0), next(mass.size());
  mass[static_cast<std::size_t>(start_node)] = 1.0;
  const int last = lat.n_nodes() - 1;
  double folded = 0.0;
  for (int j = 0; j < lat.grid().n_steps(); ++j) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i <= last; ++i) {
      if (mass[i] == 0.0) continue;
      const Stencil s = lat.stencil(j, i, ui, vi);
      for (const auto& b : s.branch) next[static_cast<std::size_t>(b.target)] += mass[i] * b.prob;
      if (i == 0) folded += mass[i] * s.branch[0].prob;
      if (i == last) folded += mass[i] * s.branch[2].prob;
    }
    mass.swap(next);
  }
  return folded;
}

NodeControls NodeControls::constant(const Lattice& lat, std::uint32_t index) {
  NodeControls c;
  c.n_steps = lat.grid().n_steps();
  c.n_nodes = lat.n_nodes();
  c.values.assign(static_cast<std::size_t>(c.n_steps) * c.n_nodes, index);
  return c;
}

void check_compatible(const GameProblem& p, const Lattice& lat) {
  p.check_structure();
  if (p.state_dim != 1 || p.noise_dim != lat.dynamics().noise_dim)
    throw ProblemError("problem dimensions differ from the lattice dynamics");
  if (p.u_grid.size() != lat.n_u() || p.v_grid.size() != lat.n_v())
    throw ProblemError("problem control grids differ in size from the lattice dynamics");
  if (std::abs(p.horizon - lat.grid().T()) > 1e-12)
    throw ProblemError("problem horizon differs from the lattice horizon");
  if (!(p.lipschitz * lat.grid().dt() < 1.0))
    throw NumericalError("gamma * dt must be below 1 for the explicit backward step");
}

NodeStep node_step(const GameProblem& p, const Lattice& lat, int j, int i, std::size_t ui,
                   std::size_t vi, const std::vector<double>& next_layer) {
  const Stencil s = lat.stencil(j, i, ui, vi);
  NodeStep out;
  out.continuation = s.branch[0].prob * next_layer[static_cast<std::size_t>(s.branch[0].target)] +
                     s.branch[1].prob * next_layer[static_cast<std::size_t>(s.branch[1].target)] +
                     s.branch[2].prob * next_layer[static_cast<std::size_t>(s.branch[2].target)];
  const double slope = (next_layer[static_cast<std::size_t>(s.up)] -
                        next_layer[static_cast<std::size_t>(s.down)]) /
                       (2.0 * lat.dx());
  out.z = s.sigma * slope;
  const double t = lat.grid()[j];
  out.candidate = out.continuation + p.generator(t, Vector::Constant(1, lat.x(i)), out.continuation,
                                                 out.z, p.u_grid[ui], p.v_grid[vi]) *
                                         lat.grid().dt();
  return out;
}

}  // namespace drg

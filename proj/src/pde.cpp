#include "drg/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drg/csv.hpp"
#include "drg/error.hpp"
#include "drg/parallel.hpp"

namespace drg {

PdeGrid::PdeGrid(const GameProblem& p, int n_steps, double x_min, double x_max, int n_nodes)
    : grid_(0.0, p.horizon, n_steps) {
  p.check_structure();
  if (p.state_dim != 1) throw ProblemError("PDE grid supports state_dim = 1 only");
  if (n_nodes < 3) throw ProblemError("PDE grid needs at least 3 nodes");
  if (!(x_max > x_min)) throw ProblemError("PDE grid needs x_max > x_min");
  dx_ = (x_max - x_min) / (n_nodes - 1);
  nodes_.resize(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) nodes_[i] = (i == n_nodes - 1) ? x_max : x_min + i * dx_;
  check_cfl(p, grid_, nodes_, dx_);
}

double hamiltonian(const GameProblem& p, const HamiltonianArgs& a) {
  const Matrix sigma = p.diffusion(a.t, a.x, a.u, a.v);
  const Vector b = p.drift(a.t, a.x, a.u, a.v);
  if (a.z.size() != b.size() || a.gamma.rows() != b.size() || a.gamma.cols() != b.size() ||
      sigma.rows() != b.size())
    throw ProblemError("Hamiltonian arguments have inconsistent dimensions");
  const double diffusion = 0.5 * (sigma * sigma.transpose() * a.gamma).trace();
  return diffusion + a.z.dot(b) + p.generator(a.t, a.x, a.y, sigma.transpose() * a.z, a.u, a.v);
}

double isaacs_hamiltonian(const GameProblem& p, const HamiltonianArgs& a, Order order) {
  HamiltonianArgs args = a;
  const auto value = [&](std::size_t ui, std::size_t vi) {
    args.u = p.u_grid[ui];
    args.v = p.v_grid[vi];
    return hamiltonian(p, args);
  };
  const std::size_t nu = p.u_grid.size();
  const std::size_t nv = p.v_grid.size();
  if (order == Order::supinf) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t ui = 0; ui < nu; ++ui) {
      double inner = std::numeric_limits<double>::infinity();
      for (std::size_t vi = 0; vi < nv; ++vi) inner = std::min(inner, value(ui, vi));
      if (inner > best) best = inner;
    }
    return best;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t vi = 0; vi < nv; ++vi) {
    double inner = -std::numeric_limits<double>::infinity();
    for (std::size_t ui = 0; ui < nu; ++ui) inner = std::max(inner, value(ui, vi));
    if (inner < best) best = inner;
  }
  return best;
}

namespace {

struct Derivatives {
  double first = 0.0;
  double second = 0.0;
};

// Central differences with a mirror ghost node at either end.
Derivatives differences(const std::vector<double>& w, int i, double dx) {
  const int last = static_cast<int>(w.size()) - 1;
  const double left = w[i == 0 ? 1 : i - 1];
  const double right = w[i == last ? last - 1 : i + 1];
  return {(right - left) / (2.0 * dx), (right - 2.0 * w[i] + left) / (dx * dx)};
}

// Weights of the explicit update on (left, centre, right) must be nonnegative.
void check_monotone(double variance, double drift, double dt, double dx, int j, int i) {
  const double side = 0.5 * variance * dt / (dx * dx);
  const double skew = 0.5 * drift * dt / dx;
  const double centre = 1.0 - 2.0 * side;
  if (side - std::abs(skew) < -1e-12 || centre < -1e-12)
    throw NumericalError(format_message(
        "negative stencil weight at knot %d, node %d (CFL violated: sigma^2 = %.17g, b = %.17g)", j, i,
        variance, drift));
}

}  // namespace

ValueSurface solve_obstacle_pde(const GameProblem& p, const PdeGrid& g, Order order, int threads) {
  p.check_structure();
  if (std::abs(g.grid().T() - p.horizon) > 1e-12)
    throw ProblemError("PDE grid horizon differs from the problem horizon");
  const TimeGrid& grid = g.grid();
  const int n = grid.n_steps();
  const int nodes = g.n_nodes();
  const double dt = grid.dt();
  const double dx = g.dx();

  ValueSurface out;
  out.grid = grid;
  out.x_nodes = g.nodes();
  out.kind = SurfaceKind::pde;
  out.W.assign(static_cast<std::size_t>(n + 1) * nodes, 0.0);
  std::vector<double> next(static_cast<std::size_t>(nodes)), cur(next.size());
  for (int i = 0; i < nodes; ++i) {
    const double x = g.nodes()[i];
    next[i] = p.terminal1(x);
    if (next[i] < p.lower1(grid.T(), x) || next[i] > p.upper1(grid.T(), x))
      throw ProblemError(format_message("terminal value outside the obstacles at x = %.17g", x));
    out.at(n, i) = next[i];
  }

  const std::size_t nu = p.u_grid.size();
  const std::size_t nv = p.v_grid.size();
  for (int j = n - 1; j >= 0; --j) {
    const double t = grid[j];
    parallel_for(static_cast<std::size_t>(nodes), threads, [&](std::size_t begin, std::size_t end) {
      HamiltonianArgs a;
      a.t = t;
      a.x.resize(1);
      a.z.resize(1);
      a.gamma.resize(1, 1);
      for (std::size_t i = begin; i < end; ++i) {
        const int ii = static_cast<int>(i);
        const double x = g.nodes()[i];
        const Derivatives d = differences(next, ii, dx);
        a.x(0) = x;
        a.z(0) = d.first;
        a.gamma(0, 0) = d.second;
        // Candidate update for one control pair.
        const auto update = [&](std::size_t ui, std::size_t vi) {
          a.u = p.u_grid[ui];
          a.v = p.v_grid[vi];
          const Matrix sigma = p.diffusion(t, a.x, a.u, a.v);
          const double b = p.drift(t, a.x, a.u, a.v)(0);
          const double variance = sigma.row(0).squaredNorm();
          check_monotone(variance, b, dt, dx, j, ii);
          a.y = next[i] + dt * (0.5 * variance * d.second + b * d.first);
          return next[i] + dt * hamiltonian(p, a);
        };
        double best;
        if (order == Order::supinf) {
          best = -std::numeric_limits<double>::infinity();
          for (std::size_t ui = 0; ui < nu; ++ui) {
            double inner = std::numeric_limits<double>::infinity();
            for (std::size_t vi = 0; vi < nv; ++vi) inner = std::min(inner, update(ui, vi));
            if (inner > best) best = inner;
          }
        } else {
          best = std::numeric_limits<double>::infinity();
          for (std::size_t vi = 0; vi < nv; ++vi) {
            double inner = -std::numeric_limits<double>::infinity();
            for (std::size_t ui = 0; ui < nu; ++ui) inner = std::max(inner, update(ui, vi));
            if (inner < best) best = inner;
          }
        }
        cur[i] = clamp_between(best, p.lower1(t, x), p.upper1(t, x));
      }
    });
    for (int i = 0; i < nodes; ++i)
      if (!std::isfinite(cur[i]))
        throw NumericalError(format_message("non-finite PDE value in layer %d at node %d", j, i));
    std::copy(cur.begin(), cur.end(), out.W.begin() + static_cast<std::ptrdiff_t>(j) * nodes);
    next.swap(cur);
  }
  return out;
}

std::string ResidualField::to_csv() const {
  CsvTable csv({"time", "x", "residual"});
  const int nodes = static_cast<int>(x_nodes.size());
  for (int j = 0; j < grid.n_steps(); ++j)
    for (int i = 1; i + 1 < nodes; ++i)
      csv.row({format_double(grid[j]), format_double(x_nodes[i]),
               format_double(residual[static_cast<std::size_t>(j) * nodes + i])});
  return csv.str();
}

ResidualField viscosity_residual(const GameProblem& p, const PdeGrid& g, const ValueSurface& w,
                                 Order order) {
  if (!w.grid.matches(g.grid()) || w.n_nodes() != g.n_nodes())
    throw ProblemError("value surface is not defined on the PDE grid");
  const TimeGrid& grid = g.grid();
  const int n = grid.n_steps();
  const int nodes = g.n_nodes();
  ResidualField r;
  r.grid = grid;
  r.x_nodes = g.nodes();
  r.residual.assign(static_cast<std::size_t>(n) * nodes, 0.0);

  HamiltonianArgs a;
  a.x.resize(1);
  a.z.resize(1);
  a.gamma.resize(1, 1);
  for (int j = 0; j < n; ++j) {
    const std::vector<double> next = w.layer(j + 1);
    a.t = grid[j];
    for (int i = 1; i + 1 < nodes; ++i) {
      const double x = g.nodes()[i];
      const Derivatives d = differences(next, i, g.dx());
      const double wj = w.at(j, i);
      a.x(0) = x;
      a.y = wj;
      a.z(0) = d.first;
      a.gamma(0, 0) = d.second;
      const double time_derivative = (next[i] - wj) / grid.dt();
      const double h = isaacs_hamiltonian(p, a, order);
      const double value = std::min(wj - p.lower1(a.t, x),
                                    std::max(-time_derivative - h, wj - p.upper1(a.t, x)));
      r.residual[static_cast<std::size_t>(j) * nodes + i] = value;
      if (std::abs(value) > r.max_abs) {
        r.max_abs = std::abs(value);
        r.worst_knot = j;
        r.worst_node = i;
      }
    }
  }
  return r;
}

CrossCheckReport cross_check(const GameProblem& p, const Lattice& lat, const PdeGrid& g, Order order,
                             double x0) {
  const double tol = 1e-12 * std::max(1.0, std::abs(g.x_max()) + std::abs(g.x_min()));
  if (std::abs(lat.nodes().front() - g.x_min()) > tol || std::abs(lat.nodes().back() - g.x_max()) > tol ||
      std::abs(lat.grid().t0() - g.grid().t0()) > 1e-12 || std::abs(lat.grid().T() - g.grid().T()) > 1e-12)
    throw ProblemError("lattice and PDE grid cover different domains");
  CrossCheckReport r;
  r.lattice_root = value_backward_induction(p, lat, order).root(x0);
  r.pde_root = solve_obstacle_pde(p, g, order).root(x0);
  r.rel_gap = std::abs(r.lattice_root - r.pde_root) /
              std::max({1.0, std::abs(r.lattice_root), std::abs(r.pde_root)});
  return r;
}

std::vector<ConvergenceRow> pde_convergence(const GameProblem& p, Order order, int n_steps,
                                            double x_min, double x_max, int n_nodes, double x0,
                                            int n_levels) {
  if (n_levels < 1) throw ProblemError("convergence study needs at least one level");
  std::vector<ConvergenceRow> rows;
  for (int level = 0; level < n_levels; ++level) {
    const int scale = 1 << level;
    ConvergenceRow row;
    row.level = level;
    row.n_steps = n_steps * scale * scale;
    row.n_nodes = (n_nodes - 1) * scale + 1;
    const PdeGrid g(p, row.n_steps, x_min, x_max, row.n_nodes);
    row.root_value = solve_obstacle_pde(p, g, order).root(x0);
    row.diff = rows.empty() ? 0.0 : row.root_value - rows.back().root_value;
    rows.push_back(row);
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  CsvTable csv({"resolution", "root_value", "diff"});
  for (const auto& r : rows)
    csv.row({std::to_string(r.level), format_double(r.root_value), format_double(r.diff)});
  return csv.str();
}

}  // namespace drg

#include "drg/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drg/csv.hpp"
#include "drg/error.hpp"
#include "drg/parallel.hpp"

namespace drg {

const char* to_string(Order order) { return order == Order::supinf ? "supinf" : "infsup"; }

const char* to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::lower_game: return "lower-game";
    case SurfaceKind::upper_game: return "upper-game";
    case SurfaceKind::single_control: return "single-control";
    case SurfaceKind::dynkin: return "dynkin";
    case SurfaceKind::pde: return "pde";
  }
  return "unknown";
}

Order parse_order(const std::string& text) {
  if (text == "supinf") return Order::supinf;
  if (text == "infsup") return Order::infsup;
  throw ProblemError("order must be supinf or infsup, got '" + text + "'");
}

std::vector<double> ValueSurface::layer(int j) const {
  const auto begin = W.begin() + static_cast<std::ptrdiff_t>(j) * n_nodes();
  return {begin, begin + n_nodes()};
}

double interpolate(const std::vector<double>& nodes, const std::vector<double>& values, double x) {
  if (nodes.empty() || nodes.size() != values.size())
    throw ProblemError("interpolation needs matching, non-empty node and value arrays");
  if (x <= nodes.front()) return values.front();
  if (x >= nodes.back()) return values.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
  const std::size_t lo = hi - 1;
  if (x == nodes[lo]) return values[lo];
  const double w = (x - nodes[lo]) / (nodes[hi] - nodes[lo]);
  return values[lo] + w * (values[hi] - values[lo]);
}

double ValueSurface::root(double x0) const {
  if (x0 < x_nodes.front() - 1e-12 || x0 > x_nodes.back() + 1e-12)
    throw ProblemError(format_message("x0 = %.17g lies outside the grid [%.17g, %.17g]", x0,
                                      x_nodes.front(), x_nodes.back()));
  return interpolate(x_nodes, layer(0), x0);
}

std::string ValueSurface::to_csv() const {
  CsvTable csv({"time", "x", "value", "kind"});
  const std::string k = to_string(kind);
  for (int j = 0; j <= grid.n_steps(); ++j)
    for (int i = 0; i < n_nodes(); ++i)
      csv.row({format_double(grid[j]), format_double(x_nodes[i]), format_double(at(j, i)), k});
  return csv.str();
}

namespace {

// Optimal candidate at one node; the inner loop runs over the second mover.
double saddle(const GameProblem& p, const Lattice& lat, int j, int i, Order order,
              const std::vector<double>& next) {
  const std::size_t nu = p.u_grid.size();
  const std::size_t nv = p.v_grid.size();
  const auto candidate = [&](std::size_t ui, std::size_t vi) {
    const double q = node_step(p, lat, j, i, ui, vi, next).candidate;
    if (!std::isfinite(q))
      throw NumericalError(format_message("non-finite value at knot %d, node %d", j, i));
    return q;
  };
  if (order == Order::supinf) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t ui = 0; ui < nu; ++ui) {
      double inner = std::numeric_limits<double>::infinity();
      for (std::size_t vi = 0; vi < nv; ++vi) inner = std::min(inner, candidate(ui, vi));
      if (inner > best) best = inner;
    }
    return best;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t vi = 0; vi < nv; ++vi) {
    double inner = -std::numeric_limits<double>::infinity();
    for (std::size_t ui = 0; ui < nu; ++ui) inner = std::max(inner, candidate(ui, vi));
    if (inner < best) best = inner;
  }
  return best;
}

// Induction over knots 0..j_end of lat, starting from `terminal` at j_end.
ValueSurface induct(const GameProblem& p, const Lattice& lat, Order order, int j_end,
                    const std::vector<double>& terminal, SurfaceKind kind, int threads) {
  const int nodes = lat.n_nodes();
  if (terminal.size() != static_cast<std::size_t>(nodes))
    throw ProblemError("terminal layer size differs from the lattice node count");
  const TimeGrid& grid = lat.grid();
  ValueSurface out;
  out.grid = j_end == grid.n_steps() ? grid : grid.head(j_end);
  out.x_nodes = lat.nodes();
  out.kind = kind;
  out.W.assign(static_cast<std::size_t>(j_end + 1) * nodes, 0.0);
  std::copy(terminal.begin(), terminal.end(), out.W.begin() + static_cast<std::ptrdiff_t>(j_end) * nodes);

  std::vector<double> next = terminal;
  std::vector<double> cur(next.size());
  for (int j = j_end - 1; j >= 0; --j) {
    const double t = grid[j];
    parallel_for(static_cast<std::size_t>(nodes), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const int ii = static_cast<int>(i);
        const double x = lat.x(ii);
        cur[i] = clamp_between(saddle(p, lat, j, ii, order, next), p.lower1(t, x), p.upper1(t, x));
      }
    });
    std::copy(cur.begin(), cur.end(), out.W.begin() + static_cast<std::ptrdiff_t>(j) * nodes);
    next.swap(cur);
  }
  return out;
}

void check_between_obstacles(const GameProblem& p, const Lattice& lat, const std::vector<double>& h) {
  if (h.size() != static_cast<std::size_t>(lat.n_nodes()))
    throw ProblemError("terminal layer size differs from the lattice node count");
  const double T = lat.grid().T();
  for (int i = 0; i < lat.n_nodes(); ++i) {
    const double x = lat.x(i);
    if (h[i] < p.lower1(T, x) || h[i] > p.upper1(T, x))
      throw ProblemError(format_message("terminal value %.17g at x = %.17g lies outside the obstacles",
                                        h[i], x));
  }
}

std::vector<double> terminal_layer(const GameProblem& p, const Lattice& lat) {
  std::vector<double> h(static_cast<std::size_t>(lat.n_nodes()));
  for (int i = 0; i < lat.n_nodes(); ++i) h[i] = p.terminal1(lat.x(i));
  check_between_obstacles(p, lat, h);
  return h;
}

SurfaceKind game_kind(Order order) {
  return order == Order::supinf ? SurfaceKind::lower_game : SurfaceKind::upper_game;
}

}  // namespace

ValueSurface value_backward_induction(const GameProblem& p, const Lattice& lat, Order order,
                                      int threads) {
  check_compatible(p, lat);
  return induct(p, lat, order, lat.grid().n_steps(), terminal_layer(p, lat), game_kind(order),
                threads);
}

ValueSurface value_backward_induction(const GameProblem& p, const Lattice& lat, Order order,
                                      const std::vector<double>& terminal, int threads) {
  check_compatible(p, lat);
  check_between_obstacles(p, lat, terminal);
  return induct(p, lat, order, lat.grid().n_steps(), terminal, game_kind(order), threads);
}

ValueSurface single_control_value(const GameProblem& p, const Lattice& lat, int threads) {
  if (p.v_grid.size() != 1)
    throw ProblemError("single-control value needs a singleton v grid");
  check_compatible(p, lat);
  return induct(p, lat, Order::supinf, lat.grid().n_steps(), terminal_layer(p, lat),
                SurfaceKind::single_control, threads);
}

DppReport dpp_check(const GameProblem& p, const Lattice& lat, double t_mid, Order order, double x0) {
  check_compatible(p, lat);
  const int jm = lat.grid().knot_index(t_mid);
  if (jm <= 0 || jm >= lat.grid().n_steps())
    throw ProblemError("t_mid must be an interior knot");

  const ValueSurface direct = value_backward_induction(p, lat, order);
  const ValueSurface tail = value_backward_induction(p, lat.tail(jm), order);
  const ValueSurface head = induct(p, lat, order, jm, tail.layer(0), game_kind(order), 1);

  DppReport r;
  r.direct = direct.root(x0);
  r.composed = head.root(x0);
  r.gap = std::abs(r.direct - r.composed);
  for (int i = 0; i < lat.n_nodes(); ++i)
    r.layer_gap = std::max(r.layer_gap, std::abs(direct.at(0, i) - head.at(0, i)));
  return r;
}

DppStudy dpp_cross_resolution(const GameProblem& p, double x_min, double x_max, int n_steps,
                              int n_nodes, double t_mid, Order order, double x0, int n_levels) {
  if (n_levels < 1) throw ProblemError("cross-resolution study needs at least one level");
  DppStudy study;
  for (int level = 0; level < n_levels; ++level) {
    const int scale = 1 << level;
    const int steps = n_steps * scale * scale;
    const int nodes = (n_nodes - 1) * scale + 1;
    const Lattice coarse = build_lattice(p, steps, x_min, x_max, nodes);
    const int jm = coarse.grid().knot_index(t_mid);
    if (jm <= 0 || jm >= steps) throw ProblemError("t_mid must be an interior knot");

    const TimeGrid fine_grid(coarse.grid()[jm], coarse.grid().T(), 4 * (steps - jm));
    const Lattice fine = build_lattice(p, fine_grid, x_min, x_max, 2 * (nodes - 1) + 1);
    const ValueSurface fine_tail = value_backward_induction(p, fine, order);
    const std::vector<double> fine_mid = fine_tail.layer(0);
    std::vector<double> handover(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) handover[i] = interpolate(fine.nodes(), fine_mid, coarse.x(i));

    const ValueSurface direct = value_backward_induction(p, coarse, order);
    const ValueSurface head = induct(p, coarse, order, jm, handover, game_kind(order), 1);

    DppLevel row;
    row.n_steps = steps;
    row.n_nodes = nodes;
    row.dt = coarse.grid().dt();
    row.dx = coarse.dx();
    row.direct = direct.root(x0);
    row.composed = head.root(x0);
    row.gap = std::abs(row.direct - row.composed);
    study.constant = std::max(study.constant, row.gap / (row.dt + row.dx * row.dx));
    study.levels.push_back(row);
  }
  return study;
}

}  // namespace drg

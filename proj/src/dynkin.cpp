#include "drg/dynkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drg/error.hpp"
#include "drg/rng.hpp"

namespace drg {

void BinaryTree::check() const {
  if (depth < 1 || depth > kMaxDepth)
    throw ProblemError(format_message("tree depth %d outside 1..%d", depth, kMaxDepth));
  if (!(dx > 0.0) || !(dt > 0.0)) throw ProblemError("tree needs dx > 0 and dt > 0");
  if (!(p_up > 0.0 && p_up < 1.0)) throw ProblemError("tree needs 0 < p_up < 1");
}

namespace {

// Stopping frontiers of the subtree rooted at `node` with `remaining` levels below it.
std::vector<std::vector<int>> frontiers(int node, int remaining) {
  if (remaining == 0) return {{node}};
  const auto down = frontiers(2 * node + 1, remaining - 1);
  const auto up = frontiers(2 * node + 2, remaining - 1);
  std::vector<std::vector<int>> out;
  out.reserve(1 + down.size() * up.size());
  out.push_back({node});
  for (const auto& a : down)
    for (const auto& b : up) {
      std::vector<int> f = a;
      f.insert(f.end(), b.begin(), b.end());
      out.push_back(std::move(f));
    }
  return out;
}

struct TreeNodes {
  std::vector<int> level;
  std::vector<double> lower, upper, terminal;
};

TreeNodes tabulate(const BinaryTree& tree, const DynkinPayoff& payoff) {
  const int count = (1 << (tree.depth + 1)) - 1;
  TreeNodes t;
  t.level.resize(count);
  t.lower.resize(count);
  t.upper.resize(count);
  t.terminal.resize(count);
  std::vector<double> x(count);
  x[0] = tree.x0;
  for (int n = 0; n < count; ++n) {
    if (n > 0) {
      const int parent = (n - 1) / 2;
      t.level[n] = t.level[parent] + 1;
      x[n] = x[parent] + (n % 2 == 0 ? tree.dx : -tree.dx);
    }
    const double time = t.level[n] * tree.dt;
    t.lower[n] = payoff.lower(time, x[n]);
    t.upper[n] = payoff.upper(time, x[n]);
    if (!(t.lower[n] < t.upper[n]))
      throw ProblemError(format_message("obstacle separation violated at tree node %d", n));
    if (t.level[n] == tree.depth) {
      t.terminal[n] = payoff.terminal(x[n]);
      if (t.terminal[n] < t.lower[n] || t.terminal[n] > t.upper[n])
        throw ProblemError(format_message("terminal value outside the obstacles at tree node %d", n));
    }
  }
  return t;
}

// E[R(tau, sigma)] from `node`, both stopping times not yet triggered above it.
double expected_payoff(const TreeNodes& t, const BinaryTree& tree, const std::vector<bool>& tau,
                       const std::vector<bool>& sigma, int node) {
  if (t.level[node] == tree.depth) return t.terminal[node];
  if (tau[node]) return t.lower[node];
  if (sigma[node]) return t.upper[node];
  return (1.0 - tree.p_up) * expected_payoff(t, tree, tau, sigma, 2 * node + 1) +
         tree.p_up * expected_payoff(t, tree, tau, sigma, 2 * node + 2);
}

}  // namespace

std::vector<StoppingTime> enumerate_stopping_times(int depth) {
  if (depth < 0 || depth > BinaryTree::kMaxDepth)
    throw ProblemError(format_message("tree depth %d outside 0..%d", depth, BinaryTree::kMaxDepth));
  const int count = (1 << (depth + 1)) - 1;
  std::vector<StoppingTime> out;
  for (const auto& f : frontiers(0, depth)) {
    StoppingTime s;
    s.stop.assign(count, false);
    for (int node : f) s.stop[node] = true;
    out.push_back(std::move(s));
  }
  return out;
}

BruteForceResult dynkin_brute_force_detail(const BinaryTree& tree, const DynkinPayoff& payoff) {
  tree.check();
  const TreeNodes nodes = tabulate(tree, payoff);
  const auto times = enumerate_stopping_times(tree.depth);
  const std::size_t m = times.size();
  std::vector<double> table(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      table[a * m + b] = expected_payoff(nodes, tree, times[a].stop, times[b].stop, 0);

  BruteForceResult r;
  r.n_stopping_times = m;
  r.lower_value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < m; ++b) worst = std::min(worst, table[a * m + b]);
    r.lower_value = std::max(r.lower_value, worst);
  }
  r.upper_value = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < m; ++b) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a) best = std::max(best, table[a * m + b]);
    r.upper_value = std::min(r.upper_value, best);
  }
  const double scale = std::max({1.0, std::abs(r.lower_value), std::abs(r.upper_value)});
  if (std::abs(r.lower_value - r.upper_value) > 1e-12 * scale)
    throw NumericalError(format_message("Dynkin game has no saddle point: sup inf %.17g, inf sup %.17g",
                                        r.lower_value, r.upper_value));
  return r;
}

double dynkin_brute_force(const BinaryTree& tree, const DynkinPayoff& payoff) {
  return dynkin_brute_force_detail(tree, payoff).lower_value;
}

ValueSurface dynkin_value(const GameProblem& p, const Lattice& lat) {
  check_compatible(p, lat);
  if (p.u_grid.size() != 1 || p.v_grid.size() != 1)
    throw ProblemError("Dynkin value needs singleton control grids");
  const TimeGrid& grid = lat.grid();
  const int n = grid.n_steps();
  const int nodes = lat.n_nodes();

  const double ys[] = {-1.0, 0.0, 2.5};
  const double zs[] = {-1.0, 0.0, 1.5};
  const int knots[] = {0, n / 2, n - 1};
  for (int j : knots)
    for (int i = 0; i < nodes; ++i)
      for (double y : ys)
        for (double z : zs) {
          const double f = p.generator(grid[j], Vector::Constant(1, lat.x(i)), y,
                                       Vector::Constant(p.noise_dim, z), p.u_grid[0], p.v_grid[0]);
          if (f != 0.0)
            throw ProblemError(format_message(
                "Dynkin value needs f = 0; f = %.17g at t = %.17g, x = %.17g", f, grid[j], lat.x(i)));
        }

  ValueSurface out;
  out.grid = grid;
  out.x_nodes = lat.nodes();
  out.kind = SurfaceKind::dynkin;
  out.W.assign(static_cast<std::size_t>(n + 1) * nodes, 0.0);
  for (int i = 0; i < nodes; ++i) {
    const double x = lat.x(i);
    const double h = p.terminal1(x);
    if (h < p.lower1(grid.T(), x) || h > p.upper1(grid.T(), x))
      throw ProblemError(format_message("terminal value outside the obstacles at x = %.17g", x));
    out.at(n, i) = h;
  }
  for (int j = n - 1; j >= 0; --j)
    for (int i = 0; i < nodes; ++i) {
      const Stencil s = lat.stencil(j, i, 0, 0);
      double c = 0.0;
      for (const auto& b : s.branch) c += b.prob * out.at(j + 1, b.target);
      const double x = lat.x(i);
      out.at(j, i) = std::min(p.upper1(grid[j], x), std::max(p.lower1(grid[j], x), c));
    }
  return out;
}

GameProblem tree_problem(const BinaryTree& tree, const DynkinPayoff& payoff) {
  tree.check();
  const double sigma = tree.dx / std::sqrt(tree.dt);
  const double drift = (2.0 * tree.p_up - 1.0) * tree.dx / tree.dt;
  GameProblem p;
  p.name = "binary-tree";
  p.horizon = tree.horizon();
  p.drift = [drift](double, const Vector&, const ControlPoint&, const ControlPoint&) {
    return Vector::Constant(1, drift);
  };
  p.diffusion = [sigma](double, const Vector&, const ControlPoint&, const ControlPoint&) {
    return Matrix::Constant(1, 1, sigma);
  };
  p.generator = [](double, const Vector&, double, const Vector&, const ControlPoint&,
                   const ControlPoint&) { return 0.0; };
  p.terminal = [h = payoff.terminal](const Vector& x) { return h(x(0)); };
  p.lower_obstacle = [lo = payoff.lower](double t, const Vector& x) { return lo(t, x(0)); };
  p.upper_obstacle = [hi = payoff.upper](double t, const Vector& x) { return hi(t, x(0)); };
  p.lipschitz = std::max({1.0, std::abs(drift), sigma});
  p.u_grid = ControlGrid::scalars({0.0});
  p.v_grid = ControlGrid::scalars({0.0});
  return make_problem(std::move(p));
}

Lattice tree_lattice(const BinaryTree& tree, const GameProblem& p) {
  const int half = tree.depth + 1;
  return build_lattice(p, tree.depth, tree.x0 - half * tree.dx, tree.x0 + half * tree.dx, 2 * half + 1);
}

std::vector<DynkinCase> dynkin_corpus(int count, std::uint64_t seed, int max_depth) {
  if (count < 1) throw ProblemError("corpus needs at least one case");
  if (max_depth < 1 || max_depth > BinaryTree::kMaxDepth)
    throw ProblemError("corpus depth outside the enumeration bound");
  std::vector<DynkinCase> out;
  for (int c = 0; c < count; ++c) {
    const auto u = [&](std::uint32_t k) { return uniform_at(seed, static_cast<std::uint32_t>(c), k, 0); };
    DynkinCase dc;
    dc.name = format_message("tree-%02d", c);
    dc.tree.depth = 1 + c % max_depth;
    dc.tree.p_up = 0.3 + 0.4 * u(0);
    dc.tree.dx = 0.5 + 0.5 * u(1);
    dc.tree.dt = 0.1 + 0.15 * u(2);
    dc.tree.x0 = -0.5 + u(3);

    const double slope = -1.0 + 2.0 * u(4);
    const double curve = -0.5 + u(5);
    const double lo_gap = 0.05 + 0.55 * u(6);
    const double lo_wave = 0.3 * u(7);
    const double hi_gap = 0.1 + 0.5 * u(8);
    const double hi_wave = 0.3 * u(9);
    const double h_wave = -0.5 + u(10);
    const auto base = [slope, curve](double x) { return slope * x + curve * x * x; };
    const auto lower = [base, lo_gap, lo_wave](double t, double x) {
      return base(x) - lo_gap + lo_wave * std::sin(2.0 * x + 3.0 * t);
    };
    const auto upper = [lower, hi_gap, hi_wave](double t, double x) {
      const double c = std::cos(x - t);
      return lower(t, x) + hi_gap + hi_wave * c * c;
    };
    const double T = dc.tree.horizon();
    dc.payoff.lower = lower;
    dc.payoff.upper = upper;
    dc.payoff.terminal = [base, lower, upper, h_wave, T](double x) {
      return std::clamp(base(x) + h_wave * std::sin(3.0 * x), lower(T, x), upper(T, x));
    };
    out.push_back(std::move(dc));
  }
  return out;
}

}  // namespace drg

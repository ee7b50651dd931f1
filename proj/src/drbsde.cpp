#include "drg/drbsde.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "drg/csv.hpp"
#include "drg/error.hpp"
#include "drg/parallel.hpp"
#include "drg/rng.hpp"

namespace drg {

const char* to_string(SolverMode mode) { return mode == SolverMode::lattice ? "lattice" : "lsmc"; }

double DrbsdeSolution::k_lo(int j, int point) const {
  double k = 0.0;
  for (int m = 0; m < j; ++m) k += dK_lo[at(m, point)];
  return k;
}

double DrbsdeSolution::k_hi(int j, int point) const {
  double k = 0.0;
  for (int m = 0; m < j; ++m) k += dK_hi[at(m, point)];
  return k;
}

std::string DrbsdeSolution::to_csv() const {
  std::vector<std::string> header{"time", "point", "Y"};
  if (noise_dim == 1) {
    header.emplace_back("Z");
  } else {
    for (int c = 0; c < noise_dim; ++c) header.push_back("Z" + std::to_string(c));
  }
  header.emplace_back("K_lo");
  header.emplace_back("K_hi");
  CsvTable csv(header);
  std::vector<double> klo(static_cast<std::size_t>(n_points), 0.0), khi(klo.size(), 0.0);
  std::vector<std::string> cells;
  for (int j = 0; j <= grid.n_steps(); ++j) {
    for (int p = 0; p < n_points; ++p) {
      cells.assign({format_double(grid[j]), std::to_string(p), format_double(y(j, p))});
      for (int c = 0; c < noise_dim; ++c) cells.push_back(format_double(z(j, p, c)));
      cells.push_back(format_double(klo[p]));
      cells.push_back(format_double(khi[p]));
      csv.row(cells);
    }
    if (j < grid.n_steps())
      for (int p = 0; p < n_points; ++p) {
        klo[p] += dK_lo[at(j, p)];
        khi[p] += dK_hi[at(j, p)];
      }
  }
  return csv.str();
}

namespace {

DrbsdeSolution allocate(const TimeGrid& grid, int n_points, int d, SolverMode mode) {
  DrbsdeSolution s;
  s.grid = grid;
  s.n_points = n_points;
  s.noise_dim = d;
  s.mode = mode;
  const std::size_t cells = static_cast<std::size_t>(grid.n_steps() + 1) * n_points;
  s.Y.assign(cells, 0.0);
  s.Z.assign(cells * d, 0.0);
  s.dK_lo.assign(cells, 0.0);
  s.dK_hi.assign(cells, 0.0);
  return s;
}

void check_node_controls(const NodeControls& c, const Lattice& lat, std::size_t grid_size,
                         const char* which) {
  if (c.n_steps != lat.grid().n_steps() || c.n_nodes != lat.n_nodes())
    throw ProblemError(format_message("node controls %s do not match the lattice", which));
  for (auto idx : c.values)
    if (idx >= grid_size)
      throw ProblemError(format_message("node controls %s hold index %u outside the grid", which, idx));
}

void check_terminal(double h, double lo, double hi, int point) {
  if (h < lo || h > hi)
    throw ProblemError(format_message(
        "terminal value %.17g at point %d lies outside the obstacles [%.17g, %.17g]", h, point, lo, hi));
}

// Records the clamp of `candidate` and returns the reflected value.
inline double reflect(double candidate, double lo, double hi, double& dk_lo, double& dk_hi) {
  const double y = clamp_between(candidate, lo, hi);
  dk_lo = candidate < lo ? lo - candidate : 0.0;
  dk_hi = candidate > hi ? candidate - hi : 0.0;
  return y;
}

}  // namespace

DrbsdeSolution solve_drbsde_lattice(const GameProblem& p, const Lattice& lat, const NodeControls& mu,
                                    const NodeControls& nu) {
  check_compatible(p, lat);
  check_node_controls(mu, lat, p.u_grid.size(), "mu");
  check_node_controls(nu, lat, p.v_grid.size(), "nu");

  const TimeGrid& grid = lat.grid();
  const int n = grid.n_steps();
  const int nodes = lat.n_nodes();
  const int d = p.noise_dim;
  DrbsdeSolution sol = allocate(grid, nodes, d, SolverMode::lattice);

  std::vector<double> next(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    const double x = lat.x(i);
    const double h = p.terminal1(x);
    check_terminal(h, p.lower1(grid.T(), x), p.upper1(grid.T(), x), i);
    next[i] = h;
    sol.Y[sol.at(n, i)] = h;
  }
  for (int j = n - 1; j >= 0; --j) {
    const double t = grid[j];
    for (int i = 0; i < nodes; ++i) {
      const NodeStep step = node_step(p, lat, j, i, mu.at(j, i), nu.at(j, i), next);
      const double x = lat.x(i);
      const std::size_t at = sol.at(j, i);
      sol.Y[at] = reflect(step.candidate, p.lower1(t, x), p.upper1(t, x), sol.dK_lo[at], sol.dK_hi[at]);
      for (int c = 0; c < d; ++c) sol.Z[at * d + c] = step.z(c);
    }
    for (int i = 0; i < nodes; ++i) next[i] = sol.Y[sol.at(j, i)];
  }
  return sol;
}

namespace {

constexpr std::size_t kBlock = 4096;

// Cross-sectional regression at one knot. Columns: constant, standardised
// monomials per state coordinate, then optional extra regressors. Extra
// columns that are constant or collinear with the rest are absorbed by the
// rank-revealing solve.
class Regression {
 public:
  Regression(const StatePaths& states, int j, const RegressionBasis& basis,
             const std::vector<std::vector<double>>& extra)
      : states_(states), j_(j), basis_(basis), n_(states.n_paths) {
    const int k = states.state_dim;
    mean_.assign(static_cast<std::size_t>(k), 0.0);
    scale_.assign(static_cast<std::size_t>(k), 0.0);
    lo_.assign(static_cast<std::size_t>(k), 0.0);
    hi_.assign(static_cast<std::size_t>(k), 0.0);
    for (int c = 0; c < k; ++c) {
      double s = 0.0, lo = INFINITY, hi = -INFINITY;
      for (int p = 0; p < n_; ++p) {
        const double x = states.x(p, j, c);
        s += x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      const double m = s / n_;
      double v = 0.0;
      for (int p = 0; p < n_; ++p) {
        const double e = states.x(p, j, c) - m;
        v += e * e;
      }
      mean_[c] = m;
      scale_[c] = std::sqrt(v / n_);
      lo_[c] = lo;
      hi_[c] = hi;
      // Coordinates that do not move carry no information.
      if (hi - lo <= 1e-12 * (1.0 + std::abs(m))) scale_[c] = 0.0;
      else active_.push_back(c);
    }
    if (basis_.kind == RegressionBasis::Kind::polynomial) {
      n_poly_ = 1 + static_cast<int>(active_.size()) * basis_.degree;
      for (const auto& col : extra) {
        if (is_constant(col)) continue;
        extra_.push_back(&col);
      }
    }
  }

  // Fitted conditional expectations of each right-hand side column.
  std::vector<std::vector<double>> fit(const std::vector<std::vector<double>>& rhs, int threads) const {
    if (basis_.kind == RegressionBasis::Kind::bins) return fit_bins(rhs);
    return fit_poly(rhs, threads);
  }

 private:
  static bool is_constant(const std::vector<double>& col) {
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    return *hi - *lo <= 1e-12 * (1.0 + std::abs(*lo));
  }

  int n_columns() const { return n_poly_ + static_cast<int>(extra_.size()); }

  void row(int p, double* out) const {
    int col = 0;
    out[col++] = 1.0;
    for (int c : active_) {
      const double z = (states_.x(p, j_, c) - mean_[c]) / scale_[c];
      double pw = 1.0;
      for (int e = 1; e <= basis_.degree; ++e) {
        pw *= z;
        out[col++] = pw;
      }
    }
    for (const auto* e : extra_) out[col++] = (*e)[static_cast<std::size_t>(p)];
  }

  std::vector<std::vector<double>> fit_poly(const std::vector<std::vector<double>>& rhs,
                                            int threads) const {
    const int m = n_columns();
    const int r = static_cast<int>(rhs.size());
    const std::size_t blocks = (static_cast<std::size_t>(n_) + kBlock - 1) / kBlock;
    std::vector<Matrix> gram(blocks, Matrix::Zero(m, m));
    std::vector<Matrix> cross(blocks, Matrix::Zero(m, r));
    parallel_for(blocks, threads, [&](std::size_t b0, std::size_t b1) {
      Eigen::VectorXd phi(m);
      for (std::size_t b = b0; b < b1; ++b) {
        const std::size_t end = std::min(static_cast<std::size_t>(n_), (b + 1) * kBlock);
        for (std::size_t p = b * kBlock; p < end; ++p) {
          row(static_cast<int>(p), phi.data());
          gram[b].selfadjointView<Eigen::Lower>().rankUpdate(phi);
          for (int c = 0; c < r; ++c) cross[b].col(c) += phi * rhs[c][p];
        }
      }
    });
    Matrix A = Matrix::Zero(m, m), B = Matrix::Zero(m, r);
    for (std::size_t b = 0; b < blocks; ++b) {
      A += gram[b];
      B += cross[b];
    }
    A = A.selfadjointView<Eigen::Lower>();

    Eigen::ColPivHouseholderQR<Matrix> poly_qr(A.topLeftCorner(n_poly_, n_poly_));
    poly_qr.setThreshold(1e-12);
    if (poly_qr.rank() < n_poly_)
      throw NumericalError(format_message(
          "rank-deficient regression at knot %d: polynomial basis rank %ld < %d (too few paths or "
          "degenerate basis)",
          j_, static_cast<long>(poly_qr.rank()), n_poly_));
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    qr.setThreshold(1e-10);
    const Matrix coef = qr.solve(B);

    std::vector<std::vector<double>> fitted(static_cast<std::size_t>(r),
                                            std::vector<double>(static_cast<std::size_t>(n_)));
    parallel_for(static_cast<std::size_t>(n_), threads, [&](std::size_t p0, std::size_t p1) {
      Eigen::VectorXd phi(m);
      for (std::size_t p = p0; p < p1; ++p) {
        row(static_cast<int>(p), phi.data());
        for (int c = 0; c < r; ++c) fitted[c][p] = phi.dot(coef.col(c));
      }
    });
    return fitted;
  }

  std::vector<std::vector<double>> fit_bins(const std::vector<std::vector<double>>& rhs) const {
    const int nb = std::max(1, basis_.n_bins);
    std::vector<std::size_t> cell(static_cast<std::size_t>(n_), 0);
    for (int p = 0; p < n_; ++p) {
      std::size_t id = 0;
      for (int c : active_) {
        const double u = (states_.x(p, j_, c) - lo_[c]) / (hi_[c] - lo_[c]);
        const int b = std::min(nb - 1, std::max(0, static_cast<int>(u * nb)));
        id = id * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b);
      }
      cell[p] = id;
    }
    std::map<std::size_t, std::pair<std::vector<double>, int>> sums;
    for (int p = 0; p < n_; ++p) {
      auto& [s, count] = sums[cell[p]];
      if (s.empty()) s.assign(rhs.size(), 0.0);
      for (std::size_t c = 0; c < rhs.size(); ++c) s[c] += rhs[c][p];
      ++count;
    }
    std::vector<std::vector<double>> fitted(rhs.size(), std::vector<double>(static_cast<std::size_t>(n_)));
    for (int p = 0; p < n_; ++p) {
      const auto& [s, count] = sums.at(cell[p]);
      for (std::size_t c = 0; c < rhs.size(); ++c) fitted[c][p] = s[c] / count;
    }
    return fitted;
  }

  const StatePaths& states_;
  int j_;
  RegressionBasis basis_;
  int n_;
  std::vector<double> mean_, scale_, lo_, hi_;
  std::vector<int> active_;
  int n_poly_ = 1;
  std::vector<const std::vector<double>*> extra_;
};

void check_path_control(const ControlPath& c, const StatePaths& s, std::size_t grid_size,
                        const char* which) {
  if (c.n_paths != s.n_paths || c.n_steps != s.grid.n_steps())
    throw ProblemError(format_message("control path %s does not match the state paths", which));
  for (auto idx : c.values)
    if (idx >= grid_size)
      throw ProblemError(format_message("control path %s holds index %u outside the grid", which, idx));
}

}  // namespace

DrbsdeSolution solve_drbsde_lsmc(const GameProblem& p, const StatePaths& states,
                                 const PathEnsemble& ens, const ControlPath& mu, const ControlPath& nu,
                                 const RegressionBasis& basis, int threads) {
  p.check_structure();
  if (states.state_dim != p.state_dim) throw ProblemError("state paths dimension differs from problem");
  if (ens.noise_dim != p.noise_dim || ens.n_paths != states.n_paths || !(ens.grid == states.grid))
    throw ProblemError("Brownian ensemble does not match the state paths");
  check_path_control(mu, states, p.u_grid.size(), "mu");
  check_path_control(nu, states, p.v_grid.size(), "nu");
  if (basis.kind == RegressionBasis::Kind::polynomial && basis.degree < 1)
    throw ProblemError("polynomial basis degree must be at least 1");
  if (basis.kind == RegressionBasis::Kind::bins && basis.n_bins < 1)
    throw ProblemError("bin basis needs at least one bin");

  const TimeGrid& grid = states.grid;
  const double dt = grid.dt();
  if (!(p.lipschitz * dt < 1.0))
    throw NumericalError("gamma * dt must be below 1 for the explicit backward step");
  const int n = grid.n_steps();
  const int paths = states.n_paths;
  const int d = p.noise_dim;
  DrbsdeSolution sol = allocate(grid, paths, d, SolverMode::lsmc);

  std::vector<double> cash(static_cast<std::size_t>(paths));
  for (int q = 0; q < paths; ++q) {
    const Vector x = states.state(q, n);
    const double h = p.terminal(x);
    check_terminal(h, p.lower_obstacle(grid.T(), x), p.upper_obstacle(grid.T(), x), q);
    sol.Y[sol.at(n, q)] = h;
    cash[q] = h;
  }

  std::vector<std::vector<double>> rhs(1 + static_cast<std::size_t>(d),
                                       std::vector<double>(static_cast<std::size_t>(paths)));
  std::vector<std::vector<double>> obstacles(2, std::vector<double>(static_cast<std::size_t>(paths)));
  for (int j = n - 1; j >= 0; --j) {
    const double t = grid[j];
    for (int q = 0; q < paths; ++q) {
      const double y_next = sol.Y[sol.at(j + 1, q)];
      rhs[0][q] = y_next;
      for (int c = 0; c < d; ++c) rhs[1 + c][q] = y_next * ens.dw(q, j, c) / dt;
      const Vector x = states.state(q, j);
      obstacles[0][q] = p.lower_obstacle(t, x);
      obstacles[1][q] = p.upper_obstacle(t, x);
    }
    const std::vector<std::vector<double>> none;
    const Regression reg(states, j, basis, basis.with_obstacles ? obstacles : none);
    const auto fitted = reg.fit(rhs, threads);

    parallel_for(static_cast<std::size_t>(paths), threads, [&](std::size_t q0, std::size_t q1) {
      Vector z(d);
      for (std::size_t qq = q0; qq < q1; ++qq) {
        const int q = static_cast<int>(qq);
        const Vector x = states.state(q, j);
        const double cont = fitted[0][qq];
        for (int c = 0; c < d; ++c) z(c) = fitted[1 + c][qq];
        const double drift =
            p.generator(t, x, cont, z, p.u_grid[mu.at(q, j)], p.v_grid[nu.at(q, j)]) * dt;
        const double candidate = cont + drift;
        const std::size_t at = sol.at(j, q);
        sol.Y[at] = reflect(candidate, obstacles[0][qq], obstacles[1][qq], sol.dK_lo[at], sol.dK_hi[at]);
        if (!std::isfinite(sol.Y[at]))
          throw NumericalError(format_message("non-finite Y at knot %d, path %d", j, q));
        for (int c = 0; c < d; ++c) sol.Z[at * d + c] = z(c);
        cash[qq] += drift + sol.dK_lo[at] - sol.dK_hi[at];
      }
    });
  }

  double mean = 0.0;
  for (double c : cash) mean += c;
  mean /= paths;
  double var = 0.0;
  for (double c : cash) var += (c - mean) * (c - mean);
  sol.root_std_error = paths > 1 ? std::sqrt(var / (paths - 1) / paths) : 0.0;
  return sol;
}

FlatOffResidual check_flat_off(const DrbsdeSolution& sol, const GameProblem& p, const Lattice& lat) {
  if (sol.n_points != lat.n_nodes() || sol.grid.n_steps() != lat.grid().n_steps())
    throw ProblemError("solution does not live on this lattice");
  FlatOffResidual r;
  for (int i = 0; i < sol.n_points; ++i) {
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < sol.grid.n_steps(); ++j) {
      const std::size_t at = sol.at(j, i);
      const double t = sol.grid[j];
      lo += (sol.Y[at] - p.lower1(t, lat.x(i))) * sol.dK_lo[at];
      hi += (p.upper1(t, lat.x(i)) - sol.Y[at]) * sol.dK_hi[at];
    }
    r.lower = std::max(r.lower, lo);
    r.upper = std::max(r.upper, hi);
  }
  return r;
}

FlatOffResidual check_flat_off(const DrbsdeSolution& sol, const GameProblem& p,
                               const StatePaths& states) {
  if (sol.n_points != states.n_paths || sol.grid.n_steps() != states.grid.n_steps())
    throw ProblemError("solution does not live on these state paths");
  FlatOffResidual r;
  for (int q = 0; q < sol.n_points; ++q) {
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < sol.grid.n_steps(); ++j) {
      const std::size_t at = sol.at(j, q);
      if (sol.dK_lo[at] == 0.0 && sol.dK_hi[at] == 0.0) continue;
      const double t = sol.grid[j];
      const Vector x = states.state(q, j);
      lo += (sol.Y[at] - p.lower_obstacle(t, x)) * sol.dK_lo[at];
      hi += (p.upper_obstacle(t, x) - sol.Y[at]) * sol.dK_hi[at];
    }
    r.lower = std::max(r.lower, lo);
    r.upper = std::max(r.upper, hi);
  }
  return r;
}

namespace {

constexpr double kOrderSlack = 1e-12;

void require_dominated(double a, double b, const char* what, int j, int point) {
  if (a > b + kOrderSlack * (1.0 + std::abs(b)))
    throw ProblemError(format_message(
        "comparison hypothesis fails: %s of problem 1 (%.17g) exceeds problem 2 (%.17g) at knot %d, "
        "point %d",
        what, a, b, j, point));
}

template <class StateAt, class ControlAt>
OrderingReport compare_on_points(const DrbsdeSolution& s1, const GameProblem& p1,
                                 const DrbsdeSolution& s2, const GameProblem& p2, StateAt state_at,
                                 ControlAt controls_at) {
  if (s1.n_points != s2.n_points || !(s1.grid == s2.grid) || s1.noise_dim != s2.noise_dim)
    throw ProblemError("solutions are not on a common grid");
  const int n = s1.grid.n_steps();
  const int d = s1.noise_dim;
  OrderingReport rep;
  Vector z1(d), z2(d);
  for (int j = 0; j <= n; ++j) {
    const double t = s1.grid[j];
    for (int q = 0; q < s1.n_points; ++q) {
      const Vector x = state_at(j, q);
      if (j == n) require_dominated(p1.terminal(x), p2.terminal(x), "terminal value", j, q);
      require_dominated(p1.lower_obstacle(t, x), p2.lower_obstacle(t, x), "lower obstacle", j, q);
      require_dominated(p1.upper_obstacle(t, x), p2.upper_obstacle(t, x), "upper obstacle", j, q);
      if (j < n) {
        const auto [ui, vi] = controls_at(j, q);
        for (int c = 0; c < d; ++c) {
          z1(c) = s1.z(j, q, c);
          z2(c) = s2.z(j, q, c);
        }
        const auto& u = p1.u_grid[ui];
        const auto& v = p1.v_grid[vi];
        const double y1 = s1.y(j, q), y2 = s2.y(j, q);
        require_dominated(p1.generator(t, x, y1, z1, u, v), p2.generator(t, x, y1, z1, u, v),
                          "generator", j, q);
        require_dominated(p1.generator(t, x, y2, z2, u, v), p2.generator(t, x, y2, z2, u, v),
                          "generator", j, q);
      }
      const double gap = s1.y(j, q) - s2.y(j, q);
      if (gap > rep.max_violation) {
        rep.max_violation = gap;
        rep.worst_knot = j;
        rep.worst_point = q;
      }
    }
  }
  return rep;
}

}  // namespace

OrderingReport compare_drbsde(const DrbsdeSolution& sol1, const GameProblem& p1,
                              const DrbsdeSolution& sol2, const GameProblem& p2, const Lattice& lat,
                              const NodeControls& mu, const NodeControls& nu) {
  if (sol1.n_points != lat.n_nodes()) throw ProblemError("solution does not live on this lattice");
  return compare_on_points(
      sol1, p1, sol2, p2, [&](int, int i) { return Vector::Constant(1, lat.x(i)).eval(); },
      [&](int j, int i) { return std::pair<std::size_t, std::size_t>(mu.at(j, i), nu.at(j, i)); });
}

OrderingReport compare_drbsde(const DrbsdeSolution& sol1, const GameProblem& p1,
                              const DrbsdeSolution& sol2, const GameProblem& p2,
                              const StatePaths& states, const ControlPath& mu, const ControlPath& nu) {
  if (sol1.n_points != states.n_paths) throw ProblemError("solution does not live on these paths");
  return compare_on_points(
      sol1, p1, sol2, p2, [&](int j, int q) { return states.state(q, j); },
      [&](int j, int q) { return std::pair<std::size_t, std::size_t>(mu.at(q, j), nu.at(q, j)); });
}

StabilityGap stability_gap(const GameProblem& base, const GameProblem& perturbed, const Lattice& lat,
                           const NodeControls& mu, const NodeControls& nu, double x0, double w,
                           int n_chain_paths, std::uint64_t seed) {
  if (!(w > 1.0 && w <= base.holder_q))
    throw ProblemError(format_message("stability exponent %.17g must lie in (1, q]", w));
  if (n_chain_paths < 1) throw ProblemError("stability_gap needs at least one chain path");
  const TimeGrid& grid = lat.grid();
  const int n = grid.n_steps();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < lat.n_nodes(); ++i) {
      const double t = grid[j], x = lat.x(i);
      if (base.lower1(t, x) != perturbed.lower1(t, x) || base.upper1(t, x) != perturbed.upper1(t, x))
        throw ProblemError(format_message(
            "stability estimate needs identical obstacles; they differ at knot %d, node %d", j, i));
    }

  const DrbsdeSolution s1 = solve_drbsde_lattice(base, lat, mu, nu);
  const DrbsdeSolution s2 = solve_drbsde_lattice(perturbed, lat, mu, nu);
  const int start = lat.node_index(x0);
  const int d = base.noise_dim;
  const double dt = grid.dt();

  double gap = 0.0, terminal_term = 0.0, generator_term = 0.0;
  Vector z(d);
  for (int path = 0; path < n_chain_paths; ++path) {
    int i = start;
    double sup = std::abs(s1.y(0, i) - s2.y(0, i));
    double fsum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double t = grid[j];
      const Vector x = Vector::Constant(1, lat.x(i));
      for (int c = 0; c < d; ++c) z(c) = s2.z(j, i, c);
      const auto& u = base.u_grid[mu.at(j, i)];
      const auto& v = base.v_grid[nu.at(j, i)];
      fsum += std::abs(base.generator(t, x, s2.y(j, i), z, u, v) -
                       perturbed.generator(t, x, s2.y(j, i), z, u, v)) *
              dt;
      const Stencil s = lat.stencil(j, i, mu.at(j, i), nu.at(j, i));
      const double draw = 1.0 - uniform_at(seed, static_cast<std::uint32_t>(path),
                                           static_cast<std::uint32_t>(j), 0);
      double acc = 0.0;
      int next = s.branch[2].target;
      for (const auto& b : s.branch) {
        acc += b.prob;
        if (draw < acc) {
          next = b.target;
          break;
        }
      }
      i = next;
      sup = std::max(sup, std::abs(s1.y(j + 1, i) - s2.y(j + 1, i)));
    }
    const double xT = lat.x(i);
    gap += std::pow(sup, w);
    terminal_term += std::pow(std::abs(base.terminal1(xT) - perturbed.terminal1(xT)), w);
    generator_term += std::pow(fsum, w);
  }
  return {gap / n_chain_paths, (terminal_term + generator_term) / n_chain_paths};
}

}  // namespace drg

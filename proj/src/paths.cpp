#include "drg/paths.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "drg/csv.hpp"
#include "drg/error.hpp"
#include "drg/parallel.hpp"
#include "drg/rng.hpp"

namespace drg {

TimeGrid::TimeGrid(double t0, double T, int n_steps) {
  if (!(t0 >= 0.0)) throw ProblemError("time grid must start at t0 >= 0");
  if (!(T > t0)) throw ProblemError("time grid needs T > t0");
  if (n_steps < 1) throw ProblemError("time grid needs n_steps >= 1");
  dt_ = (T - t0) / n_steps;
  knots_.resize(static_cast<std::size_t>(n_steps) + 1);
  for (int j = 0; j < n_steps; ++j) knots_[j] = t0 + j * dt_;
  knots_.back() = T;
}

int TimeGrid::knot_index(double t) const {
  const double pos = (t - t0()) / dt_;
  const long j = std::lround(pos);
  if (j < 0 || j > n_steps() || std::abs(pos - static_cast<double>(j)) > 1e-9)
    throw ProblemError(format_message("time %.17g is not a knot of the grid", t));
  return static_cast<int>(j);
}

TimeGrid TimeGrid::tail(int j) const {
  if (j < 0 || j >= n_steps()) throw ProblemError("tail grid needs a knot strictly before T");
  TimeGrid g = *this;
  g.knots_.erase(g.knots_.begin(), g.knots_.begin() + j);
  return g;
}

TimeGrid TimeGrid::head(int j) const {
  if (j < 1 || j > n_steps()) throw ProblemError("head grid needs a knot strictly after t0");
  TimeGrid g = *this;
  g.knots_.resize(static_cast<std::size_t>(j) + 1);
  return g;
}

bool TimeGrid::matches(const TimeGrid& other, double tol) const {
  return n_steps() == other.n_steps() && std::abs(t0() - other.t0()) <= tol &&
         std::abs(T() - other.T()) <= tol;
}

std::string PathEnsemble::to_csv() const {
  CsvTable csv({"path", "step", "coord", "value"});
  for (int p = 0; p < n_paths; ++p)
    for (int j = 0; j < grid.n_steps(); ++j)
      for (int c = 0; c < noise_dim; ++c)
        csv.row({std::to_string(p), std::to_string(j), std::to_string(c), format_double(dw(p, j, c))});
  return csv.str();
}

Vector StatePaths::state(int path, int knot) const {
  Vector v(state_dim);
  for (int c = 0; c < state_dim; ++c) v(c) = x(path, knot, c);
  return v;
}

std::string StatePaths::to_csv() const {
  CsvTable csv({"path", "step", "coord", "value"});
  for (int p = 0; p < n_paths; ++p)
    for (int j = 0; j <= grid.n_steps(); ++j)
      for (int c = 0; c < state_dim; ++c)
        csv.row({std::to_string(p), std::to_string(j), std::to_string(c), format_double(x(p, j, c))});
  return csv.str();
}

ControlPath ControlPath::constant(int n_paths, int n_steps, std::uint32_t index) {
  if (n_paths < 1 || n_steps < 1) throw ProblemError("control path needs positive dimensions");
  ControlPath c;
  c.n_paths = n_paths;
  c.n_steps = n_steps;
  c.values.assign(static_cast<std::size_t>(n_paths) * n_steps, index);
  return c;
}

PathEnsemble simulate_brownian(const TimeGrid& grid, int n_paths, int noise_dim, std::uint64_t seed,
                               int threads) {
  if (n_paths < 1) throw ProblemError("simulate_brownian needs n_paths >= 1");
  if (noise_dim < 1) throw ProblemError("simulate_brownian needs noise_dim >= 1");
  PathEnsemble ens;
  ens.grid = grid;
  ens.n_paths = n_paths;
  ens.noise_dim = noise_dim;
  ens.seed = seed;
  const int n = grid.n_steps();
  ens.dW.resize(static_cast<std::size_t>(n_paths) * n * noise_dim);
  const double scale = std::sqrt(grid.dt());
  parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      for (int j = 0; j < n; ++j)
        for (int c = 0; c < noise_dim; ++c)
          ens.dW[(p * n + j) * noise_dim + c] =
              scale * normal_at(seed, static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(j),
                                static_cast<std::uint32_t>(c));
  });
  return ens;
}

namespace {

void check_control(const ControlPath& c, const PathEnsemble& ens, std::size_t grid_size,
                   const char* which) {
  if (c.n_paths != ens.n_paths || c.n_steps != ens.grid.n_steps())
    throw ProblemError(format_message("control path %s does not match the ensemble shape", which));
  for (auto idx : c.values)
    if (idx >= grid_size)
      throw ProblemError(format_message("control path %s has index %u outside the grid", which, idx));
}

}  // namespace

StatePaths euler_forward(const GameProblem& p, const PathEnsemble& ens, const Vector& x0,
                         const ControlPath& mu, const ControlPath& nu, int threads) {
  p.check_structure();
  if (ens.noise_dim != p.noise_dim) throw ProblemError("ensemble noise dimension differs from problem");
  if (x0.size() != p.state_dim) throw ProblemError("x0 has the wrong dimension");
  check_control(mu, ens, p.u_grid.size(), "mu");
  check_control(nu, ens, p.v_grid.size(), "nu");

  StatePaths out;
  out.grid = ens.grid;
  out.n_paths = ens.n_paths;
  out.state_dim = p.state_dim;
  out.x0 = x0;
  const int n = ens.grid.n_steps();
  const int k = p.state_dim;
  const int d = p.noise_dim;
  const double dt = ens.grid.dt();
  out.X.resize(static_cast<std::size_t>(ens.n_paths) * (n + 1) * k);

  parallel_for(static_cast<std::size_t>(ens.n_paths), threads, [&](std::size_t begin, std::size_t end) {
    Vector x(k), dw(d);
    for (std::size_t path = begin; path < end; ++path) {
      const int pi = static_cast<int>(path);
      x = x0;
      double* row = &out.X[path * (n + 1) * k];
      for (int c = 0; c < k; ++c) row[c] = x(c);
      for (int j = 0; j < n; ++j) {
        const ControlPoint& u = p.u_grid[mu.at(pi, j)];
        const ControlPoint& v = p.v_grid[nu.at(pi, j)];
        for (int c = 0; c < d; ++c) dw(c) = ens.dw(pi, j, c);
        const double t = ens.grid[j];
        x += p.drift(t, x, u, v) * dt + p.diffusion(t, x, u, v) * dw;
        if (!x.allFinite())
          throw NumericalError(
              format_message("non-finite state at path %d, step %d", pi, j + 1));
        for (int c = 0; c < k; ++c) row[(j + 1) * k + c] = x(c);
      }
    }
  });
  return out;
}

DiscretePath concat_paths(const DiscretePath& omega, const DiscretePath& tilde, double s) {
  if (omega.values.size() != static_cast<std::size_t>(omega.grid.n_steps()) + 1 ||
      tilde.values.size() != static_cast<std::size_t>(tilde.grid.n_steps()) + 1)
    throw ProblemError("discrete path has a value count different from its grid");
  const int js = omega.grid.knot_index(s);
  const int n = omega.grid.n_steps();
  if (js == n) throw ProblemError("concatenation knot must lie strictly before T");
  if (!tilde.grid.matches(omega.grid.tail(js)))
    throw ProblemError("concatenation grid mismatch: tilde must live on the tail grid from s");
  if (!tilde.values.front().isZero(0.0)) throw ProblemError("concatenated path must start at zero");
  const auto dim = omega.values.front().size();
  for (const auto& v : tilde.values)
    if (v.size() != dim) throw ProblemError("concatenation dimension mismatch");

  DiscretePath out{omega.grid, {}};
  out.values.reserve(omega.values.size());
  for (int j = 0; j < js; ++j) out.values.push_back(omega.values[j]);
  for (int j = js; j <= n; ++j) out.values.push_back(omega.values[js] + tilde.values[j - js]);
  return out;
}

ControlPath paste_controls(const ControlPath& mu, const std::vector<ControlReplacement>& replacements) {
  std::set<int> seen;
  for (const auto& r : replacements) {
    if (r.knot < 0 || r.knot >= mu.n_steps)
      throw ProblemError(format_message("replacement knot %d out of range", r.knot));
    if (r.control.n_steps != mu.n_steps - r.knot || r.control.n_paths != mu.n_paths)
      throw ProblemError("replacement control must cover every path from its knot to T");
    for (int path : r.paths) {
      if (path < 0 || path >= mu.n_paths)
        throw ProblemError(format_message("replacement path index %d out of range", path));
      if (!seen.insert(path).second)
        throw ProblemError(format_message("path %d appears in more than one replacement set", path));
    }
  }
  ControlPath out = mu;
  for (const auto& r : replacements)
    for (int path : r.paths)
      for (int j = r.knot; j < mu.n_steps; ++j) out.at(path, j) = r.control.at(path, j - r.knot);
  return out;
}

}  // namespace drg

#include "drg/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>

#include "drg/csv.hpp"
#include "drg/drbsde.hpp"
#include "drg/dynkin.hpp"
#include "drg/error.hpp"
#include "drg/game.hpp"
#include "drg/lattice.hpp"
#include "drg/linalg.hpp"
#include "drg/model.hpp"
#include "drg/paths.hpp"
#include "drg/pde.hpp"

namespace drg {

namespace {

namespace fs = std::filesystem;

struct Context {
  const RunConfig& cfg;
  GameProblem problem;
  fs::path dir;
  int threads;
  std::ostream& out;
};

// key,value rows with the headline numbers of a run.
class Summary {
 public:
  Summary& add(const std::string& key, double value) {
    table_.row({key, format_double(value)});
    return *this;
  }
  void write(const fs::path& dir) const { table_.write(dir / "summary.csv"); }

 private:
  CsvTable table_{{"key", "value"}};
};

Lattice make_lattice(const Context& c) {
  return build_lattice(c.problem, c.cfg.n_steps, c.cfg.x_min, c.cfg.x_max, c.cfg.n_nodes);
}

void check_control_indices(const Context& c) {
  if (static_cast<std::size_t>(c.cfg.u_index) >= c.problem.u_grid.size())
    throw ProblemError(format_message("u_index %d outside the u grid of size %zu", c.cfg.u_index,
                                      c.problem.u_grid.size()));
  if (static_cast<std::size_t>(c.cfg.v_index) >= c.problem.v_grid.size())
    throw ProblemError(format_message("v_index %d outside the v grid of size %zu", c.cfg.v_index,
                                      c.problem.v_grid.size()));
}

RegressionBasis make_basis(const RunConfig& cfg) {
  return cfg.basis == "bins" ? RegressionBasis::bins(cfg.n_bins)
                             : RegressionBasis::polynomial(cfg.basis_degree);
}

int cmd_validate(Context& c) {
  const ValidationReport report =
      validate_problem(c.problem, static_cast<std::size_t>(c.cfg.samples), c.cfg.seed);
  write_text(c.dir / "validate.csv", report.to_csv());
  for (const auto& check : report.checks)
    c.out << check.assumption << ": " << (check.pass ? "pass" : "FAIL") << " (" << check.max_ratio << ")\n";
  return report.pass() ? kExitOk : kExitValidationFailed;
}

int cmd_simulate(Context& c) {
  check_control_indices(c);
  const TimeGrid grid(0.0, c.problem.horizon, c.cfg.n_steps);
  const PathEnsemble ens = simulate_brownian(grid, c.cfg.n_paths, c.problem.noise_dim, c.cfg.seed, c.threads);
  const auto mu = ControlPath::constant(c.cfg.n_paths, c.cfg.n_steps, static_cast<std::uint32_t>(c.cfg.u_index));
  const auto nu = ControlPath::constant(c.cfg.n_paths, c.cfg.n_steps, static_cast<std::uint32_t>(c.cfg.v_index));
  const StatePaths states =
      euler_forward(c.problem, ens, Vector::Constant(c.problem.state_dim, c.cfg.x0), mu, nu, c.threads);
  write_text(c.dir / "brownian.csv", ens.to_csv());
  write_text(c.dir / "states.csv", states.to_csv());

  double mean = 0.0, second = 0.0;
  const int n = grid.n_steps();
  for (int p = 0; p < states.n_paths; ++p) {
    const double x = states.x(p, n);
    mean += x;
    second += x * x;
  }
  mean /= states.n_paths;
  second /= states.n_paths;
  Summary().add("terminal_mean", mean).add("terminal_variance", second - mean * mean).write(c.dir);
  c.out << "simulated " << states.n_paths << " paths\n";
  return kExitOk;
}

int cmd_drbsde(Context& c) {
  check_control_indices(c);
  const auto ui = static_cast<std::uint32_t>(c.cfg.u_index);
  const auto vi = static_cast<std::uint32_t>(c.cfg.v_index);
  if (c.cfg.mode == "lattice") {
    const Lattice lat = make_lattice(c);
    const int root = lat.node_index(c.cfg.x0);
    const DrbsdeSolution sol = solve_drbsde_lattice(c.problem, lat, NodeControls::constant(lat, ui),
                                                    NodeControls::constant(lat, vi));
    const FlatOffResidual flat = check_flat_off(sol, c.problem, lat);
    write_text(c.dir / "drbsde.csv", sol.to_csv());
    Summary()
        .add("root", sol.root(root))
        .add("flat_off_lower", flat.lower)
        .add("flat_off_upper", flat.upper)
        .add("folded_mass", folded_mass(lat, root, ui, vi))
        .write(c.dir);
    c.out << "lattice root " << format_double(sol.root(root)) << "\n";
    return kExitOk;
  }
  const TimeGrid grid(0.0, c.problem.horizon, c.cfg.n_steps);
  const PathEnsemble ens = simulate_brownian(grid, c.cfg.n_paths, c.problem.noise_dim, c.cfg.seed, c.threads);
  const auto mu = ControlPath::constant(c.cfg.n_paths, c.cfg.n_steps, ui);
  const auto nu = ControlPath::constant(c.cfg.n_paths, c.cfg.n_steps, vi);
  const StatePaths states =
      euler_forward(c.problem, ens, Vector::Constant(c.problem.state_dim, c.cfg.x0), mu, nu, c.threads);
  const DrbsdeSolution sol =
      solve_drbsde_lsmc(c.problem, states, ens, mu, nu, make_basis(c.cfg), c.threads);
  const FlatOffResidual flat = check_flat_off(sol, c.problem, states);
  write_text(c.dir / "drbsde.csv", sol.to_csv());
  Summary()
      .add("root", sol.root())
      .add("root_std_error", sol.root_std_error)
      .add("flat_off_lower", flat.lower)
      .add("flat_off_upper", flat.upper)
      .write(c.dir);
  c.out << "lsmc root " << format_double(sol.root()) << " +- " << format_double(sol.root_std_error) << "\n";
  return kExitOk;
}

int cmd_value(Context& c) {
  const Lattice lat = make_lattice(c);
  const Order order = parse_order(c.cfg.order);
  const ValueSurface w = value_backward_induction(c.problem, lat, order, c.threads);
  const Order other = order == Order::supinf ? Order::infsup : Order::supinf;
  const ValueSurface w_other = value_backward_induction(c.problem, lat, other, c.threads);
  const double lower = (order == Order::supinf ? w : w_other).root(c.cfg.x0);
  const double upper = (order == Order::supinf ? w_other : w).root(c.cfg.x0);
  write_text(c.dir / "value.csv", w.to_csv());
  Summary()
      .add("root", w.root(c.cfg.x0))
      .add("lower_root", lower)
      .add("upper_root", upper)
      .add("order_gap", upper - lower)
      .write(c.dir);
  c.out << to_string(w.kind) << " root " << format_double(w.root(c.cfg.x0)) << " (lower "
        << format_double(lower) << ", upper " << format_double(upper) << ")\n";
  return kExitOk;
}

int cmd_pde(Context& c) {
  const Order order = parse_order(c.cfg.order);
  const PdeGrid g(c.problem, c.cfg.n_steps, c.cfg.x_min, c.cfg.x_max, c.cfg.n_nodes);
  const ValueSurface w = solve_obstacle_pde(c.problem, g, order, c.threads);
  const ResidualField res = viscosity_residual(c.problem, g, w, order);
  const auto study = pde_convergence(c.problem, order, c.cfg.n_steps, c.cfg.x_min, c.cfg.x_max,
                                     c.cfg.n_nodes, c.cfg.x0, c.cfg.levels);
  write_text(c.dir / "pde.csv", w.to_csv());
  write_text(c.dir / "residual.csv", res.to_csv());
  write_text(c.dir / "convergence.csv", convergence_csv(study));
  Summary().add("root", w.root(c.cfg.x0)).add("max_residual", res.max_abs).write(c.dir);
  c.out << "pde root " << format_double(w.root(c.cfg.x0)) << ", max residual "
        << format_double(res.max_abs) << "\n";
  return kExitOk;
}

int cmd_dynkin_oracle(Context& c) {
  CsvTable csv({"tree", "depth", "recursion", "brute_force", "abs_diff"});
  double worst = 0.0;
  for (const auto& dc : dynkin_corpus(c.cfg.dynkin_trees, c.cfg.seed, c.cfg.dynkin_depth)) {
    const GameProblem p = tree_problem(dc.tree, dc.payoff);
    const Lattice lat = tree_lattice(dc.tree, p);
    const double recursion = dynkin_value(p, lat).at(0, lat.node_index(dc.tree.x0));
    const double brute = dynkin_brute_force(dc.tree, dc.payoff);
    const double diff = std::abs(recursion - brute);
    worst = std::max(worst, diff);
    csv.row({dc.name, std::to_string(dc.tree.depth), format_double(recursion), format_double(brute),
             format_double(diff)});
  }
  csv.write(c.dir / "dynkin.csv");
  Summary().add("max_abs_diff", worst).write(c.dir);
  c.out << "max |recursion - brute force| = " << format_double(worst) << "\n";
  return worst <= 1e-12 ? kExitOk : kExitValidationFailed;
}

int cmd_dpp_check(Context& c) {
  const Order order = parse_order(c.cfg.order);
  const Lattice lat = make_lattice(c);
  const DppReport r = dpp_check(c.problem, lat, c.cfg.t_mid, order, c.cfg.x0);
  CsvTable csv({"t_mid", "direct", "composed", "gap", "layer_gap"});
  csv.row({format_double(c.cfg.t_mid), format_double(r.direct), format_double(r.composed),
           format_double(r.gap), format_double(r.layer_gap)});
  csv.write(c.dir / "dpp.csv");

  const DppStudy study = dpp_cross_resolution(c.problem, c.cfg.x_min, c.cfg.x_max, c.cfg.n_steps,
                                              c.cfg.n_nodes, c.cfg.t_mid, order, c.cfg.x0, c.cfg.levels);
  CsvTable cross({"level", "n_steps", "n_nodes", "dt", "dx", "direct", "composed", "gap"});
  for (std::size_t k = 0; k < study.levels.size(); ++k) {
    const DppLevel& l = study.levels[k];
    cross.row({std::to_string(k), std::to_string(l.n_steps), std::to_string(l.n_nodes), format_double(l.dt),
               format_double(l.dx), format_double(l.direct), format_double(l.composed), format_double(l.gap)});
  }
  cross.write(c.dir / "dpp_cross.csv");
  Summary().add("gap", r.gap).add("layer_gap", r.layer_gap).add("cross_constant", study.constant).write(c.dir);
  c.out << "dpp gap " << format_double(r.gap) << "\n";
  return r.layer_gap <= 1e-12 ? kExitOk : kExitValidationFailed;
}

int cmd_crosscheck(Context& c) {
  const Order order = parse_order(c.cfg.order);
  const Lattice lat = make_lattice(c);
  const PdeGrid g(c.problem, c.cfg.n_steps, c.cfg.x_min, c.cfg.x_max, c.cfg.n_nodes);
  const CrossCheckReport r = cross_check(c.problem, lat, g, order, c.cfg.x0);
  CsvTable csv({"lattice_root", "pde_root", "rel_gap"});
  csv.row({format_double(r.lattice_root), format_double(r.pde_root), format_double(r.rel_gap)});
  csv.write(c.dir / "crosscheck.csv");
  c.out << "rel_gap " << format_double(r.rel_gap) << "\n";
  return r.rel_gap <= 1e-10 ? kExitOk : kExitValidationFailed;
}

int cmd_sqrt_check(Context& c) {
  CsvTable csv({"trial", "residual"});
  double worst = 0.0;
  for (int trial = 0; trial < c.cfg.sqrt_trials; ++trial) {
    const int dim = 1 + trial % c.cfg.sqrt_max_dim;
    const SpdMatrix g(random_spd(dim, c.cfg.sqrt_condition, c.cfg.seed, static_cast<std::uint32_t>(trial)));
    const SpdMatrix r = spd_sqrt_series(g, c.cfg.sqrt_terms);
    const double residual = (r.matrix() * r.matrix() - g.matrix()).norm() / g.matrix().norm();
    worst = std::max(worst, residual);
    csv.row({std::to_string(trial), format_double(residual)});
  }
  csv.write(c.dir / "sqrt.csv");
  c.out << "max relative residual " << format_double(worst) << "\n";
  return worst <= 1e-8 ? kExitOk : kExitValidationFailed;
}

using Command = std::function<int(Context&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table = {
      {"validate", cmd_validate},       {"simulate", cmd_simulate},
      {"drbsde", cmd_drbsde},           {"value", cmd_value},
      {"pde", cmd_pde},                 {"dynkin-oracle", cmd_dynkin_oracle},
      {"dpp-check", cmd_dpp_check},     {"crosscheck", cmd_crosscheck},
      {"sqrt-check", cmd_sqrt_check},
  };
  return table;
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const RunConfig& cfg, int threads,
                    double seconds, int status) {
  std::string text = "version=" + std::string(kVersion) + "\n";
  text += "subcommand=" + subcommand + "\n";
  text += "threads=" + std::to_string(threads) + "\n";
  text += cfg.manifest_lines();
  text += "exit_status=" + std::to_string(status) + "\n";
  text += "wall_time_s=" + format_double(seconds) + "\n";
  write_text(dir / "run.txt", text);
}

}  // namespace

std::vector<std::string> subcommand_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : commands()) names.push_back(name);
  return names;
}

int run(const std::string& subcommand, const RunConfig& cfg, int threads, std::ostream& out,
        std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  const auto it = commands().find(subcommand);
  if (it == commands().end()) {
    err << "error: unknown subcommand '" << subcommand << "'\n";
    return kExitConfig;
  }
  int status = kExitOk;
  fs::path dir = cfg.output_dir;
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    Context ctx{cfg, make_preset(cfg.preset, cfg.params), dir, std::max(1, threads), out};
    status = it->second(ctx);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    status = kExitNumerical;
  } catch (const ProblemError& e) {
    err << "problem error: " << e.what() << "\n";
    status = kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    status = kExitConfig;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    if (fs::is_directory(dir)) write_manifest(dir, subcommand, cfg, threads, seconds, status);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    if (status == kExitOk) status = kExitConfig;
  }
  return status;
}

}  // namespace drg

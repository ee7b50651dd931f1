#include "drg/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "drg/csv.hpp"
#include "drg/error.hpp"
#include "drg/rng.hpp"

namespace drg {

ControlGrid::ControlGrid(std::vector<ControlPoint> points, ControlPoint origin)
    : points_(std::move(points)), origin_(std::move(origin)) {
  if (points_.empty()) throw ProblemError("control grid must not be empty");
  const auto dim = points_.front().size();
  if (origin_.size() != dim)
    throw ProblemError("control grid origin has a different dimension than its points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].size() != dim)
      throw ProblemError("control grid points must share one dimension");
    for (std::size_t j = 0; j < i; ++j)
      if (points_[i] == points_[j])
        throw ProblemError(format_message("control grid point %zu duplicates point %zu", i, j));
  }
}

ControlGrid ControlGrid::scalars(const std::vector<double>& values, double origin) {
  std::vector<ControlPoint> pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back(ControlPoint::Constant(1, v));
  return ControlGrid(std::move(pts), ControlPoint::Constant(1, origin));
}

void GameProblem::check_structure() const {
  if (state_dim < 1) throw ProblemError("state_dim must be positive");
  if (noise_dim < 1) throw ProblemError("noise_dim must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ProblemError("horizon T must be positive");
  if (!(lipschitz > 0.0)) throw ProblemError("lipschitz constant gamma must be positive");
  if (!(holder_q > 1.0 && holder_q <= 2.0)) throw ProblemError("holder_q must lie in (1, 2]");
  if (!drift || !diffusion || !generator || !terminal || !lower_obstacle || !upper_obstacle)
    throw ProblemError("every coefficient map must be set");
  if (u_grid.size() == 0 || v_grid.size() == 0) throw ProblemError("empty control grid");
}

double GameProblem::drift1(double t, double x, std::size_t ui, std::size_t vi) const {
  return drift(t, Vector::Constant(1, x), u_grid[ui], v_grid[vi])(0);
}

double GameProblem::lower1(double t, double x) const {
  return lower_obstacle(t, Vector::Constant(1, x));
}

double GameProblem::upper1(double t, double x) const {
  return upper_obstacle(t, Vector::Constant(1, x));
}

double GameProblem::terminal1(double x) const { return terminal(Vector::Constant(1, x)); }

GameProblem make_problem(GameProblem p) {
  p.check_structure();
  return p;
}

bool ValidationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const AssumptionCheck& ValidationReport::at(const std::string& assumption) const {
  for (const auto& c : checks)
    if (c.assumption == assumption) return c;
  throw ProblemError("no such assumption in report: " + assumption);
}

std::string ValidationReport::to_csv() const {
  std::ostringstream out;
  out << "assumption,max_ratio,pass\n";
  for (const auto& c : checks)
    out << c.assumption << ',' << format_double(c.max_ratio) << ',' << (c.pass ? 1 : 0) << '\n';
  return out.str();
}

namespace {

constexpr double kSlack = 1e-9;

// Field ids for the counter-based sampler.
enum Field : std::uint32_t { kT = 0, kX, kX2, kY, kY2, kZ, kZ2, kU, kV };

class Sampler {
 public:
  Sampler(std::uint64_t seed, double radius) : seed_(seed), radius_(radius) {}

  double uniform(std::size_t sample, Field field, std::uint32_t comp, double lo, double hi) const {
    const double u = uniform_at(seed_, static_cast<std::uint32_t>(sample), field, comp);
    return lo + (hi - lo) * u;
  }
  Vector box(std::size_t sample, Field field, int dim) const {
    Vector v(dim);
    for (int i = 0; i < dim; ++i)
      v(i) = uniform(sample, field, static_cast<std::uint32_t>(i), -radius_, radius_);
    return v;
  }
  std::size_t index(std::size_t sample, Field field, std::size_t n) const {
    const double u = uniform_at(seed_, static_cast<std::uint32_t>(sample), field, 0);
    return std::min(n - 1, static_cast<std::size_t>((1.0 - u) * static_cast<double>(n)));
  }

 private:
  std::uint64_t seed_;
  double radius_;
};

void require_finite(double value, const char* what, std::size_t sample) {
  if (!std::isfinite(value))
    throw NumericalError(format_message("non-finite %s at validation sample %zu", what, sample));
}

void require_finite(const Eigen::MatrixXd& value, const char* what, std::size_t sample) {
  if (!value.allFinite())
    throw NumericalError(format_message("non-finite %s at validation sample %zu", what, sample));
}

}  // namespace

ValidationReport validate_problem(const GameProblem& p, std::size_t samples, std::uint64_t seed,
                                  double sample_radius) {
  if (samples < 1) throw ProblemError("validate_problem needs at least one sample");
  p.check_structure();

  const double gamma = p.lipschitz;
  const double e = 2.0 / p.holder_q;
  const Sampler s(seed, sample_radius);

  double growth_bx = 0.0, lip_bx = 0.0, growth_f = 0.0, lip_f = 0.0;
  double separation = -INFINITY, sandwich = -INFINITY;

  for (std::size_t n = 0; n < samples; ++n) {
    const double t = s.uniform(n, kT, 0, 0.0, p.horizon);
    const Vector x = s.box(n, kX, p.state_dim);
    const Vector x2 = s.box(n, kX2, p.state_dim);
    const double y = s.uniform(n, kY, 0, -sample_radius, sample_radius);
    const double y2 = s.uniform(n, kY2, 0, -sample_radius, sample_radius);
    const Vector z = s.box(n, kZ, p.noise_dim);
    const Vector z2 = s.box(n, kZ2, p.noise_dim);
    const ControlPoint& u = p.u_grid[s.index(n, kU, p.u_grid.size())];
    const ControlPoint& v = p.v_grid[s.index(n, kV, p.v_grid.size())];
    const double un = p.u_grid.origin_norm(u);
    const double vn = p.v_grid.origin_norm(v);
    const Vector zero_x = Vector::Zero(p.state_dim);
    const Vector zero_z = Vector::Zero(p.noise_dim);

    const Vector b0 = p.drift(t, zero_x, u, v);
    const Matrix s0 = p.diffusion(t, zero_x, u, v);
    const Vector b1 = p.drift(t, x, u, v);
    const Matrix s1 = p.diffusion(t, x, u, v);
    const Vector b2 = p.drift(t, x2, u, v);
    const Matrix s2 = p.diffusion(t, x2, u, v);
    require_finite(b0, "drift", n);
    require_finite(b1, "drift", n);
    require_finite(b2, "drift", n);
    require_finite(s0, "diffusion", n);
    require_finite(s1, "diffusion", n);
    require_finite(s2, "diffusion", n);
    if (b1.size() != p.state_dim || s1.rows() != p.state_dim || s1.cols() != p.noise_dim)
      throw ProblemError("coefficient maps return arrays of the wrong shape");

    growth_bx = std::max(growth_bx, (b0.norm() + s0.norm()) / (gamma * (1.0 + un + vn)));
    const double dx = (x - x2).norm();
    if (dx > 0.0)
      lip_bx = std::max(lip_bx, ((b1 - b2).norm() + (s1 - s2).norm()) / (gamma * dx));

    const double f0 = p.generator(t, zero_x, 0.0, zero_z, u, v);
    const double f1 = p.generator(t, x, y, z, u, v);
    const double f2 = p.generator(t, x2, y2, z2, u, v);
    require_finite(f0, "generator", n);
    require_finite(f1, "generator", n);
    require_finite(f2, "generator", n);
    growth_f = std::max(growth_f,
                        std::abs(f0) / (gamma * (1.0 + std::pow(un, e) + std::pow(vn, e))));
    const double denom = std::pow(dx, e) + std::abs(y - y2) + (z - z2).norm();
    if (denom > 0.0) lip_f = std::max(lip_f, std::abs(f1 - f2) / (gamma * denom));

    const double lo = p.lower_obstacle(t, x);
    const double hi = p.upper_obstacle(t, x);
    const double lo_T = p.lower_obstacle(p.horizon, x);
    const double hi_T = p.upper_obstacle(p.horizon, x);
    const double h = p.terminal(x);
    require_finite(lo, "lower obstacle", n);
    require_finite(hi, "upper obstacle", n);
    require_finite(lo_T, "lower obstacle", n);
    require_finite(hi_T, "upper obstacle", n);
    require_finite(h, "terminal value", n);
    separation = std::max(separation, lo - hi);
    sandwich = std::max({sandwich, lo_T - h, h - hi_T});
  }

  ValidationReport report;
  report.samples = samples;
  report.seed = seed;
  auto ratio = [&](const char* name, double r) {
    report.checks.push_back({name, r, r <= 1.0 + kSlack});
  };
  ratio("drift_diffusion_growth", growth_bx);
  ratio("drift_diffusion_lipschitz", lip_bx);
  ratio("generator_growth", growth_f);
  ratio("generator_lipschitz", lip_f);
  report.checks.push_back({"obstacle_separation", separation, separation < 0.0});
  report.checks.push_back({"terminal_sandwich", sandwich, sandwich <= 0.0});
  return report;
}

}  // namespace drg

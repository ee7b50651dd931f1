#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace drg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ControlPoint = Eigen::VectorXd;
using ParamMap = std::map<std::string, std::string>;

using DriftFn = std::function<Vector(double t, const Vector& x, const ControlPoint& u,
                                     const ControlPoint& v)>;
using DiffusionFn = std::function<Matrix(double t, const Vector& x, const ControlPoint& u,
                                         const ControlPoint& v)>;
using GeneratorFn = std::function<double(double t, const Vector& x, double y, const Vector& z,
                                         const ControlPoint& u, const ControlPoint& v)>;
using TerminalFn = std::function<double(const Vector& x)>;
using ObstacleFn = std::function<double(double t, const Vector& x)>;

// Finite control set with a distance to a designated origin point; the
// distance plays the role of [u] in the growth bounds.
class ControlGrid {
 public:
  ControlGrid() = default;
  // Throws ProblemError if points is empty, contains duplicates or has
  // points of differing dimension.
  ControlGrid(std::vector<ControlPoint> points, ControlPoint origin);

  static ControlGrid scalars(const std::vector<double>& values, double origin = 0.0);

  std::size_t size() const { return points_.size(); }
  const ControlPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<ControlPoint>& points() const { return points_; }
  const ControlPoint& origin() const { return origin_; }
  double origin_norm(const ControlPoint& point) const { return (point - origin_).norm(); }

 private:
  std::vector<ControlPoint> points_;
  ControlPoint origin_;
};

// A full game instance. Immutable once built; every solver takes it by const
// reference and may share it across threads.
struct GameProblem {
  std::string name = "custom";
  ParamMap params;  // echoed into run manifests

  int state_dim = 1;
  int noise_dim = 1;
  double horizon = 1.0;

  DriftFn drift;
  DiffusionFn diffusion;
  GeneratorFn generator;
  TerminalFn terminal;
  ObstacleFn lower_obstacle;
  ObstacleFn upper_obstacle;

  double lipschitz = 1.0;
  double holder_q = 2.0;

  ControlGrid u_grid;
  ControlGrid v_grid;

  // Throws ProblemError when dimensions, constants or callables are unusable.
  void check_structure() const;

  // Convenience wrappers for one-dimensional state.
  double drift1(double t, double x, std::size_t ui, std::size_t vi) const;
  double lower1(double t, double x) const;
  double upper1(double t, double x) const;
  double terminal1(double x) const;
};

// Structural validation plus the copy; the programmatic constructor for
// library users who supply their own coefficient maps.
GameProblem make_problem(GameProblem p);

// Built-in catalog: linear-quadratic, uncertain-volatility, dynkin-flat,
// bsb-convex. Unknown names, unknown or malformed keys and parameters that
// break the obstacle ordering raise ProblemError.
GameProblem make_preset(const std::string& name, const ParamMap& params);

std::vector<std::string> preset_names();
// Documented keys and their defaults for a preset.
ParamMap preset_defaults(const std::string& name);

struct AssumptionCheck {
  std::string assumption;
  double max_ratio = 0.0;
  bool pass = true;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  bool pass() const;
  const AssumptionCheck& at(const std::string& assumption) const;
  std::string to_csv() const;
};

// Draws `samples` random (t, x, x', y, y', z, z', u, v) tuples from `seed`
// and compares the standing-assumption difference quotients with their bounds.
// Ratio checks pass iff max_ratio <= 1 + 1e-9. The two ordering checks
// (obstacle_separation, terminal_sandwich) report the largest signed
// violation instead of a ratio and pass iff it is negative (resp. <= 0).
ValidationReport validate_problem(const GameProblem& p, std::size_t samples, std::uint64_t seed,
                                  double sample_radius = 5.0);

}  // namespace drg

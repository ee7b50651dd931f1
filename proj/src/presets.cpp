#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "drg/error.hpp"
#include "drg/model.hpp"

namespace drg {

namespace {

const std::map<std::string, ParamMap>& catalog() {
  static const std::map<std::string, ParamMap> presets = {
      {"dynkin-flat",
       {{"l_lo", "-1"}, {"l_hi", "1"}, {"h", "0"}, {"T", "1"}, {"sigma", "1"}, {"gamma", "1"},
        {"q", "2"}}},
      {"uncertain-volatility",
       {{"sigma_lo", "1"}, {"sigma_hi", "2"}, {"n_sigma", "2"}, {"h", "square"}, {"strike", "0"},
        {"T", "1"}, {"l_lo", "-1e6"}, {"l_hi", "1e6"}, {"rate", "0"}, {"gamma", "auto"},
        {"q", "2"}}},
      {"bsb-convex",
       {{"sigma_lo", "1"}, {"sigma_hi", "2"}, {"n_sigma", "2"}, {"strike", "0"},
        {"penalty", "0.2"}, {"rate", "0.05"}, {"T", "1"}, {"gamma", "auto"}, {"q", "2"}}},
      {"linear-quadratic",
       {{"a", "-0.5"}, {"beta", "1"}, {"u_max", "1"}, {"s0", "1"}, {"eps", "0.25"},
        {"theta", "0.5"}, {"rate", "0.1"}, {"lo_gap", "0.5"}, {"hi_gap", "0.5"}, {"T", "1"},
        {"gamma", "auto"}, {"q", "2"}}},
  };
  return presets;
}

class Params {
 public:
  Params(const std::string& preset, const ParamMap& defaults, const ParamMap& given)
      : preset_(preset), values_(defaults) {
    for (const auto& [key, value] : given) {
      if (!defaults.count(key))
        throw ProblemError("preset " + preset + " has no parameter '" + key + "'");
      values_[key] = value;
    }
  }

  const std::string& text(const std::string& key) const { return values_.at(key); }

  double number(const std::string& key) const {
    const std::string& s = values_.at(key);
    double out = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last || !std::isfinite(out))
      throw ProblemError("preset " + preset_ + ": parameter '" + key + "' is not a finite number: '" +
                         s + "'");
    return out;
  }

  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0.0)) throw ProblemError("preset " + preset_ + ": parameter '" + key + "' must be > 0");
    return v;
  }

  double nonnegative(const std::string& key) const {
    const double v = number(key);
    if (v < 0.0) throw ProblemError("preset " + preset_ + ": parameter '" + key + "' must be >= 0");
    return v;
  }

  int count(const std::string& key) const {
    const double v = number(key);
    if (v < 1.0 || v != std::floor(v) || v > 1e6)
      throw ProblemError("preset " + preset_ + ": parameter '" + key + "' must be a positive integer");
    return static_cast<int>(v);
  }

  double q() const {
    const double v = number("q");
    if (!(v > 1.0 && v <= 2.0))
      throw ProblemError("preset " + preset_ + ": parameter 'q' must lie in (1, 2]");
    return v;
  }

  // "auto" resolves to the smallest constant the preset's own formulas need.
  double gamma(double automatic) const {
    if (text("gamma") == "auto") return automatic;
    return positive("gamma");
  }

  const ParamMap& all() const { return values_; }

 private:
  std::string preset_;
  ParamMap values_;
};

TerminalFn named_payoff(const std::string& name, double strike) {
  if (name == "square") return [](const Vector& x) { return x(0) * x(0); };
  if (name == "neg-square") return [](const Vector& x) { return -x(0) * x(0); };
  if (name == "cos") return [](const Vector& x) { return std::cos(x(0)); };
  if (name == "call") return [strike](const Vector& x) { return std::max(x(0) - strike, 0.0); };
  if (name == "put") return [strike](const Vector& x) { return std::max(strike - x(0), 0.0); };
  if (name == "linear") return [](const Vector& x) { return x(0); };
  if (name == "zero") return [](const Vector&) { return 0.0; };
  throw ProblemError("unknown payoff '" + name +
                     "' (expected square, neg-square, cos, call, put, linear or zero)");
}

std::vector<double> volatility_levels(const Params& prm) {
  const double lo = prm.nonnegative("sigma_lo");
  const double hi = prm.nonnegative("sigma_hi");
  const int n = prm.count("n_sigma");
  if (n == 1) {
    if (lo != hi) throw ProblemError("n_sigma = 1 requires sigma_lo == sigma_hi");
    return {lo};
  }
  if (!(lo < hi)) throw ProblemError("sigma_lo must be below sigma_hi when n_sigma > 1");
  std::vector<double> levels(n);
  for (int i = 0; i < n; ++i)
    levels[i] = (i == n - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return levels;
}

GameProblem dynkin_flat(const Params& prm) {
  const double lo = prm.number("l_lo");
  const double hi = prm.number("l_hi");
  const double h = prm.number("h");
  const double sigma = prm.nonnegative("sigma");
  if (!(lo < hi))
    throw ProblemError("dynkin-flat: obstacle separation violated (need l_lo < l_hi)");
  if (h < lo || h > hi) throw ProblemError("dynkin-flat: terminal value h must lie in [l_lo, l_hi]");

  GameProblem p;
  p.horizon = prm.positive("T");
  p.holder_q = prm.q();
  p.lipschitz = prm.gamma(1.0);
  p.drift = [](double, const Vector&, const ControlPoint&, const ControlPoint&) {
    return Vector::Zero(1).eval();
  };
  p.diffusion = [sigma](double, const Vector&, const ControlPoint&, const ControlPoint&) {
    return Matrix::Constant(1, 1, sigma).eval();
  };
  p.generator = [](double, const Vector&, double, const Vector&, const ControlPoint&,
                   const ControlPoint&) { return 0.0; };
  p.terminal = [h](const Vector&) { return h; };
  p.lower_obstacle = [lo](double, const Vector&) { return lo; };
  p.upper_obstacle = [hi](double, const Vector&) { return hi; };
  p.u_grid = ControlGrid::scalars({0.0});
  p.v_grid = ControlGrid::scalars({0.0});
  return p;
}

// b = 0, sigma(t, x, u) = u: the single-controller volatility specialisation.
GameProblem uncertain_volatility(const Params& prm) {
  const auto levels = volatility_levels(prm);
  const double rate = prm.nonnegative("rate");
  const double lo = prm.number("l_lo");
  const double hi = prm.number("l_hi");
  if (!(lo < hi)) throw ProblemError("uncertain-volatility: obstacle separation violated (l_lo < l_hi)");

  GameProblem p;
  p.horizon = prm.positive("T");
  p.holder_q = prm.q();
  p.lipschitz = prm.gamma(std::max(1.0, rate));
  p.drift = [](double, const Vector&, const ControlPoint&, const ControlPoint&) {
    return Vector::Zero(1).eval();
  };
  p.diffusion = [](double, const Vector&, const ControlPoint& u, const ControlPoint&) {
    return Matrix::Constant(1, 1, u(0)).eval();
  };
  p.generator = [rate](double, const Vector&, double y, const Vector&, const ControlPoint&,
                       const ControlPoint&) { return -rate * y; };
  p.terminal = named_payoff(prm.text("h"), prm.number("strike"));
  p.lower_obstacle = [lo](double, const Vector&) { return lo; };
  p.upper_obstacle = [hi](double, const Vector&) { return hi; };
  p.u_grid = ControlGrid::scalars(levels);
  p.v_grid = ControlGrid::scalars({0.0});
  return p;
}

// Convex (call) payoff under uncertain volatility with a cancellation feature:
// the holder may exercise for (x - K)^+ and the writer may cancel by paying
// (x - K)^+ + penalty.
GameProblem bsb_convex(const Params& prm) {
  const auto levels = volatility_levels(prm);
  const double strike = prm.number("strike");
  const double penalty = prm.number("penalty");
  const double rate = prm.nonnegative("rate");
  if (!(penalty > 0.0)) throw ProblemError("bsb-convex: obstacle separation violated (penalty > 0)");

  GameProblem p;
  p.horizon = prm.positive("T");
  p.holder_q = prm.q();
  p.lipschitz = prm.gamma(std::max(1.0, rate));
  p.drift = [](double, const Vector&, const ControlPoint&, const ControlPoint&) {
    return Vector::Zero(1).eval();
  };
  p.diffusion = [](double, const Vector&, const ControlPoint& u, const ControlPoint&) {
    return Matrix::Constant(1, 1, u(0)).eval();
  };
  p.generator = [rate](double, const Vector&, double y, const Vector&, const ControlPoint&,
                       const ControlPoint&) { return -rate * y; };
  p.terminal = [strike](const Vector& x) { return std::max(x(0) - strike, 0.0); };
  p.lower_obstacle = [strike](double, const Vector& x) { return std::max(x(0) - strike, 0.0); };
  p.upper_obstacle = [strike, penalty](double, const Vector& x) {
    return std::max(x(0) - strike, 0.0) + penalty;
  };
  p.u_grid = ControlGrid::scalars(levels);
  p.v_grid = ControlGrid::scalars({0.0});
  return p;
}

// Two-player example: player I steers the drift, player II the volatility,
// and the running reward carries a matching-pennies coupling theta*u*v, so
// sup-inf and inf-sup Hamiltonians differ whenever theta != 0.
GameProblem linear_quadratic(const Params& prm) {
  const double a = prm.number("a");
  const double beta = prm.number("beta");
  const double u_max = prm.positive("u_max");
  const double s0 = prm.nonnegative("s0");
  const double eps = prm.number("eps");
  const double theta = prm.number("theta");
  const double rate = prm.nonnegative("rate");
  const double lo_gap = prm.nonnegative("lo_gap");
  const double hi_gap = prm.nonnegative("hi_gap");
  if (!(lo_gap + hi_gap > 0.0))
    throw ProblemError("linear-quadratic: obstacle separation violated (lo_gap + hi_gap > 0)");
  if (std::abs(eps) >= 1.0) throw ProblemError("linear-quadratic: |eps| must be below 1");

  GameProblem p;
  p.horizon = prm.positive("T");
  p.holder_q = prm.q();
  p.lipschitz = prm.gamma(
      std::max({1.0, std::abs(a), rate, std::abs(beta), s0 * (1.0 + std::abs(eps)), std::abs(theta)}));
  p.drift = [a, beta](double, const Vector& x, const ControlPoint& u, const ControlPoint&) {
    return Vector::Constant(1, a * x(0) + beta * u(0)).eval();
  };
  p.diffusion = [s0, eps](double, const Vector&, const ControlPoint&, const ControlPoint& v) {
    return Matrix::Constant(1, 1, s0 * (1.0 + eps * v(0))).eval();
  };
  p.generator = [rate, theta](double, const Vector&, double y, const Vector&, const ControlPoint& u,
                              const ControlPoint& v) { return -rate * y + theta * u(0) * v(0); };
  p.terminal = [](const Vector& x) { return x(0) * x(0); };
  p.lower_obstacle = [lo_gap](double, const Vector& x) { return x(0) * x(0) - lo_gap; };
  p.upper_obstacle = [hi_gap](double, const Vector& x) { return x(0) * x(0) + hi_gap; };
  p.u_grid = ControlGrid::scalars({-u_max, u_max});
  p.v_grid = ControlGrid::scalars({-1.0, 1.0});
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : catalog()) names.push_back(name);
  return names;
}

ParamMap preset_defaults(const std::string& name) {
  const auto it = catalog().find(name);
  if (it == catalog().end()) throw ProblemError("unknown preset '" + name + "'");
  return it->second;
}

GameProblem make_preset(const std::string& name, const ParamMap& params) {
  const Params prm(name, preset_defaults(name), params);
  GameProblem p;
  if (name == "dynkin-flat") p = dynkin_flat(prm);
  else if (name == "uncertain-volatility") p = uncertain_volatility(prm);
  else if (name == "bsb-convex") p = bsb_convex(prm);
  else p = linear_quadratic(prm);
  p.name = name;
  p.params = prm.all();
  return make_problem(std::move(p));
}

}  // namespace drg

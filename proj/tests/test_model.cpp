#include <cmath>

#include "doctest.h"
#include "drg/error.hpp"
#include "drg/model.hpp"
#include "drg/rng.hpp"
#include "support.hpp"

using namespace drg;

TEST_CASE("dynkin-flat preset has constant data") {
  const auto p = make_preset("dynkin-flat", {{"l_lo", "-1"}, {"l_hi", "1"}, {"h", "0"}, {"T", "1"}});
  CHECK(p.horizon == 1.0);
  CHECK(p.u_grid.size() == 1);
  CHECK(p.v_grid.size() == 1);
  for (double x : {-3.0, 0.0, 2.5}) {
    CHECK(p.lower1(0.3, x) == -1.0);
    CHECK(p.upper1(0.3, x) == 1.0);
    CHECK(p.terminal1(x) == 0.0);
    const Vector xv = Vector::Constant(1, x);
    CHECK(p.generator(0.1, xv, 0.7, Vector::Constant(1, 2.0), p.u_grid[0], p.v_grid[0]) == 0.0);
  }
}

TEST_CASE("uncertain-volatility preset exposes the volatility as control") {
  const auto p = make_preset("uncertain-volatility", {{"sigma_lo", "1"}, {"sigma_hi", "2"}, {"h", "square"}});
  REQUIRE(p.u_grid.size() == 2);
  CHECK(p.u_grid[0](0) == 1.0);
  CHECK(p.u_grid[1](0) == 2.0);
  CHECK(p.v_grid.size() == 1);
  const Vector x = Vector::Constant(1, 0.4);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(p.drift(0.2, x, p.u_grid[k], p.v_grid[0])(0) == 0.0);
    CHECK(p.diffusion(0.2, x, p.u_grid[k], p.v_grid[0])(0, 0) == p.u_grid[k](0));
  }
  CHECK(p.terminal1(3.0) == doctest::Approx(9.0));
}

TEST_CASE("preset errors") {
  CHECK_THROWS_AS(make_preset("dynkin-flat", {{"l_lo", "1"}, {"l_hi", "1"}}), ProblemError);
  CHECK_THROWS_AS(make_preset("no-such-preset", {}), ProblemError);
  CHECK_THROWS_AS(make_preset("dynkin-flat", {{"bogus", "1"}}), ProblemError);
  CHECK_THROWS_AS(make_preset("dynkin-flat", {{"T", "abc"}}), ProblemError);
  CHECK_THROWS_AS(make_preset("dynkin-flat", {{"T", "-1"}}), ProblemError);
  CHECK_THROWS_AS(make_preset("dynkin-flat", {{"h", "3"}}), ProblemError);
  CHECK_THROWS_AS(make_preset("uncertain-volatility", {{"sigma_lo", "2"}, {"sigma_hi", "1"}}),
                  ProblemError);
  CHECK_THROWS_AS(make_preset("uncertain-volatility", {{"h", "exotic"}}), ProblemError);
  CHECK_THROWS_AS(make_preset("bsb-convex", {{"penalty", "0"}}), ProblemError);
  CHECK_THROWS_AS(make_preset("linear-quadratic", {{"eps", "1"}}), ProblemError);
}

TEST_CASE("every preset builds from its documented defaults") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto p = make_preset(name, preset_defaults(name));
    CHECK_NOTHROW(p.check_structure());
    CHECK(p.params.size() == preset_defaults(name).size());
  }
}

TEST_CASE("control grid rejects malformed point sets") {
  CHECK_THROWS_AS(ControlGrid({}, Vector::Zero(1)), ProblemError);
  CHECK_THROWS_AS(ControlGrid::scalars({1.0, 1.0}), ProblemError);
  CHECK_THROWS_AS(ControlGrid({Vector::Zero(1), Vector::Zero(2)}, Vector::Zero(1)), ProblemError);
  const auto g = ControlGrid::scalars({-2.0, 3.0}, 1.0);
  CHECK(g.origin_norm(g[0]) == 3.0);
  CHECK(g.origin_norm(g[1]) == 2.0);
}

TEST_CASE("structural checks") {
  auto s = drgtest::Scalar1d{};
  auto p = drgtest::build(s);
  p.lipschitz = 0.0;
  CHECK_THROWS_AS(make_problem(p), ProblemError);
  p = drgtest::build(s);
  p.holder_q = 2.5;
  CHECK_THROWS_AS(make_problem(p), ProblemError);
  p = drgtest::build(s);
  p.generator = nullptr;
  CHECK_THROWS_AS(make_problem(p), ProblemError);
}

TEST_CASE("validation of dynkin-flat") {
  const auto p = make_preset("dynkin-flat", preset_defaults("dynkin-flat"));
  const auto r = validate_problem(p, 1000, 3);
  CHECK(r.pass());
  CHECK(r.at("drift_diffusion_lipschitz").max_ratio == 0.0);
  CHECK(r.at("generator_lipschitz").max_ratio == 0.0);
  CHECK(r.at("generator_growth").max_ratio == 0.0);
  // Only sigma = 1 enters the growth bound: (0 + 1) / (gamma (1 + 0 + 0)).
  CHECK(r.at("drift_diffusion_growth").max_ratio == doctest::Approx(1.0));
  CHECK(r.at("obstacle_separation").max_ratio == -2.0);
  CHECK(r.at("terminal_sandwich").max_ratio <= 0.0);
  CHECK_THROWS_AS(r.at("nonexistent"), ProblemError);
}

TEST_CASE("validation of uncertain volatility with zero drift") {
  const auto p = make_preset("uncertain-volatility", preset_defaults("uncertain-volatility"));
  REQUIRE(p.lipschitz == 1.0);
  const auto r = validate_problem(p, 500, 11);
  CHECK(r.pass());
  CHECK(r.at("drift_diffusion_lipschitz").max_ratio == 0.0);
}

TEST_CASE("validation detects a drift that is too steep") {
  drgtest::Scalar1d s;
  s.b = [](double, double x, double, double) { return 2.0 * x; };
  s.gamma = 1.0;
  const auto p = drgtest::build(s);
  const auto r = validate_problem(p, 1000, 5);
  CHECK_FALSE(r.pass());
  const auto& c = r.at("drift_diffusion_lipschitz");
  CHECK_FALSE(c.pass);
  CHECK(c.max_ratio == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("validation reports overlapping obstacles") {
  drgtest::Scalar1d s;
  s.lower = [](double, double x) { return x; };
  s.upper = [](double, double) { return 0.5; };
  s.h = [](double x) { return std::min(x, 0.5); };
  const auto r = validate_problem(drgtest::build(s), 400, 2);
  CHECK_FALSE(r.at("obstacle_separation").pass);
  CHECK(r.at("obstacle_separation").max_ratio > 0.0);
}

TEST_CASE("validation is deterministic and seed sensitive") {
  const auto p = make_preset("linear-quadratic", preset_defaults("linear-quadratic"));
  const auto a = validate_problem(p, 300, 9);
  const auto b = validate_problem(p, 300, 9);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_csv().rfind("assumption,max_ratio,pass\n", 0) == 0);
  const auto c = validate_problem(p, 300, 10);
  CHECK(a.to_csv() != c.to_csv());
}

TEST_CASE("random admissible preset parameters pass validation") {
  for (std::uint32_t k = 0; k < 20; ++k) {
    auto draw = [&](std::uint32_t field, double lo, double hi) {
      return lo + (hi - lo) * uniform_at(77, k, field, 0);
    };
    ParamMap lq = {{"a", std::to_string(draw(0, -1.0, 1.0))},
                   {"beta", std::to_string(draw(1, 0.1, 2.0))},
                   {"u_max", std::to_string(draw(2, 0.1, 3.0))},
                   {"s0", std::to_string(draw(3, 0.2, 1.5))},
                   {"eps", std::to_string(draw(4, -0.9, 0.9))},
                   {"theta", std::to_string(draw(5, -1.0, 1.0))},
                   {"rate", std::to_string(draw(6, 0.0, 1.0))}};
    CAPTURE(k);
    CHECK(validate_problem(make_preset("linear-quadratic", lq), 200, k).pass());
    ParamMap uv = {{"sigma_lo", std::to_string(draw(7, 0.2, 1.0))},
                   {"sigma_hi", std::to_string(draw(8, 1.1, 3.0))},
                   {"n_sigma", std::to_string(2 + k % 3)},
                   {"h", k % 2 ? "cos" : "linear"}};
    CHECK(validate_problem(make_preset("uncertain-volatility", uv), 200, k).pass());
  }
}

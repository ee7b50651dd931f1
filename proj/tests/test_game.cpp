#include <cmath>

#include "doctest.h"
#include "drg/drbsde.hpp"
#include "drg/error.hpp"
#include "drg/game.hpp"
#include "support.hpp"

using namespace drg;

namespace {

Lattice standard_lattice(const GameProblem& p) { return build_lattice(p, 400, -4.0, 4.0, 81); }

GameProblem volatility_game(const std::string& payoff) {
  return make_preset("uncertain-volatility", {{"sigma_lo", "1"}, {"sigma_hi", "2"}, {"h", payoff}});
}

GameProblem single_volatility(double sigma, const std::string& payoff) {
  const auto s = std::to_string(sigma);
  return make_preset("uncertain-volatility",
                     {{"sigma_lo", s}, {"sigma_hi", s}, {"n_sigma", "1"}, {"h", payoff}});
}

}  // namespace

TEST_CASE("heat equation value") {
  const auto p = drgtest::build(drgtest::heat_square(std::sqrt(2.0)));
  const auto lat = build_lattice(p, 200, -8.0, 8.0, 161);
  const auto w = single_control_value(p, lat);
  CHECK(w.kind == SurfaceKind::single_control);
  for (double x : {-1.0, 0.0, 0.5})
    CHECK(w.root(x) == doctest::Approx(drgtest::gaussian_square(x, 2.0, 1.0)).epsilon(1e-5));
}

TEST_CASE("convex payoff selects the largest volatility") {
  const auto game = volatility_game("square");
  const auto lat = build_lattice(game, 400, -10.0, 10.0, 201);
  const auto w = value_backward_induction(game, lat, Order::supinf);
  const auto high = single_volatility(2.0, "square");
  const auto w2 = single_control_value(high, build_lattice(high, 400, -10.0, 10.0, 201));
  CHECK(w.root(0.0) == doctest::Approx(w2.root(0.0)).epsilon(1e-4));
  CHECK(w.root(0.0) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("concave payoff selects the smallest volatility") {
  const auto game = volatility_game("neg-square");
  const auto lat = build_lattice(game, 400, -10.0, 10.0, 201);
  const auto w = value_backward_induction(game, lat, Order::supinf);
  const auto low = single_volatility(1.0, "neg-square");
  const auto w1 = single_control_value(low, build_lattice(low, 400, -10.0, 10.0, 201));
  CHECK(w.root(0.0) == doctest::Approx(w1.root(0.0)).epsilon(1e-4));
  CHECK(w.root(0.5) == doctest::Approx(-0.25 - 1.0).epsilon(0.01));
}

TEST_CASE("dynkin-flat value vanishes in both orders") {
  const auto p = make_preset("dynkin-flat", preset_defaults("dynkin-flat"));
  const auto lat = standard_lattice(p);
  for (auto order : {Order::supinf, Order::infsup})
    for (double w : value_backward_induction(p, lat, order).W) CHECK(w == 0.0);
}

TEST_CASE("singleton controls reproduce the DRBSDE solver bit for bit") {
  const auto p = make_preset("bsb-convex", {{"n_sigma", "1"}, {"sigma_lo", "1"}, {"sigma_hi", "1"}});
  const auto lat = standard_lattice(p);
  const auto w = value_backward_induction(p, lat, Order::supinf);
  const auto c = NodeControls::constant(lat, 0);
  const auto sol = solve_drbsde_lattice(p, lat, c, c);
  CHECK(w.W == sol.Y);
}

TEST_CASE("game induction against the direct recursion") {
  drgtest::Scalar1d s;
  s.b = [](double, double x, double u, double) { return -0.5 * x + u; };
  s.sigma = [](double, double, double, double v) { return 1.0 + 0.25 * v; };
  s.f = [](double, double, double y, double z, double u, double v) {
    return -0.1 * y + 0.2 * z * v + 0.5 * u * v;
  };
  s.h = [](double x) { return x * x; };
  s.lower = [](double, double x) { return x * x - 0.5; };
  s.upper = [](double, double x) { return x * x + 0.5; };
  s.u = {-1.0, 0.0, 1.0};
  s.v = {-1.0, 1.0};
  s.gamma = 2.0;
  const auto p = drgtest::build(s);
  const auto lat = build_lattice(p, 200, -3.0, 3.0, 61);
  for (auto order : {Order::supinf, Order::infsup}) {
    const auto w = value_backward_induction(p, lat, order, 3);
    const auto ref = drgtest::reference_recursion(s, -3.0, 3.0, 61, 200, order);
    double worst = 0.0;
    for (int j = 0; j <= 200; ++j)
      for (int i = 0; i < 61; ++i) worst = std::max(worst, std::abs(w.at(j, i) - ref[j][i]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("lower value never exceeds upper value") {
  const auto p = make_preset("linear-quadratic", preset_defaults("linear-quadratic"));
  const auto lat = standard_lattice(p);
  const auto lower = value_backward_induction(p, lat, Order::supinf);
  const auto upper = value_backward_induction(p, lat, Order::infsup);
  CHECK(lower.kind == SurfaceKind::lower_game);
  CHECK(upper.kind == SurfaceKind::upper_game);
  double gap = 0.0;
  int violations = 0;
  for (std::size_t k = 0; k < lower.W.size(); ++k) {
    if (lower.W[k] > upper.W[k]) ++violations;
    gap = std::max(gap, upper.W[k] - lower.W[k]);
  }
  CHECK(violations == 0);
  CHECK(gap > 1e-3);  // the Isaacs condition fails for this example
}

TEST_CASE("induction does not depend on the thread count") {
  const auto p = make_preset("linear-quadratic", preset_defaults("linear-quadratic"));
  const auto lat = standard_lattice(p);
  const auto a = value_backward_induction(p, lat, Order::infsup, 1);
  const auto b = value_backward_induction(p, lat, Order::infsup, 4);
  CHECK(a.W == b.W);
  CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("value surface accessors") {
  const auto p = volatility_game("cos");
  const auto lat = standard_lattice(p);
  const auto w = value_backward_induction(p, lat, Order::supinf);
  CHECK(w.n_nodes() == 81);
  CHECK(w.layer(400) == std::vector<double>(w.W.end() - 81, w.W.end()));
  const double mid = 0.5 * (w.at(0, 40) + w.at(0, 41));
  CHECK(w.root(0.05) == doctest::Approx(mid).epsilon(1e-14));
  CHECK_THROWS_AS(w.root(4.5), ProblemError);
  CHECK(w.to_csv().rfind("time,x,value,kind\n", 0) == 0);
  CHECK_THROWS_AS(single_control_value(make_preset("linear-quadratic", {}), lat), ProblemError);
  CHECK(parse_order("infsup") == Order::infsup);
  CHECK_THROWS_AS(parse_order("maxmin"), ProblemError);
}

TEST_CASE("a terminal value outside the obstacles is rejected") {
  const auto p = make_preset("dynkin-flat", preset_defaults("dynkin-flat"));
  const auto lat = standard_lattice(p);
  CHECK_THROWS_AS(value_backward_induction(p, lat, Order::supinf, std::vector<double>(81, 2.0)),
                  ProblemError);
  CHECK_THROWS_AS(value_backward_induction(p, lat, Order::supinf, std::vector<double>(5, 0.0)),
                  ProblemError);
}

TEST_CASE("dynamic programming on one lattice") {
  for (const auto& name : preset_names()) {
    const auto p = make_preset(name, preset_defaults(name));
    const auto lat = standard_lattice(p);
    for (double t_mid : {lat.grid()[1], 0.25, 0.5, lat.grid()[399]})
      for (auto order : {Order::supinf, Order::infsup}) {
        CAPTURE(name);
        CAPTURE(t_mid);
        const auto r = dpp_check(p, lat, t_mid, order, 0.0);
        CHECK(r.gap <= 1e-12);
        CHECK(r.layer_gap <= 1e-12);
      }
  }
  const auto p = volatility_game("cos");
  const auto lat = standard_lattice(p);
  CHECK_THROWS_AS(dpp_check(p, lat, 0.0, Order::supinf, 0.0), ProblemError);
  CHECK_THROWS_AS(dpp_check(p, lat, 1.0, Order::supinf, 0.0), ProblemError);
  CHECK_THROWS_AS(dpp_check(p, lat, 0.3333, Order::supinf, 0.0), ProblemError);
}

TEST_CASE("cross-resolution dynamic programming gap shrinks") {
  const auto p = volatility_game("cos");
  const auto study = dpp_cross_resolution(p, -8.0, 8.0, 100, 41, 0.5, Order::supinf, 0.0, 3);
  REQUIRE(study.levels.size() == 3);
  for (std::size_t l = 1; l < study.levels.size(); ++l) {
    CHECK(study.levels[l].n_steps == 4 * study.levels[l - 1].n_steps);
    CHECK(study.levels[l].dx == doctest::Approx(0.5 * study.levels[l - 1].dx));
    CHECK(study.levels[l].gap * 2.0 <= study.levels[l - 1].gap);
  }
  double c = 0.0;
  for (const auto& lv : study.levels) c = std::max(c, lv.gap / (lv.dt + lv.dx * lv.dx));
  CHECK(study.constant == doctest::Approx(c));
}

TEST_CASE("interpolation") {
  const std::vector<double> x{0.0, 1.0, 3.0}, y{1.0, 3.0, -1.0};
  CHECK(interpolate(x, y, 0.5) == 2.0);
  CHECK(interpolate(x, y, 2.0) == 1.0);
  CHECK(interpolate(x, y, -5.0) == 1.0);
  CHECK(interpolate(x, y, 9.0) == -1.0);
  CHECK(interpolate(x, y, 3.0) == -1.0);
}

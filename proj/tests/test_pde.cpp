#include <cmath>

#include "doctest.h"
#include "drg/error.hpp"
#include "drg/pde.hpp"
#include "support.hpp"

using namespace drg;

namespace {

HamiltonianArgs args(double z, double gamma, double u = 0.0, double v = 0.0) {
  HamiltonianArgs a;
  a.t = 0.3;
  a.x = Vector::Constant(1, 0.7);
  a.y = 0.25;
  a.z = Vector::Constant(1, z);
  a.gamma = Matrix::Constant(1, 1, gamma);
  a.u = Vector::Constant(1, u);
  a.v = Vector::Constant(1, v);
  return a;
}

drgtest::Scalar1d volatility_control() {
  drgtest::Scalar1d s;
  s.sigma = [](double, double, double u, double) { return u; };
  s.u = {1.0, 2.0};
  s.gamma = 2.0;
  return s;
}

}  // namespace

TEST_CASE("Hamiltonian by hand") {
  SUBCASE("pure volatility") {
    auto s = volatility_control();
    s.u = {1.0};
    CHECK(hamiltonian(drgtest::build(s), args(0.0, 2.0, 1.0)) == doctest::Approx(1.0));
  }
  SUBCASE("degenerate arguments leave the generator") {
    drgtest::Scalar1d s;
    s.f = [](double, double, double, double, double, double) { return -1.75; };
    CHECK(hamiltonian(drgtest::build(s), args(0.0, 0.0)) == -1.75);
  }
  SUBCASE("all three terms") {
    drgtest::Scalar1d s;
    s.b = [](double, double, double, double) { return 1.0; };
    CHECK(hamiltonian(drgtest::build(s), args(3.0, 4.0)) == doctest::Approx(5.0));
  }
  SUBCASE("generator sees sigma^T z") {
    drgtest::Scalar1d s;
    s.sigma = [](double, double, double, double) { return 2.0; };
    s.f = [](double, double, double y, double z, double, double) { return y + z; };
    s.gamma = 2.0;
    // 1/2 * 4 * 1 + 0 + (0.25 + 2 * 3)
    CHECK(hamiltonian(drgtest::build(s), args(3.0, 1.0)) == doctest::Approx(8.25));
  }
}

TEST_CASE("Isaacs optimum over the grids") {
  const auto p = drgtest::build(volatility_control());
  CHECK(isaacs_hamiltonian(p, args(0.0, 2.0), Order::supinf) == doctest::Approx(4.0));
  CHECK(isaacs_hamiltonian(p, args(0.0, -2.0), Order::supinf) == doctest::Approx(-1.0));

  drgtest::Scalar1d single;
  single.b = [](double, double x, double, double) { return x; };
  const auto q = drgtest::build(single);
  const auto a = args(1.5, 0.5);
  CHECK(isaacs_hamiltonian(q, a, Order::infsup) == hamiltonian(q, a));

  // Matching pennies: sup inf = -1 < inf sup = 1.
  drgtest::Scalar1d pennies;
  pennies.f = [](double, double, double, double, double u, double v) { return u * v; };
  pennies.u = {-1.0, 1.0};
  pennies.v = {-1.0, 1.0};
  const auto g = drgtest::build(pennies);
  CHECK(isaacs_hamiltonian(g, args(0.0, 0.0), Order::supinf) == -1.0);
  CHECK(isaacs_hamiltonian(g, args(0.0, 0.0), Order::infsup) == 1.0);
}

TEST_CASE("heat benchmark converges") {
  const auto p = drgtest::build(drgtest::heat_square(std::sqrt(2.0)));
  const auto rows = pde_convergence(p, Order::supinf, 50, -8.0, 8.0, 81, 0.0, 3);
  double c = 0.0;
  for (const auto& r : rows) {
    const double dx = 16.0 / (r.n_nodes - 1), dt = 1.0 / r.n_steps;
    c = std::max(c, std::abs(r.root_value - 2.0) / (dt + dx * dx));
  }
  MESSAGE("heat benchmark constant C = " << c);
  CHECK(c < 1.0);
  CHECK(rows[2].n_steps == 800);
  CHECK(rows[2].n_nodes == 321);
  CHECK(convergence_csv(rows).rfind("resolution,root_value,diff\n", 0) == 0);
}

TEST_CASE("dynkin-flat data give a vanishing solution and residual") {
  const auto p = make_preset("dynkin-flat", preset_defaults("dynkin-flat"));
  const PdeGrid g(p, 100, -4.0, 4.0, 41);
  const auto w = solve_obstacle_pde(p, g, Order::supinf);
  CHECK(w.kind == SurfaceKind::pde);
  for (double v : w.W) CHECK(v == 0.0);
  CHECK(viscosity_residual(p, g, w, Order::supinf).max_abs == 0.0);
}

TEST_CASE("convex payoff under uncertain volatility") {
  const auto game = make_preset("uncertain-volatility", {{"sigma_lo", "1"}, {"sigma_hi", "2"}});
  const auto high = make_preset("uncertain-volatility",
                                {{"sigma_lo", "2"}, {"sigma_hi", "2"}, {"n_sigma", "1"}});
  const PdeGrid g(game, 400, -10.0, 10.0, 201);
  const PdeGrid g2(high, 400, -10.0, 10.0, 201);
  const double a = solve_obstacle_pde(game, g, Order::supinf).root(0.0);
  const double b = solve_obstacle_pde(high, g2, Order::supinf).root(0.0);
  CHECK(a == doctest::Approx(b).epsilon(1e-4));
  CHECK(a == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("residual of the computed heat solution") {
  const auto p = drgtest::build(drgtest::heat_square(std::sqrt(2.0)));
  for (int level = 0; level < 3; ++level) {
    const int scale = 1 << level;
    const PdeGrid g(p, 50 * scale * scale, -8.0, 8.0, 80 * scale + 1);
    const auto w = solve_obstacle_pde(p, g, Order::supinf);
    const auto r = viscosity_residual(p, g, w, Order::supinf);
    CAPTURE(level);
    CHECK(r.max_abs <= 1e-8);
  }
}

TEST_CASE("residual detects a bump") {
  const auto p = drgtest::build(drgtest::heat_square(std::sqrt(2.0)));
  const PdeGrid g(p, 50, -8.0, 8.0, 81);
  auto w = solve_obstacle_pde(p, g, Order::supinf);
  const double delta = 0.01, dt = g.grid().dt();
  w.at(20, 40) += delta;
  const auto r = viscosity_residual(p, g, w, Order::supinf);
  CHECK(r.residual[20 * 81 + 40] >= delta / dt - 1.0);
  CHECK(r.worst_knot == 20);
  CHECK(r.worst_node == 40);
  CHECK(r.to_csv().rfind("time,x,residual\n", 0) == 0);
}

TEST_CASE("grid errors") {
  const auto p = drgtest::build(drgtest::heat_square(std::sqrt(2.0)));
  CHECK_THROWS_AS(PdeGrid(p, 10, -8.0, 8.0, 81), NumericalError);
  CHECK_THROWS_AS(PdeGrid(p, 50, 8.0, -8.0, 81), ProblemError);
  const auto lat = build_lattice(p, 50, -8.0, 8.0, 81);
  const PdeGrid other(p, 50, -6.0, 6.0, 61);
  CHECK_THROWS_AS(cross_check(p, lat, other, Order::supinf, 0.0), ProblemError);
}

TEST_CASE("lattice and PDE agree on matching grids") {
  for (const auto& name : preset_names()) {
    const auto p = make_preset(name, preset_defaults(name));
    const auto lat = build_lattice(p, 400, -4.0, 4.0, 81);
    const PdeGrid g(p, 400, -4.0, 4.0, 81);
    for (auto order : {Order::supinf, Order::infsup}) {
      CAPTURE(name);
      const auto r = cross_check(p, lat, g, order, 0.0);
      CHECK(r.rel_gap <= 1e-10);
      if (name == "dynkin-flat") {
        CHECK(r.lattice_root == 0.0);
        CHECK(r.pde_root == 0.0);
      }
    }
  }
}

TEST_CASE("lattice at twice the resolution stays within scheme error") {
  const auto p = make_preset("uncertain-volatility", {{"h", "cos"}, {"sigma_lo", "1"}, {"sigma_hi", "2"}});
  const auto lat = build_lattice(p, 400, -8.0, 8.0, 161);
  const PdeGrid g(p, 100, -8.0, 8.0, 81);
  const auto r = cross_check(p, lat, g, Order::supinf, 0.0);
  const double dt = 0.01, dx = 0.2;
  MESSAGE("rel_gap / (dt + dx^2) = " << r.rel_gap / (dt + dx * dx));
  CHECK(r.rel_gap > 0.0);
  CHECK(r.rel_gap <= dt + dx * dx);
}

TEST_CASE("PDE solver is thread independent") {
  const auto p = make_preset("linear-quadratic", preset_defaults("linear-quadratic"));
  const PdeGrid g(p, 400, -4.0, 4.0, 81);
  const auto a = solve_obstacle_pde(p, g, Order::supinf, 1);
  const auto b = solve_obstacle_pde(p, g, Order::supinf, 3);
  CHECK(a.W == b.W);
}

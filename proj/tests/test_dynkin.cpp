#include <cmath>

#include "doctest.h"
#include "drg/dynkin.hpp"
#include "drg/error.hpp"
#include "support.hpp"

using namespace drg;

namespace {

double recursion_root(const BinaryTree& tree, const DynkinPayoff& payoff) {
  const auto p = tree_problem(tree, payoff);
  const auto lat = tree_lattice(tree, p);
  return dynkin_value(p, lat).root(tree.x0);
}

DynkinPayoff constant_payoff(double lo, double hi, double h) {
  return {[lo](double, double) { return lo; }, [hi](double, double) { return hi; },
          [h](double) { return h; }};
}

}  // namespace

TEST_CASE("stopping time counts") {
  CHECK(enumerate_stopping_times(1).size() == 2);
  CHECK(enumerate_stopping_times(2).size() == 5);
  CHECK(enumerate_stopping_times(3).size() == 26);
  CHECK(enumerate_stopping_times(4).size() == 677);
  CHECK_THROWS_AS(enumerate_stopping_times(5), ProblemError);
  CHECK(enumerate_stopping_times(0).size() == 1);
}

TEST_CASE("constant obstacles around zero give zero") {
  for (int depth = 1; depth <= 4; ++depth) {
    const BinaryTree tree{depth, 0.0, 0.7, 0.2, 0.5};
    const auto payoff = constant_payoff(-1.0, 1.0, 0.0);
    CHECK(dynkin_brute_force(tree, payoff) == 0.0);
    CHECK(recursion_root(tree, payoff) == 0.0);
  }
}

TEST_CASE("depth-one hand cases") {
  const BinaryTree tree{1, 0.0, 1.0, 0.5, 0.5};
  const auto identity = [](double x) { return x; };
  SUBCASE("the maximiser stops at once") {
    const DynkinPayoff payoff{[](double t, double) { return t == 0.0 ? 0.2 : -1e6; },
                              [](double, double) { return 1e6; }, identity};
    CHECK(dynkin_brute_force(tree, payoff) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(recursion_root(tree, payoff) == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("the minimiser stops at once") {
    const DynkinPayoff payoff{[](double, double) { return -1e6; },
                              [](double t, double) { return t == 0.0 ? -0.2 : 1e6; }, identity};
    CHECK(dynkin_brute_force(tree, payoff) == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(recursion_root(tree, payoff) == doctest::Approx(-0.2).epsilon(1e-15));
  }
}

TEST_CASE("two-step binomial with moving obstacles") {
  const BinaryTree tree{2, 0.0, 1.0, 0.5, 0.5};
  const DynkinPayoff payoff{[](double, double x) { return x - 0.3; },
                            [](double, double x) { return x + 0.3; }, [](double x) { return x; }};
  const auto bf = dynkin_brute_force_detail(tree, payoff);
  CHECK(bf.n_stopping_times == 5);
  CHECK(bf.lower_value == doctest::Approx(bf.upper_value).epsilon(1e-15));
  CHECK(std::abs(recursion_root(tree, payoff) - bf.lower_value) <= 1e-12);
}

TEST_CASE("tree problem reproduces the walk") {
  const BinaryTree tree{3, 0.2, 0.5, 0.25, 0.6};
  const auto p = tree_problem(tree, constant_payoff(-1.0, 1.0, 0.0));
  const auto lat = tree_lattice(tree, p);
  CHECK(lat.n_nodes() == 9);
  CHECK(lat.grid().n_steps() == 3);
  const auto s = lat.stencil(0, lat.node_index(0.2), 0, 0);
  CHECK(s.branch[2].prob == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(s.branch[0].prob == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(s.branch[1].prob == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("corpus recursion matches the exhaustive search") {
  const auto corpus = dynkin_corpus(24, 2024);
  REQUIRE(corpus.size() == 24);
  int deepest = 0;
  for (const auto& c : corpus) {
    CAPTURE(c.name);
    deepest = std::max(deepest, c.tree.depth);
    CHECK(std::abs(recursion_root(c.tree, c.payoff) - dynkin_brute_force(c.tree, c.payoff)) <= 1e-12);
  }
  CHECK(deepest == 4);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(dynkin_brute_force(BinaryTree{5, 0.0, 1.0, 1.0, 0.5}, constant_payoff(-1, 1, 0)),
                  ProblemError);
  CHECK_THROWS_AS(BinaryTree({2, 0.0, 1.0, 1.0, 1.5}).check(), ProblemError);
  CHECK_THROWS_AS(dynkin_brute_force(BinaryTree{2, 0.0, 1.0, 1.0, 0.5}, constant_payoff(1, -1, 0)),
                  ProblemError);

  const auto game = make_preset("linear-quadratic", preset_defaults("linear-quadratic"));
  CHECK_THROWS_AS(dynkin_value(game, build_lattice(game, 400, -4.0, 4.0, 81)), ProblemError);

  drgtest::Scalar1d s;
  s.lower = [](double, double) { return -1.0; };
  s.upper = [](double, double) { return 1.0; };
  s.f = [](double, double, double y, double, double, double) { return 0.1 * y; };
  const auto driven = drgtest::build(s);
  CHECK_THROWS_AS(dynkin_value(driven, build_lattice(driven, 100, -2.0, 2.0, 21)), ProblemError);
}

TEST_CASE("lattice value stays between the obstacles") {
  const auto p = make_preset("dynkin-flat", {{"l_lo", "-0.3"}, {"l_hi", "0.4"}, {"h", "0.1"}});
  const auto lat = build_lattice(p, 100, -3.0, 3.0, 61);
  const auto w = dynkin_value(p, lat);
  CHECK(w.kind == SurfaceKind::dynkin);
  for (double v : w.W) {
    CHECK(v >= -0.3);
    CHECK(v <= 0.4);
  }
}

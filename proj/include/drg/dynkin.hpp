#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "drg/game.hpp"
#include "drg/lattice.hpp"
#include "drg/model.hpp"

namespace drg {

// Non-recombining binary tree: from x at level k the walk moves to x + dx with
// probability p_up or to x - dx otherwise, and level k sits at time k dt.
struct BinaryTree {
  static constexpr int kMaxDepth = 4;

  int depth = 1;
  double x0 = 0.0;
  double dx = 1.0;
  double dt = 1.0;
  double p_up = 0.5;

  void check() const;
  double horizon() const { return depth * dt; }
};

// Data of a Dynkin game: the maximiser collects lower(t, x) when stopping
// first (or together with the minimiser), the minimiser pays upper(t, x) when
// stopping strictly first, and terminal(x) is paid at the horizon.
struct DynkinPayoff {
  std::function<double(double t, double x)> lower;
  std::function<double(double t, double x)> upper;
  std::function<double(double x)> terminal;
};

// Stop flags over the tree nodes in heap order (root 0, children 2n+1 and
// 2n+2). A flag below a stopped ancestor is ignored; leaves always stop.
struct StoppingTime {
  std::vector<bool> stop;
};

// Every distinct stopping time on a tree of the given depth.
std::vector<StoppingTime> enumerate_stopping_times(int depth);

struct BruteForceResult {
  double lower_value = 0.0;  // sup over tau of inf over sigma
  double upper_value = 0.0;  // inf over sigma of sup over tau
  std::size_t n_stopping_times = 0;
};

// Exhaustive search over all stopping-time pairs. Throws ProblemError for a
// depth above kMaxDepth and NumericalError if the two values disagree.
BruteForceResult dynkin_brute_force_detail(const BinaryTree& tree, const DynkinPayoff& payoff);
double dynkin_brute_force(const BinaryTree& tree, const DynkinPayoff& payoff);

// Clamp recursion W = min(upper, max(lower, E[W next])) on the lattice.
// Requires singleton control grids and a generator that vanishes on sampled
// arguments (ProblemError otherwise).
ValueSurface dynkin_value(const GameProblem& p, const Lattice& lat);

// A one-dimensional problem whose lattice reproduces the tree exactly:
// sigma = dx / sqrt(dt), b = (2 p_up - 1) dx / dt, f = 0.
GameProblem tree_problem(const BinaryTree& tree, const DynkinPayoff& payoff);
// Nodes x0 - (depth + 1) dx ... x0 + (depth + 1) dx, so the walk from x0
// never reaches a boundary node.
Lattice tree_lattice(const BinaryTree& tree, const GameProblem& p);

struct DynkinCase {
  std::string name;
  BinaryTree tree;
  DynkinPayoff payoff;
};

// Deterministic corpus of trees with depths 1..4, asymmetric walks and
// time- and state-dependent obstacles; h is clamped between the obstacles.
std::vector<DynkinCase> dynkin_corpus(int count, std::uint64_t seed, int max_depth = 4);

}  // namespace drg

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drg/lattice.hpp"
#include "drg/model.hpp"
#include "drg/paths.hpp"

namespace drg {

enum class SolverMode { lattice, lsmc };

const char* to_string(SolverMode mode);

// Discrete solution (Y, Z, K_lo, K_hi) of the doubly reflected BSDE on a time
// grid times a set of points: lattice nodes or Monte Carlo paths.
//
// Arrays are row-major by knot: Y[j * n_points + p]. The backward step at
// knot j is
//   Y_j = clamp(E[Y_{j+1} | j] + f dt, lower, upper) = E[Y_{j+1} | j] + f dt + dK_lo_j - dK_hi_j,
// so the pushing increments dK are the exact clamp overshoots, and the
// cumulative K_j = sum_{m < j} dK_m starts at zero. In lattice mode the
// cumulative sums run along a fixed node index; in LSMC mode they are the
// pathwise processes. Only the increments are stored.
struct DrbsdeSolution {
  TimeGrid grid;
  int n_points = 0;
  int noise_dim = 1;
  SolverMode mode = SolverMode::lattice;
  std::vector<double> Y;
  std::vector<double> Z;  // (N+1) x n_points x d, zero on the last knot
  std::vector<double> dK_lo;
  std::vector<double> dK_hi;
  // LSMC only: standard error of the root value, from the pathwise
  // cash flows Y_N + sum_j (f_j dt + dK_lo_j - dK_hi_j).
  double root_std_error = 0.0;

  std::size_t at(int j, int point) const {
    return static_cast<std::size_t>(j) * n_points + static_cast<std::size_t>(point);
  }
  double y(int j, int point) const { return Y[at(j, point)]; }
  double z(int j, int point, int c = 0) const { return Z[at(j, point) * noise_dim + c]; }
  // Lattice mode: value at the node `point`; LSMC mode: common value at t0.
  double root(int point = 0) const { return Y[at(0, point)]; }
  double k_lo(int j, int point) const;
  double k_hi(int j, int point) const;

  // time,point,Y,Z (or Z0..Z{d-1}),K_lo,K_hi
  std::string to_csv() const;
};

DrbsdeSolution solve_drbsde_lattice(const GameProblem& p, const Lattice& lat, const NodeControls& mu,
                                    const NodeControls& nu);

struct RegressionBasis {
  enum class Kind { polynomial, bins };
  Kind kind = Kind::polynomial;
  int degree = 3;          // monomials up to this degree in each state coordinate
  bool with_obstacles = true;  // append lower/upper obstacle values as regressors
  int n_bins = 32;         // per state coordinate, for Kind::bins

  static RegressionBasis polynomial(int degree = 3, bool with_obstacles = true) {
    return {Kind::polynomial, degree, with_obstacles, 32};
  }
  static RegressionBasis bins(int n_bins) { return {Kind::bins, 0, false, n_bins}; }
};

// Least-squares Monte Carlo version of the same recursion: conditional
// expectations of Y_{j+1} and Y_{j+1} dW_j / dt are replaced by cross-sectional
// regressions on basis functions of X_j. Normal equations are assembled in
// fixed-size path blocks and reduced in block order, so the result does not
// depend on `threads`. Throws NumericalError on a rank-deficient polynomial
// basis (reports the knot).
DrbsdeSolution solve_drbsde_lsmc(const GameProblem& p, const StatePaths& states,
                                 const PathEnsemble& ens, const ControlPath& mu, const ControlPath& nu,
                                 const RegressionBasis& basis = RegressionBasis::polynomial(),
                                 int threads = 1);

struct FlatOffResidual {
  double lower = 0.0;
  double upper = 0.0;
};

// max over points of sum_j (Y_j - lower_j) dK_lo_j and sum_j (upper_j - Y_j) dK_hi_j.
FlatOffResidual check_flat_off(const DrbsdeSolution& sol, const GameProblem& p, const Lattice& lat);
FlatOffResidual check_flat_off(const DrbsdeSolution& sol, const GameProblem& p,
                               const StatePaths& states);

struct OrderingReport {
  double max_violation = 0.0;  // max over points of (Y1 - Y2)^+
  int worst_knot = -1;
  int worst_point = -1;
};

// Re-verifies the data ordering (terminal values, both obstacles and the
// generator at the lattice points under the assigned controls) and throws
// ProblemError if problem 1 is not dominated by problem 2; then reports the
// largest violation of Y1 <= Y2.
OrderingReport compare_drbsde(const DrbsdeSolution& sol1, const GameProblem& p1,
                              const DrbsdeSolution& sol2, const GameProblem& p2, const Lattice& lat,
                              const NodeControls& mu, const NodeControls& nu);
OrderingReport compare_drbsde(const DrbsdeSolution& sol1, const GameProblem& p1,
                              const DrbsdeSolution& sol2, const GameProblem& p2,
                              const StatePaths& states, const ControlPath& mu, const ControlPath& nu);

struct StabilityGap {
  double gap = 0.0;     // E[ sup_j |Y1_j - Y2_j|^w ]
  double driver = 0.0;  // E[|xi1 - xi2|^w] + E[(sum_j |f1 - f2|(t_j, X_j, Y2_j, Z2_j) dt)^w]
};

// Solves both data sets on the lattice, then estimates both expectations over
// `n_chain_paths` trajectories of the chain started at x0 under (mu, nu),
// drawn with the counter-based generator from `seed`. The obstacles of the
// two problems must agree at every lattice point; w must lie in (1, q].
StabilityGap stability_gap(const GameProblem& base, const GameProblem& perturbed, const Lattice& lat,
                           const NodeControls& mu, const NodeControls& nu, double x0, double w,
                           int n_chain_paths = 4096, std::uint64_t seed = 1);

}  // namespace drg

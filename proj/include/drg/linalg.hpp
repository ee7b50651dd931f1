#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace drg {

// Symmetric positive definite matrix. Construction checks squareness,
// symmetry to 1e-12 (relative to the largest entry) and positive
// definiteness through a Cholesky factorisation; ProblemError otherwise.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

// j-th Taylor coefficient of sqrt(1 - x) for j >= 1:
// c_j = -(1 * 3 * ... * (2j - 3)) / (2^j j!), so c_1 = -1/2, c_2 = -1/8.
double sqrt_coefficient(int j);

// Square root through the binomial series: with s = |G|_F and N = G / s,
//   sqrt(G) = sqrt(s) * (I + sum_j c_j (I - N)^j),
// summed until a term's Frobenius norm drops below `tol`. The spectrum of
// I - N lies in [0, 1), so convergence slows as the condition number grows;
// condition 100 needs a few thousand terms. Throws NumericalError with the
// residual |r^2 - G|_F / |G|_F when n_terms are exhausted.
SpdMatrix spd_sqrt_series(const SpdMatrix& gamma, int n_terms = 20000, double tol = 1e-14);

// Random SPD matrix Q diag(l) Q^T with Q orthogonal (QR of a Gaussian
// matrix) and eigenvalues log-uniform on [1, condition], the extremes pinned
// so the condition number is exactly `condition` for dim > 1. Deterministic
// in (seed, trial).
Eigen::MatrixXd random_spd(int dim, double condition, std::uint64_t seed, std::uint32_t trial);

}  // namespace drg

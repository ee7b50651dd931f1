#include "drg/linalg.hpp"

#include <cmath>

#include "drg/error.hpp"
#include "drg/rng.hpp"

namespace drg {

SpdMatrix::SpdMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) throw ProblemError("SPD matrix must be square and non-empty");
  if (!m_.allFinite()) throw ProblemError("SPD matrix has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ProblemError("matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success) throw ProblemError("matrix is not positive definite");
}

double sqrt_coefficient(int j) {
  if (j < 1) throw ProblemError("sqrt_coefficient needs j >= 1");
  // c_1 = -1/2 and c_{j+1} = c_j (2j - 1) / (2 (j + 1)).
  double c = -0.5;
  for (int k = 1; k < j; ++k) c *= (2.0 * k - 1.0) / (2.0 * (k + 1.0));
  return c;
}

SpdMatrix spd_sqrt_series(const SpdMatrix& gamma, int n_terms, double tol) {
  if (n_terms < 1) throw ProblemError("n_terms must be positive");
  const Eigen::MatrixXd& g = gamma.matrix();
  const auto d = g.rows();
  const double norm = g.norm();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd gap = identity - g / norm;

  Eigen::MatrixXd q = identity;
  Eigen::MatrixXd power = identity;
  double c = -0.5;
  bool converged = false;
  for (int j = 1; j <= n_terms; ++j) {
    power = power * gap;
    const Eigen::MatrixXd term = c * power;
    q += term;
    if (term.norm() < tol) {
      converged = true;
      break;
    }
    c *= (2.0 * j - 1.0) / (2.0 * (j + 1.0));
  }
  Eigen::MatrixXd r = std::sqrt(norm) * q;
  r = 0.5 * (r + r.transpose()).eval();
  if (!converged) {
    const double residual = (r * r - g).norm() / norm;
    throw NumericalError(format_message(
        "square-root series did not converge in %d terms (relative residual %.3e)", n_terms, residual));
  }
  try {
    return SpdMatrix(std::move(r));
  } catch (const ProblemError&) {
    throw NumericalError("square-root series returned a matrix that is not positive definite");
  }
}

Eigen::MatrixXd random_spd(int dim, double condition, std::uint64_t seed, std::uint32_t trial) {
  if (dim < 1) throw ProblemError("random_spd needs dim >= 1");
  if (!(condition >= 1.0)) throw ProblemError("random_spd needs condition >= 1");
  Eigen::MatrixXd gauss(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      gauss(r, c) = normal_at(seed, trial, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c));
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  Eigen::VectorXd eig(dim);
  for (int k = 0; k < dim; ++k) {
    double frac = uniform_at(seed, trial, static_cast<std::uint32_t>(dim + k), 0);
    if (dim > 1 && k == 0) frac = 0.0;
    if (dim > 1 && k == dim - 1) frac = 1.0;
    eig(k) = std::pow(condition, frac);
  }
  const double scale = std::exp(normal_at(seed, trial, static_cast<std::uint32_t>(2 * dim), 1));
  Eigen::MatrixXd out = scale * q * eig.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace drg

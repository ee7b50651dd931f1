#pragma once

// Problem builders and independent reference computations for the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "drg/game.hpp"
#include "drg/model.hpp"

namespace drgtest {

using drg::ControlPoint;
using drg::Matrix;
using drg::Vector;

// One-dimensional game data with scalar controls.
struct Scalar1d {
  std::function<double(double t, double x, double u, double v)> b = [](double, double, double,
                                                                       double) { return 0.0; };
  std::function<double(double t, double x, double u, double v)> sigma = [](double, double, double,
                                                                           double) { return 1.0; };
  std::function<double(double t, double x, double y, double z, double u, double v)> f =
      [](double, double, double, double, double, double) { return 0.0; };
  std::function<double(double x)> h = [](double) { return 0.0; };
  std::function<double(double t, double x)> lower = [](double, double) { return -1e6; };
  std::function<double(double t, double x)> upper = [](double, double) { return 1e6; };
  std::vector<double> u{0.0};
  std::vector<double> v{0.0};
  double T = 1.0;
  double gamma = 1.0;
  double q = 2.0;
};

inline drg::GameProblem build(const Scalar1d& s) {
  drg::GameProblem p;
  p.name = "test";
  p.horizon = s.T;
  p.lipschitz = s.gamma;
  p.holder_q = s.q;
  p.u_grid = drg::ControlGrid::scalars(s.u);
  p.v_grid = drg::ControlGrid::scalars(s.v);
  p.drift = [b = s.b](double t, const Vector& x, const ControlPoint& u, const ControlPoint& v) {
    return Vector::Constant(1, b(t, x(0), u(0), v(0))).eval();
  };
  p.diffusion = [sg = s.sigma](double t, const Vector& x, const ControlPoint& u,
                               const ControlPoint& v) {
    return Matrix::Constant(1, 1, sg(t, x(0), u(0), v(0))).eval();
  };
  p.generator = [f = s.f](double t, const Vector& x, double y, const Vector& z,
                          const ControlPoint& u, const ControlPoint& v) {
    return f(t, x(0), y, z(0), u(0), v(0));
  };
  p.terminal = [h = s.h](const Vector& x) { return h(x(0)); };
  p.lower_obstacle = [l = s.lower](double t, const Vector& x) { return l(t, x(0)); };
  p.upper_obstacle = [l = s.upper](double t, const Vector& x) { return l(t, x(0)); };
  return drg::make_problem(p);
}

// Heat problem dX = sigma dW with h(x) = x^2 and inactive obstacles.
inline Scalar1d heat_square(double sigma, double T = 1.0) {
  Scalar1d s;
  s.sigma = [sigma](double, double, double, double) { return sigma; };
  s.h = [](double x) { return x * x; };
  s.T = T;
  s.gamma = std::max(1.0, sigma);
  return s;
}

// E[h(x + sigma W_tau)] for h(x) = x^2.
inline double gaussian_square(double x, double sigma2, double tau) { return x * x + sigma2 * tau; }

// Coefficient of x^j in the Taylor expansion of sqrt(1 - x): (-1)^j binom(1/2, j).
inline double taylor_sqrt_coefficient(int j) {
  double c = 1.0;
  for (int m = 0; m < j; ++m) c *= (0.5 - m) / (m + 1) * -1.0;
  return c;
}

// Explicit clamp recursion on a uniform node set, written out from the
// stencil formulas: mirrored boundary, explicit generator, optimum over the
// scalar control pairs in the given order.
inline std::vector<std::vector<double>> reference_recursion(const Scalar1d& s, double x_min,
                                                            double x_max, int n_nodes, int n_steps,
                                                            drg::Order order) {
  const double dx = (x_max - x_min) / (n_nodes - 1);
  const double dt = s.T / n_steps;
  std::vector<double> x(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) x[i] = x_min + i * dx;
  std::vector<std::vector<double>> W(static_cast<std::size_t>(n_steps + 1),
                                     std::vector<double>(static_cast<std::size_t>(n_nodes)));
  for (int i = 0; i < n_nodes; ++i) W[n_steps][i] = s.h(x[i]);
  for (int j = n_steps - 1; j >= 0; --j) {
    const double t = j * dt;
    for (int i = 0; i < n_nodes; ++i) {
      const int dn = i == 0 ? 1 : i - 1;
      const int up = i == n_nodes - 1 ? n_nodes - 2 : i + 1;
      auto q = [&](double u, double v) {
        const double sg = s.sigma(t, x[i], u, v);
        const double r = sg * sg * dt / (dx * dx);
        const double m = s.b(t, x[i], u, v) * dt / dx;
        const double cont = 0.5 * (r + m) * W[j + 1][up] + (1.0 - r) * W[j + 1][i] +
                            0.5 * (r - m) * W[j + 1][dn];
        const double z = sg * (W[j + 1][up] - W[j + 1][dn]) / (2.0 * dx);
        return cont + s.f(t, x[i], cont, z, u, v) * dt;
      };
      double best;
      if (order == drg::Order::supinf) {
        best = -INFINITY;
        for (double u : s.u) {
          double inner = INFINITY;
          for (double v : s.v) inner = std::min(inner, q(u, v));
          best = std::max(best, inner);
        }
      } else {
        best = INFINITY;
        for (double v : s.v) {
          double inner = -INFINITY;
          for (double u : s.u) inner = std::max(inner, q(u, v));
          best = std::min(best, inner);
        }
      }
      W[j][i] = std::min(s.upper(t, x[i]), std::max(s.lower(t, x[i]), best));
    }
  }
  return W;
}

}  // namespace drgtest

#pragma once

#include "bkuq/linear_operator.hpp"
#include "bkuq/velocity_grid.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Gauss-Legendre nodes and weights on [a, b] by Golub-Welsch (Jacobi matrix
// eigenproblem), independent of the library's Newton iteration.
struct Gauss {
  std::vector<double> x, w;
};

inline Gauss golub_welsch(int n, double a = -1.0, double b = 1.0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Gauss g;
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    g.x.push_back(0.5 * (b - a) * es.eigenvalues()(i) + 0.5 * (a + b));
    g.w.push_back((b - a) * v * v);
  }
  return g;
}

inline double maxwellian(const Eigen::Vector3d& v) {
  return std::pow(2.0 * std::numbers::pi, -1.5) * std::exp(-0.5 * v.squaredNorm());
}

// E|v - X| for X ~ N(0, I_3).
inline double gaussian_mean_distance(double s) {
  if (s < 1e-8) return std::sqrt(8.0 / std::numbers::pi);
  return std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * s * s) + (s + 1.0 / s) * std::erf(s / std::sqrt(2.0));
}

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

// Random degree <= 2 polynomial times sqrt(M), in nodal values.
inline Eigen::VectorXd smooth_field(const bkuq::VelocityGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  double c[10];
  for (double& x : c) x = nd(rng);
  Eigen::VectorXd f(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.pts(i, 0), y = g.pts(i, 1), z = g.pts(i, 2);
    const double p = c[0] + c[1] * x + c[2] * y + c[3] * z + c[4] * x * x + c[5] * y * y + c[6] * z * z +
                     c[7] * x * y + c[8] * x * z + c[9] * y * z;
    f(i) = p * bkuq::sqrt_maxwellian(g.pts.row(i).squaredNorm());
  }
  return f;
}

// Shared 20x10 axisym grid and factory; assembly results are memoized inside.
inline std::shared_ptr<const bkuq::VelocityGrid> small_grid() {
  static auto g = std::make_shared<const bkuq::VelocityGrid>(
      bkuq::build_grid(bkuq::GridMode::Axisym2d, 6.0, {20, 10, 1}, 2.0));
  return g;
}

inline bkuq::OperatorFactory& small_factory() {
  static bkuq::OperatorFactory f(small_grid());
  return f;
}

} // namespace oracle

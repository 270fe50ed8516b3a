#include "bkuq/quadrature.hpp"

#include "bkuq/common.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace bkuq {

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // refresh derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.x[i] = mid + half * r.x[i];
    r.w[i] *= half;
  }
  return r;
}

Rule1D gauss_hermite_plain(int n) {
  if (n < 1) throw ConfigError("gauss_hermite_plain: need at least one node");
  // Golub-Welsch for the probabilists' Hermite weight exp(-x^2/2).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  const double mu0 = std::sqrt(2.0 * std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    // Newton polish on He_n.
    for (int it = 0; it < 3; ++it) {
      double h0 = 1.0, h1 = x;
      for (int k = 1; k < n; ++k) {
        const double h2 = x * h1 - k * h0;
        h0 = h1;
        h1 = h2;
      }
      if (n == 1) h1 = x, h0 = 1.0;
      const double d = n * h0;
      x -= h1 / d;
    }
    double h0 = 1.0, h1 = x;
    for (int k = 1; k < n; ++k) {
      const double h2 = x * h1 - k * h0;
      h0 = h1;
      h1 = h2;
    }
    // w_i = n! sqrt(2 pi) / (n He_{n-1}(x_i))^2, computed through logs.
    double log_fact = std::lgamma(n + 1.0);
    const double denom = n * h0;
    const double w = std::exp(log_fact - 2.0 * std::log(std::abs(denom))) * mu0;
    r.x[i] = x;
    r.w[i] = w * std::exp(0.5 * x * x);
  }
  // symmetrize against round-off
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.x[n - 1 - i] - r.x[i]);
    const double w = 0.5 * (r.w[n - 1 - i] + r.w[i]);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

Rule1D gauss_laguerre(int n) {
  if (n < 1) throw ConfigError("gauss_laguerre: need at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) J(k, k) = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    // Newton polish on L_n using L_n' = n (L_n - L_{n-1}) / x.
    for (int it = 0; it < 3; ++it) {
      double l0 = 1.0, l1 = 1.0 - x;
      for (int k = 1; k < n; ++k) {
        const double l2 = ((2.0 * k + 1.0 - x) * l1 - k * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
      }
      if (n == 1) l0 = 1.0, l1 = 1.0 - x;
      x -= l1 / (n * (l1 - l0) / x);
    }
    double l0 = 1.0, l1 = 1.0 - x;
    for (int k = 1; k < n; ++k) {
      const double l2 = ((2.0 * k + 1.0 - x) * l1 - k * l0) / (k + 1.0);
      l0 = l1;
      l1 = l2;
    }
    // w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2), with L_{n+1} = ((2n+1-x) L_n - n L_{n-1})/(n+1) = -n L_{n-1}/(n+1) at a root
    const double lnp1 = -n * l0 / (n + 1.0);
    r.x[i] = x;
    r.w[i] = x / ((n + 1.0) * (n + 1.0) * lnp1 * lnp1);
  }
  return r;
}

Rule1D gauss_chebyshev_prob(int n) {
  if (n < 1) throw ConfigError("gauss_chebyshev_prob: need at least one node");
  Rule1D r;
  r.x.resize(n);
  r.w.assign(n, 1.0 / n);
  for (int q = 0; q < n; ++q) r.x[q] = -std::cos((2.0 * q + 1.0) * std::numbers::pi / (2.0 * n));
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

Rule1D composite_gauss(const std::vector<double>& edges, int order) {
  Rule1D ref = gauss_legendre(order);
  Rule1D r;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], b = edges[k + 1];
    if (!(b > a)) throw ConfigError("composite_gauss: panel edges must increase");
    for (int i = 0; i < order; ++i) {
      r.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * ref.x[i]);
      r.w.push_back(0.5 * (b - a) * ref.w[i]);
    }
  }
  return r;
}

Barycentric::Barycentric(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  bw_.assign(n, 1.0);
  // Scale differences by the node span to avoid overflow for many nodes.
  double span = 1.0;
  if (n > 1) {
    auto [mn, mx] = std::minmax_element(nodes_.begin(), nodes_.end());
    span = (*mx - *mn) / 4.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double p = 1.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) p *= (nodes_[j] - nodes_[k]) / span;
    bw_[j] = 1.0 / p;
  }
}

void Barycentric::weights_at(double x, double* out) const {
  const std::size_t n = nodes_.size();
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x - nodes_[j];
    if (d == 0.0) {
      for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
      out[j] = 1.0;
      return;
    }
    out[j] = bw_[j] / d;
    s += out[j];
  }
  const double inv = 1.0 / s;
  for (std::size_t j = 0; j < n; ++j) out[j] *= inv;
}

} // namespace bkuq

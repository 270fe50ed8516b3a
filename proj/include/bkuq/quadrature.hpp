#pragma once

#include <vector>

namespace bkuq {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

// Gauss-Legendre rule on [a, b] (weights sum to b - a).
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Gauss rule for the weight exp(-x^2 / 2) scaled so that sum w_i f(x_i)
// approximates the plain integral of f over the real line, i.e. the returned
// weights already contain exp(+x_i^2 / 2).
Rule1D gauss_hermite_plain(int n);

// Gauss-Laguerre rule for the weight exp(-x) on [0, inf).
Rule1D gauss_laguerre(int n);

// Gauss-Chebyshev (first kind) nodes with weights summing to 1, i.e. the
// probability density 1 / (pi sqrt(1 - z^2)).
Rule1D gauss_chebyshev_prob(int n);

// Composite Gauss-Legendre rule over consecutive panels [e_k, e_{k+1}].
Rule1D composite_gauss(const std::vector<double>& edges, int order);

// Barycentric Lagrange interpolation through fixed nodes.
class Barycentric {
public:
  Barycentric() = default;
  explicit Barycentric(std::vector<double> nodes);
  // Fills out[j] = l_j(x). Returns false and fills nothing useful when the
  // node set is empty.
  void weights_at(double x, double* out) const;
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }

private:
  std::vector<double> nodes_;
  std::vector<double> bw_;
};

} // namespace bkuq

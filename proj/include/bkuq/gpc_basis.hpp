#pragma once

#include "bkuq/quadrature.hpp"

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace bkuq {

enum class BasisFamily { UniformLegendre, Chebyshev };

BasisFamily parse_basis_family(const std::string& s);
std::string to_string(BasisFamily f);

// Orthonormal polynomial chaos basis psi_1..psi_K (psi_k has degree k-1) for
// a probability density on [-1, 1], together with its Gauss rule.
struct GpcBasis {
  BasisFamily family = BasisFamily::UniformLegendre;
  int K = 1;
  Rule1D quad;              // nodes z_q, weights w_q summing to 1
  double growth_n = 0.5;    // ||psi_k||_inf <= C k^n
  double growth_C = 1.0;    // empirical constant over the stored nodes
  Eigen::MatrixXd psi_at_nodes; // psi_at_nodes(q, k-1) = psi_k(z_q)

  int quad_order() const { return static_cast<int>(quad.size()); }
  // Values psi_1(z)..psi_K(z).
  Eigen::VectorXd eval(double z) const;
  // max_k over (k, j) of |sum_q w_q psi_k psi_j - delta_kj|.
  double orthonormality_residual() const;
};

// Minimum Gauss order that integrates degree 3(K-1) + deg_c exactly.
int min_quadrature_order(int K, int deg_c = 1);

GpcBasis make_basis(BasisFamily family, int K, int quadrature_order);

// diag(k^m); rejects m <= n + 1.
Eigen::MatrixXd weight_matrix(int K, double m, double growth_n);

// Coefficient function c(z) of a proportional kernel b(s, z) = c(z) s, given
// as monomial coefficients c_0 + c_1 z + ...
struct ZPolynomial {
  std::vector<double> coeffs{1.0};
  double operator()(double z) const;
  int degree() const;
};

struct ChaosTensors {
  int K = 0;
  Eigen::MatrixXd S;                 // S_ki = int c psi_k psi_i pi dz
  Eigen::MatrixXd B;                 // S / b0
  double b0 = 1.0;                   // int c pi dz
  std::vector<double> Sp;            // S'_kij, index (k*K + i)*K + j (0-based)
  std::vector<unsigned char> mask;   // chi_kij
  Eigen::MatrixXd W;                 // diag(k^m)
  double m = 2.0;

  double sp(int k, int i, int j) const { return Sp[(static_cast<std::size_t>(k) * K + i) * K + j]; }
  bool chi(int k, int i, int j) const { return mask[(static_cast<std::size_t>(k) * K + i) * K + j] != 0; }
};

// Pair tensor and normalized coefficient matrix.
void pair_tensor(const GpcBasis& basis, const ZPolynomial& c, Eigen::MatrixXd& S, Eigen::MatrixXd& B,
                 double& b0);

// Triple tensor with sparsity mask; the mask comes from the degree argument
// and is cross-checked against the quadrature values.
void triple_tensor(const GpcBasis& basis, const ZPolynomial& c, std::vector<double>& Sp,
                   std::vector<unsigned char>& mask);

ChaosTensors make_chaos_tensors(const GpcBasis& basis, const ZPolynomial& c, double m);

// Galerkin coefficients from samples at the basis nodes.
Eigen::VectorXd project_coeffs(const std::vector<double>& samples, const GpcBasis& basis);

// Same, for vector-valued samples: samples.col(q) at node q; returns columns per k.
Eigen::MatrixXd project_coeffs(const Eigen::MatrixXd& samples, const GpcBasis& basis);

} // namespace bkuq

#pragma once

#include "bkuq/dense_eigen.hpp"

#include <Eigen/Dense>
#include <vector>

namespace bkuq {

// Propagates one Fourier mode of
//   y_0' = A y_0,
//   y_s' = A y_s + sum_{j=1}^{s} binom(s, j) D_j y_{s-j}   (s <= 2)
// with A = -i eta diag(xi_z) + mu S. D_j are the z-derivative operators in
// the same coordinates. Uses one eigendecomposition of A and divided
// differences of exp(lambda t); falls back to the matrix exponential of the
// block lower-triangular augmented generator when V is ill-conditioned.
class ModePropagator {
public:
  ModePropagator(const Eigen::MatrixXd& S, const Eigen::VectorXd& xi_z, double eta, double mu,
                 const std::vector<CMatrix>& derivs);
  ModePropagator(const CMatrix& A, const std::vector<CMatrix>& derivs);

  int orders() const { return static_cast<int>(derivs_.size()); }
  bool uses_fallback() const { return fallback_; }
  double condition() const { return dec_.cond; }
  const CVector& eigenvalues() const { return dec_.lambda; }

  // c[s] is the initial value of y_s (missing entries are zero). Returns y_0..y_orders.
  std::vector<CVector> propagate(const std::vector<CVector>& c, double t) const;

  // Many times at once, out[t][s].
  std::vector<std::vector<CVector>> propagate(const std::vector<CVector>& c, const std::vector<double>& times) const;

private:
  void setup();
  std::vector<CVector> fallback(const std::vector<CVector>& c, double t) const;

  CMatrix A_;
  std::vector<CMatrix> derivs_;
  EigenDecomp dec_;
  bool fallback_ = false;
  // eigen-coordinate data
  std::vector<CMatrix> M_;     // V^{-1} D_j V
  CMatrix G_;                  // 1 / (lambda_i - lambda_j) for separated pairs, else 0
  CMatrix R_;                  // (M_1 o G) M_1
  std::vector<std::vector<int>> close_; // close partners of each i (including i)
};

inline constexpr double kCloseEigen = 1e-2;
inline constexpr double kCondLimit = 1e8;

// Divided differences of x -> exp(x t).
cplx divdiff_exp(cplx a, cplx b, double t);
cplx divdiff_exp(cplx a, cplx b, cplx c, double t);

// exp(M t) by scaling and squaring, refined by halving the step until two
// successive refinements agree to tol.
CMatrix expm_refined(const CMatrix& M, double t, double tol = 1e-8);

} // namespace bkuq

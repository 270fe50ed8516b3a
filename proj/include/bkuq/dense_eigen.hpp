#pragma once

#include "bkuq/common.hpp"

#include <Eigen/Dense>

namespace bkuq {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Right eigendecomposition A = V diag(lambda) V^{-1} of a general complex
// matrix (LAPACK zgeev).
struct EigenDecomp {
  CVector lambda;
  CMatrix V;
  CMatrix Vinv;
  double cond = 0.0; // 2-norm condition number estimate of V
};

CVector eigenvalues(const CMatrix& A);
// Vinv and cond are left empty when with_inverse is false.
EigenDecomp eigen_decompose(const CMatrix& A, bool with_inverse = true);

// Eigenvalues of a real symmetric matrix in ascending order.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A);

} // namespace bkuq

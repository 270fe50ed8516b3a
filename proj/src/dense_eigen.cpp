#include "bkuq/dense_eigen.hpp"

#include "bkuq/common.hpp"

#include <complex>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

namespace bkuq {

namespace {

void run_zgeev(const CMatrix& A, bool vectors, CVector& w, CMatrix& V) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.rows() != A.cols()) throw NumericalError("eigen_decompose: matrix is not square");
  CMatrix a = A; // column-major copy, overwritten by LAPACK
  w.resize(n);
  if (vectors) V.resize(n, n);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', n, a.data(), n, w.data(), nullptr, 1,
                    vectors ? V.data() : nullptr, vectors ? n : 1);
  if (info != 0) throw NumericalError("zgeev failed with info = " + std::to_string(info));
}

} // namespace

CVector eigenvalues(const CMatrix& A) {
  CVector w;
  CMatrix V;
  run_zgeev(A, false, w, V);
  return w;
}

EigenDecomp eigen_decompose(const CMatrix& A, bool with_inverse) {
  EigenDecomp d;
  run_zgeev(A, true, d.lambda, d.V);
  if (!with_inverse) return d;
  Eigen::PartialPivLU<CMatrix> lu(d.V);
  d.Vinv = lu.inverse();
  // ||V||_1 ||V^{-1}||_1 bounds the 2-norm condition number within a factor n.
  const double n1 = d.V.cwiseAbs().colwise().sum().maxCoeff();
  const double n2 = d.Vinv.cwiseAbs().colwise().sum().maxCoeff();
  d.cond = n1 * n2;
  if (!std::isfinite(d.cond)) d.cond = std::numeric_limits<double>::infinity();
  return d;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

} // namespace bkuq

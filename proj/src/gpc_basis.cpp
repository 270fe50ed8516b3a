#include "bkuq/gpc_basis.hpp"

#include "bkuq/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bkuq {

BasisFamily parse_basis_family(const std::string& s) {
  if (s == "uniform-legendre" || s == "legendre") return BasisFamily::UniformLegendre;
  if (s == "chebyshev") return BasisFamily::Chebyshev;
  throw ConfigError("unsupported basis family '" + s + "' (expected uniform-legendre or chebyshev)");
}

std::string to_string(BasisFamily f) {
  return f == BasisFamily::UniformLegendre ? "uniform-legendre" : "chebyshev";
}

namespace {

// Fills v(0..K-1) with psi_1(z)..psi_K(z).
void eval_basis(BasisFamily family, int K, double z, double* v) {
  if (family == BasisFamily::UniformLegendre) {
    double p0 = 1.0, p1 = z;
    for (int k = 0; k < K; ++k) {
      double pk;
      if (k == 0) {
        pk = 1.0;
      } else if (k == 1) {
        pk = z;
      } else {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
        pk = p2;
      }
      v[k] = std::sqrt(2.0 * k + 1.0) * pk;
    }
  } else {
    double t0 = 1.0, t1 = z;
    for (int k = 0; k < K; ++k) {
      double tk;
      if (k == 0) {
        tk = 1.0;
      } else if (k == 1) {
        tk = z;
      } else {
        const double t2 = 2.0 * z * t1 - t0;
        t0 = t1;
        t1 = t2;
        tk = t2;
      }
      v[k] = (k == 0 ? 1.0 : std::sqrt(2.0)) * tk;
    }
  }
}

void require_exact(const GpcBasis& b, int degree, const char* what) {
  if (degree > 2 * b.quad_order() - 1) {
    std::ostringstream os;
    os << what << ": quadrature with " << b.quad_order() << " nodes is exact to degree "
       << 2 * b.quad_order() - 1 << " but degree " << degree << " is required";
    throw ConfigError(os.str());
  }
}

} // namespace

Eigen::VectorXd GpcBasis::eval(double z) const {
  Eigen::VectorXd v(K);
  eval_basis(family, K, z, v.data());
  return v;
}

double GpcBasis::orthonormality_residual() const {
  Eigen::MatrixXd G = psi_at_nodes.transpose() * Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                                                       quad.w.data(), quad.w.size()))
                                                       .asDiagonal() *
                      psi_at_nodes;
  return (G - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();
}

int min_quadrature_order(int K, int deg_c) {
  const int degree = 3 * (K - 1) + deg_c;
  return (degree + 2) / 2; // ceil((degree + 1) / 2)
}

GpcBasis make_basis(BasisFamily family, int K, int quadrature_order) {
  if (K < 1) throw ConfigError("make_basis: K must be at least 1");
  const int need = min_quadrature_order(K, 1);
  if (quadrature_order < need) {
    std::ostringstream os;
    os << "make_basis: quadrature order " << quadrature_order << " too small for K = " << K
       << " (need at least " << need << " Gauss points)";
    throw ConfigError(os.str());
  }
  GpcBasis b;
  b.family = family;
  b.K = K;
  if (family == BasisFamily::UniformLegendre) {
    b.quad = gauss_legendre(quadrature_order);
    for (double& w : b.quad.w) w *= 0.5;
    b.growth_n = 0.5;
  } else {
    b.quad = gauss_chebyshev_prob(quadrature_order);
    b.growth_n = 0.0;
  }
  const int Q = quadrature_order;
  b.psi_at_nodes.resize(Q, K);
  std::vector<double> v(K);
  for (int q = 0; q < Q; ++q) {
    eval_basis(family, K, b.quad.x[q], v.data());
    for (int k = 0; k < K; ++k) b.psi_at_nodes(q, k) = v[k];
  }
  b.growth_C = 0.0;
  for (int k = 0; k < K; ++k) {
    const double mx = b.psi_at_nodes.col(k).cwiseAbs().maxCoeff();
    b.growth_C = std::max(b.growth_C, mx / std::pow(k + 1.0, b.growth_n));
  }
  return b;
}

Eigen::MatrixXd weight_matrix(int K, double m, double growth_n) {
  if (!(m > growth_n + 1.0)) {
    std::ostringstream os;
    os << "m must exceed n+1 = " << growth_n + 1.0 << " (got m = " << m << ")";
    throw ConfigError(os.str());
  }
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) W(k, k) = std::pow(k + 1.0, m);
  return W;
}

double ZPolynomial::operator()(double z) const {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * z + *it;
  return v;
}

int ZPolynomial::degree() const {
  int d = static_cast<int>(coeffs.size()) - 1;
  while (d > 0 && coeffs[d] == 0.0) --d;
  return std::max(d, 0);
}

void pair_tensor(const GpcBasis& basis, const ZPolynomial& c, Eigen::MatrixXd& S, Eigen::MatrixXd& B,
                 double& b0) {
  require_exact(basis, 2 * (basis.K - 1) + c.degree(), "pair_tensor");
  const int K = basis.K, Q = basis.quad_order();
  S = Eigen::MatrixXd::Zero(K, K);
  b0 = 0.0;
  for (int q = 0; q < Q; ++q) {
    const double cw = c(basis.quad.x[q]) * basis.quad.w[q];
    b0 += cw;
    S += cw * basis.psi_at_nodes.row(q).transpose() * basis.psi_at_nodes.row(q);
  }
  if (!(b0 > 0.0)) throw ConfigError("pair_tensor: mean collision factor b0 must be positive");
  // exact symmetry and band structure: psi_k c psi_i integrates to zero when |k - i| > deg c
  S = 0.5 * (S + S.transpose()).eval();
  const int dc = c.degree();
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < K; ++i)
      if (std::abs(k - i) > dc) S(k, i) = 0.0;
  B = S / b0;
}

void triple_tensor(const GpcBasis& basis, const ZPolynomial& c, std::vector<double>& Sp,
                   std::vector<unsigned char>& mask) {
  require_exact(basis, 3 * (basis.K - 1) + c.degree(), "triple_tensor");
  const int K = basis.K, Q = basis.quad_order();
  const int dc = c.degree();
  Sp.assign(static_cast<std::size_t>(K) * K * K, 0.0);
  mask.assign(Sp.size(), 0);
  std::vector<double> cw(Q);
  for (int q = 0; q < Q; ++q) cw[q] = c(basis.quad.x[q]) * basis.quad.w[q];
  auto idx = [K](int k, int i, int j) { return (static_cast<std::size_t>(k) * K + i) * K + j; };
  // Degrees are k-1, i-1, j-1 for 1-based indices; with 0-based indices the
  // product of two factors and c can reach the third only if deg <= sum.
  auto allowed = [dc](int a, int b, int d) { return d <= a + b + dc; };
  for (int k = 0; k < K; ++k)
    for (int i = k; i < K; ++i)
      for (int j = i; j < K; ++j) {
        const bool on = allowed(i, j, k) && allowed(k, j, i) && allowed(k, i, j);
        double s = 0.0;
        for (int q = 0; q < Q; ++q)
          s += cw[q] * basis.psi_at_nodes(q, k) * basis.psi_at_nodes(q, i) * basis.psi_at_nodes(q, j);
        if (!on) {
          if (std::abs(s) >= 1e-10) {
            std::ostringstream os;
            os << "triple_tensor: selection rule violated at (" << k + 1 << "," << i + 1 << "," << j + 1
               << "): |S'| = " << std::abs(s);
            throw NumericalError(os.str());
          }
          s = 0.0;
        }
        const int p[6][3] = {{k, i, j}, {k, j, i}, {i, k, j}, {i, j, k}, {j, k, i}, {j, i, k}};
        for (const auto& t : p) {
          Sp[idx(t[0], t[1], t[2])] = s;
          mask[idx(t[0], t[1], t[2])] = on ? 1 : 0;
        }
      }
}

ChaosTensors make_chaos_tensors(const GpcBasis& basis, const ZPolynomial& c, double m) {
  ChaosTensors t;
  t.K = basis.K;
  t.m = m;
  t.W = weight_matrix(basis.K, m, basis.growth_n);
  pair_tensor(basis, c, t.S, t.B, t.b0);
  triple_tensor(basis, c, t.Sp, t.mask);
  return t;
}

Eigen::VectorXd project_coeffs(const std::vector<double>& samples, const GpcBasis& basis) {
  if (static_cast<int>(samples.size()) != basis.quad_order())
    throw ConfigError("project_coeffs: sample count does not match the number of quadrature nodes");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.K);
  for (int q = 0; q < basis.quad_order(); ++q)
    out += basis.quad.w[q] * samples[q] * basis.psi_at_nodes.row(q).transpose();
  return out;
}

Eigen::MatrixXd project_coeffs(const Eigen::MatrixXd& samples, const GpcBasis& basis) {
  if (samples.cols() != basis.quad_order())
    throw ConfigError("project_coeffs: sample count does not match the number of quadrature nodes");
  Eigen::MatrixXd Pw = basis.psi_at_nodes;
  for (int q = 0; q < basis.quad_order(); ++q) Pw.row(q) *= basis.quad.w[q];
  return samples * Pw;
}

} // namespace bkuq

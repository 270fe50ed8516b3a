#include "bkuq/propagator.hpp"

#include "bkuq/common.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <array>
#include <cmath>

namespace bkuq {

namespace {

// sum_{n>=0} t^{n+k} / (n+k)! h_n(d), h_n complete homogeneous in the shifts d
// (which sum to zero).
cplx shifted_series(const std::vector<cplx>& d, double t) {
  const std::size_t m = d.size(); // 2 or 3
  const int k = static_cast<int>(m) - 1;
  cplx e2 = 0.0, e3 = 0.0;
  if (m == 2) {
    e2 = d[0] * d[1];
  } else {
    e2 = d[0] * d[1] + d[0] * d[2] + d[1] * d[2];
    e3 = d[0] * d[1] * d[2];
  }
  // h_n = e1 h_{n-1} - e2 h_{n-2} + e3 h_{n-3}, e1 = 0
  std::array<cplx, 401> h{};
  h[0] = 1.0;
  double coef = 1.0;
  for (int j = 1; j <= k; ++j) coef *= t / j; // t^k / k!
  cplx sum = coef;
  for (int n = 1; n < 400; ++n) {
    cplx hn = 0.0;
    if (n >= 2) hn -= e2 * h[n - 2];
    if (n >= 3) hn += e3 * h[n - 3];
    h[n] = hn;
    coef *= t / (n + k);
    const cplx term = coef * hn;
    sum += term;
    if (n > 8 && std::abs(term) <= 1e-18 * std::abs(sum) && std::abs(coef * h[n - 1]) <= 1e-18 * std::abs(sum))
      break;
  }
  return sum;
}

} // namespace

cplx divdiff_exp(cplx a, cplx b, double t) {
  if (std::abs(a - b) >= kCloseEigen) return (std::exp(a * t) - std::exp(b * t)) / (a - b);
  const cplx m = 0.5 * (a + b);
  return std::exp(m * t) * shifted_series({a - m, b - m}, t);
}

cplx divdiff_exp(cplx a, cplx b, cplx c, double t) {
  const double ab = std::abs(a - b), ac = std::abs(a - c), bc = std::abs(b - c);
  const double mx = std::max({ab, ac, bc});
  if (mx >= kCloseEigen) {
    // f[p, q, r] = (f[p, r] - f[q, r]) / (p - q) with |p - q| maximal
    if (mx == ab) return (divdiff_exp(a, c, t) - divdiff_exp(b, c, t)) / (a - b);
    if (mx == ac) return (divdiff_exp(a, b, t) - divdiff_exp(c, b, t)) / (a - c);
    return (divdiff_exp(b, a, t) - divdiff_exp(c, a, t)) / (b - c);
  }
  const cplx m = (a + b + c) / 3.0;
  return std::exp(m * t) * shifted_series({a - m, b - m, c - m}, t);
}

CMatrix expm_refined(const CMatrix& M, double t, double tol) {
  auto level = [&](int k) {
    const double steps = std::ldexp(1.0, k);
    CMatrix E = (M * (t / steps)).exp();
    for (int i = 0; i < k; ++i) E = (E * E).eval();
    return E;
  };
  CMatrix prev = level(0);
  for (int k = 1; k <= 8; ++k) {
    CMatrix cur = level(k);
    const double scale = std::max(1.0, cur.cwiseAbs().maxCoeff());
    if ((cur - prev).cwiseAbs().maxCoeff() <= tol * scale) return cur;
    prev = std::move(cur);
  }
  throw NumericalError("matrix-exponential fallback did not converge under step refinement");
}

ModePropagator::ModePropagator(const Eigen::MatrixXd& S, const Eigen::VectorXd& xi_z, double eta, double mu,
                               const std::vector<CMatrix>& derivs)
    : derivs_(derivs) {
  A_ = (mu * S).cast<cplx>();
  for (Eigen::Index i = 0; i < xi_z.size(); ++i) A_(i, i) += cplx(0.0, -eta * xi_z(i));
  setup();
}

ModePropagator::ModePropagator(const CMatrix& A, const std::vector<CMatrix>& derivs) : A_(A), derivs_(derivs) {
  setup();
}

void ModePropagator::setup() {
  if (derivs_.size() > 2) throw ConfigError("mode propagation supports derivative orders up to 2");
  for (const auto& D : derivs_)
    if (D.rows() != A_.rows() || D.cols() != A_.cols()) throw ConfigError("derivative operator size mismatch");
  dec_ = eigen_decompose(A_);
  if (!(dec_.cond <= kCondLimit)) {
    fallback_ = true;
    return;
  }
  const int n = static_cast<int>(A_.rows());
  for (const auto& D : derivs_) M_.push_back(dec_.Vinv * D * dec_.V);
  close_.assign(n, {});
  G_ = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx d = dec_.lambda(i) - dec_.lambda(j);
      if (std::abs(d) >= kCloseEigen)
        G_(i, j) = 1.0 / d;
      else
        close_[i].push_back(j);
    }
  if (derivs_.size() >= 2) R_ = M_[0].cwiseProduct(G_) * M_[0];
}

std::vector<CVector> ModePropagator::fallback(const std::vector<CVector>& c, double t) const {
  const int n = static_cast<int>(A_.rows());
  const int S = orders() + 1;
  CMatrix Aug = CMatrix::Zero(S * n, S * n);
  for (int s = 0; s < S; ++s) {
    Aug.block(s * n, s * n, n, n) = A_;
    for (int j = 1; j <= s; ++j) {
      const double binom = (s == 2 && j == 1) ? 2.0 : 1.0;
      Aug.block(s * n, (s - j) * n, n, n) = binom * derivs_[j - 1];
    }
  }
  CVector x = CVector::Zero(S * n);
  for (int s = 0; s < S && s < static_cast<int>(c.size()); ++s) x.segment(s * n, n) = c[s];
  const CVector y = expm_refined(Aug, t) * x;
  std::vector<CVector> out(S);
  for (int s = 0; s < S; ++s) out[s] = y.segment(s * n, n);
  return out;
}

std::vector<CVector> ModePropagator::propagate(const std::vector<CVector>& c, double t) const {
  const int n = static_cast<int>(A_.rows());
  const int S = orders() + 1;
  std::vector<CVector> cc(S, CVector::Zero(n));
  for (int s = 0; s < S && s < static_cast<int>(c.size()); ++s) {
    if (c[s].size() != n) throw ConfigError("initial profile length does not match the operator");
    cc[s] = c[s];
  }
  if (t == 0.0) return cc;
  if (t < 0.0) throw ConfigError("propagation time must be nonnegative");
  if (fallback_) return fallback(cc, t);

  const CVector& lam = dec_.lambda;
  CVector e(n);
  for (int i = 0; i < n; ++i) e(i) = std::exp(lam(i) * t);
  std::vector<CVector> h(S);
  for (int s = 0; s < S; ++s) h[s] = dec_.Vinv * cc[s];

  std::vector<CVector> y(S);
  y[0] = e.cwiseProduct(h[0]);
  if (S > 1) {
    CMatrix F(n, n);
    for (int i = 0; i < n; ++i) {
      F(i, i) = t * e(i);
      for (int k = i + 1; k < n; ++k) {
        const cplx d = lam(i) - lam(k);
        const cplx v = std::abs(d) >= kCloseEigen ? (e(i) - e(k)) / d : divdiff_exp(lam(i), lam(k), t);
        F(i, k) = v;
        F(k, i) = v;
      }
    }
    const CMatrix M1F = M_[0].cwiseProduct(F);
    y[1] = e.cwiseProduct(h[1]) + M1F * h[0];
    if (S > 2) {
      y[2] = e.cwiseProduct(h[2]) + 2.0 * (M1F * h[1]) + M_[1].cwiseProduct(F) * h[0];
      // sum_{j,k} M1_ij M1_jk f[i, j, k] h0_k
      const CVector T = M1F * h[0];
      CVector tri = F.cwiseProduct(R_) * h[0] - M_[0].cwiseProduct(G_) * T;
      for (int i = 0; i < n; ++i)
        for (int j : close_[i]) {
          cplx acc = 0.0;
          for (int k = 0; k < n; ++k) {
            cplx f3;
            if (G_(i, k) != 0.0)
              f3 = (F(i, j) - F(j, k)) * G_(i, k);
            else if (G_(j, k) != 0.0)
              f3 = (F(i, j) - F(i, k)) * G_(j, k);
            else
              f3 = divdiff_exp(lam(i), lam(j), lam(k), t);
            acc += M_[0](j, k) * f3 * h[0](k);
          }
          tri(i) += M_[0](i, j) * acc;
        }
      y[2] += 2.0 * tri;
    }
  }
  for (int s = 0; s < S; ++s) y[s] = dec_.V * y[s];
  return y;
}

std::vector<std::vector<CVector>> ModePropagator::propagate(const std::vector<CVector>& c,
                                                            const std::vector<double>& times) const {
  std::vector<std::vector<CVector>> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(propagate(c, t));
  return out;
}

} // namespace bkuq

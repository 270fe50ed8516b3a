#include "bkuq/spectral.hpp"

#include "bkuq/common.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace bkuq {

SymbolMatrix assemble_symbol(const LinearOperator& L, double eta, double mu) {
  if (L.grid->mode != GridMode::Axisym2d) throw ConfigError("assemble_symbol requires an axisym2d operator");
  if (!(mu > 0.0)) throw ConfigError("assemble_symbol: mu must be positive");
  SymbolMatrix s;
  s.eta = eta;
  s.mu = mu;
  s.A = (mu * L.symmetric()).cast<cplx>();
  for (int i = 0; i < L.size(); ++i) s.A(i, i) += cplx(0.0, -eta * L.grid->xi_z(i));
  return s;
}

namespace {

Eigen::MatrixXd sym_macro(const VelocityGrid& g, const MacroBasis& mb) {
  Eigen::MatrixXd Q(g.size(), mb.count());
  for (int c = 0; c < mb.count(); ++c) Q.col(c) = to_sym(g, mb.chi.col(c));
  return Q;
}

void fit_branch(BranchFit& b) {
  const std::size_t n = b.eta.size();
  if (n == 0) return;
  const double lo = b.eta.front(), hi = b.eta.back();
  const double cut = lo + (hi - lo) / 3.0;
  std::vector<std::size_t> win;
  for (std::size_t q = 0; q < n; ++q)
    if (b.eta[q] <= cut * (1.0 + 1e-12)) win.push_back(q);
  if (win.size() < 2)
    for (std::size_t q = win.size(); q < std::min<std::size_t>(n, 2); ++q) win.push_back(q);
  double s2 = 0.0, s4 = 0.0, si = 0.0, sr = 0.0;
  for (std::size_t q : win) {
    const double e = b.eta[q];
    s2 += e * e;
    s4 += e * e * e * e;
    si += e * b.sigma[q].imag();
    sr += e * e * b.sigma[q].real();
  }
  b.a = -si / s2;
  b.A = -sr / s4;
  double num = 0.0, den = 0.0;
  for (std::size_t q : win) {
    const double e = b.eta[q];
    const cplx model(-b.A * e * e, -b.a * e);
    num += std::norm(b.sigma[q] - model);
    den += std::norm(b.sigma[q]);
  }
  b.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
  b.window_count = static_cast<int>(win.size());
}

} // namespace

BranchTrackResult branch_track(const LinearOperator& L, const MacroBasis& mb, const std::vector<double>& etas) {
  if (etas.empty()) throw ConfigError("branch_track: empty eta list");
  for (std::size_t q = 0; q < etas.size(); ++q) {
    if (!(etas[q] > 0.0)) throw ConfigError("branch_track: eta values must be positive");
    if (q > 0 && !(etas[q] > etas[q - 1])) throw ConfigError("branch_track: eta list must be increasing");
  }
  const VelocityGrid& g = *L.grid;
  const Eigen::MatrixXd Q = sym_macro(g, mb);
  const int J = mb.count();
  // Longitudinal branches; the transverse pair needs a full3d operator.
  const int tracked = std::min(J, 3);

  std::vector<EigenDecomp> dec(etas.size());
  parallel_for(etas.size(), [&](std::size_t q) {
    dec[q] = eigen_decompose(assemble_symbol(L, etas[q]).A, false);
  });

  BranchTrackResult res;
  res.fits.resize(5);
  for (int j = 0; j < 5; ++j) {
    res.fits[j].branch = j;
    res.fits[j].available = j < tracked;
  }
  std::vector<CVector> prev(tracked);
  for (std::size_t q = 0; q < etas.size(); ++q) {
    const EigenDecomp& d = dec[q];
    const int n = static_cast<int>(d.lambda.size());
    std::vector<double> ov(n);
    for (int k = 0; k < n; ++k) {
      const CVector v = d.V.col(k).normalized();
      ov[k] = (Q.transpose().cast<cplx>() * v).norm();
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + tracked, order.end(),
                      [&](int a, int b) { return ov[a] > ov[b]; });
    std::vector<int> top(order.begin(), order.begin() + tracked);
    std::vector<int> pick(tracked, -1);
    if (q == 0) {
      std::sort(top.begin(), top.end(), [&](int a, int b) { return d.lambda(a).imag() < d.lambda(b).imag(); });
      // lowest imaginary part -> 0, highest -> 1, the middle one -> 2
      pick[0] = top.front();
      if (tracked > 1) pick[1] = top.back();
      if (tracked > 2) pick[2] = top[1];
    } else {
      for (int b = 0; b < tracked; ++b) {
        double best = -1.0, second = -1.0;
        for (int k = 0; k < n; ++k) {
          const double o = std::abs(prev[b].dot(d.V.col(k).normalized()));
          if (o > best) {
            second = best;
            best = o;
            pick[b] = k;
          } else if (o > second) {
            second = o;
          }
        }
        if (best < 0.5 || second > 0.9 * best) {
          std::ostringstream os;
          os << "branch " << b << " cannot be continued by eigenvector overlap at eta = " << etas[q]
             << " (best overlap " << best << ", runner-up " << second << "); refine the eta grid";
          throw BranchAmbiguity(os.str(), etas[q]);
        }
      }
      for (int b = 0; b < tracked; ++b) {
        for (int c = b + 1; c < tracked; ++c)
          if (pick[b] == pick[c]) {
            std::ostringstream os;
            os << "branches " << b << " and " << c << " collapse onto one eigenvector at eta = " << etas[q]
               << "; refine the eta grid";
            throw BranchAmbiguity(os.str(), etas[q]);
          }
        if (std::find(top.begin(), top.end(), pick[b]) == top.end()) {
          std::ostringstream os;
          os << "branch " << b << " left the macroscopic subspace at eta = " << etas[q] << "; refine the eta grid";
          throw BranchAmbiguity(os.str(), etas[q]);
        }
      }
    }
    for (int b = 0; b < tracked; ++b) {
      prev[b] = d.V.col(pick[b]).normalized();
      res.fits[b].eta.push_back(etas[q]);
      res.fits[b].sigma.push_back(d.lambda(pick[b]));
      res.samples.push_back({etas[q], b, d.lambda(pick[b])});
    }
  }
  for (int b = 0; b < tracked; ++b) fit_branch(res.fits[b]);
  std::sort(res.samples.begin(), res.samples.end(), [](const BranchSample& a, const BranchSample& b) {
    return a.eta != b.eta ? a.eta < b.eta : a.branch < b.branch;
  });
  return res;
}

GapCertificate gap_certify(const LinearOperator& L, int fluid_count, double delta, double eta_max, int n_samples,
                           const std::vector<double>& mus, bool throw_on_failure) {
  if (n_samples < 50) throw ConfigError("gap_certify: at least 50 eta samples are required");
  if (!(eta_max > 0.0)) throw ConfigError("gap_certify: eta_max must be positive");
  if (mus.empty()) throw ConfigError("gap_certify: empty multiplier list");
  GapCertificate c;
  c.delta = delta;
  c.mus = mus;
  for (int q = 0; q < n_samples; ++q) c.etas.push_back(eta_max * q / (n_samples - 1));
  const std::size_t nm = mus.size(), ne = c.etas.size();
  c.max_real_nonfluid.assign(nm * ne, 0.0);
  std::vector<double> max_all(nm * ne, 0.0);
  parallel_for(nm * ne, [&](std::size_t t) {
    const std::size_t im = t / ne, ie = t % ne;
    const CVector ev = eigenvalues(assemble_symbol(L, c.etas[ie], mus[im]).A);
    std::vector<double> re(ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) re[k] = ev(k).real();
    std::sort(re.begin(), re.end(), std::greater<double>());
    max_all[t] = re.front();
    const std::size_t skip = c.etas[ie] < delta ? static_cast<std::size_t>(fluid_count) : 0;
    c.max_real_nonfluid[t] = re.at(skip);
  });
  c.max_real_all = *std::max_element(max_all.begin(), max_all.end());
  c.nonfluid_max_at_zero = c.max_real_nonfluid[0];
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < nm * ne; ++t)
    if (c.max_real_nonfluid[t] > worst) {
      worst = c.max_real_nonfluid[t];
      c.worst_mu = mus[t / ne];
      c.worst_eta = c.etas[t % ne];
    }
  c.tau = -worst;
  if (c.tau <= 0.0 && throw_on_failure) {
    std::ostringstream os;
    os << "gap certification failed: non-fluid eigenvalue with real part " << worst << " at eta = " << c.worst_eta
       << " (mu = " << c.worst_mu << ")";
    throw CertificationFailure(os.str(), c.worst_eta);
  }
  return c;
}

CoupledGapResult coupled_gap_estimate(const Eigen::MatrixXd& B, const Eigen::MatrixXd& W, double m, double gamma,
                                      const LinearOperator& L, const MacroBasis& mb, double nu1, int samples,
                                      unsigned seed) {
  const double limit = 1.0 / (std::pow(2.0, m) + 1.0);
  if (!(gamma < limit)) {
    std::ostringstream os;
    os << "coupled gap: γ = " << gamma << " violates γ < 1/(2^m+1) = " << limit << " (|b1| <= γ|b0| with m = " << m
       << ")";
    throw ConfigError(os.str());
  }
  const int K = static_cast<int>(B.rows());
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      if (i != j && std::abs(B(i, j)) > gamma * B(i, i) + 1e-14) {
        std::ostringstream os;
        os << "coupled gap: |b_" << i + 1 << j + 1 << "| = " << std::abs(B(i, j)) << " exceeds γ = " << gamma;
        throw ConfigError(os.str());
      }
  const Eigen::MatrixXd Bw = W * B * W.inverse();
  CoupledGapResult r;
  for (int k = 0; k < K; ++k) {
    double off = 0.0;
    for (int j = 0; j < K; ++j)
      if (j != k) off += std::abs(Bw(k, j));
    r.row_sum = std::max(r.row_sum, off / Bw(k, k));
  }
  r.gamma_eff = r.row_sum / (std::pow(2.0, m) + 1.0);
  r.bound = (1.0 - (std::pow(2.0, m) + 1.0) * r.gamma_eff) * nu1;
  if (!(r.bound > 0.0)) {
    std::ostringstream os;
    os << "coupled gap bound is not positive: weighted off-diagonal row sum " << r.row_sum
       << " >= 1 (requires γ < 1/(2^m+1))";
    throw ConfigError(os.str());
  }
  {
    Eigen::VectorXd e1 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(B).eigenvalues();
    Eigen::EigenSolver<Eigen::MatrixXd> es(Bw);
    std::vector<double> e2(K);
    for (int k = 0; k < K; ++k) e2[k] = es.eigenvalues()(k).real();
    std::sort(e2.begin(), e2.end());
    for (int k = 0; k < K; ++k) r.spectrum_gap = std::max(r.spectrum_gap, std::abs(e1(k) - e2[k]));
  }
  // Rayleigh quotients of (W B W^{-1}) (x) L on microscopic vectors built from
  // the slowest-decaying microscopic eigenvectors of L.
  const VelocityGrid& g = *L.grid;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.symmetric());
  Eigen::MatrixXd Q(g.size(), mb.count());
  for (int c = 0; c < mb.count(); ++c) Q.col(c) = to_sym(g, mb.chi.col(c));
  std::vector<int> micro;
  for (int j = g.size() - 1; j >= 0 && static_cast<int>(micro.size()) < 12; --j)
    if ((Q.transpose() * es.eigenvectors().col(j)).norm() < 0.5) micro.push_back(j);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::MatrixXd S = L.symmetric();
  r.rayleigh_check = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(g.size(), K);
    for (int k = 0; k < K; ++k)
      for (int j : micro) F.col(k) += nd(rng) * es.eigenvectors().col(j);
    const Eigen::MatrixXd G = S * F * Bw.transpose();
    r.rayleigh_check = std::max(r.rayleigh_check, (G.array() * F.array()).sum() / F.squaredNorm());
  }
  return r;
}

} // namespace bkuq

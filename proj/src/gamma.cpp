#include "bkuq/gamma.hpp"

#include "bkuq/common.hpp"
#include "bkuq/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace bkuq {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tensor Lagrange stencil with `pts` nodes per axis (pts = 2 is trilinear).
struct Stencil {
  std::array<int, 64> idx{};
  std::array<double, 64> w{};
  int size = 0;
  bool inside = false;
};

class LagrangeInterp {
public:
  LagrangeInterp(const VelocityGrid& g, int pts) : g_(g), pts_(pts) {}

  Stencil at(double x, double y, double z) const {
    Stencil s;
    const double q[3] = {x, y, z};
    int lo[3];
    double l[3][4];
    for (int d = 0; d < 3; ++d) {
      const auto& ax = g_.axis[d];
      const int n = static_cast<int>(ax.size());
      if (q[d] < ax.front() || q[d] > ax.back()) return s;
      int j = static_cast<int>(std::upper_bound(ax.begin(), ax.end(), q[d]) - ax.begin()) - 1;
      j = std::clamp(j - (pts_ / 2 - 1), 0, n - pts_);
      lo[d] = j;
      for (int a = 0; a < pts_; ++a) {
        double v = 1.0;
        for (int b = 0; b < pts_; ++b)
          if (b != a) v *= (q[d] - ax[j + b]) / (ax[j + a] - ax[j + b]);
        l[d][a] = v;
      }
    }
    const int ny = g_.res[1], nz = g_.res[2];
    int c = 0;
    for (int a = 0; a < pts_; ++a)
      for (int b = 0; b < pts_; ++b)
        for (int e = 0; e < pts_; ++e, ++c) {
          s.idx[c] = ((lo[0] + a) * ny + (lo[1] + b)) * nz + (lo[2] + e);
          s.w[c] = l[0][a] * l[1][b] * l[2][e];
        }
    s.size = c;
    s.inside = true;
    return s;
  }

private:
  const VelocityGrid& g_;
  int pts_;
};

void check_grid(const VelocityGrid& g, const GammaParams& p) {
  if (g.mode != GridMode::Full3d) throw ConfigError("gamma_eval requires a full3d grid");
  if (p.interp_points < 2 || p.interp_points > 4)
    throw ConfigError("gamma_eval: interpolation needs 2 to 4 points per axis");
  if (g.size() > p.max_nodes) {
    std::ostringstream os;
    os << "gamma_eval: grid has " << g.size() << " nodes, above the cost ceiling of " << p.max_nodes;
    throw ConfigError(os.str());
  }
}

// Fills G[a] (K x K, row-major i*K + j) with
//   sum sqrt(M_*) B (-h_i u_{j*} - h_{i*} u_j + h'_i u'_{j*} + h'_{i*} u'_j)
void pair_sums(const RowMat& h, const RowMat& u, const VelocityGrid& g, const std::function<double(double)>& b,
               const GammaParams& p, std::vector<std::vector<double>>& G) {
  const int N = g.size();
  const int K = static_cast<int>(h.cols());
  const Rule1D rs = gauss_legendre(p.n_polar, 0.0, 1.0);
  const int nphi = p.n_azimuth;
  const double wphi = 2.0 * std::numbers::pi / nphi;
  std::vector<double> bs(rs.size());
  for (std::size_t q = 0; q < rs.size(); ++q) bs[q] = b(rs.x[q]);
  Eigen::VectorXd smw(N);
  for (int j = 0; j < N; ++j) smw(j) = g.w(j) * sqrt_maxwellian(g.pts.row(j).squaredNorm());
  const LagrangeInterp tri(g, p.interp_points);
  G.assign(N, std::vector<double>(static_cast<std::size_t>(K) * K, 0.0));

  // Post-collisional values: the smooth factor f / sqrt(M) is interpolated and
  // sqrt(M) is applied exactly at the off-grid point.
  Eigen::VectorXd ism(N);
  for (int j = 0; j < N; ++j) ism(j) = 1.0 / sqrt_maxwellian(g.pts.row(j).squaredNorm());
  const RowMat hq = ism.asDiagonal() * h;
  const RowMat uq = ism.asDiagonal() * u;

  parallel_for(static_cast<std::size_t>(N), [&](std::size_t ai) {
    const int a = static_cast<int>(ai);
    std::vector<double>& Ga = G[ai];
    const Eigen::Vector3d xa = g.pts.row(a).transpose();
    std::vector<double> hl(K, 0.0), ul(K, 0.0), h1(K), u1(K), h2(K), u2(K);
    for (int s = 0; s < N; ++s) {
      const Eigen::Vector3d xs = g.pts.row(s).transpose();
      const Eigen::Vector3d V = xa - xs;
      const double vn = V.norm();
      if (vn == 0.0) continue;
      const Eigen::Vector3d e3 = V / vn;
      Eigen::Vector3d e1 = (std::abs(e3.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY());
      e1 = (e1 - e1.dot(e3) * e3).normalized();
      const Eigen::Vector3d e2 = e3.cross(e1);
      double bsum = 0.0;
      for (std::size_t q = 0; q < rs.size(); ++q) {
        const double c = rs.x[q];
        const double st = std::sqrt(std::max(0.0, 1.0 - c * c));
        const double wt = smw(s) * vn * bs[q] * rs.w[q] * wphi;
        bsum += vn * bs[q] * rs.w[q] * 2.0 * std::numbers::pi;
        if (wt == 0.0) continue;
        for (int k = 0; k < nphi; ++k) {
          const double ph = (k + 0.5) * wphi;
          const Eigen::Vector3d om = c * e3 + st * (std::cos(ph) * e1 + std::sin(ph) * e2);
          const double proj = vn * c;
          const Eigen::Vector3d xp = xa - proj * om;
          const Eigen::Vector3d xps = xs + proj * om;
          const Stencil sp = tri.at(xp.x(), xp.y(), xp.z());
          const Stencil sps = tri.at(xps.x(), xps.y(), xps.z());
          if (!sp.inside || !sps.inside) continue;
          const double m1 = sqrt_maxwellian(xp.squaredNorm());
          const double m2 = sqrt_maxwellian(xps.squaredNorm());
          std::fill(h1.begin(), h1.end(), 0.0);
          std::fill(u1.begin(), u1.end(), 0.0);
          std::fill(h2.begin(), h2.end(), 0.0);
          std::fill(u2.begin(), u2.end(), 0.0);
          for (int m = 0; m < sp.size; ++m) {
            const double* hr1 = hq.row(sp.idx[m]).data();
            const double* ur1 = uq.row(sp.idx[m]).data();
            const double* hr2 = hq.row(sps.idx[m]).data();
            const double* ur2 = uq.row(sps.idx[m]).data();
            for (int i = 0; i < K; ++i) {
              h1[i] += sp.w[m] * hr1[i];
              u1[i] += sp.w[m] * ur1[i];
              h2[i] += sps.w[m] * hr2[i];
              u2[i] += sps.w[m] * ur2[i];
            }
          }
          const double wm = wt * m1 * m2;
          for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j)
              Ga[static_cast<std::size_t>(i) * K + j] += wm * (h1[i] * u2[j] + h2[i] * u1[j]);
        }
      }
      const double cs = smw(s) * bsum;
      for (int i = 0; i < K; ++i) {
        hl[i] += cs * h(s, i);
        ul[i] += cs * u(s, i);
      }
    }
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        Ga[static_cast<std::size_t>(i) * K + j] -= h(a, i) * ul[j] + hl[i] * u(a, j);
  });
}

} // namespace

Eigen::VectorXd gamma_terms(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const VelocityGrid& grid,
                            const std::vector<AngularTerm>& terms, const GammaParams& p) {
  check_grid(grid, p);
  if (f.size() != grid.size() || g.size() != grid.size())
    throw ConfigError("gamma_eval: field length does not match the grid");
  if (terms.empty()) return Eigen::VectorXd::Zero(grid.size());
  RowMat h = f, u = g;
  std::vector<std::vector<double>> G;
  pair_sums(h, u, grid,
            [&](double s) {
              double v = 0.0;
              for (const auto& t : terms) v += t.coef * std::pow(s, t.power);
              return v;
            },
            p, G);
  Eigen::VectorXd out(grid.size());
  for (int a = 0; a < grid.size(); ++a) out(a) = 0.5 * G[a][0];
  return out;
}

Eigen::VectorXd gamma_eval(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const VelocityGrid& grid,
                           const CollisionModel& model, double z, int k, const GammaParams& p) {
  model.validate();
  return gamma_terms(f, g, grid, model.terms(z, k), p);
}

std::vector<Eigen::VectorXd> gamma_contract(const Eigen::MatrixXd& h, const Eigen::MatrixXd& u,
                                            const std::vector<double>& T, const std::vector<unsigned char>& mask,
                                            const VelocityGrid& grid, const GammaParams& p) {
  check_grid(grid, p);
  const int K = static_cast<int>(h.cols());
  if (u.cols() != K || h.rows() != grid.size() || u.rows() != grid.size())
    throw ConfigError("sg_gamma: state shapes do not match the grid and basis");
  const std::size_t K3 = static_cast<std::size_t>(K) * K * K;
  if (T.size() != K3 || mask.size() != K3) throw ConfigError("sg_gamma: triple tensor size mismatch");
  const RowMat hr = h, ur = u;
  std::vector<std::vector<double>> G;
  pair_sums(hr, ur, grid, [](double s) { return s; }, p, G);
  std::vector<Eigen::VectorXd> out(K, Eigen::VectorXd::Zero(grid.size()));
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        const std::size_t t = (static_cast<std::size_t>(k) * K + i) * K + j;
        if (!mask[t]) continue;
        for (int a = 0; a < grid.size(); ++a) out[k](a) += 0.25 * T[t] * G[a][static_cast<std::size_t>(i) * K + j];
      }
  return out;
}

} // namespace bkuq

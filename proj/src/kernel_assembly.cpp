#include "bkuq/kernel_assembly.hpp"

#include "bkuq/common.hpp"
#include "bkuq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace bkuq {

namespace {
constexpr double kPi = std::numbers::pi;
const double kMNorm = std::pow(2.0 * kPi, -1.5); // (2 pi)^{-3/2}
} // namespace

std::string to_string(AssemblyPath p) {
  return p == AssemblyPath::GradClosedForm ? "grad-closed-form" : "direct-quadrature";
}

std::string AssemblyParams::descriptor() const {
  char buf[200];
  std::snprintf(buf, sizeof buf, "nr=%d;nt=%d;nphi=%d;rmax=%.17g;pv=%d;ppsi=%d;nunr=%d;nunu=%d", n_r, n_theta,
                n_phi, r_max, plane_nv, plane_npsi, nu_nr, nu_nu);
  return buf;
}

std::string unit_descriptor(int power, AssemblyPath path, const AssemblyParams& p) {
  return "unit;power=" + std::to_string(power) + ";" + to_string(path) + ";" + p.descriptor();
}

double angular_mean(int power) {
  const Rule1D r = gauss_legendre(std::max(1, power / 2 + 1), 0.0, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], power);
  return s;
}

double collision_frequency(double speed, int power, AssemblyPath path, const AssemblyParams& p) {
  const double beta_b = angular_mean(power);
  if (path == AssemblyPath::GradClosedForm) {
    const double s = std::max(speed, 1e-12);
    const double mean_dist = std::sqrt(2.0 / kPi) * std::exp(-0.5 * s * s) +
                             (s + 1.0 / s) * std::erf(s / std::numbers::sqrt2);
    return 2.0 * kPi * beta_b * mean_dist;
  }
  const double R = speed + 10.0;
  const Rule1D rr = gauss_legendre(p.nu_nr, 0.0, R);
  const Rule1D ru = gauss_legendre(p.nu_nu, -1.0, 1.0);
  double acc = 0.0;
  for (std::size_t a = 0; a < rr.size(); ++a) {
    const double r = rr.x[a];
    double inner = 0.0;
    for (std::size_t b = 0; b < ru.size(); ++b) {
      const double d2 = speed * speed - 2.0 * r * speed * ru.x[b] + r * r;
      inner += ru.w[b] * std::exp(-0.5 * d2);
    }
    acc += rr.w[a] * r * r * r * inner;
  }
  return 2.0 * kPi * beta_b * 2.0 * kPi * kMNorm * acc;
}

double grad_kernel(double r, double s, double c) {
  const double q = 2.0 * s * c + r;
  const double k2 = (2.0 / std::sqrt(2.0 * kPi)) / r * std::exp(-r * r / 8.0 - q * q / 8.0);
  const double eta2 = s * s + 2.0 * r * s * c + r * r;
  const double k1 = kPi * kMNorm * r * std::exp(-0.25 * (s * s + eta2));
  return k2 - k1;
}

double plane_kernel(double r, double s, double c, int power, const AssemblyParams& p) {
  // u = xi - eta has length r; components of xi along u and across it.
  const double a_xi = -s * c;
  const double a_eta = a_xi - r;
  const double cperp = s * std::sqrt(std::max(0.0, 1.0 - c * c));
  static thread_local int cached_nv = -1;
  static thread_local Rule1D lag;
  if (cached_nv != p.plane_nv) {
    lag = gauss_laguerre(p.plane_nv);
    cached_nv = p.plane_nv;
  }
  const int npsi_half = std::max(1, p.plane_npsi / 2);
  const double wpsi = 2.0 * kPi / (2.0 * npsi_half) * 2.0;
  const double U = r;
  double I = 0.0;
  for (std::size_t a = 0; a < lag.size(); ++a) {
    const double rad = std::sqrt(2.0 * lag.x[a]);
    double inner = 0.0;
    for (int k = 0; k < npsi_half; ++k) {
      const double psi = (k + 0.5) * kPi / npsi_half;
      const double Y2 = std::max(0.0, cperp * cperp + rad * rad + 2.0 * cperp * rad * std::cos(psi));
      const double Y = std::sqrt(Y2);
      const double V = std::sqrt(U * U + Y2);
      // V b(U/V) / U^2 + V b(Y/V) / (U Y) with b(x) = x^power
      double g = std::pow(V, 1.0 - power) * std::pow(U, power - 2.0);
      g += std::pow(V, 1.0 - power) * (power == 1 ? 1.0 : std::pow(Y, power - 1.0)) / U;
      inner += g;
    }
    I += lag.w[a] * inner * wpsi;
  }
  const double k2 = kMNorm * std::exp(-0.25 * (a_xi * a_xi + a_eta * a_eta)) * I;
  const double eta2 = s * s + 2.0 * r * s * c + r * r;
  const double k1 = 2.0 * kPi * angular_mean(power) * kMNorm * r * std::exp(-0.25 * (s * s + eta2));
  return k2 - k1;
}

namespace {

struct RowAssembler {
  const VelocityGrid& g;
  int power;
  AssemblyPath path;
  const AssemblyParams& p;
  Barycentric bz, br;
  Rule1D rt;

  RowAssembler(const VelocityGrid& grid, int pw, AssemblyPath pa, const AssemblyParams& prm)
      : g(grid), power(pw), path(pa), p(prm), bz(grid.axis[0]), br(grid.axis[1]),
        rt(gauss_legendre(prm.n_theta, -1.0, 1.0)) {
    if (g.mode != GridMode::Axisym2d) throw ConfigError("kernel assembly requires an axisym2d grid");
    if (pa == AssemblyPath::GradClosedForm && pw != 1)
      throw ConfigError("the closed-form kernel exists only for the hard-sphere angular factor b(s) = s");
  }

  Eigen::VectorXd row(int i) const {
    const int nz = g.res[0], nrho = g.res[1];
    const double X = g.xi_max;
    const double rho_i = g.pts(i, 0), z_i = g.pts(i, 2);
    const double s = std::hypot(rho_i, z_i);
    const double e3[3] = {rho_i / s, 0.0, z_i / s};
    const double e1[3] = {z_i / s, 0.0, -rho_i / s};
    const double R = std::min(p.r_max, std::hypot(std::abs(z_i) + X, rho_i + X));
    const Rule1D rr = gauss_legendre(p.n_r, 0.0, R);
    const int nphi = p.n_phi;
    const double wphi = 2.0 * kPi / nphi;
    std::vector<double> cphi(nphi), sphi(nphi);
    for (int k = 0; k < nphi; ++k) {
      const double ph = (k + 0.5) * kPi / nphi;
      cphi[k] = std::cos(ph);
      sphi[k] = std::sin(ph);
    }
    const std::size_t maxpts = static_cast<std::size_t>(p.n_r) * p.n_theta * nphi;
    Eigen::MatrixXd Az(nz, maxpts), Ar(nrho, maxpts);
    std::size_t np = 0;
    for (int a = 0; a < p.n_r; ++a) {
      const double r = rr.x[a];
      for (int b = 0; b < p.n_theta; ++b) {
        const double c = rt.x[b];
        const double kv = (path == AssemblyPath::GradClosedForm) ? grad_kernel(r, s, c)
                                                                 : plane_kernel(r, s, c, power, p);
        const double wk = kv * r * r * rr.w[a] * rt.w[b] * wphi;
        if (wk == 0.0) continue;
        const double st = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int k = 0; k < nphi; ++k) {
          const double o1 = st * cphi[k], o2 = st * sphi[k];
          const double ex = rho_i + r * (o1 * e1[0] + c * e3[0]);
          const double ey = r * o2;
          const double ez = z_i + r * (o1 * e1[2] + c * e3[2]);
          const double erho = std::hypot(ex, ey);
          if (std::abs(ez) > X || erho > X) continue;
          bz.weights_at(ez, Az.col(np).data());
          Az.col(np) *= wk;
          br.weights_at(erho, Ar.col(np).data());
          ++np;
        }
      }
    }
    Eigen::MatrixXd M = Az.leftCols(np) * Ar.leftCols(np).transpose(); // nz x nrho
    Eigen::VectorXd out(nz * nrho);
    for (int iz = 0; iz < nz; ++iz)
      for (int ir = 0; ir < nrho; ++ir) out(iz * nrho + ir) = M(iz, ir);
    return out;
  }
};

} // namespace

Eigen::VectorXd assemble_kernel_row(const VelocityGrid& g, int i, int power, AssemblyPath path,
                                    const AssemblyParams& p) {
  RowAssembler ra(g, power, path, p);
  return ra.row(i);
}

Eigen::MatrixXd assemble_kernel_raw(const VelocityGrid& g, int power, AssemblyPath path,
                                    const AssemblyParams& p) {
  RowAssembler ra(g, power, path, p);
  const int N = g.size();
  Eigen::MatrixXd K(N, N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
    K.row(static_cast<Eigen::Index>(i)) = ra.row(static_cast<int>(i)).transpose();
  });
  return K;
}

} // namespace bkuq

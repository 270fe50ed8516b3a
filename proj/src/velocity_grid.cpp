#include "bkuq/velocity_grid.hpp"

#include "bkuq/common.hpp"
#include "bkuq/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace bkuq {

GridMode parse_grid_mode(const std::string& s) {
  if (s == "axisym2d") return GridMode::Axisym2d;
  if (s == "full3d") return GridMode::Full3d;
  throw ConfigError("unknown grid mode '" + s + "' (expected axisym2d or full3d)");
}

std::string to_string(GridMode m) { return m == GridMode::Axisym2d ? "axisym2d" : "full3d"; }

double maxwellian(double speed2) {
  return std::pow(2.0 * std::numbers::pi, -1.5) * std::exp(-0.5 * speed2);
}

double sqrt_maxwellian(double speed2) {
  return std::pow(2.0 * std::numbers::pi, -0.75) * std::exp(-0.25 * speed2);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double VelocityGrid::bracket_weight(int i) const {
  return std::pow(1.0 + pts.row(i).squaredNorm(), 0.5 * beta);
}

std::string VelocityGrid::descriptor() const {
  char buf[160];
  if (mode == GridMode::Axisym2d)
    std::snprintf(buf, sizeof buf, "axisym2d;gl;xi_max=%.17g;nz=%d;nrho=%d", xi_max, res[0], res[1]);
  else
    std::snprintf(buf, sizeof buf, "full3d;gh;xi_max=%.17g;n=%d,%d,%d", xi_max, res[0], res[1], res[2]);
  return buf;
}

std::uint64_t VelocityGrid::hash() const { return fnv1a(descriptor()); }

namespace {

Rule1D hermite_axis(int n, double xi_max) {
  Rule1D r = gauss_hermite_plain(n);
  const double outer = r.x.back();
  if (outer > xi_max) {
    const double s = xi_max / outer;
    for (std::size_t i = 0; i < r.size(); ++i) {
      r.x[i] *= s;
      r.w[i] *= s; // int f dx = s int f(s u) du
    }
  }
  return r;
}

} // namespace

VelocityGrid build_grid(GridMode mode, double xi_max, std::array<int, 3> res, double beta) {
  if (!(beta > 1.5)) {
    std::ostringstream os;
    os << "β must exceed 3/2 (got β = " << beta << ")";
    throw ConfigError(os.str());
  }
  if (!(xi_max >= 5.0)) throw ConfigError("build_grid: xi_max must be at least 5");
  VelocityGrid g;
  g.mode = mode;
  g.xi_max = xi_max;
  g.beta = beta;
  if (mode == GridMode::Axisym2d) {
    res[2] = 1;
    if (res[0] < 8 || res[1] < 8)
      throw ConfigError("build_grid: axisym2d needs at least 8 nodes per direction");
    g.res = res;
    const Rule1D rz = gauss_legendre(res[0], -xi_max, xi_max);
    const Rule1D rr = gauss_legendre(res[1], 0.0, xi_max);
    g.axis[0] = rz.x;
    g.axis[1] = rr.x;
    const int N = res[0] * res[1];
    g.pts.resize(N, 3);
    g.w.resize(N);
    for (int iz = 0; iz < res[0]; ++iz)
      for (int ir = 0; ir < res[1]; ++ir) {
        const int i = iz * res[1] + ir;
        g.pts(i, 0) = rr.x[ir];
        g.pts(i, 1) = 0.0;
        g.pts(i, 2) = rz.x[iz];
        g.w(i) = 2.0 * std::numbers::pi * rr.x[ir] * rz.w[iz] * rr.w[ir];
      }
  } else {
    if (res[0] < 8 || res[1] < 8 || res[2] < 8)
      throw ConfigError("build_grid: full3d needs at least 8 nodes per direction");
    g.res = res;
    Rule1D r[3];
    for (int d = 0; d < 3; ++d) {
      r[d] = hermite_axis(res[d], xi_max);
      g.axis[d] = r[d].x;
    }
    const int N = res[0] * res[1] * res[2];
    g.pts.resize(N, 3);
    g.w.resize(N);
    for (int ix = 0; ix < res[0]; ++ix)
      for (int iy = 0; iy < res[1]; ++iy)
        for (int iz = 0; iz < res[2]; ++iz) {
          const int i = (ix * res[1] + iy) * res[2] + iz;
          g.pts(i, 0) = r[0].x[ix];
          g.pts(i, 1) = r[1].x[iy];
          g.pts(i, 2) = r[2].x[iz];
          g.w(i) = r[0].w[ix] * r[1].w[iy] * r[2].w[iz];
        }
  }
  double mass = 0.0;
  for (int i = 0; i < g.size(); ++i) mass += g.w(i) * maxwellian(g.pts.row(i).squaredNorm());
  g.maxwellian_mass = mass;
  if (std::abs(mass - 1.0) > kGridMassTol) {
    std::ostringstream os;
    os << "grid too coarse: discrete Maxwellian mass " << mass << " deviates from 1 by "
       << std::abs(mass - 1.0) << " > " << kGridMassTol;
    throw ConfigError(os.str());
  }
  return g;
}

} // namespace bkuq

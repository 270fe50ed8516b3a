#include "bkuq/common.hpp"
#include "bkuq/gamma.hpp"
#include "bkuq/kernel_assembly.hpp"
#include "bkuq/kernel_cache.hpp"
#include "bkuq/linear_operator.hpp"
#include "support.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace bkuq;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

using Field = std::function<double(const Eigen::Vector3d&)>;

double sqm(const Eigen::Vector3d& v) { return std::sqrt(oracle::maxwellian(v)); }

// Orthonormal pair perpendicular to a unit vector.
void frame(const Eigen::Vector3d& a, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
  const Eigen::Vector3d t = std::abs(a.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  e1 = (t - t.dot(a) * a).normalized();
  e2 = a.cross(e1);
}

// Gain-minus-cross part of the linearized operator by direct quadrature over
// xi_* and the collision hemisphere:
//   K f = int int |V| b(s) sqrt(M_*) (sqrt(M'_*) f' + sqrt(M') f'_* - sqrt(M) f_*)
double brute_force_K(const Eigen::Vector3d& xi, int power, const Field& f) {
  const auto rr = oracle::golub_welsch(48, 0.0, 14.0);
  const auto rc = oracle::golub_welsch(24);
  const auto rs = oracle::golub_welsch(16, 0.0, 1.0);
  const int nphi = 32, npsi = 24;
  double sum = 0.0;
  for (int ic = 0; ic < 24; ++ic) {
    const double ca = rc.x[ic], sa = std::sqrt(1.0 - ca * ca);
    for (int ip = 0; ip < nphi; ++ip) {
      const double ph = 2.0 * kPi * (ip + 0.5) / nphi;
      const Eigen::Vector3d om(sa * std::cos(ph), sa * std::sin(ph), ca);
      Eigen::Vector3d e1, e2;
      frame(-om, e1, e2);
      for (int ir = 0; ir < 48; ++ir) {
        const double rho = rr.x[ir];
        const Eigen::Vector3d xs = xi + rho * om;
        const double wout = rc.w[ic] * (2.0 * kPi / nphi) * rr.w[ir] * rho * rho * rho * sqm(xs);
        double inner_sum = 0.0;
        for (int is = 0; is < 16; ++is) {
          const double s = rs.x[is], ss = std::sqrt(1.0 - s * s);
          for (int iq = 0; iq < npsi; ++iq) {
            const double q = 2.0 * kPi * (iq + 0.5) / npsi;
            const Eigen::Vector3d Om = s * (-om) + ss * (std::cos(q) * e1 + std::sin(q) * e2);
            const Eigen::Vector3d xp = xi - rho * s * Om, xsp = xs + rho * s * Om;
            inner_sum += rs.w[is] * (2.0 * kPi / npsi) * std::pow(s, power) *
                         (sqm(xsp) * f(xp) + sqm(xp) * f(xsp) - sqm(xi) * f(xs));
          }
        }
        sum += wout * inner_sum;
      }
    }
  }
  return sum;
}

// int k(xi, eta) f(eta) d eta with a kernel function of (r, s, c).
template <class Kern>
double kernel_integral(const Eigen::Vector3d& xi, const Kern& k, const Field& f) {
  const auto rr = oracle::golub_welsch(64, 0.0, 14.0);
  const auto rc = oracle::golub_welsch(32);
  const int nphi = 32;
  const Eigen::Vector3d a = xi.normalized();
  Eigen::Vector3d e1, e2;
  frame(a, e1, e2);
  const double s = xi.norm();
  double sum = 0.0;
  for (int ir = 0; ir < 64; ++ir)
    for (int ic = 0; ic < 32; ++ic) {
      const double c = rc.x[ic], sc = std::sqrt(1.0 - c * c);
      const double kv = k(rr.x[ir], s, c);
      for (int ip = 0; ip < nphi; ++ip) {
        const double ph = 2.0 * kPi * (ip + 0.5) / nphi;
        const Eigen::Vector3d eta = xi + rr.x[ir] * (c * a + sc * (std::cos(ph) * e1 + std::sin(ph) * e2));
        sum += rr.w[ir] * rc.w[ic] * (2.0 * kPi / nphi) * rr.x[ir] * rr.x[ir] * kv * f(eta);
      }
    }
  return sum;
}

const Field kTestField = [](const Eigen::Vector3d& v) {
  return (1.0 + 0.3 * v.z() - 0.2 * v.squaredNorm() + 0.5 * v.x() * v.z()) * sqm(v);
};

CollisionModel proportional(double b1) {
  CollisionModel m;
  m.b1 = b1;
  return m;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bkuq_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("default axisym grid: node count and Maxwellian mass") {
  const VelocityGrid g = build_grid(GridMode::Axisym2d, 6.0, {40, 20, 1}, 2.0);
  CHECK(g.size() == 800);
  double mass = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    mass += g.w(i) * oracle::maxwellian(g.pts.row(i).transpose());
    CHECK(g.w(i) > 0.0);
    CHECK(g.pts(i, 0) > 0.0);
    CHECK(std::abs(g.pts(i, 2)) <= 6.0);
    CHECK(g.pts(i, 0) <= 6.0);
  }
  CHECK(std::abs(mass - 1.0) <= 1e-6);
}

TEST_CASE("full3d grid has 1728 nodes at 12 per axis") {
  const VelocityGrid g = build_grid(GridMode::Full3d, 6.0, {12, 12, 12}, 2.0);
  CHECK(g.size() == 1728);
  double mass = 0.0;
  for (int i = 0; i < g.size(); ++i) mass += g.w(i) * oracle::maxwellian(g.pts.row(i).transpose());
  CHECK(std::abs(mass - 1.0) <= 1e-6);
  CHECK(g.pts.cwiseAbs().maxCoeff() <= 6.0);
}

TEST_CASE("grid guards") {
  try {
    build_grid(GridMode::Axisym2d, 6.0, {40, 20, 1}, 1.0);
    FAIL("beta = 1 must be rejected");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("β must exceed 3/2") != std::string::npos);
  }
  CHECK_THROWS_AS(build_grid(GridMode::Axisym2d, 6.0, {40, 20, 1}, 1.5), ConfigError);
  CHECK_THROWS_AS(build_grid(GridMode::Axisym2d, 4.0, {40, 20, 1}, 2.0), ConfigError);
  CHECK_THROWS_AS(build_grid(GridMode::Axisym2d, 6.0, {7, 20, 1}, 2.0), ConfigError);
  try {
    build_grid(GridMode::Axisym2d, 6.0, {10, 8, 1}, 2.0);
    FAIL("a coarse grid must fail the mass check");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("Maxwellian mass") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_grid_mode("polar"), ConfigError);
}

TEST_CASE("grid hash follows the descriptor") {
  const VelocityGrid a = build_grid(GridMode::Axisym2d, 6.0, {20, 10, 1}, 2.0);
  const VelocityGrid b = build_grid(GridMode::Axisym2d, 6.0, {20, 10, 1}, 3.0);
  const VelocityGrid c = build_grid(GridMode::Axisym2d, 6.0, {24, 12, 1}, 2.0);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("macro basis on the default grid") {
  const VelocityGrid g = build_grid(GridMode::Axisym2d, 6.0, {40, 20, 1}, 2.0);
  const MacroBasis mb = macro_basis(g);
  REQUIRE(mb.count() == 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(std::abs(inner(g, mb.chi.col(a), mb.chi.col(b)) - (a == b ? 1.0 : 0.0)) <= 1e-8);
  Eigen::VectorXd root(g.size());
  for (int i = 0; i < g.size(); ++i) root(i) = sqm(g.pts.row(i).transpose());
  CHECK(std::abs(inner(g, mb.chi.col(0), root) - 1.0) <= 1e-6);

  std::mt19937_64 rng(3);
  const Eigen::VectorXd f = oracle::random_vector(g.size(), rng);
  const Eigen::VectorXd p0 = macro_project(f, mb, g, MacroPart::P0);
  const Eigen::VectorXd p1 = macro_project(f, mb, g, MacroPart::P1);
  CHECK((p0 + p1 - f).cwiseAbs().maxCoeff() <= 1e-12 * f.cwiseAbs().maxCoeff());
  CHECK(macro_project(p1, mb, g, MacroPart::P0).norm() <= 1e-8 * f.norm());
  CHECK((macro_project(p0, mb, g, MacroPart::P0) - p0).norm() <= 1e-10 * f.norm());
  CHECK(macro_project(mb.chi.col(0), mb, g, MacroPart::P1).norm() <= 1e-8);
  CHECK((macro_project(mb.chi.col(2), mb, g, MacroPart::P0) - mb.chi.col(2)).norm() <= 1e-8);
}

TEST_CASE("full3d macro basis carries all five invariants") {
  const VelocityGrid g = build_grid(GridMode::Full3d, 6.0, {10, 10, 10}, 2.0);
  const MacroBasis mb = macro_basis(g);
  CHECK(mb.count() == 5);
  CHECK((mb.chi.transpose() * g.w.asDiagonal() * mb.chi - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("collision model bounds and validation") {
  CollisionModel p = proportional(0.1);
  auto [lo, hi] = p.positivity_bounds();
  CHECK(lo == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(p.derivative_bound() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p.b(0.5, 1.0) == doctest::Approx(0.55));

  CollisionModel c;
  c.family = KernelFamily::Cubic;
  c.eps = 0.5;
  std::tie(lo, hi) = c.positivity_bounds();
  CHECK(lo == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(c.derivative_bound() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.terms(0.3, 2).empty());
  CHECK_THROWS_AS(c.c_poly(), ConfigError);

  CHECK_THROWS_AS(proportional(2.5).validate(), ConfigError);
  CollisionModel a = proportional(0.1);
  a.cz = 0.0;
  CHECK_THROWS_AS(a.validate(), ConfigError);
  CHECK_THROWS_AS(parse_kernel_family("quartic"), ConfigError);
}

TEST_CASE("collision frequency matches the Gaussian mean-distance formula") {
  const AssemblyParams p;
  CHECK(collision_frequency(0.0, 1, AssemblyPath::GradClosedForm, p) ==
        doctest::Approx(kPi * std::sqrt(8.0 / kPi)).epsilon(1e-12));
  CHECK(collision_frequency(0.0, 1, AssemblyPath::GradClosedForm, p) == doctest::Approx(5.0133).epsilon(1e-4));
  for (double s : {0.0, 0.4, 1.3, 3.0, 7.5})
    for (int power : {1, 3}) {
      const double ref = 2.0 * kPi / (power + 1.0) * oracle::gaussian_mean_distance(s);
      if (power == 1) CHECK(collision_frequency(s, 1, AssemblyPath::GradClosedForm, p) == doctest::Approx(ref).epsilon(1e-12));
      CHECK(collision_frequency(s, power, AssemblyPath::DirectQuadrature, p) == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("kernel functions reproduce the brute-force collision integral") {
  const AssemblyParams p;
  for (const Eigen::Vector3d& xi : {Eigen::Vector3d(0.7, 0.0, -1.1), Eigen::Vector3d(0.2, 1.5, 2.1)}) {
    const double bf1 = brute_force_K(xi, 1, kTestField);
    const double bf3 = brute_force_K(xi, 3, kTestField);
    const double grad = kernel_integral(xi, [](double r, double s, double c) { return grad_kernel(r, s, c); }, kTestField);
    const double plane1 =
        kernel_integral(xi, [&](double r, double s, double c) { return plane_kernel(r, s, c, 1, p); }, kTestField);
    const double plane3 =
        kernel_integral(xi, [&](double r, double s, double c) { return plane_kernel(r, s, c, 3, p); }, kTestField);
    CHECK(std::abs(grad - bf1) <= 1e-6 * std::abs(bf1));
    CHECK(std::abs(plane1 - bf1) <= 1e-6 * std::abs(bf1));
    CHECK(std::abs(plane3 - bf3) <= 1e-6 * std::abs(bf3));
  }
}

TEST_CASE("assembled kernel rows: Grad and direct paths agree") {
  const auto g = oracle::small_grid();
  const AssemblyParams p;
  for (int i : {0, 37, 104, 199}) {
    const Eigen::VectorXd a = assemble_kernel_row(*g, i, 1, AssemblyPath::GradClosedForm, p);
    const Eigen::VectorXd b = assemble_kernel_row(*g, i, 1, AssemblyPath::DirectQuadrature, p);
    CHECK((a - b).norm() <= 1e-3 * a.norm());
  }
  const VelocityGrid full = build_grid(GridMode::Full3d, 6.0, {8, 8, 8}, 2.0);
  CHECK_THROWS_AS(assemble_kernel_row(full, 0, 1, AssemblyPath::GradClosedForm, p), ConfigError);
}

TEST_CASE("assembled operator: symmetry, null space, dissipativity") {
  OperatorFactory& fac = oracle::small_factory();
  const VelocityGrid& g = fac.grid();
  const LinearOperator L = fac.assemble(proportional(0.1), 0.0, 0);
  CHECK(L.raw_null_residual <= kRawNullTol);
  const Eigen::MatrixXd S = L.symmetric();
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * S.cwiseAbs().maxCoeff());
  for (int j = 0; j < fac.macro().count(); ++j) {
    const Eigen::VectorXd r = L.apply(fac.macro().chi.col(j));
    CHECK(std::sqrt(inner(g, r, r)) <= kNullTol);
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd f = oracle::smooth_field(g, rng), h = oracle::smooth_field(g, rng);
    const double nf = std::sqrt(inner(g, f, f)), nh = std::sqrt(inner(g, h, h));
    CHECK(std::abs(inner(g, L.apply(f), h) - inner(g, f, L.apply(h))) <= 1e-10 * nf * nh);
    CHECK(inner(g, L.apply(f), f) <= 1e-10 * nf * nf);
  }
  const auto [c1, c2] = nu_bounds(L);
  CHECK(c1 > 0.0);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(L.nu(i) >= c1 * (1.0 + g.speed(i)) * (1 - 1e-12));
    CHECK(L.nu(i) <= c2 * (1.0 + g.speed(i)) * (1 + 1e-12));
  }
  const double kn = kernel_weighted_norm(L, 2.0);
  CHECK(std::isfinite(kn));
  CHECK(kn > 0.0);
}

TEST_CASE("proportional family derivatives are exact multiples of the unit operator") {
  OperatorFactory& fac = oracle::small_factory();
  const CollisionModel m = proportional(0.3);
  const LinearOperator L0 = fac.assemble(m, 0.0, 0);
  const LinearOperator L1 = fac.assemble(m, 0.0, 1);
  const LinearOperator L2 = fac.assemble(m, 0.0, 2);
  CHECK((L1.nu - 0.3 * L0.nu).cwiseAbs().maxCoeff() <= 1e-14 * L0.nu.cwiseAbs().maxCoeff());
  CHECK((L1.K - 0.3 * L0.K).cwiseAbs().maxCoeff() <= 1e-14 * L0.K.cwiseAbs().maxCoeff());
  CHECK(L2.is_zero());
  CHECK_THROWS_AS(fac.assemble(m, 0.0, 3), ConfigError);
  const LinearOperator Lz = fac.assemble(m, 0.5, 0);
  CHECK((Lz.K - 1.15 * L0.K).cwiseAbs().maxCoeff() <= 1e-14 * L0.K.cwiseAbs().maxCoeff());
}

TEST_CASE("spectral-gap estimate: sampled value bounds the exact infimum") {
  OperatorFactory& fac = oracle::small_factory();
  const LinearOperator L = fac.assemble(proportional(0.0), 0.0, 0);
  const GapEstimate ge = spectral_gap_estimate(L, fac.macro(), 100, 7);
  CHECK(ge.exact > 0.0);
  CHECK(ge.sampled >= ge.exact * (1 - 1e-12));
}

TEST_CASE("Gamma on a coarse full3d grid") {
  const VelocityGrid g = build_grid(GridMode::Full3d, 6.0, {8, 8, 8}, 2.0);
  const CollisionModel m = proportional(0.1);
  std::mt19937_64 rng(9);
  const Eigen::VectorXd f = oracle::smooth_field(g, rng), h = oracle::smooth_field(g, rng),
                        u = oracle::smooth_field(g, rng);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.size());
  CHECK(gamma_eval(zero, h, g, m, 0.0, 0).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd gfh = gamma_eval(f, h, g, m, 0.0, 0);
  const Eigen::VectorXd ghf = gamma_eval(h, f, g, m, 0.0, 0);
  const Eigen::VectorXd guh = gamma_eval(u, h, g, m, 0.0, 0);
  const Eigen::VectorXd gsum = gamma_eval(2.0 * f - 3.0 * u, h, g, m, 0.0, 0);
  CHECK((gfh - ghf).cwiseAbs().maxCoeff() <= 1e-12 * gfh.cwiseAbs().maxCoeff());
  CHECK((gsum - (2.0 * gfh - 3.0 * guh)).cwiseAbs().maxCoeff() <= 1e-12 * gsum.cwiseAbs().maxCoeff());
  // d_z b = b1 s for the proportional family
  const Eigen::VectorXd g1 = gamma_eval(f, h, g, m, 0.0, 1);
  CHECK((g1 - 0.1 * gfh).cwiseAbs().maxCoeff() <= 1e-13 * gfh.cwiseAbs().maxCoeff());
  CHECK(gamma_eval(f, h, g, m, 0.0, 2).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd root(g.size());
  for (int i = 0; i < g.size(); ++i) root(i) = sqm(g.pts.row(i).transpose());
  const Eigen::VectorXd eq = gamma_eval(root, root, g, m, 0.0, 0);
  CHECK(std::sqrt(inner(g, eq, eq)) <= 1e-2 * std::sqrt(inner(g, gfh, gfh)));

  const VelocityGrid axi = build_grid(GridMode::Axisym2d, 6.0, {20, 10, 1}, 2.0);
  CHECK_THROWS_AS(gamma_eval(Eigen::VectorXd::Zero(axi.size()), Eigen::VectorXd::Zero(axi.size()), axi, m, 0.0, 0),
                  ConfigError);
  GammaParams small;
  small.max_nodes = 500;
  CHECK_THROWS_AS(gamma_eval(f, h, g, m, 0.0, 0, small), ConfigError);
  GammaParams bad;
  bad.interp_points = 5;
  CHECK_THROWS_AS(gamma_eval(f, h, g, m, 0.0, 0, bad), ConfigError);
}

TEST_CASE("kernel cache round trip and corruption handling") {
  TempDir tmp;
  Eigen::MatrixXd K(3, 3);
  K << 1.0, -2.5, 1e-300, 3.25, std::numbers::pi, -0.0, 7.0, 8.0, 9.0;
  const fs::path file = cache_file(tmp.path, 11, 22, 0);
  CHECK(file != cache_file(tmp.path, 11, 23, 0));
  CHECK(file != cache_file(tmp.path, 12, 22, 0));
  write_kernel_cache(file, 11, 22, K);
  const auto back = read_kernel_cache(file, 11, 22);
  REQUIRE(back.has_value());
  CHECK(std::memcmp(back->data(), K.data(), sizeof(double) * 9) == 0);
  CHECK_FALSE(read_kernel_cache(file, 11, 99).has_value());
  CHECK_FALSE(read_kernel_cache(file, 98, 22).has_value());
  const CacheHeader h = read_cache_header(file);
  CHECK(h.version == kCacheVersion);
  CHECK(h.nodes == 3);

  {
    std::ifstream is(file, std::ios::binary);
    char magic[8];
    is.read(magic, 8);
    CHECK(std::string(magic, 8) == "BKUQKRN1");
  }
  CHECK(fs::file_size(file) == 8 + 4 + 8 + 8 + 8 + 9 * 8);

  fs::resize_file(file, fs::file_size(file) - 5);
  CHECK_THROWS_AS(read_kernel_cache(file, 11, 22), CacheError);
  CHECK_THROWS_AS(read_cache_header(file), CacheError);
  {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    os << "NOTACACHEFILE-----------------------------------";
  }
  CHECK_THROWS_AS(read_kernel_cache(file, 11, 22), CacheError);
}

TEST_CASE("operator factory reuses the disk cache") {
  TempDir tmp;
  const auto g = oracle::small_grid();
  Eigen::MatrixXd first;
  {
    OperatorFactory fac(g, {}, tmp.path);
    first = fac.raw_kernel(1, AssemblyPath::GradClosedForm);
  }
  const fs::path file =
      cache_file(tmp.path, g->hash(), fnv1a(unit_descriptor(1, AssemblyPath::GradClosedForm, {})), 0);
  REQUIRE(fs::exists(file));
  OperatorFactory again(g, {}, tmp.path);
  const Eigen::MatrixXd second = again.raw_kernel(1, AssemblyPath::GradClosedForm);
  CHECK(std::memcmp(first.data(), second.data(), sizeof(double) * first.size()) == 0);

  // a different grid keys a different file
  auto other = std::make_shared<const VelocityGrid>(build_grid(GridMode::Axisym2d, 6.0, {20, 12, 1}, 2.0));
  CHECK(cache_file(tmp.path, other->hash(), fnv1a(unit_descriptor(1, AssemblyPath::GradClosedForm, {})), 0) != file);
}

TEST_CASE("cubic angular factor: s^3 unit operator is half the s unit operator") {
  OperatorFactory& fac = oracle::small_factory();
  const Eigen::MatrixXd k1 = fac.raw_kernel(1, AssemblyPath::GradClosedForm);
  const Eigen::MatrixXd k3 = fac.raw_kernel(3, AssemblyPath::DirectQuadrature);
  CHECK((k3 - 0.5 * k1).cwiseAbs().maxCoeff() <= 1e-10 * k1.cwiseAbs().maxCoeff());
  CollisionModel c;
  c.family = KernelFamily::Cubic;
  c.eps = 0.4;
  const LinearOperator d1 = fac.assemble(c, 0.3, 1);
  const LinearOperator u = fac.assemble(CollisionModel{}, 0.0, 0);
  CHECK((d1.nu - 0.2 * u.nu).cwiseAbs().maxCoeff() <= 1e-10 * u.nu.cwiseAbs().maxCoeff());
  CHECK(fac.assemble(c, 0.3, 2).is_zero());
}

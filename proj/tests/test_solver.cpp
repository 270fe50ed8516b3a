#include "bkuq/decay_fit.hpp"
#include "bkuq/norms.hpp"
#include "bkuq/propagator.hpp"
#include "bkuq/radial.hpp"
#include "bkuq/solver.hpp"
#include "support.hpp"

#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <numbers>
#include <random>

using namespace bkuq;

namespace {

constexpr double kPi = std::numbers::pi;

// Hermite-Genocchi: f[a, b] = t int_0^1 exp(t (a + u (b - a))) du and the
// simplex integral for three points.
cplx hg2(cplx a, cplx b, double t) {
  const auto r = oracle::golub_welsch(40, 0.0, 1.0);
  cplx s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * std::exp(t * (a + r.x[i] * (b - a)));
  return t * s;
}

cplx hg3(cplx a, cplx b, cplx c, double t) {
  const auto r = oracle::golub_welsch(40, 0.0, 1.0);
  cplx s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    for (std::size_t j = 0; j < r.x.size(); ++j) {
      const double u = r.x[i], v = (1.0 - u) * r.x[j];
      s += r.w[i] * r.w[j] * (1.0 - u) * std::exp(t * (a + u * (b - a) + v * (c - a)));
    }
  return t * t * s;
}

// Van Loan: the augmented generator [[A, 0, 0], [D1, A, 0], [D2, 2 D1, A]].
std::vector<CVector> van_loan(const CMatrix& A, const std::vector<CMatrix>& D, const std::vector<CVector>& c,
                              double t) {
  const int n = static_cast<int>(A.rows()), S = static_cast<int>(D.size()) + 1;
  CMatrix G = CMatrix::Zero(S * n, S * n);
  for (int s = 0; s < S; ++s) {
    G.block(s * n, s * n, n, n) = A;
    if (s >= 1) G.block(s * n, (s - 1) * n, n, n) = (s == 2 ? 2.0 : 1.0) * D[0];
    if (s >= 2) G.block(s * n, (s - 2) * n, n, n) = D[1];
  }
  CVector x = CVector::Zero(S * n);
  for (int s = 0; s < S && s < static_cast<int>(c.size()); ++s) x.segment(s * n, n) = c[s];
  const CVector y = (G * t).exp() * x;
  std::vector<CVector> out;
  for (int s = 0; s < S; ++s) out.push_back(y.segment(s * n, n));
  return out;
}

CMatrix random_cmatrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMatrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = cplx(nd(rng), nd(rng));
  return M;
}

double rel(const CVector& a, const CVector& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

std::vector<LinearOperator> proportional_ops(double b1, int orders, double z = 0.0) {
  CollisionModel m;
  m.b1 = b1;
  std::vector<LinearOperator> ops;
  for (int k = 0; k <= orders; ++k) ops.push_back(oracle::small_factory().assemble(m, z, k));
  return ops;
}

} // namespace

TEST_CASE("divided differences of the exponential") {
  const double t = 3.0;
  const cplx a(-1.0, 2.0), b(-0.5, 0.0), c(-2.0, -1.0);
  CHECK(std::abs(divdiff_exp(a, b, t) - hg2(a, b, t)) <= 1e-12 * std::abs(hg2(a, b, t)));
  CHECK(std::abs(divdiff_exp(a, b, c, t) - hg3(a, b, c, t)) <= 1e-12 * std::abs(hg3(a, b, c, t)));
  for (double d : {3e-3, 1e-5, 1e-9, 0.0}) {
    const cplx b2 = a + cplx(d, 0.5 * d), c2 = a - cplx(0.3 * d, d);
    CHECK(std::abs(divdiff_exp(a, b2, t) - hg2(a, b2, t)) <= 1e-12 * std::abs(hg2(a, b2, t)));
    CHECK(std::abs(divdiff_exp(a, b2, c2, t) - hg3(a, b2, c2, t)) <= 1e-12 * std::abs(hg3(a, b2, c2, t)));
    CHECK(std::abs(divdiff_exp(a, b2, c, t) - hg3(a, b2, c, t)) <= 1e-12 * std::abs(hg3(a, b2, c, t)));
  }
  CHECK(std::abs(divdiff_exp(a, a, a, t) - 0.5 * t * t * std::exp(a * t)) <= 1e-13 * std::abs(std::exp(a * t)));
}

TEST_CASE("mode propagator matches the Van Loan block exponential with clustered eigenvalues") {
  std::mt19937_64 rng(21);
  const int n = 8;
  CVector lam(n);
  lam << cplx(-0.5, 1.0), cplx(-0.5 + 1e-4, 1.0), cplx(-0.5, 1.0 + 3e-3), cplx(-1.2, 0.0), cplx(-1.2, 1e-6),
      cplx(-0.01, -0.4), cplx(-3.0, 2.0), cplx(-0.02, -0.4);
  const CMatrix V = CMatrix::Identity(n, n) + 0.3 * random_cmatrix(n, rng);
  const CMatrix A = V * lam.asDiagonal() * V.inverse();
  const std::vector<CMatrix> D{0.4 * random_cmatrix(n, rng), 0.2 * random_cmatrix(n, rng)};
  const std::vector<CVector> c{CVector::Random(n), CVector::Random(n), CVector::Random(n)};
  const ModePropagator mp(A, D);
  CHECK_FALSE(mp.uses_fallback());
  for (double t : {0.3, 2.0, 7.0}) {
    const auto y = mp.propagate(c, t);
    const auto ref = van_loan(A, D, c, t);
    for (int s = 0; s < 3; ++s) CHECK(rel(y[s], ref[s]) <= 1e-9);
  }
}

TEST_CASE("ill-conditioned eigenvectors switch to the refined matrix exponential") {
  CMatrix A(3, 3);
  A << -1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0;
  const std::vector<CMatrix> D{CMatrix::Identity(3, 3) * 0.5};
  const ModePropagator mp(A, D);
  CHECK(mp.uses_fallback());
  const std::vector<CVector> c{CVector::Ones(3), CVector::Zero(3)};
  const auto y = mp.propagate(c, 2.5);
  const auto ref = van_loan(A, D, c, 2.5);
  for (int s = 0; s < 2; ++s) CHECK(rel(y[s], ref[s]) <= 1e-8);
  CHECK(rel(expm_refined(A, 2.5).col(0), (A * 2.5).exp().col(0)) <= 1e-10);
}

TEST_CASE("operator modes: Van Loan, initial time, semigroup law, energy decay") {
  const auto ops = proportional_ops(0.1, 1);
  const VelocityGrid& g = *ops[0].grid;
  const MacroBasis& mb = oracle::small_factory().macro();
  const Eigen::VectorXd h = make_initial_data(g, mb, InitKind::Macro, 0).h[0];
  const CVector u0 = to_sym(g, h).cast<cplx>();
  const double eta = 0.7;
  const ModePropagator mp = make_mode(ops, eta);

  CMatrix A = ops[0].symmetric().cast<cplx>();
  for (int i = 0; i < g.size(); ++i) A(i, i) += cplx(0.0, -eta * g.xi_z(i));
  const std::vector<CMatrix> D{ops[1].symmetric().cast<cplx>()};
  const auto ref = van_loan(A, D, {u0, CVector::Zero(g.size())}, 1.5);
  const auto y = mp.propagate({u0, CVector::Zero(g.size())}, 1.5);
  CHECK(rel(y[0], ref[0]) <= 1e-8);
  CHECK(rel(y[1], ref[1]) <= 1e-8);

  const auto y0 = mp.propagate({u0, CVector::Ones(g.size())}, 0.0);
  CHECK((y0[0] - u0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((y0[1] - CVector::Ones(g.size())).cwiseAbs().maxCoeff() == 0.0);

  const ModePropagator m0 = make_mode({ops[0]}, eta);
  const CVector whole = m0.propagate({u0}, 5.0)[0];
  const CVector split = m0.propagate({m0.propagate({u0}, 2.0)[0]}, 3.0)[0];
  CHECK(rel(split, whole) <= 1e-9);

  for (double e : {0.0, 0.3, 2.0}) {
    const ModePropagator me = make_mode({ops[0]}, e);
    double prev = u0.norm();
    for (double t : log_time_grid(0.1, 50.0, 20)) {
      const double nrm = me.propagate({u0}, t)[0].norm();
      CHECK(nrm <= prev + 1e-10 * u0.norm());
      prev = nrm;
    }
  }
}

TEST_CASE("zero-wavenumber moments are conserved") {
  const auto ops = proportional_ops(0.1, 0);
  const VelocityGrid& g = *ops[0].grid;
  const MacroBasis& mb = oracle::small_factory().macro();
  std::mt19937_64 rng(4);
  const CVector u0 = to_sym(g, oracle::smooth_field(g, rng)).cast<cplx>();
  const ModePropagator mp = make_mode(ops, 0.0);
  for (int j = 0; j < mb.count(); ++j) {
    const CVector chi = to_sym(g, mb.chi.col(j)).cast<cplx>();
    const cplx m0 = chi.dot(u0);
    for (double t : {0.5, 5.0, 80.0}) CHECK(std::abs(chi.dot(mp.propagate({u0}, t)[0]) - m0) <= 1e-8 * u0.norm());
  }
}

TEST_CASE("proportional sensitivity identity") {
  const LinearOperator unit = proportional_ops(0.0, 0)[0];
  const VelocityGrid& g = *unit.grid;
  std::mt19937_64 rng(4);
  const Eigen::VectorXd h = oracle::smooth_field(g, rng);
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
  const IdentityCheck at0 = sensitivity_identity(unit, 0.1, 0.0, 0.0, h, times);
  CHECK(at0.literal <= 1e-8);
  CHECK(at0.corrected <= 1e-8);
  const IdentityCheck pos = sensitivity_identity(unit, 0.1, 0.2, 0.5, h, times);
  CHECK(pos.corrected <= 1e-8);
  // transport and collision do not commute, so the literal form fails here
  CHECK(pos.literal > 1e-4);
}

TEST_CASE("central-difference check is second order in dz") {
  OperatorFactory& fac = oracle::small_factory();
  CollisionModel m;
  m.b1 = 0.1;
  const InitialData init = make_initial_data(fac.grid(), fac.macro(), InitKind::Macro, 1);
  const RadialGrid rg = uniform_radial_grid(6.0, 3, 8);
  const std::vector<double> times{0.0, 0.5, 2.0, 6.0};
  const FdCheck a = fd_sensitivity_check(fac, m, 0.0, 1e-3, init, rg, times);
  CHECK(a.max_rel <= 1e-4);
  const FdCheck coarse = fd_sensitivity_check(fac, m, 0.0, 8e-3, init, rg, times);
  const FdCheck b = fd_sensitivity_check(fac, m, 0.0, 4e-3, init, rg, times);
  CHECK(coarse.max_rel / b.max_rel == doctest::Approx(4.0).epsilon(0.1));
  m.b1 = 0.0;
  const FdCheck z = fd_sensitivity_check(fac, m, 0.0, 1e-3, init, rg, times);
  CHECK(z.max_abs <= 1e-14);
  m.b1 = 0.1;
  CHECK_THROWS_AS(fd_sensitivity_check(fac, m, 0.9995, 1e-3, init, rg, times), ConfigError);
}

TEST_CASE("initial data") {
  const VelocityGrid& g = oracle::small_factory().grid();
  const MacroBasis& mb = oracle::small_factory().macro();
  const InitialData micro = make_initial_data(g, mb, InitKind::Micro, 2);
  CHECK(micro.micro);
  REQUIRE(micro.h.size() == 3);
  CHECK(std::sqrt(inner(g, macro_project(micro.h[0], mb, g, MacroPart::P0),
                        macro_project(micro.h[0], mb, g, MacroPart::P0))) <= 1e-10);
  CHECK(micro.h[1].cwiseAbs().maxCoeff() == 0.0);
  CHECK(micro.phi(0.0) == 1.0);
  CHECK(micro.phi(2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK_THROWS_AS(parse_init_kind("thermal"), ConfigError);
}

TEST_CASE("radial transforms of a Gaussian") {
  const RadialGrid rg = uniform_radial_grid(10.0, 10, 20);
  CVector v(rg.size()), w(rg.size());
  for (std::size_t q = 0; q < rg.size(); ++q) {
    const double r = rg.rule.x[q];
    v(q) = std::exp(-0.5 * r * r);
    w(q) = std::exp(-0.5 * r * r) * (1.0 + r * r);
  }
  CHECK(plancherel_l2sq(rg, v) == doctest::Approx(1.0 / (8.0 * std::pow(kPi, 1.5))).epsilon(1e-10));
  for (double x : {0.0, 0.5, 2.0, 4.0})
    CHECK(std::abs(radial_inverse(rg, v, x) - std::pow(2.0 * kPi, -1.5) * std::exp(-0.5 * x * x)) <= 1e-12);

  // Parseval: L2 of the inverted field on a fine x grid
  const auto rx = oracle::golub_welsch(120, 0.0, 14.0);
  double direct = 0.0;
  for (std::size_t i = 0; i < rx.x.size(); ++i)
    direct += rx.w[i] * 4.0 * kPi * rx.x[i] * rx.x[i] * std::norm(radial_inverse(rg, w, rx.x[i]));
  CHECK(std::abs(direct - plancherel_l2sq(rg, w)) <= 1e-2 * plancherel_l2sq(rg, w));
}

TEST_CASE("radial grid design") {
  const RadialGrid rg = design_radial_grid(400.0);
  CHECK(rg.size() >= 300);
  CHECK(rg.size() <= 1000);
  CHECK(rg.edges.front() == 0.0);
  CHECK(rg.edges.back() == doctest::Approx(10.0));
  CHECK(nodes_below(rg, 1.0 / std::sqrt(400.0)) >= 5);
  for (std::size_t q = 1; q < rg.size(); ++q) CHECK(rg.rule.x[q] > rg.rule.x[q - 1]);
}

TEST_CASE("weighted norms at t = 0 match the closed form") {
  const auto ops = proportional_ops(0.1, 0);
  const VelocityGrid& g = *ops[0].grid;
  const InitialData init = make_initial_data(g, oracle::small_factory().macro(), InitKind::Macro, 0);
  const RadialGrid rg = uniform_radial_grid(10.0, 10, 20);
  const NormSeries ns = evolve_norms(ops, init, rg, {0.0}, 2.0, true);
  double peak = 0.0;
  for (int i = 0; i < g.size(); ++i)
    peak = std::max(peak, (1.0 + g.pts.row(i).squaredNorm()) * std::abs(init.h[0](i)));
  CHECK(ns.l2x[0][0] == doctest::Approx(peak / std::sqrt(8.0 * std::pow(kPi, 1.5))).epsilon(1e-6));
  CHECK(ns.linfx[0][0] == doctest::Approx(peak * std::pow(2.0 * kPi, -1.5)).epsilon(1e-6));

  InitialData zero = init;
  zero.h[0].setZero();
  const NormSeries nz = evolve_norms(ops, zero, rg, {0.0, 1.0}, 2.0, true);
  CHECK(nz.l2x[0][1] == 0.0);
  CHECK(nz.linfx[0][1] == 0.0);

  try {
    evolve_norms(ops, init, uniform_radial_grid(2.0, 2, 10), {0.0}, 2.0, false);
    FAIL("aliasing guard expected");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("increase R_η") != std::string::npos);
  }
  CHECK_THROWS_AS(evolve_norms(ops, init, rg, {0.0, 2.0, 1.0}, 2.0, false), ConfigError);
}

TEST_CASE("decay fit") {
  const std::vector<double> t = log_time_grid(0.5, 400.0, 60);
  CHECK(t.size() == 61);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == doctest::Approx(0.5));
  CHECK(t.back() == doctest::Approx(400.0));
  std::vector<double> n, lg, grow;
  for (double x : t) {
    n.push_back(2.0 * std::pow(1.0 + x, -0.75));
    lg.push_back(std::log(1.0 + x) * std::pow(1.0 + x, -0.75) + 1e-3);
    grow.push_back(std::pow(1.0 + x, -0.25));
  }
  const DecayFit f = decay_fit(t, n, 20.0, 300.0);
  CHECK(f.exponent == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(f.log_c == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(f.residual <= 1e-12);
  CHECK(f.samples >= 10);
  CHECK(decay_fit(t, lg, 20.0, 300.0, true, 2).bounded);
  CHECK_FALSE(decay_fit(t, grow, 20.0, 300.0, true, 2).bounded);
  CHECK_THROWS_AS(decay_fit(t, n, 200.0, 300.0), ConfigError);
  std::vector<double> bad = n;
  bad[45] = 0.0;
  CHECK_THROWS_AS(decay_fit(t, bad, 20.0, 300.0), ConfigError);
}

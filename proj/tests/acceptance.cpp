// Acceptance runner: one PASS/FAIL line per criterion followed by indented
// detail lines. Optional arguments select criteria by number.
#include "bkuq/decay_fit.hpp"
#include "bkuq/gpc_basis.hpp"
#include "bkuq/gpc_sg.hpp"
#include "bkuq/linear_operator.hpp"
#include "bkuq/properties.hpp"
#include "bkuq/radial.hpp"
#include "bkuq/solver.hpp"
#include "bkuq/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace bkuq;

namespace {

using Clock = std::chrono::steady_clock;

struct Report {
  bool pass = true;
  std::vector<std::string> lines;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  void note(const std::string& what) { lines.push_back("      " + what); }
};

std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

std::shared_ptr<VelocityGrid> grid(int nr, int nz) {
  return std::make_shared<VelocityGrid>(build_grid(GridMode::Axisym2d, 6.0, {nr, nz, 1}, 2.0));
}

OperatorFactory& default_factory() {
  static OperatorFactory f(grid(40, 20));
  return f;
}

OperatorFactory& decay_factory() {
  static OperatorFactory f(grid(20, 10));
  return f;
}

const LinearOperator& hard_sphere() {
  static const LinearOperator L = default_factory().assemble(CollisionModel{}, 0.0, 0);
  return L;
}

double nu1_est() {
  static const double v = spectral_gap_estimate(hard_sphere(), default_factory().macro(), 100, 7).exact;
  return v;
}

const std::vector<double>& decay_times() {
  static const std::vector<double> t = log_time_grid(0.5, 400.0, 60);
  return t;
}

const RadialGrid& decay_radial() {
  static const RadialGrid rg = design_radial_grid(400.0);
  return rg;
}

NormSeries decay_run(const CollisionModel& m, InitKind kind, int orders) {
  OperatorFactory& fac = decay_factory();
  std::vector<LinearOperator> ops;
  for (int k = 0; k <= orders; ++k) ops.push_back(fac.assemble(m, 0.0, k));
  const InitialData init = make_initial_data(fac.grid(), fac.macro(), kind, orders);
  return evolve_norms(ops, init, decay_radial(), decay_times(), 2.0, true);
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

void runtime(Report& r, Clock::time_point t0, double limit_min) {
  const double min = std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;
  if (limit_min > 0.0)
    r.check(min <= limit_min, "runtime " + num(min, 3) + " min (limit " + num(limit_min) + " min)");
  else
    r.note("runtime " + num(min, 3) + " min");
}

Report dispersion() {
  const auto t0 = Clock::now();
  Report r;
  std::vector<double> etas;
  for (int i = 0; i < 15; ++i) etas.push_back(0.02 + (0.3 - 0.02) * i / 14.0);
  const BranchTrackResult bt = branch_track(hard_sphere(), default_factory().macro(), etas);
  const double a0_ref = std::sqrt(5.0 / 3.0);
  r.check(std::abs(bt.fits[0].a - a0_ref) <= 0.02 * a0_ref,
          "a_0 = " + num(bt.fits[0].a) + " vs sqrt(5/3) = " + num(a0_ref) + " (rel tol 2%)");
  r.check(std::abs(bt.fits[1].a + bt.fits[0].a) <= 1e-6,
          "|a_1 + a_0| = " + num(std::abs(bt.fits[1].a + bt.fits[0].a)) + " (tol 1e-6)");
  r.check(std::abs(bt.fits[2].a) <= 0.02, "a_2 = " + num(bt.fits[2].a) + " (tol 0.02)");
  for (const auto& f : bt.fits)
    if (f.available) r.check(f.A > 0.0, "A_" + std::to_string(f.branch) + " = " + num(f.A) + " > 0");
  runtime(r, t0, 5.0);
  return r;
}

Report spectral_gap() {
  const auto t0 = Clock::now();
  Report r;
  const GapCertificate c = gap_certify(hard_sphere(), default_factory().macro().count(), 0.5, 10.0, 100, {1.0}, false);
  r.check(c.tau > 0.0, "tau = " + num(c.tau) + " over eta in [0, 10], 100 samples (worst eta " + num(c.worst_eta) + ")");
  const double v1 = nu1_est();
  r.check(v1 > 0.0, "nu1_est = " + num(v1) + " on 40x20");
  r.check(c.nonfluid_max_at_zero <= -v1 * (1.0 - 1e-10),
          "non-fluid max Re at eta = 0: " + num(c.nonfluid_max_at_zero) + " <= -nu1_est");
  OperatorFactory fine(grid(60, 30));
  const double v1f = spectral_gap_estimate(fine.assemble(CollisionModel{}, 0.0, 0), fine.macro(), 100, 7).exact;
  r.check(std::abs(v1f - v1) <= 0.1 * v1, "refined 60x30 nu1_est = " + num(v1f) + " (rel change " +
                                              num(std::abs(v1f - v1) / v1, 3) + ", tol 0.1)");
  runtime(r, t0, 10.0);
  return r;
}

Report linear_decay() {
  const auto t0 = Clock::now();
  Report r;
  const NormSeries mac = decay_run(CollisionModel{}, InitKind::Macro, 0);
  const NormSeries mic = decay_run(CollisionModel{}, InitKind::Micro, 0);
  const DecayFit fm = decay_fit(decay_times(), mac.l2x[0], 20.0, 300.0);
  const DecayFit fu = decay_fit(decay_times(), mic.l2x[0], 20.0, 300.0);
  const DecayFit fi = decay_fit(decay_times(), mac.linfx[0], 20.0, 300.0);
  r.check(within(fm.exponent, -0.75, 0.10), "macro L2x exponent " + num(fm.exponent) + " (target -0.75 +- 0.10)");
  r.check(within(fu.exponent, -1.25, 0.10), "micro L2x exponent " + num(fu.exponent) + " (target -1.25 +- 0.10)");
  r.check(within(fi.exponent, -1.5, 0.15), "macro Linfx exponent " + num(fi.exponent) + " (target -1.5 +- 0.15)");
  r.note("fit window [20, 300], " + std::to_string(fm.samples) + " samples, " +
         std::to_string(decay_radial().size()) + " radial nodes, 20x10 grid");
  runtime(r, t0, 15.0);
  return r;
}

CollisionModel proportional_model() {
  CollisionModel m;
  m.b1 = 0.1;
  return m;
}

CollisionModel cubic_model() {
  CollisionModel m;
  m.family = KernelFamily::Cubic;
  m.eps = 0.2;
  return m;
}

const NormSeries& cubic_order2() {
  static const NormSeries ns = decay_run(cubic_model(), InitKind::Macro, 2);
  return ns;
}

void fd_check(Report& r, const CollisionModel& m, const std::string& name) {
  OperatorFactory& fac = decay_factory();
  const InitialData init = make_initial_data(fac.grid(), fac.macro(), InitKind::Macro, 1);
  const RadialGrid rg = uniform_radial_grid(6.0, 3, 8);
  const std::vector<double> times{0.0, 0.5, 2.0, 6.0};
  const FdCheck a = fd_sensitivity_check(fac, m, 0.0, 8e-3, init, rg, times);
  const FdCheck b = fd_sensitivity_check(fac, m, 0.0, 4e-3, init, rg, times);
  const FdCheck spec_dz = fd_sensitivity_check(fac, m, 0.0, 1e-3, init, rg, times);
  r.check(spec_dz.max_rel <= 1e-4, name + " FD discrepancy at dz = 1e-3: " + num(spec_dz.max_rel, 3) + " (tol 1e-4)");
  const double ratio = a.max_rel / b.max_rel;
  r.check(within(ratio, 4.0, 0.4), name + " FD error ratio for dz 8e-3 -> 4e-3: " + num(ratio, 4) +
                                       " (second order: 4 +- 10%), rel error at 4e-3 " + num(b.max_rel, 3));
}

Report sensitivity() {
  const auto t0 = Clock::now();
  Report r;
  const NormSeries prop = decay_run(proportional_model(), InitKind::Macro, 1);
  const NormSeries& cub = cubic_order2();
  for (const auto& [name, ns] : std::vector<std::pair<std::string, const NormSeries*>>{{"proportional", &prop},
                                                                                       {"cubic", &cub}}) {
    const DecayFit f2 = decay_fit(decay_times(), ns->l2x[1], 20.0, 300.0);
    const DecayFit fi = decay_fit(decay_times(), ns->linfx[1], 20.0, 300.0);
    r.check(within(f2.exponent, -0.75, 0.15), name + " order-1 L2x exponent " + num(f2.exponent) + " (-0.75 +- 0.15)");
    r.check(within(fi.exponent, -1.5, 0.2), name + " order-1 Linfx exponent " + num(fi.exponent) + " (-1.5 +- 0.2)");
  }

  OperatorFactory& fac = decay_factory();
  const LinearOperator unit = fac.assemble(CollisionModel{}, 0.0, 0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  Eigen::VectorXd h(fac.grid().size());
  const Eigen::MatrixXd& P = fac.grid().pts;
  const double c1 = nd(rng), c2 = nd(rng), c3 = nd(rng);
  for (int i = 0; i < h.size(); ++i)
    h(i) = (1.0 + c1 * P(i, 2) + c2 * P(i, 0) * P(i, 0) + c3 * P(i, 2) * P(i, 2)) *
           sqrt_maxwellian(P.row(i).squaredNorm());
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0};
  const IdentityCheck zero = sensitivity_identity(unit, 0.1, 0.0, 0.0, h, times);
  const IdentityCheck pos = sensitivity_identity(unit, 0.1, 0.0, 0.5, h, times);
  r.check(zero.literal <= 1e-8, "identity d_z g = t b1 L g at eta = 0: rel residual " + num(zero.literal, 3) + " (tol 1e-8)");
  r.check(pos.corrected <= 1e-8,
          "transport-corrected identity at eta = 0.5: rel residual " + num(pos.corrected, 3) + " (tol 1e-8)");
  r.check(pos.literal <= 1e-8, "identity d_z g = t b1 L g at eta = 0.5: rel residual " + num(pos.literal, 3) +
                                   " (tol 1e-8; transport and L do not commute)");
  fd_check(r, proportional_model(), "proportional");
  fd_check(r, cubic_model(), "cubic");
  runtime(r, t0, 0.0);
  return r;
}

Report log_bound() {
  const auto t0 = Clock::now();
  Report r;
  const DecayFit f = decay_fit(decay_times(), cubic_order2().l2x[2], 20.0, 300.0, true, 2);
  r.check(f.bounded, "cubic order 2: max of |d_z^2 g|(1+t)^(3/4)/ln(1+t) second half " + num(f.second_half_max, 4) +
                         " vs first half " + num(f.first_half_max, 4) + " (ratio " +
                         num(f.second_half_max / f.first_half_max, 4) + ", limit 1.2)");
  r.note("order-2 L2x exponent " + num(f.exponent) + "; trajectory shared with criterion 4 and timed there");
  runtime(r, t0, 0.0);
  return r;
}

Report coupled_gap() {
  const auto t0 = Clock::now();
  Report r;
  const double v1 = nu1_est();
  const MacroBasis& mb = default_factory().macro();
  for (int K : {2, 4, 6, 8}) {
    const GpcBasis b = make_basis(BasisFamily::UniformLegendre, K, min_quadrature_order(K));
    const ChaosTensors ct = make_chaos_tensors(b, ZPolynomial{{1.0, 0.1}}, 2.0);
    const CoupledGapResult g = coupled_gap_estimate(ct.B, ct.W, 2.0, 0.1, hard_sphere(), mb, v1);
    r.check(g.bound > 0.0 && g.bound >= 0.5 * (1.0 - 0.2) * v1,
            "K = " + std::to_string(K) + ": bound " + num(g.bound) + " >= 0.5 (1 - 2 gamma) nu1 = " + num(0.4 * v1));
  }
  const GpcBasis b = make_basis(BasisFamily::UniformLegendre, 4, min_quadrature_order(4));
  auto rejects = [&](double gamma) {
    try {
      const ChaosTensors ct = make_chaos_tensors(b, ZPolynomial{{1.0, gamma}}, 2.0);
      coupled_gap_estimate(ct.B, ct.W, 2.0, gamma, hard_sphere(), mb, v1);
      return false;
    } catch (const ConfigError&) {
      return true;
    }
  };
  r.check(rejects(0.2) && rejects(0.25) && !rejects(0.1999),
          "guard rejects gamma >= 1/(2^m + 1) = 0.2 exactly (0.2 and 0.25 rejected, 0.1999 accepted)");
  runtime(r, t0, 0.0);
  return r;
}

Report sg_uniform() {
  const auto t0 = Clock::now();
  Report r;
  OperatorFactory& fac = decay_factory();
  const CollisionModel model = proportional_model();
  const LinearOperator unit = fac.assemble(model, 0.0, 0);
  const Eigen::VectorXd h = make_initial_data(fac.grid(), fac.macro(), InitKind::Macro, 0).h[0];
  std::vector<double> consts;
  for (int K : {2, 4, 8}) {
    const GpcBasis basis = make_basis(BasisFamily::UniformLegendre, K, min_quadrature_order(K));
    const SgOperator sg = assemble_sg(unit, make_chaos_tensors(basis, model.c_poly(), 2.0), model);
    SgState st;
    st.F = Eigen::MatrixXd::Zero(fac.grid().size(), K);
    st.F.col(0) = h;
    RadialDesign rd;
    rd.damping = 0.2 * sg.mu.minCoeff();
    SgEvolveOptions opt;
    const SgEvolution ev = evolve_sg(sg, st, design_radial_grid(400.0, rd), decay_times(), opt);
    const DecayFit f = decay_fit(decay_times(), ev.weighted_l2x, 20.0, 300.0);
    consts.push_back(std::exp(f.log_c));
    r.check(within(f.exponent, -0.75, 0.1), "K = " + std::to_string(K) + ": weighted exponent " + num(f.exponent) +
                                                " (-0.75 +- 0.1), C = " + num(consts.back()));
  }
  const auto [lo, hi] = std::minmax_element(consts.begin(), consts.end());
  r.check(*hi / *lo - 1.0 <= 0.15, "fitted constants vary by " + num(100.0 * (*hi / *lo - 1.0), 3) + "% (limit 15%)");
  runtime(r, t0, 0.0);
  return r;
}

Report gpc_accuracy() {
  const auto t0 = Clock::now();
  Report r;
  OperatorFactory& fac = decay_factory();
  const CollisionModel model = proportional_model();
  const Eigen::VectorXd h = make_initial_data(fac.grid(), fac.macro(), InitKind::Macro, 0).h[0];
  const std::vector<ZProfile> families{
      [h](double z) -> Eigen::VectorXd { return h * std::exp(0.5 * z); },
      [h](double z) -> Eigen::VectorXd { return h * ((z - 0.3) * std::abs(z - 0.3)); },
  };
  const std::vector<int> Ks{2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0};
  const RadialGrid rg = uniform_radial_grid(6.0, 6, 12);
  const CollocationReference ref = collocation_reference(fac, model, 32, 8, families, rg, times);
  const LinearOperator unit = fac.assemble(CollisionModel{}, 0.0, 0);
  const GpcErrorCurve cur = gpc_error_curve(Ks, ref, unit, model, families, 2.0, false);
  std::vector<std::vector<double>> worst(2, std::vector<double>(Ks.size(), 0.0));
  for (int f = 0; f < 2; ++f)
    for (std::size_t k = 0; k < Ks.size(); ++k)
      for (double e : cur.err_l2x[f][k]) worst[f][k] = std::max(worst[f][k], e);
  const ConvergenceFit an = fit_convergence(Ks, worst[0]);
  const ConvergenceFit lim = fit_convergence(Ks, worst[1]);
  std::string errs;
  for (double e : worst[0]) errs += " " + num(e, 3);
  r.note("analytic data, max_t error for K = 2..8:" + errs);
  r.check(an.strictly_decreasing, "analytic data: error strictly decreasing in K");
  r.check(an.spectral_rms < an.algebraic_rms, "analytic data: log-error vs K rms " + num(an.spectral_rms, 3) +
                                                  " < log-log rms " + num(an.algebraic_rms, 3));
  errs.clear();
  for (double e : worst[1]) errs += " " + num(e, 3);
  r.note("two-derivative data, max_t error for K = 2..8:" + errs);
  r.check(lim.algebraic_slope <= -1.6, "two-derivative data: log-log slope " + num(lim.algebraic_slope, 4) +
                                           " <= -1.6 (target -2)");
  runtime(r, t0, 30.0);
  return r;
}

Report properties() {
  const auto t0 = Clock::now();
  Report r;
  for (const auto& c : run_property_suite())
    r.check(c.pass, c.name + ": " + num(c.value, 3) + " (tol " + num(c.tolerance, 3) + ")");
  runtime(r, t0, 20.0);
  return r;
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Report()>>> criteria{
      {"dispersion coefficients of the acoustic and diffusive branches", dispersion},
      {"spectral gap certificate and nu1 estimate", spectral_gap},
      {"linear decay rates for macro and micro data", linear_decay},
      {"first-order sensitivity decay, closed-form identity, FD cross-check", sensitivity},
      {"log-corrected bound of the second z-derivative (cubic family)", log_bound},
      {"coupled gap estimate of the Galerkin system", coupled_gap},
      {"K-uniform weighted decay of the Galerkin solution", sg_uniform},
      {"gPC spectral and algebraic accuracy", gpc_accuracy},
      {"property suites", properties},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Report rep;
    try {
      rep = criteria[i].second();
    } catch (const std::exception& e) {
      rep.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (rep.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[i].first << "\n";
    for (const auto& l : rep.lines) std::cout << "        " << l << "\n";
    std::cout.flush();
    if (!rep.pass) ++failed;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all passed")
            << "\n";
  return failed ? 1 : 0;
}

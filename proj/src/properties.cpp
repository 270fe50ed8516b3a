#include "bkuq/properties.hpp"

#include "bkuq/gpc_sg.hpp"
#include "bkuq/linear_operator.hpp"
#include "bkuq/norms.hpp"
#include "bkuq/outputs.hpp"
#include "bkuq/propagator.hpp"
#include "bkuq/quadrature.hpp"
#include "bkuq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bkuq {

namespace {

PropertyCheck check(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

// Polynomial of degree <= 2 with random coefficients times sqrt(M).
Eigen::VectorXd smooth_field(const VelocityGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  double c[10];
  for (double& v : c) v = nd(rng);
  Eigen::VectorXd f(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.pts(i, 0), y = g.pts(i, 1), z = g.pts(i, 2);
    const double p = c[0] + c[1] * x + c[2] * y + c[3] * z +
                     0.3 * (c[4] * x * x + c[5] * y * y + c[6] * z * z + c[7] * x * y + c[8] * y * z + c[9] * x * z);
    f(i) = p * sqrt_maxwellian(x * x + y * y + z * z);
  }
  return f;
}

double wnorm(const VelocityGrid& g, const Eigen::VectorXd& f) { return std::sqrt(inner(g, f, f)); }

Eigen::VectorXd xi_z_vector(const VelocityGrid& g) {
  Eigen::VectorXd v(g.size());
  for (int i = 0; i < g.size(); ++i) v(i) = g.xi_z(i);
  return v;
}

} // namespace

std::vector<PropertyCheck> run_property_suite(const PropertySuiteOptions& opt) {
  std::vector<PropertyCheck> out;
  std::mt19937_64 rng(opt.seed);

  auto grid = std::make_shared<VelocityGrid>(build_grid(GridMode::Axisym2d, opt.xi_max, opt.axisym_res, opt.beta));
  const VelocityGrid& g = *grid;
  OperatorFactory fac(grid, opt.assembly);
  const MacroBasis& mb = fac.macro();
  CollisionModel model;
  const LinearOperator L = fac.assemble(model, 0.0, 0);

  {
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      const Eigen::VectorXd f = smooth_field(g, rng), h = smooth_field(g, rng);
      const double d = std::abs(inner(g, L.apply(f), h) - inner(g, f, L.apply(h)));
      worst = std::max(worst, d / (wnorm(g, f) * wnorm(g, h)));
    }
    out.push_back(check("self_adjoint", worst, 1e-10));
  }
  {
    double worst = 0.0;
    for (int j = 0; j < mb.count(); ++j) worst = std::max(worst, wnorm(g, L.apply(mb.chi.col(j))));
    out.push_back(check("null_space", worst, kNullTol));
  }
  {
    double worst = -1e300;
    for (int s = 0; s < 20; ++s) {
      const Eigen::VectorXd f = smooth_field(g, rng);
      worst = std::max(worst, inner(g, L.apply(f), f) / inner(g, f, f));
    }
    out.push_back(check("dissipative", std::max(worst, 0.0), 1e-10));
  }
  {
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      const Eigen::VectorXd f = smooth_field(g, rng);
      const Eigen::VectorXd p0 = macro_project(f, mb, g, MacroPart::P0);
      const Eigen::VectorXd p1 = macro_project(f, mb, g, MacroPart::P1);
      const double nf = wnorm(g, f);
      worst = std::max(worst, wnorm(g, macro_project(p0, mb, g, MacroPart::P0) - p0) / nf);
      worst = std::max(worst, wnorm(g, macro_project(p1, mb, g, MacroPart::P0)) / nf);
      worst = std::max(worst, wnorm(g, p0 + p1 - f) / nf);
    }
    out.push_back(check("p0_p1_algebra", worst, 1e-8));
  }
  if (opt.include_gamma) {
    const VelocityGrid g3 =
        build_grid(GridMode::Full3d, opt.xi_max, {opt.full3d_n, opt.full3d_n, opt.full3d_n}, opt.beta);
    const MacroBasis mb3 = macro_basis(g3);
    const Eigen::VectorXd h = smooth_field(g3, rng), u = smooth_field(g3, rng);
    const Eigen::VectorXd G = gamma_eval(h, u, g3, model, 0.0, 0, opt.gamma);
    const Eigen::VectorXd P0 = macro_project(G, mb3, g3, MacroPart::P0);
    out.push_back(check("gamma_p0_ratio", wnorm(g3, P0) / wnorm(g3, G), 5e-2));
  }
  {
    double sym = 0.0, sel = 0.0;
    const ZPolynomial c{{1.0, 0.3}};
    for (BasisFamily fam : {BasisFamily::UniformLegendre, BasisFamily::Chebyshev}) {
      const int K = 6;
      const GpcBasis basis = make_basis(fam, K, min_quadrature_order(K, 1));
      const ChaosTensors ct = make_chaos_tensors(basis, c, 2.0);
      sym = std::max(sym, (ct.S - ct.S.transpose()).cwiseAbs().maxCoeff());
      // independent check of the masked entries with a larger rule
      const GpcBasis fine = make_basis(fam, K, 3 * K + 4);
      for (int k = 0; k < K; ++k)
        for (int i = 0; i < K; ++i)
          for (int j = 0; j < K; ++j) {
            const double v = ct.sp(k, i, j);
            sym = std::max({sym, std::abs(v - ct.sp(i, k, j)), std::abs(v - ct.sp(j, i, k)),
                            std::abs(v - ct.sp(k, j, i))});
            if (!ct.chi(k, i, j)) {
              double q = 0.0;
              for (int n = 0; n < fine.quad_order(); ++n)
                q += fine.quad.w[n] * c(fine.quad.x[n]) * fine.psi_at_nodes(n, k) * fine.psi_at_nodes(n, i) *
                     fine.psi_at_nodes(n, j);
              sel = std::max({sel, std::abs(q), std::abs(v)});
            }
          }
    }
    out.push_back(check("chaos_tensor_symmetry", sym, 1e-12));
    out.push_back(check("chaos_selection_rules", sel, 1e-12));
  }
  {
    auto g24 = std::make_shared<VelocityGrid>(build_grid(GridMode::Axisym2d, opt.xi_max, opt.crossval_res, opt.beta));
    OperatorFactory f24(g24, opt.assembly);
    const Eigen::MatrixXd Kg = f24.raw_kernel(1, AssemblyPath::GradClosedForm);
    const Eigen::MatrixXd Kd = f24.raw_kernel(1, AssemblyPath::DirectQuadrature);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      const Eigen::VectorXd f = smooth_field(*g24, rng);
      const Eigen::VectorXd a = Kg * f, b = Kd * f;
      worst = std::max(worst, wnorm(*g24, a - b) / wnorm(*g24, a));
    }
    out.push_back(check("grad_vs_direct_kernel", worst, 1e-3));
  }
  const Eigen::MatrixXd S = L.symmetric();
  const Eigen::VectorXd xz = xi_z_vector(g);
  {
    const ModePropagator mp(S, xz, 0.7, 1.0, {});
    const CVector c = to_sym(g, smooth_field(g, rng)).cast<cplx>();
    const CVector direct = mp.propagate({c}, 2.1)[0];
    const CVector split = mp.propagate({mp.propagate({c}, 0.8)[0]}, 1.3)[0];
    out.push_back(check("semigroup_law", (direct - split).norm() / direct.norm(), 1e-10));
  }
  {
    const ModePropagator mp(S, xz, 0.0, 1.0, {});
    const Eigen::VectorXd f0 = smooth_field(g, rng);
    const CVector c = to_sym(g, f0).cast<cplx>();
    const Eigen::VectorXd m0 = macro_project(f0, mb, g, MacroPart::P0);
    double worst = 0.0;
    for (double t : {0.5, 3.0, 20.0}) {
      const Eigen::VectorXd ft = from_sym(g, mp.propagate({c}, t)[0].real());
      worst = std::max(worst, wnorm(g, macro_project(ft, mb, g, MacroPart::P0) - m0) / wnorm(g, m0));
    }
    out.push_back(check("zero_wavenumber_moments", worst, 1e-10));
  }
  {
    const RadialGrid rg = uniform_radial_grid(12.0, 12, 16);
    CVector v(static_cast<Eigen::Index>(rg.size()));
    for (std::size_t q = 0; q < rg.size(); ++q) {
      const double r = rg.rule.x[q];
      v(static_cast<Eigen::Index>(q)) = std::exp(-0.5 * r * r) * cplx(1.0 + 0.3 * r * r, 0.2 * r);
    }
    const double fourier = plancherel_l2sq(rg, v);
    const Rule1D xr = composite_gauss([] {
      std::vector<double> e;
      for (int k = 0; k <= 40; ++k) e.push_back(0.75 * k);
      return e;
    }(), 12);
    double phys = 0.0;
    for (std::size_t i = 0; i < xr.size(); ++i)
      phys += xr.w[i] * 4.0 * std::numbers::pi * xr.x[i] * xr.x[i] * std::norm(radial_inverse(rg, v, xr.x[i]));
    out.push_back(check("plancherel", std::abs(phys - fourier) / fourier, 1e-2));
  }
  {
    const int K = 3;
    CollisionModel pm;
    pm.b1 = 0.3;
    const GpcBasis basis = make_basis(BasisFamily::UniformLegendre, K, min_quadrature_order(K, 1));
    const ChaosTensors ct = make_chaos_tensors(basis, pm.c_poly(), 2.0);
    const SgOperator sg = assemble_sg(L, ct, pm);
    SgState init;
    init.F.resize(g.size(), K);
    for (int k = 0; k < K; ++k) init.F.col(k) = smooth_field(g, rng);
    const RadialGrid rg = uniform_radial_grid(8.0, 1, 3);
    const std::vector<double> times{0.0, 0.7, 2.0};
    SgEvolveOptions so;
    so.store = true;
    const SgEvolution ev = evolve_sg(sg, init, rg, times, so);
    const int N = g.size();
    const Eigen::MatrixXd Ss = sg.L.symmetric();
    const Eigen::ArrayXd sw = g.w.array().sqrt();
    double worst = 0.0;
    for (std::size_t q = 0; q < rg.size(); ++q) {
      const double r = rg.rule.x[q];
      CMatrix A = CMatrix::Zero(K * N, K * N);
      for (int k = 0; k < K; ++k) {
        for (int i = 0; i < K; ++i) A.block(k * N, i * N, N, N) = (ct.B(k, i) * Ss).cast<cplx>();
        for (int a = 0; a < N; ++a) A(k * N + a, k * N + a) += cplx(0.0, -r * xz(a));
      }
      CVector y0(K * N);
      for (int k = 0; k < K; ++k)
        y0.segment(k * N, N) = (std::exp(-0.5 * r * r) * (sw * init.F.col(k).array())).matrix().cast<cplx>();
      for (std::size_t t = 0; t < times.size(); ++t) {
        const CVector y = expm_refined(A, times[t], 1e-12) * y0;
        double num = 0.0, den = 0.0;
        for (int k = 0; k < K; ++k) {
          const CVector ref = y.segment(k * N, N).array() / sw.cast<cplx>();
          const CVector got = ev.traj[k][t].row(static_cast<Eigen::Index>(q)).transpose();
          num = std::max(num, (got - ref).norm());
          den = std::max(den, ref.norm());
        }
        worst = std::max(worst, num / den);
      }
    }
    out.push_back(check("sg_decoupling_vs_block", worst, 1e-8));
  }
  {
    const std::vector<LinearOperator> ops{L};
    const InitialData init = make_initial_data(g, mb, InitKind::Macro, 0);
    const RadialGrid rg = uniform_radial_grid(8.0, 4, 8);
    const std::vector<double> times{0.0, 1.0, 4.0};
    auto render = [&] {
      const NormSeries ns = evolve_norms(ops, init, rg, times, g.beta, true);
      CsvTable t;
      t.name = "determinism.csv";
      t.header = {"t", "norm_L2x", "norm_Linfx"};
      for (std::size_t i = 0; i < times.size(); ++i) t.add(times[i], ns.l2x[0][i], ns.linfx[0][i]);
      return t.text();
    };
    const std::string a = render(), b = render();
    out.push_back(check("byte_determinism", a == b ? 0.0 : 1.0, 0.0));
  }
  return out;
}

} // namespace bkuq

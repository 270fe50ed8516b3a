#include "bkuq/gpc_sg.hpp"

#include "bkuq/common.hpp"
#include "bkuq/decay_fit.hpp"
#include "bkuq/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bkuq {

Eigen::VectorXd SgState::reconstruct(const GpcBasis& basis, double z) const {
  if (basis.K < K()) throw ConfigError("SgState: basis smaller than the state");
  const Eigen::VectorXd psi = basis.eval(z);
  return F * psi.head(K());
}

Eigen::MatrixXd SgOperator::apply(const Eigen::MatrixXd& F) const {
  if (F.cols() != K() || F.rows() != L.size()) throw ConfigError("SgOperator: state shape mismatch");
  Eigen::MatrixXd LF(F.rows(), F.cols());
  for (int i = 0; i < K(); ++i) LF.col(i) = L.apply(F.col(i));
  return LF * B.transpose();
}

SgOperator assemble_sg(const LinearOperator& unit, const ChaosTensors& ct, const CollisionModel& model) {
  (void)model.c_poly(); // rejects kernels that are not linear in z
  if (unit.order != 0) throw ConfigError("assemble_sg: expects the order-0 unit operator");
  SgOperator sg;
  sg.B = ct.B;
  if ((sg.B - sg.B.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("assemble_sg: coefficient matrix B is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sg.B);
  sg.mu = es.eigenvalues();
  sg.V = es.eigenvectors();
  sg.L = unit;
  sg.L.nu *= ct.b0;
  sg.L.K *= ct.b0;
  return sg;
}

double l2x_norm(const VelocityGrid& g, const RadialGrid& rg, const CMatrix& X, double beta) {
  const double c = 4.0 * std::numbers::pi / std::pow(2.0 * std::numbers::pi, 3);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    const double r = rg.rule.x[q];
    acc += (rg.rule.w[q] * r * r) * X.row(q).cwiseAbs2().transpose();
  }
  double best = 0.0;
  for (int i = 0; i < g.size(); ++i)
    best = std::max(best, std::pow(1.0 + g.pts.row(i).squaredNorm(), 0.5 * beta) * std::sqrt(c * acc(i)));
  return best;
}

double linfx_norm(const VelocityGrid& g, const RadialGrid& rg, const CMatrix& X, double beta, double t,
                  const XGridRule& xr) {
  const std::vector<double> xs = x_grid_for(t, xr);
  const double inv = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
  Eigen::MatrixXd Sx(xs.size(), rg.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t q = 0; q < rg.size(); ++q) {
      const double r = rg.rule.x[q], x = xs[i];
      Sx(i, q) = inv * rg.rule.w[q] * (x == 0.0 ? r * r : r * std::sin(r * x) / x);
    }
  const Eigen::MatrixXd Y = (Sx.cast<cplx>() * X).cwiseAbs();
  double best = 0.0;
  for (int i = 0; i < g.size(); ++i)
    best = std::max(best, std::pow(1.0 + g.pts.row(i).squaredNorm(), 0.5 * beta) * Y.col(i).maxCoeff());
  return best;
}

namespace {

// One propagator per distinct multiplier.
struct MuGroups {
  std::vector<double> values;
  std::vector<int> of; // group index of each component
};

MuGroups group_mu(const Eigen::VectorXd& mu) {
  MuGroups g;
  for (Eigen::Index l = 0; l < mu.size(); ++l) {
    int found = -1;
    for (std::size_t k = 0; k < g.values.size(); ++k)
      if (std::abs(g.values[k] - mu(l)) <= 1e-13 * std::max(1.0, std::abs(mu(l)))) found = static_cast<int>(k);
    if (found < 0) {
      g.values.push_back(mu(l));
      found = static_cast<int>(g.values.size()) - 1;
    }
    g.of.push_back(found);
  }
  return g;
}

// out[k][t]: nodal component k at time t for several initial states at once: out[family][k][t]
std::vector<std::vector<std::vector<CVector>>> sg_mode(const SgOperator& sg, const MuGroups& groups,
                                                       const std::vector<Eigen::MatrixXd>& rotated, double r,
                                                       double phi, const std::vector<double>& times) {
  const VelocityGrid& g = *sg.L.grid;
  const int N = g.size(), K = sg.K();
  Eigen::VectorXd xz(N);
  for (int i = 0; i < N; ++i) xz(i) = g.xi_z(i);
  const Eigen::MatrixXd S = sg.L.symmetric();
  std::vector<ModePropagator> props;
  for (double mu : groups.values) props.emplace_back(S, xz, r, mu, std::vector<CMatrix>{});
  const Eigen::ArrayXd sw = g.w.array().sqrt();
  std::vector<std::vector<std::vector<CVector>>> out(rotated.size());
  for (std::size_t f = 0; f < rotated.size(); ++f) {
    // rotated components propagated, then rotated back
    std::vector<std::vector<CVector>> gl(K);
    for (int l = 0; l < K; ++l) {
      const CVector c = (phi * (sw * rotated[f].col(l).array())).matrix().cast<cplx>();
      gl[l].reserve(times.size());
      for (double t : times) gl[l].push_back(props[groups.of[l]].propagate({c}, t)[0]);
    }
    out[f].assign(K, std::vector<CVector>(times.size()));
    for (int k = 0; k < K; ++k)
      for (std::size_t t = 0; t < times.size(); ++t) {
        CVector acc = CVector::Zero(N);
        for (int l = 0; l < K; ++l) acc += sg.V(k, l) * gl[l][t];
        out[f][k][t] = acc.array() / sw.cast<cplx>();
      }
  }
  return out;
}

} // namespace

SgEvolution evolve_sg(const SgOperator& sg, const SgState& init, const RadialGrid& rg,
                      const std::vector<double>& times, const SgEvolveOptions& opt) {
  if ((sg.B - sg.B.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("evolve_sg: coefficient matrix B is not symmetric");
  if (init.K() != sg.K() || init.F.rows() != sg.L.size())
    throw ConfigError("evolve_sg: initial state does not match the operator");
  const int K = sg.K();
  const MuGroups groups = group_mu(sg.mu);
  const std::vector<Eigen::MatrixXd> rotated{init.F * sg.V};
  SgEvolution ev;
  ev.times = times;
  NormAccumulator acc(*sg.L.grid, rg, times, K, opt.linf, opt.xr);
  if (opt.store)
    ev.traj.assign(K, std::vector<CMatrix>(times.size(),
                                           CMatrix::Zero(static_cast<Eigen::Index>(rg.size()), sg.L.size())));
  InitialData phi_src;
  sweep_radial(
      rg.size(),
      [&](std::size_t q) {
        const double r = rg.rule.x[q];
        return sg_mode(sg, groups, rotated, r, phi_src.phi(r), times)[0];
      },
      [&](std::size_t q, const std::vector<std::vector<CVector>>& prof) {
        for (int k = 0; k < K; ++k) {
          acc.add(q, k, prof[k]);
          if (opt.store)
            for (std::size_t t = 0; t < times.size(); ++t)
              ev.traj[k][t].row(static_cast<Eigen::Index>(q)) = prof[k][t].transpose();
        }
      });
  ev.per_k = acc.finish(opt.beta);
  ev.weighted_l2x = weighted_sum_norm(ev.per_k.l2x, opt.m);
  if (opt.linf) ev.weighted_linfx = weighted_sum_norm(ev.per_k.linfx, opt.m);
  return ev;
}

SgState sg_gamma(const SgState& h, const SgState& u, const ChaosTensors& ct, const VelocityGrid& grid,
                 const GammaParams& p) {
  if (h.K() != ct.K || u.K() != ct.K) throw ConfigError("sg_gamma: states and tensors disagree on K");
  const auto parts = gamma_contract(h.F, u.F, ct.Sp, ct.mask, grid, p);
  SgState out;
  out.F.resize(grid.size(), ct.K);
  for (int k = 0; k < ct.K; ++k) out.F.col(k) = parts[k];
  return out;
}

CMatrix CollocationReference::coefficient(int family, int k, std::size_t t) const {
  const auto& tq = traj.at(family);
  CMatrix c = CMatrix::Zero(tq[0][t].rows(), tq[0][t].cols());
  for (int q = 0; q < nodes.quad_order(); ++q) c += (nodes.quad.w[q] * nodes.psi_at_nodes(q, k)) * tq[q][t];
  return c;
}

CollocationReference collocation_reference(OperatorFactory& factory, const CollisionModel& model, int node_count,
                                           int k_max, const std::vector<ZProfile>& families,
                                           const RadialGrid& rg, const std::vector<double>& times) {
  if (node_count < 2 * k_max) {
    std::ostringstream os;
    os << "collocation reference: " << node_count << " nodes is below 2 K_max = " << 2 * k_max;
    throw ConfigError(os.str());
  }
  CollocationReference ref;
  ref.nodes = make_basis(BasisFamily::UniformLegendre, k_max, node_count);
  ref.radial = rg;
  ref.times = times;
  const int Q = node_count, F = static_cast<int>(families.size());
  const VelocityGrid& g = factory.grid();
  const Eigen::Index Nr = static_cast<Eigen::Index>(rg.size());
  ref.traj.assign(F, std::vector<std::vector<CMatrix>>(Q, std::vector<CMatrix>(times.size(), CMatrix::Zero(Nr, g.size()))));
  for (int q = 0; q < Q; ++q) {
    const double z = ref.nodes.quad.x[q];
    const std::vector<LinearOperator> ops{factory.assemble(model, z, 0)};
    std::vector<InitialData> inits(F);
    for (int f = 0; f < F; ++f) inits[f].h = {families[f](z)};
    const Eigen::ArrayXd sw = g.w.array().sqrt();
    sweep_radial(
        rg.size(),
        [&](std::size_t qr) {
          const double r = rg.rule.x[qr];
          const ModePropagator mp = make_mode(ops, r);
          std::vector<std::vector<CVector>> out(F, std::vector<CVector>(times.size()));
          for (int f = 0; f < F; ++f) {
            const CVector c = (inits[f].phi(r) * to_sym(g, inits[f].h[0])).cast<cplx>();
            for (std::size_t t = 0; t < times.size(); ++t)
              out[f][t] = mp.propagate({c}, times[t])[0].array() / sw.cast<cplx>();
          }
          return out;
        },
        [&](std::size_t qr, const std::vector<std::vector<CVector>>& prof) {
          for (int f = 0; f < F; ++f)
            for (std::size_t t = 0; t < times.size(); ++t)
              ref.traj[f][q][t].row(static_cast<Eigen::Index>(qr)) = prof[f][t].transpose();
        });
  }
  return ref;
}

GpcErrorCurve gpc_error_curve(const std::vector<int>& Ks, const CollocationReference& ref,
                              const LinearOperator& unit, const CollisionModel& model,
                              const std::vector<ZProfile>& families, double beta, bool linf) {
  const int Q = ref.nodes.quad_order();
  const int F = ref.families();
  if (static_cast<int>(families.size()) != F) throw ConfigError("gpc_error_curve: family count mismatch");
  for (int K : Ks)
    if (K < 1 || 2 * K >= Q || K > ref.nodes.K) {
      std::ostringstream os;
      os << "gpc_error_curve: K = " << K << " needs a reference with more than 2K nodes (have " << Q << ")";
      throw ConfigError(os.str());
    }
  const VelocityGrid& g = *unit.grid;
  const std::size_t T = ref.times.size();
  GpcErrorCurve cur;
  cur.Ks = Ks;
  cur.times = ref.times;
  cur.reference_nodes = Q;
  auto alloc = [&] {
    return std::vector<std::vector<std::vector<double>>>(
        F, std::vector<std::vector<double>>(Ks.size(), std::vector<double>(T, 0.0)));
  };
  cur.err_l2x = alloc();
  cur.err_linfx = alloc();
  cur.proj_err = alloc();
  cur.num_err = alloc();
  // reference chaos coefficients [family][k][t]
  std::vector<std::vector<std::vector<CMatrix>>> coef(F);
  for (int f = 0; f < F; ++f) {
    coef[f].resize(ref.nodes.K);
    for (int k = 0; k < ref.nodes.K; ++k)
      for (std::size_t t = 0; t < T; ++t) coef[f][k].push_back(ref.coefficient(f, k, t));
  }
  for (std::size_t iK = 0; iK < Ks.size(); ++iK) {
    const int K = Ks[iK];
    const GpcBasis basis = make_basis(BasisFamily::UniformLegendre, K, min_quadrature_order(K));
    const ChaosTensors ct = make_chaos_tensors(basis, model.c_poly(), 2.0);
    const SgOperator sg = assemble_sg(unit, ct, model);
    for (int f = 0; f < F; ++f) {
      SgState init;
      init.F = Eigen::MatrixXd::Zero(g.size(), K);
      for (int q = 0; q < Q; ++q) {
        const Eigen::VectorXd hq = families[f](ref.nodes.quad.x[q]);
        for (int k = 0; k < K; ++k) init.F.col(k) += ref.nodes.quad.w[q] * ref.nodes.psi_at_nodes(q, k) * hq;
      }
      SgEvolveOptions opt;
      opt.beta = beta;
      opt.store = true;
      const SgEvolution ev = evolve_sg(sg, init, ref.radial, ref.times, opt);
      for (std::size_t t = 0; t < T; ++t) {
        double et = 0.0, ep = 0.0, en = 0.0, ei = 0.0;
        for (int q = 0; q < Q; ++q) {
          CMatrix fK = CMatrix::Zero(ev.traj[0][t].rows(), g.size());
          CMatrix PK = fK;
          for (int k = 0; k < K; ++k) {
            fK += ref.nodes.psi_at_nodes(q, k) * ev.traj[k][t];
            PK += ref.nodes.psi_at_nodes(q, k) * coef[f][k][t];
          }
          const CMatrix& fr = ref.traj[f][q][t];
          et = std::max(et, l2x_norm(g, ref.radial, fr - fK, beta));
          ep = std::max(ep, l2x_norm(g, ref.radial, fr - PK, beta));
          en = std::max(en, l2x_norm(g, ref.radial, PK - fK, beta));
          if (linf) ei = std::max(ei, linfx_norm(g, ref.radial, fr - fK, beta, ref.times[t]));
        }
        cur.err_l2x[f][iK][t] = et;
        cur.proj_err[f][iK][t] = ep;
        cur.num_err[f][iK][t] = en;
        cur.err_linfx[f][iK][t] = ei;
      }
    }
  }
  return cur;
}

ConvergenceFit fit_convergence(const std::vector<int>& Ks, const std::vector<double>& err) {
  if (Ks.size() != err.size() || Ks.size() < 3) throw ConfigError("fit_convergence: need at least three K values");
  std::vector<double> k, lk, le;
  ConvergenceFit f;
  for (std::size_t i = 0; i < Ks.size(); ++i) {
    if (!(err[i] > 0.0)) throw ConfigError("fit_convergence: errors must be positive");
    k.push_back(Ks[i]);
    lk.push_back(std::log(static_cast<double>(Ks[i])));
    le.push_back(std::log(err[i]));
    if (i > 0 && !(err[i] < err[i - 1])) f.strictly_decreasing = false;
  }
  const LineFit s = fit_line(k, le), a = fit_line(lk, le);
  f.spectral_rms = s.rms;
  f.spectral_slope = s.c1;
  f.algebraic_rms = a.rms;
  f.algebraic_slope = a.c1;
  return f;
}

} // namespace bkuq

#include "bkuq/solver.hpp"

#include "bkuq/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bkuq {

double InitialData::phi(double r) const { return std::exp(-0.5 * r * r); }

InitKind parse_init_kind(const std::string& s) {
  if (s == "macro") return InitKind::Macro;
  if (s == "micro") return InitKind::Micro;
  throw ConfigError("unknown initial-data kind '" + s + "' (expected macro or micro)");
}

std::string to_string(InitKind k) { return k == InitKind::Macro ? "macro" : "micro"; }

InitialData make_initial_data(const VelocityGrid& g, const MacroBasis& mb, InitKind kind, int orders) {
  const int N = g.size();
  InitialData d;
  d.micro = kind == InitKind::Micro;
  Eigen::VectorXd h(N);
  for (int i = 0; i < N; ++i) {
    const double s2 = g.pts.row(i).squaredNorm();
    const double rho2 = g.pts(i, 0) * g.pts(i, 0) + g.pts(i, 1) * g.pts(i, 1);
    const double zz = g.pts(i, 2);
    h(i) = (kind == InitKind::Macro ? 1.0 : zz * zz - 0.5 * rho2) * sqrt_maxwellian(s2);
  }
  if (d.micro) h = macro_project(h, mb, g, MacroPart::P1);
  d.h.push_back(h);
  for (int s = 1; s <= orders; ++s) d.h.push_back(Eigen::VectorXd::Zero(N));
  return d;
}

ModePropagator make_mode(const std::vector<LinearOperator>& ops, double eta, double mu) {
  if (ops.empty()) throw ConfigError("evolve: no operators given");
  const VelocityGrid& g = *ops[0].grid;
  Eigen::VectorXd xz(g.size());
  for (int i = 0; i < g.size(); ++i) xz(i) = g.xi_z(i);
  std::vector<CMatrix> derivs;
  for (std::size_t j = 1; j < ops.size(); ++j) {
    if (ops[j].grid != ops[0].grid || ops[j].z != ops[0].z)
      throw ConfigError("evolve: all operators must share one grid and one z");
    derivs.push_back((mu * ops[j].symmetric()).cast<cplx>());
  }
  return ModePropagator(ops[0].symmetric(), xz, eta, mu, derivs);
}

void sweep_radial(std::size_t n, const std::function<std::vector<std::vector<CVector>>(std::size_t)>& compute,
                  const std::function<void(std::size_t, const std::vector<std::vector<CVector>>&)>& sink) {
  const std::size_t batch = std::max<std::size_t>(4, 4 * thread_count());
  for (std::size_t b0 = 0; b0 < n; b0 += batch) {
    const std::size_t b1 = std::min(n, b0 + batch);
    std::vector<std::vector<std::vector<CVector>>> res(b1 - b0);
    parallel_for(b1 - b0, [&](std::size_t k) { res[k] = compute(b0 + k); });
    for (std::size_t k = 0; k < res.size(); ++k) sink(b0 + k, res[k]);
  }
}

namespace {

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("evolve: empty time grid");
  if (times.front() < 0.0) throw ConfigError("evolve: times must be nonnegative");
  for (std::size_t t = 1; t < times.size(); ++t)
    if (!(times[t] > times[t - 1])) throw ConfigError("evolve: times must be increasing");
}

// result[s][t]: nodal profile of order s at time t for radial node q
std::vector<std::vector<CVector>> mode_profiles(const std::vector<LinearOperator>& ops, const InitialData& init,
                                                double r, const std::vector<double>& times) {
  const VelocityGrid& g = *ops[0].grid;
  const int orders = static_cast<int>(ops.size()) - 1;
  if (static_cast<int>(init.h.size()) < 1) throw ConfigError("evolve: missing initial profile");
  const ModePropagator mp = make_mode(ops, r);
  std::vector<CVector> c;
  for (int s = 0; s <= orders; ++s) {
    Eigen::VectorXd hs = s < static_cast<int>(init.h.size()) ? init.h[s] : Eigen::VectorXd::Zero(g.size());
    c.push_back((init.phi(r) * to_sym(g, hs)).cast<cplx>());
  }
  const Eigen::ArrayXd isw = g.w.array().sqrt().inverse();
  std::vector<std::vector<CVector>> out(orders + 1, std::vector<CVector>(times.size()));
  for (std::size_t t = 0; t < times.size(); ++t) {
    const auto y = mp.propagate(c, times[t]);
    for (int s = 0; s <= orders; ++s) out[s][t] = y[s].array() * isw.cast<cplx>();
  }
  return out;
}

} // namespace

FourierTrajectory evolve(const std::vector<LinearOperator>& ops, const InitialData& init, const RadialGrid& rg,
                         const std::vector<double>& times) {
  check_times(times);
  if (ops.empty()) throw ConfigError("evolve: no operators given");
  if (ops.size() > 3) throw ConfigError("evolve: derivative orders above 2 are not available");
  FourierTrajectory tr;
  tr.radial = rg;
  tr.times = times;
  tr.orders = static_cast<int>(ops.size()) - 1;
  const int N = ops[0].size();
  const Eigen::Index Nr = static_cast<Eigen::Index>(rg.size());
  tr.g.assign(tr.orders + 1, std::vector<CMatrix>(times.size(), CMatrix::Zero(Nr, N)));
  sweep_radial(
      rg.size(), [&](std::size_t q) { return mode_profiles(ops, init, rg.rule.x[q], times); },
      [&](std::size_t q, const std::vector<std::vector<CVector>>& prof) {
        for (int s = 0; s <= tr.orders; ++s)
          for (std::size_t t = 0; t < times.size(); ++t)
            tr.g[s][t].row(static_cast<Eigen::Index>(q)) = prof[s][t].transpose();
      });
  return tr;
}

NormSeries evolve_norms(const std::vector<LinearOperator>& ops, const InitialData& init, const RadialGrid& rg,
                        const std::vector<double>& times, double beta, bool linf, const XGridRule& xr) {
  check_times(times);
  if (ops.empty()) throw ConfigError("evolve: no operators given");
  if (ops.size() > 3) throw ConfigError("evolve: derivative orders above 2 are not available");
  const int fields = static_cast<int>(ops.size());
  NormAccumulator acc(*ops[0].grid, rg, times, fields, linf, xr);
  sweep_radial(
      rg.size(), [&](std::size_t q) { return mode_profiles(ops, init, rg.rule.x[q], times); },
      [&](std::size_t q, const std::vector<std::vector<CVector>>& prof) {
        for (int s = 0; s < fields; ++s) acc.add(q, s, prof[s]);
      });
  return acc.finish(beta);
}

FdCheck fd_sensitivity_check(OperatorFactory& factory, const CollisionModel& model, double z, double dz,
                             const InitialData& init, const RadialGrid& rg, const std::vector<double>& times) {
  if (!(dz > 0.0)) throw ConfigError("fd check: δz must be positive");
  if (z - dz < -model.cz || z + dz > model.cz) {
    std::ostringstream os;
    os << "fd check: z ± δz = [" << z - dz << ", " << z + dz << "] leaves the z-domain [" << -model.cz << ", "
       << model.cz << "]";
    throw ConfigError(os.str());
  }
  const std::vector<LinearOperator> mid{factory.assemble(model, z, 0), factory.assemble(model, z, 1)};
  const std::vector<LinearOperator> plus{factory.assemble(model, z + dz, 0)};
  const std::vector<LinearOperator> minus{factory.assemble(model, z - dz, 0)};
  InitialData i0 = init;
  i0.h.resize(1);
  InitialData i1 = init;
  i1.h.resize(2, Eigen::VectorXd::Zero(factory.grid().size()));
  const FourierTrajectory a = evolve(mid, i1, rg, times);
  const FourierTrajectory p = evolve(plus, i0, rg, times);
  const FourierTrajectory m = evolve(minus, i0, rg, times);
  const VelocityGrid& g = factory.grid();
  auto norm = [&](const CMatrix& X) {
    double s = 0.0;
    for (Eigen::Index q = 0; q < X.rows(); ++q) {
      const double r = rg.rule.x[q];
      s += rg.rule.w[q] * r * r * (X.row(q).cwiseAbs2().transpose().array() * g.w.array()).sum();
    }
    return std::sqrt(s);
  };
  FdCheck out;
  for (std::size_t t = 0; t < times.size(); ++t) {
    const CMatrix fd = (p.g[0][t] - m.g[0][t]) / (2.0 * dz);
    const double diff = norm(a.g[1][t] - fd);
    const double ref = norm(a.g[1][t]);
    const double rel = ref > 0.0 ? diff / ref : diff;
    out.per_time.push_back(rel);
    out.max_abs = std::max(out.max_abs, diff);
    if (times[t] > 0.0) out.max_rel = std::max(out.max_rel, rel);
  }
  return out;
}

IdentityCheck sensitivity_identity(const LinearOperator& unit, double b1, double z, double eta,
                                   const Eigen::VectorXd& h0, const std::vector<double>& times) {
  const VelocityGrid& g = *unit.grid;
  const int N = g.size();
  const double c = 1.0 + z * b1;
  const Eigen::MatrixXd S = unit.symmetric();
  Eigen::VectorXd xz(N);
  for (int i = 0; i < N; ++i) xz(i) = g.xi_z(i);
  CMatrix A = (c * S).cast<cplx>();
  CMatrix Dz = CMatrix::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    A(i, i) += cplx(0.0, -eta * xz(i));
    Dz(i, i) = cplx(0.0, -xz(i));
  }
  const ModePropagator pz(A, {(b1 * S).cast<cplx>()});
  const ModePropagator pe(A, {Dz});
  const std::vector<CVector> c0{to_sym(g, h0).cast<cplx>()};
  IdentityCheck out;
  double scale = 0.0;
  for (double t : times) {
    const auto yz = pz.propagate(c0, t);
    const auto ye = pe.propagate(c0, t);
    const CVector lit = t * b1 * (S.cast<cplx>() * yz[0]);
    const CVector cor = (b1 / c) * (t * (A * yz[0]) - eta * ye[1]);
    scale = std::max(scale, yz[1].norm());
    out.literal = std::max(out.literal, (yz[1] - lit).norm());
    out.corrected = std::max(out.corrected, (yz[1] - cor).norm());
  }
  if (scale > 0.0) {
    out.literal /= scale;
    out.corrected /= scale;
  }
  return out;
}

} // namespace bkuq

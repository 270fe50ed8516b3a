#pragma once

#include "bkuq/linear_operator.hpp"
#include "bkuq/norms.hpp"
#include "bkuq/propagator.hpp"
#include "bkuq/radial.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bkuq {

// g_s(eta, xi, 0) = phi(eta) h_s(xi), phi(r) = exp(-r^2 / 2).
struct InitialData {
  std::vector<Eigen::VectorXd> h; // nodal velocity profiles for s = 0, 1, ...
  bool micro = false;
  double phi(double r) const;
};

enum class InitKind { Macro, Micro };
InitKind parse_init_kind(const std::string& s);
std::string to_string(InitKind k);

// Macro data: h_0 = sqrt(M). Micro data: h_0 = P1[(xi_z^2 - xi_rho^2 / 2) sqrt(M)].
// Higher orders start at zero (z-independent data).
InitialData make_initial_data(const VelocityGrid& g, const MacroBasis& mb, InitKind kind, int orders);

struct FourierTrajectory {
  RadialGrid radial;
  std::vector<double> times;
  int orders = 0;
  // g[s][t](q, i): nodal value at radial node q and velocity node i
  std::vector<std::vector<CMatrix>> g;
};

// ops[0] = L^z, ops[j] = d^j L^z / dz^j (all on one grid, same z).
FourierTrajectory evolve(const std::vector<LinearOperator>& ops, const InitialData& init, const RadialGrid& rg,
                         const std::vector<double>& times);

// Same propagation reduced on the fly to weighted physical norms per order.
NormSeries evolve_norms(const std::vector<LinearOperator>& ops, const InitialData& init, const RadialGrid& rg,
                        const std::vector<double>& times, double beta, bool linf, const XGridRule& xr = {});

// Processes radial nodes in batches: compute(q) runs in parallel, sink(q, result)
// runs serially in ascending q.
void sweep_radial(std::size_t n, const std::function<std::vector<std::vector<CVector>>(std::size_t)>& compute,
                  const std::function<void(std::size_t, const std::vector<std::vector<CVector>>&)>& sink);

// Order-0/1/2 propagation of one mode in symmetric coordinates.
ModePropagator make_mode(const std::vector<LinearOperator>& ops, double eta, double mu = 1.0);

struct FdCheck {
  double max_rel = 0.0;            // max over t > 0 of ||d_z g - central difference|| / ||d_z g||
  double max_abs = 0.0;            // same without the normalization
  std::vector<double> per_time;
};

// Central-difference check of the order-1 propagation:
//   factory assembles the operators at z and z +- dz.
FdCheck fd_sensitivity_check(OperatorFactory& factory, const CollisionModel& model, double z, double dz,
                             const InitialData& init, const RadialGrid& rg, const std::vector<double>& times);

// Residuals of the proportional-kernel sensitivity identities at one mode:
//   literal:   d_z g = t b1 L g
//   corrected: d_z g = (b1 / c) [t (-i eta D + c L) g - eta d_eta g]
// relative to max_t ||d_z g||.
struct IdentityCheck {
  double literal = 0.0;
  double corrected = 0.0;
};
IdentityCheck sensitivity_identity(const LinearOperator& unit, double b1, double z, double eta,
                                   const Eigen::VectorXd& h0, const std::vector<double>& times);

} // namespace bkuq

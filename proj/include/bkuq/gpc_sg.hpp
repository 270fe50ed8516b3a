#pragma once

#include "bkuq/collision_model.hpp"
#include "bkuq/gamma.hpp"
#include "bkuq/gpc_basis.hpp"
#include "bkuq/linear_operator.hpp"
#include "bkuq/norms.hpp"
#include "bkuq/radial.hpp"
#include "bkuq/solver.hpp"

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace bkuq {

// gPC coefficient fields f_1..f_K on one grid (column k-1 of F, nodal values).
struct SgState {
  Eigen::MatrixXd F;
  int K() const { return static_cast<int>(F.cols()); }
  // f^K(z) = sum_k f_k psi_k(z)
  Eigen::VectorXd reconstruct(const GpcBasis& basis, double z) const;
};

// Coupled operator f -> (B (x) L) f of the linear-in-z kernel, kept in
// factored form: B = V diag(mu) V^T.
struct SgOperator {
  Eigen::MatrixXd B;
  Eigen::VectorXd mu;
  Eigen::MatrixXd V;
  LinearOperator L; // b0 * L_unit
  int K() const { return static_cast<int>(B.rows()); }
  // Column k of the result is sum_i B_ki L f_i.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& F) const;
};

SgOperator assemble_sg(const LinearOperator& unit, const ChaosTensors& ct, const CollisionModel& model);

struct SgEvolution {
  std::vector<double> times;
  NormSeries per_k;                  // field k-1 = component f_k
  std::vector<double> weighted_l2x;  // ||W f||, L^inf_{xi,beta}(L^2_x)
  std::vector<double> weighted_linfx;
  // traj[k][t](q, i) when stored
  std::vector<std::vector<CMatrix>> traj;
};

struct SgEvolveOptions {
  double beta = 2.0;
  double m = 2.0;
  bool linf = false;
  bool store = false;
  XGridRule xr{};
};

// Rotates into the eigenbasis of B, propagates each component with mu_l L
// and rotates back. The initial state is phi(r) times init.F.
SgEvolution evolve_sg(const SgOperator& sg, const SgState& init, const RadialGrid& rg,
                      const std::vector<double>& times, const SgEvolveOptions& opt);

// Gamma_k = 1/2 sum_{i,j} S'_kij Gamma(h_i, u_j), masked entries skipped.
SgState sg_gamma(const SgState& h, const SgState& u, const ChaosTensors& ct, const VelocityGrid& grid,
                 const GammaParams& p = {});

// z-dependent initial velocity profile h(xi; z).
using ZProfile = std::function<Eigen::VectorXd(double)>;

// Collocation reference: the single-species problem solved independently at
// each Gauss node of `nodes` (uniform-Legendre measure).
struct CollocationReference {
  GpcBasis nodes;            // node set and weights; K = number of usable chaos coefficients
  RadialGrid radial;
  std::vector<double> times;
  // traj[family][q][t](r, i)
  std::vector<std::vector<std::vector<CMatrix>>> traj;
  int families() const { return static_cast<int>(traj.size()); }
  // Exact-in-quadrature chaos coefficient k (0-based) of the reference.
  CMatrix coefficient(int family, int k, std::size_t t) const;
};

CollocationReference collocation_reference(OperatorFactory& factory, const CollisionModel& model, int node_count,
                                           int k_max, const std::vector<ZProfile>& families,
                                           const RadialGrid& rg, const std::vector<double>& times);

struct GpcErrorCurve {
  std::vector<int> Ks;
  std::vector<double> times;
  // [family][iK][t]
  std::vector<std::vector<std::vector<double>>> err_l2x, err_linfx, proj_err, num_err;
  int reference_nodes = 0;
};

// For each K: SG solve, then total, projection and numerical errors against
// the reference with the z-norm taken as the max over the reference nodes.
GpcErrorCurve gpc_error_curve(const std::vector<int>& Ks, const CollocationReference& ref,
                              const LinearOperator& unit, const CollisionModel& model,
                              const std::vector<ZProfile>& families, double beta, bool linf);

struct ConvergenceFit {
  double spectral_rms = 0.0;  // ln err vs K
  double algebraic_rms = 0.0; // ln err vs ln K
  double spectral_slope = 0.0;
  double algebraic_slope = 0.0;
  bool strictly_decreasing = true;
};
ConvergenceFit fit_convergence(const std::vector<int>& Ks, const std::vector<double>& err);

// sup_xi <xi>^beta ||X(., xi)||_{L2_x} for a radial-by-velocity matrix.
double l2x_norm(const VelocityGrid& g, const RadialGrid& rg, const CMatrix& X, double beta);
// sup_xi <xi>^beta sup_x |inverse(X)(x, xi)| on the x-grid of time t.
double linfx_norm(const VelocityGrid& g, const RadialGrid& rg, const CMatrix& X, double beta, double t,
                  const XGridRule& xr = {});

} // namespace bkuq

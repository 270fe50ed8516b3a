#pragma once

#include "bkuq/collision_model.hpp"
#include "bkuq/velocity_grid.hpp"

#include <Eigen/Dense>
#include <vector>

namespace bkuq {

// Settings of the direct bilinear collision quadrature.
struct GammaParams {
  int n_polar = 6;        // Gauss-Legendre nodes in cos theta on [0, 1]
  int n_azimuth = 8;      // midpoint nodes in the azimuth
  int max_nodes = 16 * 16 * 16; // cost guard on the grid size
  int interp_points = 4;  // per axis; 2 is trilinear
};

// Gamma^z_k(f, g) = 1/2 int sqrt(M_*) (-f g_* - f_* g + f' g'_* + f'_* g') d^k_z b |V| dxi_* dOmega
// on a full3d grid. Off-grid post-collisional values interpolate f / sqrt(M)
// with a tensor Lagrange stencil and zero extension outside the node box.
Eigen::VectorXd gamma_eval(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const VelocityGrid& grid,
                           const CollisionModel& model, double z, int k, const GammaParams& p = {});

// Same quadrature with an explicit angular factor sum_t coef_t s^power_t.
Eigen::VectorXd gamma_terms(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const VelocityGrid& grid,
                            const std::vector<AngularTerm>& terms, const GammaParams& p = {});

// All pairwise bilinear values at once:
//   out[k] = 1/2 sum_{i,j} T(k, i, j) Gamma(h_i, u_j)
// with Gamma evaluated for b(s) = s. h and u hold one field per column.
// T is indexed (k*K + i)*K + j and entries with mask 0 are skipped.
std::vector<Eigen::VectorXd> gamma_contract(const Eigen::MatrixXd& h, const Eigen::MatrixXd& u,
                                            const std::vector<double>& T, const std::vector<unsigned char>& mask,
                                            const VelocityGrid& grid, const GammaParams& p = {});

} // namespace bkuq

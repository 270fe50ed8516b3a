#pragma once

#include "bkuq/velocity_grid.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace bkuq {

enum class AssemblyPath { GradClosedForm, DirectQuadrature };

std::string to_string(AssemblyPath p);

// Quadrature settings of the product-integration assembly. Each kernel row is
// integrated in spherical coordinates (r, cos theta, phi) centred on the
// output node with the polar axis along the node's velocity.
struct AssemblyParams {
  int n_r = 40;
  int n_theta = 40;
  int n_phi = 24;       // midpoint nodes on [0, pi]; mirror symmetry doubles them
  double r_max = 14.0;
  int plane_nv = 20;    // Gauss-Laguerre nodes of the transverse-plane integral
  int plane_npsi = 16;  // angular nodes of the transverse-plane integral (full circle)
  int nu_nr = 64;       // collision-frequency quadrature
  int nu_nu = 64;

  std::string descriptor() const;
};

// Descriptor of a unit angular kernel b(s) = s^power assembled along a path.
std::string unit_descriptor(int power, AssemblyPath path, const AssemblyParams& p);

// int_0^1 s^power ds evaluated by Gauss quadrature.
double angular_mean(int power);

// Collision frequency of b = s^power at speed s:
//   nu(s) = 2 pi beta_b int |xi - xi_*| M(xi_*) dxi_*.
// The closed form uses the Gaussian mean-distance formula; the direct path
// evaluates the velocity integral by quadrature.
double collision_frequency(double speed, int power, AssemblyPath path, const AssemblyParams& p);

// Grad-type hard-sphere kernel k(xi, eta) = K2 - K1 in local variables:
// distance r = |eta - xi|, speed s = |xi|, c = cos of the angle between
// (eta - xi) and xi.
double grad_kernel(double r, double s, double c);

// Same kernel for b = s^power computed from the transverse-plane integral.
double plane_kernel(double r, double s, double c, int power, const AssemblyParams& p);

// Row i of the raw (unsymmetrized) kernel matrix in nodal form:
//   row_j = int k(xi_i, eta) l_j(eta) d eta
// with l_j the tensor Lagrange interpolant on the axisym grid (zero outside
// the box). Requires an axisym2d grid.
Eigen::VectorXd assemble_kernel_row(const VelocityGrid& g, int i, int power, AssemblyPath path,
                                    const AssemblyParams& p);

Eigen::MatrixXd assemble_kernel_raw(const VelocityGrid& g, int power, AssemblyPath path,
                                    const AssemblyParams& p);

} // namespace bkuq

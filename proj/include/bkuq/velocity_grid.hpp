#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bkuq {

enum class GridMode { Axisym2d, Full3d };

GridMode parse_grid_mode(const std::string& s);
std::string to_string(GridMode m);

// Tensor-product velocity quadrature.
//   axisym2d: nodes (xi_z, xi_rho) with Gauss-Legendre in xi_z on
//             [-xi_max, xi_max] and in xi_rho on (0, xi_max]; weights carry
//             the azimuthal factor 2 pi xi_rho. Node index = iz * n_rho + ir.
//   full3d:   Gauss-Hermite-type nodes per axis (exact for the Maxwellian
//             factor), scaled into [-xi_max, xi_max] when needed.
//             Node index = (ix * n + iy) * n + iz.
struct VelocityGrid {
  GridMode mode = GridMode::Axisym2d;
  double xi_max = 6.0;
  std::array<int, 3> res{40, 20, 1};
  double beta = 2.0;
  std::array<std::vector<double>, 3> axis; // axisym: {z, rho, -}; full3d: {x, y, z}
  Eigen::MatrixXd pts;                     // N x 3 Cartesian points; axisym stores (rho, 0, z)
  Eigen::VectorXd w;                       // quadrature weights
  double maxwellian_mass = 0.0;

  int size() const { return static_cast<int>(w.size()); }
  double speed(int i) const { return pts.row(i).norm(); }
  double xi_z(int i) const { return pts(i, 2); }
  // <xi>^beta
  double bracket_weight(int i) const;
  // Descriptor of everything the kernel matrix depends on (beta excluded).
  std::string descriptor() const;
  std::uint64_t hash() const;
};

inline constexpr double kGridMassTol = 1e-6;

VelocityGrid build_grid(GridMode mode, double xi_max, std::array<int, 3> res, double beta);

// Normalized Maxwellian M(xi) = (2 pi)^{-3/2} exp(-|xi|^2 / 2) and its root.
double maxwellian(double speed2);
double sqrt_maxwellian(double speed2);

// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a(const std::string& s);

} // namespace bkuq

#pragma once

#include "bkuq/gpc_basis.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bkuq {

enum class KernelFamily { Proportional, Cubic };

KernelFamily parse_kernel_family(const std::string& s);
std::string to_string(KernelFamily f);

// One monomial c * s^power of the angular kernel b(s, z) (s = cos theta).
struct AngularTerm {
  int power = 1;
  double coef = 0.0;
};

// Uncertain angular kernel families:
//   proportional: b(s, z) = (1 + z b1) s
//   cubic:        b(s, z) = s + z eps s^3
// with z in [-cz, cz].
struct CollisionModel {
  KernelFamily family = KernelFamily::Proportional;
  double b1 = 0.0;
  double eps = 0.0;
  double cz = 1.0;
  int alpha = 2;

  // Terms of d^k b / dz^k at z (empty for the zero operator).
  std::vector<AngularTerm> terms(double z, int k) const;
  double b(double s, double z) const;
  // int_0^{pi/2} b(cos t, z) sin t dt = int_0^1 b(s, z) ds.
  double angular_integral(double z) const;
  // (C_b1, C_b2): extremes of angular_integral over [-cz, cz].
  std::pair<double, double> positivity_bounds() const;
  // sum_{k=1}^alpha max_{s, z} |d^k b / dz^k|.
  double derivative_bound() const;
  // c(z) for the proportional family.
  ZPolynomial c_poly() const;
  void validate() const;
  std::string descriptor() const;
  std::uint64_t hash() const;
};

} // namespace bkuq

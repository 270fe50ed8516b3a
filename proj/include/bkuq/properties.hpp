#pragma once

#include "bkuq/gamma.hpp"
#include "bkuq/kernel_assembly.hpp"

#include <string>
#include <vector>

namespace bkuq {

struct PropertyCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct PropertySuiteOptions {
  double xi_max = 6.0;
  double beta = 2.0;
  std::array<int, 3> axisym_res{20, 10, 1};
  std::array<int, 3> crossval_res{24, 12, 1};
  int full3d_n = 12;
  AssemblyParams assembly{};
  GammaParams gamma{};
  bool include_gamma = true;
  unsigned seed = 11;
};

// Invariant suite: self-adjointness, null space, dissipativity, projection
// algebra, P0 Gamma, chaos-tensor symmetry and selection rules, Grad vs direct
// kernel, semigroup law, zero-wavenumber moment conservation, Plancherel,
// SG decoupling vs the block generator, and output determinism.
std::vector<PropertyCheck> run_property_suite(const PropertySuiteOptions& opt = {});

} // namespace bkuq

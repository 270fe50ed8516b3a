#pragma once

#include "bkuq/quadrature.hpp"

#include <vector>

namespace bkuq {

// Composite Gauss-Legendre rule in the radial wavenumber on (0, R].
struct RadialGrid {
  Rule1D rule;
  std::vector<double> edges;
  double R = 10.0;
  int order = 20;
  std::size_t size() const { return rule.size(); }
};

// Panel design:
//   the solution at wavenumber r decays like exp(-damping r^2 t), so it only
//   matters up to t_eff(r) = min(t_max, cutoff / (damping r^2));
//   the r-integrands oscillate with frequency up to 2 speed t_eff + 10;
//   each panel of `order` nodes spans at most `phase` radians of that
//   oscillation and never more than 1.
// This concentrates panels geometrically toward r = 0 as t_max grows.
struct RadialDesign {
  double R = 10.0;
  int order = 20;
  double phase = 40.0;
  double speed = 1.3;
  double damping = 0.2;
  double cutoff = 14.0;
};

RadialGrid design_radial_grid(double t_max, const RadialDesign& d = {});

// Uniform panels of width h (used by tests and small studies).
RadialGrid uniform_radial_grid(double R, int panels, int order);

// Number of nodes of the first panel lying below eta.
int nodes_below(const RadialGrid& g, double eta);

} // namespace bkuq

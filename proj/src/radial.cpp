#include "bkuq/radial.hpp"

#include "bkuq/common.hpp"

#include <algorithm>
#include <cmath>

namespace bkuq {

RadialGrid design_radial_grid(double t_max, const RadialDesign& d) {
  if (!(d.R > 0.0) || d.order < 2) throw ConfigError("radial grid: need R > 0 and panel order >= 2");
  RadialGrid g;
  g.R = d.R;
  g.order = d.order;
  g.edges.push_back(0.0);
  double r = 0.0;
  while (r < d.R) {
    const double rr = std::max(r, 1e-9);
    const double t_eff = std::min(std::max(t_max, 0.0), d.cutoff / (d.damping * rr * rr));
    const double omega = 2.0 * d.speed * t_eff + 10.0;
    const double h = std::min(1.0, d.phase / omega);
    r = std::min(d.R, r + h);
    g.edges.push_back(r);
  }
  g.rule = composite_gauss(g.edges, d.order);
  return g;
}

RadialGrid uniform_radial_grid(double R, int panels, int order) {
  if (panels < 1) throw ConfigError("radial grid: need at least one panel");
  RadialGrid g;
  g.R = R;
  g.order = order;
  for (int p = 0; p <= panels; ++p) g.edges.push_back(R * p / panels);
  g.rule = composite_gauss(g.edges, order);
  return g;
}

int nodes_below(const RadialGrid& g, double eta) {
  int n = 0;
  for (std::size_t q = 0; q < g.size() && q < static_cast<std::size_t>(g.order); ++q)
    if (g.rule.x[q] < eta) ++n;
  return n;
}

} // namespace bkuq

#pragma once

#include "bkuq/dense_eigen.hpp"
#include "bkuq/radial.hpp"
#include "bkuq/velocity_grid.hpp"

#include <Eigen/Dense>
#include <vector>

namespace bkuq {

// Physical-space evaluation points for the L^inf_x norm at time t:
// spacing dx_scale sqrt(1 + t) on [0, factor speed t + width sqrt(1 + t) + offset].
struct XGridRule {
  double dx_scale = 0.1;
  double speed = 1.3;
  double factor = 1.2;
  double width = 10.0;
  double offset = 10.0;
};

std::vector<double> x_grid_for(double t, const XGridRule& r = {});

// (2 pi)^{-3} 4 pi int r^2 |v(r)|^2 dr
double plancherel_l2sq(const RadialGrid& rg, const CVector& v);

// Radial inverse transform g(|x|) = (2 pi^2 |x|)^{-1} int r sin(r |x|) v(r) dr
// with the |x| -> 0 limit (2 pi^2)^{-1} int r^2 v(r) dr.
cplx radial_inverse(const RadialGrid& rg, const CVector& v, double x);

// Per-time weighted norms of one or more fields.
struct NormSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> l2x;   // [field][t]: sup_xi <xi>^beta ||g(., xi)||_{L2_x}
  std::vector<std::vector<double>> linfx; // [field][t]: sup_xi <xi>^beta sup_x |g(x, xi)|
  bool has_linf = false;
};

// Streams radial nodes in and reduces them to the norms above. Additions for
// one radial node must arrive as a whole; node order does not matter for the
// result up to rounding, and the callers feed nodes in ascending order.
class NormAccumulator {
public:
  NormAccumulator(const VelocityGrid& g, const RadialGrid& rg, std::vector<double> times, int fields, bool linf,
                  XGridRule xr = {});

  // per_time[t] = nodal profile of `field` at radial node q and time t.
  void add(std::size_t q, int field, const std::vector<CVector>& per_time);

  NormSeries finish(double beta) const;
  // Squared L2_x norm per velocity node, unweighted.
  Eigen::VectorXd l2sq_per_node(int field, std::size_t t) const;

  // Largest tail-to-peak ratio of r^2 |g|^2 seen at the last radial node.
  double tail_ratio() const;

private:
  const VelocityGrid& g_;
  const RadialGrid& rg_;
  std::vector<double> times_;
  int fields_;
  bool linf_;
  std::vector<std::vector<double>> xs_;            // [t]
  std::vector<std::vector<Eigen::VectorXd>> l2_;   // [field][t]
  std::vector<std::vector<CMatrix>> gx_;           // [field][t] (N x Nx)
  std::vector<double> peak_, tail_;                // [field]
};

inline constexpr double kAliasTol = 1e-3;

// Weighted SG norm sqrt(sum_k k^{2m} n_k^2) from per-component series.
std::vector<double> weighted_sum_norm(const std::vector<std::vector<double>>& per_k, double m);

} // namespace bkuq

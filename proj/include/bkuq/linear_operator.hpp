#pragma once

#include "bkuq/collision_model.hpp"
#include "bkuq/kernel_assembly.hpp"
#include "bkuq/velocity_grid.hpp"

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace bkuq {

// Discrete collision invariants, orthonormal in the weighted inner product
// (f, g) = sum_i w_i f_i g_i. Columns are nodal values.
struct MacroBasis {
  Eigen::MatrixXd chi;      // N x J (J = 3 in axisym2d, 5 in full3d)
  Eigen::MatrixXd raw_gram; // Gram matrix of the analytic invariants before re-orthonormalization
  std::vector<int> labels;  // invariant index j in 0..4 for each column
  int count() const { return static_cast<int>(chi.cols()); }
};

MacroBasis macro_basis(const VelocityGrid& g);

enum class MacroPart { P0, P1 };

Eigen::VectorXd macro_project(const Eigen::VectorXd& f, const MacroBasis& mb, const VelocityGrid& g,
                              MacroPart part);

double inner(const VelocityGrid& g, const Eigen::VectorXd& f, const Eigen::VectorXd& h);

// Discretized d^k L^z / dz^k. Stored in symmetric coordinates u = sqrt(w) f:
// S = K - diag(nu) is symmetric and (S u, u) = (L f, f) in the weighted inner
// product.
struct LinearOperator {
  std::shared_ptr<const VelocityGrid> grid;
  double z = 0.0;
  int order = 0;
  Eigen::VectorXd nu;
  Eigen::MatrixXd K;
  AssemblyPath provenance = AssemblyPath::GradClosedForm;
  // max_j ||L_raw chi_j|| before the invariant-space correction
  double raw_null_residual = 0.0;

  int size() const { return static_cast<int>(nu.size()); }
  Eigen::MatrixXd symmetric() const;
  // Nodal in, nodal out.
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  bool is_zero() const { return nu.isZero(0.0) && K.isZero(0.0); }
};

// Unit operator for b(s) = s^power after symmetrization and correction.
struct UnitOperator {
  Eigen::VectorXd nu;
  Eigen::MatrixXd K;
  double raw_null_residual = 0.0;
};

// Threshold on the raw invariant residual above which assembly is declared
// unconverged.
inline constexpr double kRawNullTol = 2e-2;
// Residual required of the assembled (corrected) operator.
inline constexpr double kNullTol = 1e-4;

// Symmetrizes a raw nodal kernel in the weighted inner product and restricts it
// so that the discrete invariants are annihilated exactly:
//   S = P1 ((S_raw + S_raw^T) / 2) P1,  S_raw = W^{1/2} (K_raw - diag nu) W^{-1/2}.
UnitOperator finalize_unit(const VelocityGrid& g, const MacroBasis& mb, const Eigen::MatrixXd& K_raw_nodal,
                           const Eigen::VectorXd& nu);


// Assembles and memoizes unit operators on one grid.
class OperatorFactory {
public:
  OperatorFactory(std::shared_ptr<const VelocityGrid> grid, AssemblyParams params = {},
                  std::optional<std::filesystem::path> cache_dir = std::nullopt);

  const VelocityGrid& grid() const { return *grid_; }
  std::shared_ptr<const VelocityGrid> grid_ptr() const { return grid_; }
  const MacroBasis& macro() const { return macro_; }
  const AssemblyParams& params() const { return params_; }

  const UnitOperator& unit(int power, AssemblyPath path);
  LinearOperator assemble(const CollisionModel& model, double z, int k);
  // Raw nodal kernel of a unit operator (through the disk cache when configured).
  Eigen::MatrixXd raw_kernel(int power, AssemblyPath path);

private:
  std::shared_ptr<const VelocityGrid> grid_;
  AssemblyParams params_;
  std::optional<std::filesystem::path> cache_dir_;
  MacroBasis macro_;
  std::map<std::pair<int, int>, UnitOperator> units_;
  std::mutex mutex_;
};

// Assembly path used for a kernel family.
AssemblyPath path_for(KernelFamily f);

// Rayleigh-quotient spectral-gap estimates over microscopic fields.
struct GapEstimate {
  double sampled = 0.0; // min over random microscopic fields of -(Lf,f)/||P1 f||^2
  double exact = 0.0;   // infimum of the same quotient over the discrete microscopic space
};
GapEstimate spectral_gap_estimate(const LinearOperator& op, const MacroBasis& mb, int samples,
                                  unsigned seed);

// Norm of the kernel part from L^inf_{xi,beta} to L^inf_{xi,beta+1} (nodal rows).
double kernel_weighted_norm(const LinearOperator& op, double beta);

// Fitted C1, C2 with C1 (1 + |xi|) <= nu <= C2 (1 + |xi|) over the nodes.
std::pair<double, double> nu_bounds(const LinearOperator& op);

// Symmetric-coordinate helpers.
Eigen::VectorXd to_sym(const VelocityGrid& g, const Eigen::VectorXd& f);
Eigen::VectorXd from_sym(const VelocityGrid& g, const Eigen::VectorXd& u);

} // namespace bkuq

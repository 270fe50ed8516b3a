#include "bkuq/linear_operator.hpp"

#include "bkuq/common.hpp"
#include "bkuq/kernel_cache.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace bkuq {

double inner(const VelocityGrid& g, const Eigen::VectorXd& f, const Eigen::VectorXd& h) {
  return (g.w.array() * f.array() * h.array()).sum();
}

Eigen::VectorXd to_sym(const VelocityGrid& g, const Eigen::VectorXd& f) {
  return g.w.array().sqrt() * f.array();
}

Eigen::VectorXd from_sym(const VelocityGrid& g, const Eigen::VectorXd& u) {
  return u.array() / g.w.array().sqrt();
}

MacroBasis macro_basis(const VelocityGrid& g) {
  const int N = g.size();
  MacroBasis mb;
  if (g.mode == GridMode::Axisym2d)
    mb.labels = {0, 3, 4};
  else
    mb.labels = {0, 1, 2, 3, 4};
  const int J = static_cast<int>(mb.labels.size());
  Eigen::MatrixXd C(N, J);
  for (int i = 0; i < N; ++i) {
    const double s2 = g.pts.row(i).squaredNorm();
    const double sm = sqrt_maxwellian(s2);
    for (int c = 0; c < J; ++c) {
      const int j = mb.labels[c];
      double v;
      switch (j) {
      case 0: v = sm; break;
      case 1: v = g.pts(i, 0) * sm; break;
      case 2: v = g.pts(i, 1) * sm; break;
      case 3: v = g.pts(i, 2) * sm; break;
      default: v = (s2 - 3.0) / std::sqrt(6.0) * sm; break;
      }
      C(i, c) = v;
    }
  }
  mb.raw_gram = C.transpose() * g.w.asDiagonal() * C;
  // Modified Gram-Schmidt, two passes.
  for (int pass = 0; pass < 2; ++pass)
    for (int c = 0; c < J; ++c) {
      for (int d = 0; d < c; ++d) C.col(c) -= inner(g, C.col(d), C.col(c)) * C.col(d);
      C.col(c) /= std::sqrt(inner(g, C.col(c), C.col(c)));
    }
  mb.chi = C;
  return mb;
}

Eigen::VectorXd macro_project(const Eigen::VectorXd& f, const MacroBasis& mb, const VelocityGrid& g,
                              MacroPart part) {
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(f.size());
  for (int c = 0; c < mb.count(); ++c) p0 += inner(g, mb.chi.col(c), f) * mb.chi.col(c);
  return part == MacroPart::P0 ? p0 : Eigen::VectorXd(f - p0);
}

Eigen::MatrixXd LinearOperator::symmetric() const {
  Eigen::MatrixXd S = K;
  S.diagonal() -= nu;
  return S;
}

Eigen::VectorXd LinearOperator::apply(const Eigen::VectorXd& f) const {
  const Eigen::VectorXd u = to_sym(*grid, f);
  Eigen::VectorXd v = K * u - (nu.array() * u.array()).matrix();
  return from_sym(*grid, v);
}

UnitOperator finalize_unit(const VelocityGrid& g, const MacroBasis& mb, const Eigen::MatrixXd& K_raw,
                           const Eigen::VectorXd& nu) {
  const Eigen::ArrayXd sw = g.w.array().sqrt();
  Eigen::MatrixXd S = sw.matrix().asDiagonal() * K_raw * sw.inverse().matrix().asDiagonal();
  S.diagonal() -= nu;
  Eigen::MatrixXd Q(g.size(), mb.count());
  for (int c = 0; c < mb.count(); ++c) Q.col(c) = to_sym(g, mb.chi.col(c));
  UnitOperator u;
  u.raw_null_residual = (S * Q).colwise().norm().maxCoeff();
  Eigen::MatrixXd Ssym = 0.5 * (S + S.transpose());
  const Eigen::MatrixXd SQ = Ssym * Q;
  const Eigen::MatrixXd QtSQ = Q.transpose() * SQ;
  Eigen::MatrixXd F = Ssym - SQ * Q.transpose() - Q * SQ.transpose() + Q * QtSQ * Q.transpose();
  F = 0.5 * (F + F.transpose()).eval();
  u.nu = nu;
  u.K = F;
  u.K.diagonal() += nu;
  return u;
}

AssemblyPath path_for(KernelFamily f) {
  return f == KernelFamily::Proportional ? AssemblyPath::GradClosedForm : AssemblyPath::DirectQuadrature;
}

OperatorFactory::OperatorFactory(std::shared_ptr<const VelocityGrid> grid, AssemblyParams params,
                                 std::optional<std::filesystem::path> cache_dir)
    : grid_(std::move(grid)), params_(params), cache_dir_(std::move(cache_dir)), macro_(macro_basis(*grid_)) {}

Eigen::MatrixXd OperatorFactory::raw_kernel(int power, AssemblyPath path) {
  const std::uint64_t gh = grid_->hash();
  const std::uint64_t mh = fnv1a(unit_descriptor(power, path, params_));
  if (cache_dir_) {
    const auto file = cache_file(*cache_dir_, gh, mh, 0);
    if (std::filesystem::exists(file)) {
      auto loaded = read_kernel_cache(file, gh, mh);
      if (loaded && loaded->rows() == grid_->size()) return *loaded;
      std::cerr << "warning: kernel cache " << file << " does not match the current grid/model; rebuilding\n";
    }
  }
  Eigen::MatrixXd K = assemble_kernel_raw(*grid_, power, path, params_);
  if (cache_dir_) {
    std::filesystem::create_directories(*cache_dir_);
    write_kernel_cache(cache_file(*cache_dir_, gh, mh, 0), gh, mh, K);
  }
  return K;
}

const UnitOperator& OperatorFactory::unit(int power, AssemblyPath path) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_pair(power, static_cast<int>(path));
  auto it = units_.find(key);
  if (it != units_.end()) return it->second;
  const Eigen::MatrixXd K_raw = raw_kernel(power, path);
  Eigen::VectorXd nu(grid_->size());
  for (int i = 0; i < grid_->size(); ++i) nu(i) = collision_frequency(grid_->speed(i), power, path, params_);
  UnitOperator u = finalize_unit(*grid_, macro_, K_raw, nu);
  if (u.raw_null_residual > kRawNullTol) {
    std::ostringstream os;
    os << "kernel quadrature not converged: loss and gain parts leave an invariant residual of "
       << u.raw_null_residual << " (> " << kRawNullTol << ")";
    throw NumericalError(os.str());
  }
  return units_.emplace(key, std::move(u)).first->second;
}

LinearOperator OperatorFactory::assemble(const CollisionModel& model, double z, int k) {
  model.validate();
  const auto terms = model.terms(z, k);
  LinearOperator op;
  op.grid = grid_;
  op.z = z;
  op.order = k;
  op.provenance = path_for(model.family);
  const int N = grid_->size();
  op.nu = Eigen::VectorXd::Zero(N);
  op.K = Eigen::MatrixXd::Zero(N, N);
  for (const auto& t : terms) {
    const UnitOperator& u = unit(t.power, op.provenance);
    op.nu += t.coef * u.nu;
    op.K += t.coef * u.K;
    op.raw_null_residual += std::abs(t.coef) * u.raw_null_residual;
  }
  return op;
}

GapEstimate spectral_gap_estimate(const LinearOperator& op, const MacroBasis& mb, int samples,
                                  unsigned seed) {
  const VelocityGrid& g = *op.grid;
  const int N = g.size();
  GapEstimate out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  out.sampled = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    // random smooth field: sqrt(M) times a random polynomial in (xi_z, xi_rho^2, xi_x, xi_y)
    double c[10];
    for (double& v : c) v = nd(rng);
    Eigen::VectorXd f(N);
    for (int i = 0; i < N; ++i) {
      const double x = g.pts(i, 0), y = g.pts(i, 1), zz = g.pts(i, 2);
      const double r2 = x * x + y * y;
      const double poly = c[0] + c[1] * zz + c[2] * r2 + c[3] * zz * zz + c[4] * zz * r2 + c[5] * zz * zz * zz +
                          c[6] * r2 * r2 + c[7] * zz * zz * zz * zz + c[8] * x + c[9] * x * y;
      f(i) = poly * sqrt_maxwellian(g.pts.row(i).squaredNorm());
    }
    f = macro_project(f, mb, g, MacroPart::P1);
    const double nrm = inner(g, f, f);
    if (nrm <= 0.0) continue;
    const double q = -inner(g, op.apply(f), f) / nrm;
    out.sampled = std::min(out.sampled, q);
  }
  const Eigen::MatrixXd S = op.symmetric();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::MatrixXd Q(N, mb.count());
  for (int c = 0; c < mb.count(); ++c) Q.col(c) = to_sym(g, mb.chi.col(c));
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < N; ++j) {
    const Eigen::VectorXd v = es.eigenvectors().col(j);
    if ((Q.transpose() * v).norm() > 0.5) continue;
    best = std::max(best, es.eigenvalues()(j));
  }
  out.exact = -best;
  return out;
}

double kernel_weighted_norm(const LinearOperator& op, double beta) {
  const VelocityGrid& g = *op.grid;
  const int N = g.size();
  const Eigen::ArrayXd sw = g.w.array().sqrt();
  double best = 0.0;
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int j = 0; j < N; ++j)
      acc += std::abs(op.K(i, j) * sw(j) / sw(i)) * std::pow(1.0 + g.pts.row(j).squaredNorm(), -0.5 * beta);
    best = std::max(best, acc * std::pow(1.0 + g.pts.row(i).squaredNorm(), 0.5 * (beta + 1.0)));
  }
  return best;
}

std::pair<double, double> nu_bounds(const LinearOperator& op) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < op.size(); ++i) {
    const double r = op.nu(i) / (1.0 + op.grid->speed(i));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

} // namespace bkuq

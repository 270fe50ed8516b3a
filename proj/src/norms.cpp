#include "bkuq/norms.hpp"

#include "bkuq/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bkuq {

namespace {
constexpr double kPi = std::numbers::pi;
const double kPlancherel = 4.0 * kPi / std::pow(2.0 * kPi, 3);
const double kInverse = 1.0 / (2.0 * kPi * kPi);
} // namespace

std::vector<double> x_grid_for(double t, const XGridRule& r) {
  const double sq = std::sqrt(1.0 + t);
  const double dx = r.dx_scale * sq;
  const double xmax = r.factor * r.speed * t + r.width * sq + r.offset;
  std::vector<double> xs;
  for (int i = 0;; ++i) {
    const double x = i * dx;
    if (x > xmax) break;
    xs.push_back(x);
  }
  return xs;
}

double plancherel_l2sq(const RadialGrid& rg, const CVector& v) {
  double s = 0.0;
  for (std::size_t q = 0; q < rg.size(); ++q) s += rg.rule.w[q] * rg.rule.x[q] * rg.rule.x[q] * std::norm(v(q));
  return kPlancherel * s;
}

cplx radial_inverse(const RadialGrid& rg, const CVector& v, double x) {
  cplx s = 0.0;
  for (std::size_t q = 0; q < rg.size(); ++q) {
    const double r = rg.rule.x[q];
    const double k = x == 0.0 ? r * r : r * std::sin(r * x) / x;
    s += rg.rule.w[q] * k * v(q);
  }
  return kInverse * s;
}

NormAccumulator::NormAccumulator(const VelocityGrid& g, const RadialGrid& rg, std::vector<double> times, int fields,
                                 bool linf, XGridRule xr)
    : g_(g), rg_(rg), times_(std::move(times)), fields_(fields), linf_(linf) {
  const int N = g.size();
  const std::size_t T = times_.size();
  l2_.assign(fields_, std::vector<Eigen::VectorXd>(T, Eigen::VectorXd::Zero(N)));
  if (linf_) {
    for (double t : times_) xs_.push_back(x_grid_for(t, xr));
    gx_.resize(fields_);
    for (int f = 0; f < fields_; ++f)
      for (std::size_t t = 0; t < T; ++t)
        gx_[f].push_back(CMatrix::Zero(N, static_cast<Eigen::Index>(xs_[t].size())));
  }
  peak_.assign(fields_, 0.0);
  tail_.assign(fields_, 0.0);
}

void NormAccumulator::add(std::size_t q, int field, const std::vector<CVector>& per_time) {
  if (per_time.size() != times_.size()) throw ConfigError("norm accumulator: time count mismatch");
  const double r = rg_.rule.x[q], w = rg_.rule.w[q];
  const bool last = q + 1 == rg_.size();
  double pk = 0.0;
  for (const auto& v : per_time) pk = std::max(pk, r * r * v.cwiseAbs2().maxCoeff());
  peak_[field] = std::max(peak_[field], pk);
  if (last) tail_[field] = std::max(tail_[field], pk);
  parallel_for(times_.size(), [&](std::size_t t) {
    const CVector& v = per_time[t];
    l2_[field][t] += (w * r * r) * v.cwiseAbs2();
    if (!linf_) return;
    CMatrix& acc = gx_[field][t];
    const auto& xs = xs_[t];
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const double k = kInverse * w * (x == 0.0 ? r * r : r * std::sin(r * x) / x);
      acc.col(static_cast<Eigen::Index>(i)) += k * v;
    }
  });
}

double NormAccumulator::tail_ratio() const {
  double worst = 0.0;
  for (int f = 0; f < fields_; ++f)
    if (peak_[f] > 0.0) worst = std::max(worst, tail_[f] / peak_[f]);
  return worst;
}

Eigen::VectorXd NormAccumulator::l2sq_per_node(int field, std::size_t t) const { return kPlancherel * l2_[field][t]; }

NormSeries NormAccumulator::finish(double beta) const {
  const double tr = tail_ratio();
  if (tr > kAliasTol) {
    std::ostringstream os;
    os << "aliasing guard: integrand at the largest wavenumber is " << tr << " of its peak (> " << kAliasTol
       << "); increase R_η";
    throw ConfigError(os.str());
  }
  const int N = g_.size();
  Eigen::VectorXd wt(N);
  for (int i = 0; i < N; ++i) wt(i) = std::pow(1.0 + g_.pts.row(i).squaredNorm(), 0.5 * beta);
  NormSeries s;
  s.times = times_;
  s.has_linf = linf_;
  s.l2x.assign(fields_, std::vector<double>(times_.size(), 0.0));
  if (linf_) s.linfx.assign(fields_, std::vector<double>(times_.size(), 0.0));
  for (int f = 0; f < fields_; ++f)
    for (std::size_t t = 0; t < times_.size(); ++t) {
      s.l2x[f][t] = (wt.array() * (kPlancherel * l2_[f][t].array()).sqrt()).maxCoeff();
      if (linf_) {
        const Eigen::MatrixXd a = gx_[f][t].cwiseAbs();
        s.linfx[f][t] = (a.rowwise().maxCoeff().array() * wt.array()).maxCoeff();
      }
    }
  return s;
}

std::vector<double> weighted_sum_norm(const std::vector<std::vector<double>>& per_k, double m) {
  if (per_k.empty()) return {};
  std::vector<double> out(per_k[0].size(), 0.0);
  for (std::size_t k = 0; k < per_k.size(); ++k) {
    const double wk = std::pow(static_cast<double>(k + 1), 2.0 * m);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += wk * per_k[k][t] * per_k[k][t];
  }
  for (double& v : out) v = std::sqrt(v);
  return out;
}

} // namespace bkuq

#include "bkuq/collision_model.hpp"

#include "bkuq/common.hpp"
#include "bkuq/velocity_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bkuq {

KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "proportional") return KernelFamily::Proportional;
  if (s == "cubic") return KernelFamily::Cubic;
  throw ConfigError("unknown kernel family '" + s + "' (expected proportional or cubic)");
}

std::string to_string(KernelFamily f) { return f == KernelFamily::Proportional ? "proportional" : "cubic"; }

std::vector<AngularTerm> CollisionModel::terms(double z, int k) const {
  if (k < 0) throw ConfigError("derivative order must be nonnegative");
  if (k > alpha) {
    std::ostringstream os;
    os << "derivative order " << k << " exceeds the model's supported order alpha = " << alpha;
    throw ConfigError(os.str());
  }
  std::vector<AngularTerm> out;
  if (family == KernelFamily::Proportional) {
    if (k == 0) out.push_back({1, 1.0 + z * b1});
    else if (k == 1 && b1 != 0.0) out.push_back({1, b1});
  } else {
    if (k == 0) {
      out.push_back({1, 1.0});
      if (eps != 0.0) out.push_back({3, z * eps});
    } else if (k == 1 && eps != 0.0) {
      out.push_back({3, eps});
    }
  }
  return out;
}

double CollisionModel::b(double s, double z) const {
  double v = 0.0;
  for (const auto& t : terms(z, 0)) v += t.coef * std::pow(s, t.power);
  return v;
}

double CollisionModel::angular_integral(double z) const {
  double v = 0.0;
  for (const auto& t : terms(z, 0)) v += t.coef / (t.power + 1.0);
  return v;
}

std::pair<double, double> CollisionModel::positivity_bounds() const {
  // The integral is affine in z, so the extremes sit at the domain ends.
  const double a = angular_integral(-cz), c = angular_integral(cz);
  return {std::min(a, c), std::max(a, c)};
}

double CollisionModel::derivative_bound() const {
  // First derivative is z independent and higher ones vanish; max over s in [0,1] at s = 1.
  if (alpha < 1) return 0.0;
  return family == KernelFamily::Proportional ? std::abs(b1) : std::abs(eps);
}

ZPolynomial CollisionModel::c_poly() const {
  if (family != KernelFamily::Proportional)
    throw ConfigError("the stochastic Galerkin coupling requires a collision kernel linear in z "
                      "of the form c(z) s (proportional family); the cubic family is unsupported here");
  ZPolynomial p;
  p.coeffs = {1.0, b1};
  return p;
}

void CollisionModel::validate() const {
  if (!(cz > 0.0)) throw ConfigError("model: z-domain bound C_z must be positive");
  if (alpha < 0) throw ConfigError("model: alpha must be nonnegative");
  const auto [lo, hi] = positivity_bounds();
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "model: angular integral of b must stay positive on |z| <= C_z (min " << lo << ")";
    throw ConfigError(os.str());
  }
  (void)hi;
}

std::string CollisionModel::descriptor() const {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s;b1=%.17g;eps=%.17g;cz=%.17g;alpha=%d", to_string(family).c_str(), b1, eps,
                cz, alpha);
  return buf;
}

std::uint64_t CollisionModel::hash() const { return fnv1a(descriptor()); }

} // namespace bkuq

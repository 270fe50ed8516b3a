#include "bkuq/decay_fit.hpp"

#include "bkuq/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bkuq {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ConfigError("line fit: need at least two matching samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("line fit: degenerate abscissae");
  LineFit f;
  f.c1 = sxy / sxx;
  f.c0 = my - f.c1 * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.c0 - f.c1 * x[i];
    ss += e * e;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& norms, double t0, double t1,
                   bool log_corrected, int k) {
  if (times.size() != norms.size()) throw ConfigError("decay_fit: times and norms differ in length");
  if (!(t1 > t0)) throw ConfigError("decay_fit: degenerate fit window");
  std::vector<double> x, y, tw, nw;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t0 || times[i] > t1) continue;
    if (!(norms[i] > 0.0)) {
      std::ostringstream os;
      os << "decay_fit: nonpositive norm " << norms[i] << " at t = " << times[i];
      throw ConfigError(os.str());
    }
    x.push_back(std::log1p(times[i]));
    y.push_back(std::log(norms[i]));
    tw.push_back(times[i]);
    nw.push_back(norms[i]);
  }
  if (x.size() < 10) {
    std::ostringstream os;
    os << "decay_fit: only " << x.size() << " samples in the window [" << t0 << ", " << t1 << "] (need 10)";
    throw ConfigError(os.str());
  }
  const LineFit lf = fit_line(x, y);
  DecayFit f;
  f.exponent = lf.c1;
  f.log_c = lf.c0;
  f.residual = lf.rms;
  f.t0 = t0;
  f.t1 = t1;
  f.samples = static_cast<int>(x.size());
  f.log_corrected = log_corrected;
  f.k = k;
  if (log_corrected) {
    const std::size_t half = tw.size() / 2;
    for (std::size_t i = 0; i < tw.size(); ++i) {
      const double q = nw[i] * std::pow(1.0 + tw[i], 0.75) / std::pow(std::log1p(tw[i]), k - 1);
      if (i < half)
        f.first_half_max = std::max(f.first_half_max, q);
      else
        f.second_half_max = std::max(f.second_half_max, q);
    }
    f.bounded = f.second_half_max <= kBoundedRatio * f.first_half_max;
  }
  return f;
}

std::vector<double> log_time_grid(double a, double b, int n) {
  if (!(a > 0.0) || !(b > a) || n < 2) throw ConfigError("time grid: need 0 < a < b and at least two points");
  std::vector<double> t{0.0};
  for (int i = 0; i < n; ++i) t.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return t;
}

} // namespace bkuq

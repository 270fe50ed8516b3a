#pragma once

#include <vector>

namespace bkuq {

struct DecayFit {
  double exponent = 0.0;  // p in norm ~ C (1 + t)^p
  double log_c = 0.0;     // ln C
  double residual = 0.0;  // rms misfit of ln(norm) over the window
  double t0 = 0.0, t1 = 0.0;
  int samples = 0;
  // log-corrected boundedness of norm (1 + t)^{3/4} / ln(1 + t)^{k - 1}
  bool log_corrected = false;
  int k = 1;
  double first_half_max = 0.0;
  double second_half_max = 0.0;
  bool bounded = true;
};

inline constexpr double kBoundedRatio = 1.2;

DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& norms, double t0, double t1,
                   bool log_corrected = false, int k = 1);

// Time grid {0} U n log-spaced points on [a, b].
std::vector<double> log_time_grid(double a, double b, int n);

// Least-squares line y = c0 + c1 x; returns {c0, c1, rms residual}.
struct LineFit {
  double c0 = 0.0, c1 = 0.0, rms = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace bkuq

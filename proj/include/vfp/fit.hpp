#pragma once

// Least-squares decay-rate regression.

#include "vfp/hermite.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace vfp {

enum class DecayModel { algebraic, exponential };

struct DecayFit {
  double rate = 0.0;  // slope of log(value); negative for decay
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidArgument("line fit needs at least two paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

/// Fits log(value) against log(1 + t) (algebraic) or t (exponential) over
/// samples with window_begin <= t <= window_end.
inline DecayFit fit_decay(std::span<const double> t, std::span<const double> value, DecayModel model,
                          double window_begin = -std::numeric_limits<double>::infinity(),
                          double window_end = std::numeric_limits<double>::infinity()) {
  if (t.size() != value.size()) throw InvalidArgument("time and value series differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window_begin || t[i] > window_end) continue;
    if (!(value[i] > 0.0)) throw InvalidArgument("decay fit needs strictly positive values");
    x.push_back(model == DecayModel::algebraic ? std::log1p(t[i]) : t[i]);
    y.push_back(std::log(value[i]));
  }
  if (x.size() < 10) throw InvalidArgument("decay fit needs at least 10 samples in the window");
  const auto line = fit_line(x, y);
  return {line.slope, line.intercept, line.r_squared, x.size()};
}

inline std::vector<double> log_spaced(double a, double b, int n) {
  if (!(a > 0.0) || !(b > a) || n < 2) throw InvalidArgument("log_spaced needs 0 < a < b and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a * std::pow(b / a, double(i) / (n - 1));
  return out;
}

inline std::vector<double> lin_spaced(double a, double b, int n) {
  if (n < 2) throw InvalidArgument("lin_spaced needs n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * double(i) / (n - 1);
  return out;
}

}  // namespace vfp

#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "ppktp/errors.hpp"

namespace ppktp::numerics {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight_um_per_fs = 0.299792458;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Bracketed derivative-free root of `f` on [lo, hi] (TOMS 748, a Brent-class
/// method). Throws NumericalFailure when the interval does not bracket a root.
template <class F>
double find_root(F&& f, double lo, double hi, double x_tol, double f_lo, double f_hi,
                 std::uintmax_t max_iter = 200) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (lo > hi) {
    std::swap(lo, hi);
    std::swap(f_lo, f_hi);
  }
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw NumericalFailure("root not bracketed on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  }
  auto tol = [x_tol](double a, double b) {
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
    return std::abs(b - a) <= std::max(x_tol, floor);
  };
  std::uintmax_t iters = max_iter;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  if (iters >= max_iter) throw NumericalFailure("root finder hit the iteration limit");
  // Return the endpoint with the smaller residual.
  return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

template <class F>
double find_root(F&& f, double lo, double hi, double x_tol) {
  return find_root(f, lo, hi, x_tol, f(lo), f(hi));
}

/// Brent minimisation of `f` on [lo, hi]; returns (x_min, f(x_min)).
template <class F>
std::pair<double, double> minimize(F&& f, double lo, double hi) {
  std::uintmax_t iters = 200;
  return boost::math::tools::brent_find_minima(f, lo, hi, 52, iters);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw NumericalFailure("line fit needs at least two paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericalFailure("line fit with zero spread in x");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

}  // namespace ppktp::numerics

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "flexramp/core.hpp"

namespace flexramp {

enum class Orientation { convex, concave };
enum class Monotonicity { nondecreasing, nonincreasing };

/// One-dimensional piecewise-linear function stored as breakpoints with
/// values. Breakpoints are strictly increasing and span the construction
/// interval; orientation and monotonicity record what the builder proved
/// about the underlying parametric optimum.
struct PiecewiseLinearFn {
  std::vector<double> breakpoints;
  std::vector<double> values;
  Orientation orientation = Orientation::convex;
  Monotonicity monotonicity = Monotonicity::nondecreasing;
  std::vector<std::string> warnings;  // recursion caps hit during construction

  double lo() const { return breakpoints.front(); }
  double hi() const { return breakpoints.back(); }
  std::size_t segments() const { return breakpoints.size() - 1; }

  double slope(std::size_t seg) const {
    return (values[seg + 1] - values[seg]) /
           (breakpoints[seg + 1] - breakpoints[seg]);
  }

  /// Linear interpolation. Arguments slightly outside the domain (relative
  /// 1e-9) are clamped; anything further out is a caller bug.
  double value_at(double x) const {
    const double span = hi() - lo();
    const double fuzz = 1e-9 * std::max(1.0, std::abs(lo()) + span);
    if (x < lo() - fuzz || x > hi() + fuzz)
      throw Error(Errc::out_of_region, "argument outside piecewise domain");
    x = std::clamp(x, lo(), hi());
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    std::size_t seg = it == breakpoints.begin()
                          ? 0
                          : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    seg = std::min(seg, segments() - 1);
    return values[seg] + slope(seg) * (x - breakpoints[seg]);
  }

  /// Checks the declared shape: strictly increasing breakpoints, matching
  /// array sizes, slope ordering per orientation, and value ordering per
  /// monotonicity, all within `tol` scaled by local magnitudes.
  void validate(const Tolerances& tol = {}) const {
    if (breakpoints.size() < 2 || values.size() != breakpoints.size())
      throw Error(Errc::bad_input, "piecewise function needs matching breakpoints/values");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (breakpoints[i] <= breakpoints[i - 1])
        throw Error(Errc::bad_input, "breakpoints not strictly increasing");

    double max_slope = 0.0;
    for (std::size_t s = 0; s < segments(); ++s)
      max_slope = std::max(max_slope, std::abs(slope(s)));
    const double s_tol = slope_tol(tol, max_slope);
    for (std::size_t s = 1; s < segments(); ++s) {
      const double d = slope(s) - slope(s - 1);
      if (orientation == Orientation::convex && d < -s_tol)
        throw Error(Errc::bad_input, "slopes decrease on a convex function");
      if (orientation == Orientation::concave && d > s_tol)
        throw Error(Errc::bad_input, "slopes increase on a concave function");
    }

    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double v_tol = value_tol(tol, scale);
    for (std::size_t i = 1; i < values.size(); ++i) {
      const double d = values[i] - values[i - 1];
      if (monotonicity == Monotonicity::nondecreasing && d < -v_tol)
        throw Error(Errc::bad_input, "values decrease on a nondecreasing function");
      if (monotonicity == Monotonicity::nonincreasing && d > v_tol)
        throw Error(Errc::bad_input, "values increase on a nonincreasing function");
    }
  }
};

}  // namespace flexramp

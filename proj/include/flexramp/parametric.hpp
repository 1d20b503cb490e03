#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flexramp/core.hpp"
#include "flexramp/dispatch.hpp"
#include "flexramp/grid.hpp"
#include "flexramp/piecewise.hpp"
#include "flexramp/simplex.hpp"

namespace flexramp {

enum class ParamFn { min_cost, max_up, max_down };
enum class ParamArg { fu, fd, budget };

/// A one-dimensional restriction of one of the parametric dispatch optima:
/// which function, which argument varies, the value of the other argument
/// (nullopt relaxes the budget), and the interval to construct over.
struct SliceSpec {
  ParamFn fn = ParamFn::min_cost;
  ParamArg vary = ParamArg::fu;
  std::optional<double> fixed;
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

struct SlicePoint {
  double x = 0.0;
  double value = 0.0;
  double slope = 0.0;  // dual of the varying argument's constraint
};

class SliceEvaluator {
public:
  SliceEvaluator(const GridModel& model, const SliceSpec& spec,
                 const SimplexOptions& opts)
      : model_(model), spec_(spec), opts_(opts) {
    switch (spec.fn) {
      case ParamFn::min_cost:
        if (spec.vary == ParamArg::budget || !spec.fixed)
          throw Error(Errc::bad_input, "min-cost slices vary fu or fd with the other fixed");
        break;
      case ParamFn::max_up:
        if (spec.vary == ParamArg::fu)
          throw Error(Errc::bad_input, "max-up slices vary fd or the budget");
        if (spec.vary == ParamArg::budget && !spec.fixed)
          throw Error(Errc::bad_input, "budget slices need the fixed requirement value");
        break;
      case ParamFn::max_down:
        if (spec.vary == ParamArg::fd)
          throw Error(Errc::bad_input, "max-down slices vary fu or the budget");
        if (spec.vary == ParamArg::budget && !spec.fixed)
          throw Error(Errc::bad_input, "budget slices need the fixed requirement value");
        break;
    }
  }

  SlicePoint eval(double x, bool endpoint) const {
    LinearProgram lp = build(x);
    const LpSolution sol = solve(lp, opts_);
    if (sol.status != LpStatus::optimal) {
      if (endpoint)
        throw Error(Errc::endpoint_infeasible,
                    "slice endpoint is not solvable at x=" + std::to_string(x));
      throw Error(Errc::numerical_failure,
                  "slice interior point unexpectedly unsolvable at x=" + std::to_string(x));
    }
    SlicePoint p;
    p.x = x;
    p.value = sol.objective;
    switch (spec_.vary) {
      case ParamArg::fu:
        p.slope = labeled_eq_dual_sum(lp, sol, "fu[");
        break;
      case ParamArg::fd:
        p.slope = labeled_eq_dual_sum(lp, sol, "fd[");
        break;
      case ParamArg::budget: {
        const int row = lp.ineq_index("budget");
        p.slope = row >= 0 ? sol.ineq_duals[row] : 0.0;
        break;
      }
    }
    return p;
  }

private:
  LinearProgram build(double x) const {
    switch (spec_.fn) {
      case ParamFn::min_cost:
        return spec_.vary == ParamArg::fu ? build_minc_lp(model_, x, *spec_.fixed)
                                          : build_minc_lp(model_, *spec_.fixed, x);
      case ParamFn::max_up:
        return spec_.vary == ParamArg::fd ? build_maxur_lp(model_, spec_.fixed, x)
                                          : build_maxur_lp(model_, x, *spec_.fixed);
      case ParamFn::max_down:
      default:
        return spec_.vary == ParamArg::fu ? build_maxdr_lp(model_, spec_.fixed, x)
                                          : build_maxdr_lp(model_, x, *spec_.fixed);
    }
  }

  const GridModel& model_;
  SliceSpec spec_;
  SimplexOptions opts_;
};

using PwlEval = std::function<SlicePoint(double x, bool endpoint)>;

// Recursive construction of a piecewise-linear parametric optimum. The
// optimum at each endpoint carries a subgradient (the constraint dual):
// intersect the two tangents; if the function value at the intersection
// abscissa matches the intersection ordinate the interval is exactly two
// segments, otherwise recurse on both halves. Equal endpoint subgradients
// are confirmed affine with a single midpoint solve.
class SliceBuilder {
public:
  SliceBuilder(const PwlEval& eval, double lo, double hi, const Tolerances& tol)
      : eval_(eval), tol_(tol), span_(hi - lo) {}

  static constexpr int kMaxDepth = 60;

  void refine(const SlicePoint& a, const SlicePoint& b, int depth,
              std::vector<SlicePoint>& out, std::vector<std::string>& warnings) {
    const double width = b.x - a.x;
    if (width <= 1e-9 * span_ || depth >= kMaxDepth) {
      if (depth >= kMaxDepth)
        warnings.push_back("recursion depth cap reached near x=" + std::to_string(a.x));
      else if (width > 0.0)
        warnings.push_back("interval width floor reached near x=" + std::to_string(a.x));
      return;
    }

    const double scale = std::max({1.0, std::abs(a.value), std::abs(b.value)});
    const double v_tol = tol_.val_tol_rel * scale;
    const double slope_scale = std::max({1.0, std::abs(a.slope), std::abs(b.slope)});

    const auto line_gap = [&](const SlicePoint& p) {
      const double chord = a.value + (b.value - a.value) / width * (p.x - a.x);
      return std::abs(p.value - chord);
    };

    if (std::abs(a.slope - b.slope) <= tol_.slope_tol * slope_scale) {
      const SlicePoint mid = eval_(0.5 * (a.x + b.x), false);
      if (line_gap(mid) <= v_tol) return;  // affine across [a, b]
      out_of_line_split(a, mid, b, depth, out, warnings);
      return;
    }

    // Tangent intersection.
    const double cross_x =
        (b.value - a.value + a.slope * a.x - b.slope * b.x) / (a.slope - b.slope);
    const double merge = 1e-7 * span_;
    if (!(cross_x > a.x + merge && cross_x < b.x - merge)) {
      // Degenerate subgradients push the intersection onto an endpoint;
      // fall back to a midpoint probe.
      const SlicePoint mid = eval_(0.5 * (a.x + b.x), false);
      if (line_gap(mid) <= v_tol) return;
      out_of_line_split(a, mid, b, depth, out, warnings);
      return;
    }

    const double cross_val = a.value + a.slope * (cross_x - a.x);
    const SlicePoint probe = eval_(cross_x, false);
    if (std::abs(probe.value - cross_val) <= v_tol) {
      out.push_back(probe);  // verified breakpoint; both sides are tangent
      return;
    }
    out_of_line_split(a, probe, b, depth, out, warnings);
  }

private:
  void out_of_line_split(const SlicePoint& a, const SlicePoint& mid,
                         const SlicePoint& b, int depth,
                         std::vector<SlicePoint>& out,
                         std::vector<std::string>& warnings) {
    refine(a, mid, depth + 1, out, warnings);
    out.push_back(mid);
    refine(mid, b, depth + 1, out, warnings);
  }

  const PwlEval& eval_;
  Tolerances tol_;
  double span_;
};

// Evaluate-and-refine over [lo, hi]; returns x-ordered points including the
// endpoints, with near-coincident abscissae merged.
inline std::vector<SlicePoint> build_pwl_points(const PwlEval& eval, double lo,
                                                double hi, const Tolerances& tol,
                                                std::vector<std::string>& warnings) {
  const SlicePoint a = eval(lo, true);
  const SlicePoint b = eval(hi, true);
  std::vector<SlicePoint> pts;
  pts.push_back(a);
  SliceBuilder builder(eval, lo, hi, tol);
  builder.refine(a, b, 0, pts, warnings);
  pts.push_back(b);

  const double merge = 1e-7 * (hi - lo);
  std::vector<SlicePoint> merged;
  for (const auto& p : pts) {
    if (!merged.empty() && p.x - merged.back().x < merge) continue;
    merged.push_back(p);
  }
  if (merged.size() >= 2 && hi - merged.back().x > 1e-12 * (hi - lo)) merged.back() = b;
  return merged;
}

inline void slice_shape(const SliceSpec& spec, Orientation& orient,
                        Monotonicity& mono) {
  if (spec.fn == ParamFn::min_cost) {
    orient = Orientation::convex;
    mono = Monotonicity::nondecreasing;
  } else if (spec.vary == ParamArg::budget) {
    orient = Orientation::concave;
    mono = Monotonicity::nondecreasing;
  } else {
    orient = Orientation::concave;
    mono = Monotonicity::nonincreasing;
  }
}

}  // namespace detail

/// Construct the exact piecewise-linear restriction described by `spec`.
/// Both interval endpoints must be solvable. The result agrees with a
/// direct solve at every breakpoint (and, by linearity, in between).
inline PiecewiseLinearFn construct_slice(const GridModel& model,
                                         const SliceSpec& spec,
                                         const Tolerances& tol = {},
                                         const SimplexOptions& opts = {}) {
  if (!(spec.lo < spec.hi))
    throw Error(Errc::bad_input, "slice interval must have positive width");
  const detail::SliceEvaluator eval(model, spec, opts);
  std::vector<std::string> warnings;
  const std::vector<detail::SlicePoint> merged = detail::build_pwl_points(
      [&eval](double x, bool endpoint) { return eval.eval(x, endpoint); },
      spec.lo, spec.hi, tol, warnings);

  PiecewiseLinearFn fn;
  detail::slice_shape(spec, fn.orientation, fn.monotonicity);
  fn.warnings = std::move(warnings);
  double max_slope = 1.0;
  for (std::size_t i = 1; i < merged.size(); ++i)
    max_slope = std::max(max_slope, std::abs((merged[i].value - merged[i - 1].value) /
                                             (merged[i].x - merged[i - 1].x)));
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (i > 0 && i + 1 < merged.size()) {
      const auto& p = merged[i - 1];
      const auto& q = merged[i];
      const auto& r = merged[i + 1];
      const double s1 = (q.value - p.value) / (q.x - p.x);
      const double s2 = (r.value - q.value) / (r.x - q.x);
      if (std::abs(s2 - s1) <= tol.slope_tol * max_slope) continue;  // collinear
    }
    fn.breakpoints.push_back(merged[i].x);
    fn.values.push_back(merged[i].value);
  }
  return fn;
}

/// Feasible-parameter geometry of a model: the hard upper boundary curves,
/// the free-ramping widths and lower boundary curves (at the undistorted
/// base cost), and the maximal cost over the coupled region found by a
/// vertex scan of the boundary breakpoints.
struct FeasibleBounds {
  double base_cost = 0.0;
  double fu_hard_max = 0.0;  // largest feasible fu at fd = 0
  double fd_hard_max = 0.0;
  std::optional<PiecewiseLinearFn> fu_upper;  // fd -> max feasible fu
  std::optional<PiecewiseLinearFn> fd_upper;  // fu -> max feasible fd
  double fu_free = 0.0;  // ramping available at the base cost, fd = 0
  double fd_free = 0.0;
  std::optional<PiecewiseLinearFn> fu_lower;  // fd -> free fu width
  std::optional<PiecewiseLinearFn> fd_lower;
  double theta_max = 0.0;
  double argmax_fu = 0.0;
  double argmax_fd = 0.0;

  bool degenerate() const { return fu_hard_max <= 1e-9 && fd_hard_max <= 1e-9; }
};

inline FeasibleBounds feasible_bounds(const GridModel& model,
                                      const Tolerances& tol = {},
                                      const SimplexOptions& opts = {}) {
  FeasibleBounds out;
  {
    const LpSolution base = solve(build_minc_lp(model, 0.0, 0.0), opts);
    if (base.status != LpStatus::optimal)
      throw Error(Errc::base_infeasible,
                  "model is not dispatchable without ramping requirements");
    out.base_cost = base.objective;
  }

  const auto max_ramp = [&](ParamFn fn, std::optional<double> budget) {
    const LinearProgram lp = fn == ParamFn::max_up
                                 ? build_maxur_lp(model, budget, 0.0)
                                 : build_maxdr_lp(model, budget, 0.0);
    const LpSolution sol = solve(lp, opts);
    if (sol.status != LpStatus::optimal)
      throw Error(Errc::base_infeasible, "ramping capability probe failed");
    return std::max(sol.objective, 0.0);
  };

  out.fu_hard_max = max_ramp(ParamFn::max_up, std::nullopt);
  out.fd_hard_max = max_ramp(ParamFn::max_down, std::nullopt);
  out.fu_free = max_ramp(ParamFn::max_up, out.base_cost);
  out.fd_free = max_ramp(ParamFn::max_down, out.base_cost);

  const double eps = 1e-9 * std::max(1.0, out.fu_hard_max + out.fd_hard_max);
  if (out.fd_hard_max > eps)
    out.fu_upper = construct_slice(
        model, {ParamFn::max_up, ParamArg::fd, std::nullopt, 0.0, out.fd_hard_max},
        tol, opts);
  if (out.fu_hard_max > eps)
    out.fd_upper = construct_slice(
        model, {ParamFn::max_down, ParamArg::fu, std::nullopt, 0.0, out.fu_hard_max},
        tol, opts);
  if (out.fd_free > eps)
    out.fu_lower = construct_slice(
        model, {ParamFn::max_up, ParamArg::fd, out.base_cost, 0.0, out.fd_free},
        tol, opts);
  if (out.fu_free > eps)
    out.fd_lower = construct_slice(
        model, {ParamFn::max_down, ParamArg::fu, out.base_cost, 0.0, out.fu_free},
        tol, opts);

  // The cost is convex over the coupled region, so its maximum sits at a
  // region vertex: scan the corners plus every boundary-curve breakpoint.
  std::vector<std::pair<double, double>> vertices{{0.0, 0.0},
                                                  {out.fu_hard_max, 0.0},
                                                  {0.0, out.fd_hard_max}};
  if (out.fu_upper)
    for (std::size_t i = 0; i < out.fu_upper->breakpoints.size(); ++i)
      vertices.emplace_back(out.fu_upper->values[i], out.fu_upper->breakpoints[i]);
  if (out.fd_upper)
    for (std::size_t i = 0; i < out.fd_upper->breakpoints.size(); ++i)
      vertices.emplace_back(out.fd_upper->breakpoints[i], out.fd_upper->values[i]);

  out.theta_max = out.base_cost;
  for (const auto& [fu, fd] : vertices) {
    const LpSolution sol = solve(build_minc_lp(model, std::max(fu, 0.0), std::max(fd, 0.0)), opts);
    if (sol.status != LpStatus::optimal) continue;  // float dust past the boundary
    if (sol.objective > out.theta_max + value_tol(tol, out.theta_max)) {
      out.theta_max = sol.objective;
      out.argmax_fu = fu;
      out.argmax_fd = fd;
    }
  }
  return out;
}

}  // namespace flexramp

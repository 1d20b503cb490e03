#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "flexramp/core.hpp"
#include "flexramp/dispatch.hpp"
#include "flexramp/grid.hpp"
#include "flexramp/parametric.hpp"

namespace flexramp {

struct SurfacePoint {
  double fu = 0.0;
  double fd = 0.0;
};

struct SurfaceVertex {
  double fu = 0.0;
  double fd = 0.0;
  double cost = 0.0;
};

/// One level-set polyline of the dispatch cost, ordered from its anchor on
/// the fu = 0 axis to its anchor on the fd = 0 axis. `level` is absent for
/// the feasibility boundary, whose vertices are not equi-cost.
struct SurfaceChain {
  std::optional<double> level;
  std::vector<int> vertex_ids;
};

/// Triangulated cost surface covering the feasible region; queries inside
/// the free-ramping (non-interesting) part short-circuit to the base cost.
/// Immutable once built; queries are safe to run concurrently.
struct CostSurface {
  std::vector<SurfaceVertex> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> band_first;  // band b owns triangles [band_first[b], band_first[b+1])
  std::vector<SurfaceChain> chains;
  std::size_t num_sections = 0;     // distinct boundary-breakpoint cost levels
  std::size_t healing_levels = 0;   // extra levels inserted by verification
  double base_cost = 0.0;
  FeasibleBounds bounds;

  bool empty_region() const { return triangles.empty(); }
  double extent() const {
    return std::max(1.0, bounds.fu_hard_max + bounds.fd_hard_max);
  }
};

enum class QueryRegion { interesting, non_interesting };

struct QueryResult {
  double cost = 0.0;
  QueryRegion region = QueryRegion::interesting;
};

struct ContourSet {
  std::vector<double> levels;
  std::vector<std::vector<SurfacePoint>> polylines;
};

namespace detail {

inline double cross2(const SurfacePoint& o, const SurfacePoint& a,
                     const SurfacePoint& b) {
  return (a.fu - o.fu) * (b.fd - o.fd) - (a.fd - o.fd) * (b.fu - o.fu);
}

inline double triangle_area(const SurfacePoint& a, const SurfacePoint& b,
                            const SurfacePoint& c) {
  return 0.5 * std::abs(cross2(a, b, c));
}

// Level-set geometry at a fixed budget: each level set is convex, so its
// upper-right boundary is traced twice, once per orientation, and the two
// graphs are merged. The second orientation contributes any axis-parallel
// cap the first one cannot represent as a function graph.
inline std::vector<SurfacePoint> build_level_geometry(
    const GridModel& model, std::optional<double> level, const Tolerances& tol,
    const SimplexOptions& opts) {
  const auto probe = [&](bool up) {
    const LinearProgram lp =
        up ? build_maxur_lp(model, level, 0.0) : build_maxdr_lp(model, level, 0.0);
    const LpSolution sol = solve(lp, opts);
    if (sol.status != LpStatus::optimal)
      throw Error(Errc::numerical_failure, "level-set probe failed to solve");
    return std::max(sol.objective, 0.0);
  };
  const double u_right = probe(true);
  const double d_top = probe(false);
  const double weps = 1e-9 * std::max(1.0, u_right + d_top);

  std::vector<SurfacePoint> pts;
  if (d_top > weps) {
    const PiecewiseLinearFn fn = construct_slice(
        model, {ParamFn::max_up, ParamArg::fd, level, 0.0, d_top}, tol, opts);
    for (std::size_t i = 0; i < fn.breakpoints.size(); ++i)
      pts.push_back({std::max(fn.values[i], 0.0), fn.breakpoints[i]});
  }
  if (u_right > weps) {
    const PiecewiseLinearFn fn = construct_slice(
        model, {ParamFn::max_down, ParamArg::fu, level, 0.0, u_right}, tol, opts);
    for (std::size_t i = 0; i < fn.breakpoints.size(); ++i)
      pts.push_back({fn.breakpoints[i], std::max(fn.values[i], 0.0)});
  }
  if (pts.empty()) pts.push_back({u_right, d_top});

  // Snap coordinates that differ only by solver noise onto shared values so
  // the union of the two graphs sorts into a clean staircase.
  const double geps = 1e-7 * std::max(1.0, u_right + d_top);
  const auto snap = [&](auto&& get, auto&& set) {
    std::vector<double> vals;
    vals.reserve(pts.size());
    for (const auto& p : pts) vals.push_back(get(p));
    std::sort(vals.begin(), vals.end());
    std::vector<double> reps;
    for (double v : vals)
      if (reps.empty() || v - reps.back() > geps) reps.push_back(v);
    for (auto& p : pts) {
      const auto it = std::upper_bound(reps.begin(), reps.end(), get(p));
      const double rep = it == reps.begin() ? reps.front() : *(it - 1);
      set(p, std::abs(get(p) - rep) <= geps ? rep : get(p));
    }
  };
  snap([](const SurfacePoint& p) { return p.fu; },
       [](SurfacePoint& p, double v) { p.fu = v; });
  snap([](const SurfacePoint& p) { return p.fd; },
       [](SurfacePoint& p, double v) { p.fd = v; });

  std::sort(pts.begin(), pts.end(), [](const SurfacePoint& a, const SurfacePoint& b) {
    if (a.fu != b.fu) return a.fu < b.fu;
    return a.fd > b.fd;
  });
  std::vector<SurfacePoint> clean;
  for (const auto& p : pts) {
    if (!clean.empty() && std::abs(p.fu - clean.back().fu) <= geps &&
        std::abs(p.fd - clean.back().fd) <= geps)
      continue;
    // Monotone staircase: clamp float dust that would bend it upward.
    SurfacePoint q = p;
    if (!clean.empty() && q.fd > clean.back().fd) {
      if (q.fd - clean.back().fd > 1e-5 * std::max(1.0, u_right + d_top))
        throw Error(Errc::numerical_failure, "level-set boundary is not monotone");
      q.fd = clean.back().fd;
    }
    clean.push_back(q);
  }
  // Drop collinear interior points; the cost refinement below reinserts any
  // point that carries a genuine cost kink.
  std::vector<SurfacePoint> out;
  for (const auto& p : clean) {
    while (out.size() >= 2 &&
           std::abs(cross2(out[out.size() - 2], out.back(), p)) <=
               1e-9 * std::max(1.0, u_right + d_top) * std::max(1.0, u_right + d_top))
      out.pop_back();
    out.push_back(p);
  }
  return out;
}

struct RefinedChain {
  std::vector<SurfacePoint> pts;
  std::vector<double> costs;
};

// Insert the dispatch-cost kinks of MinC restricted to each chain segment,
// assigning every chain vertex its exact solved cost. Interior level-set
// segments are equi-cost and resolve with one midpoint confirmation; arcs
// shared with the feasibility boundary pick up real kinks here.
inline RefinedChain refine_chain_costs(const GridModel& model,
                                       const std::vector<SurfacePoint>& chain,
                                       const Tolerances& tol,
                                       const SimplexOptions& opts) {
  const auto solve_at = [&](const SurfacePoint& p) {
    const LinearProgram lp =
        build_minc_lp(model, std::max(p.fu, 0.0), std::max(p.fd, 0.0));
    const LpSolution sol = solve(lp, opts);
    if (sol.status != LpStatus::optimal)
      throw Error(Errc::numerical_failure, "chain vertex is not dispatchable");
    return std::pair{sol.objective,
                     std::pair{labeled_eq_dual_sum(lp, sol, "fu["),
                               labeled_eq_dual_sum(lp, sol, "fd[")}};
  };

  RefinedChain out;
  if (chain.size() == 1) {
    out.pts = chain;
    out.costs.push_back(solve_at(chain[0]).first);
    return out;
  }

  for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
    const SurfacePoint a = chain[s];
    const SurfacePoint b = chain[s + 1];
    const double dfu = b.fu - a.fu;
    const double dfd = b.fd - a.fd;
    const auto eval = [&](double t, bool) {
      const auto [value, duals] = solve_at({a.fu + t * dfu, a.fd + t * dfd});
      SlicePoint sp;
      sp.x = t;
      sp.value = value;
      sp.slope = duals.first * dfu + duals.second * dfd;
      return sp;
    };
    std::vector<std::string> warnings;
    const std::vector<SlicePoint> seg = build_pwl_points(eval, 0.0, 1.0, tol, warnings);
    const std::size_t keep = s + 2 == chain.size() ? seg.size() : seg.size() - 1;
    for (std::size_t i = 0; i < keep; ++i) {
      out.pts.push_back({a.fu + seg[i].x * dfu, a.fd + seg[i].x * dfd});
      out.costs.push_back(seg[i].value);
    }
  }

  // Degenerate subgradients on equi-cost runs can leave probe points that
  // are collinear both geometrically and in cost; they carry no structure.
  double cost_scale = 1.0;
  for (double c : out.costs) cost_scale = std::max(cost_scale, std::abs(c));
  double extent = 1.0;
  for (const auto& p : out.pts) extent = std::max(extent, p.fu + p.fd);
  const double cross_tol = 1e-9 * extent * extent;
  bool changed = true;
  while (changed && out.pts.size() > 2) {
    changed = false;
    for (std::size_t i = 1; i + 1 < out.pts.size(); ++i) {
      const SurfacePoint& p = out.pts[i - 1];
      const SurfacePoint& q = out.pts[i];
      const SurfacePoint& r = out.pts[i + 1];
      if (std::abs(cross2(p, q, r)) > cross_tol) continue;
      const double span = std::hypot(r.fu - p.fu, r.fd - p.fd);
      if (span <= 0.0) continue;
      const double t = std::hypot(q.fu - p.fu, q.fd - p.fd) / span;
      const double line = out.costs[i - 1] + t * (out.costs[i + 1] - out.costs[i - 1]);
      if (std::abs(out.costs[i] - line) > tol.val_tol_rel * cost_scale) continue;
      out.pts.erase(out.pts.begin() + i);
      out.costs.erase(out.costs.begin() + i);
      changed = true;
      break;
    }
  }
  return out;
}

// Merge two nested convex chains into triangles by sweeping edge
// directions: the next edge taken is always the less-rotated one, so
// parallel runs pair up into trapezoids and the bridging diagonals land on
// kink-to-kink lines.
inline void zip_chains(const std::vector<int>& inner, const std::vector<int>& outer,
                       const std::vector<SurfaceVertex>& verts, double area_tol,
                       std::vector<std::array<int, 3>>& tris) {
  const auto angle = [&](int from, int to) {
    return std::atan2(verts[to].fd - verts[from].fd, verts[to].fu - verts[from].fu);
  };
  std::size_t i = 0, j = 0;
  while (i + 1 < inner.size() || j + 1 < outer.size()) {
    bool take_inner;
    if (i + 1 >= inner.size())
      take_inner = false;
    else if (j + 1 >= outer.size())
      take_inner = true;
    else
      take_inner = angle(inner[i], inner[i + 1]) >= angle(outer[j], outer[j + 1]) - 1e-12;

    std::array<int, 3> t{};
    if (take_inner) {
      t = {inner[i], outer[j], inner[i + 1]};
      ++i;
    } else {
      t = {inner[i], outer[j], outer[j + 1]};
      ++j;
    }
    const SurfacePoint p0{verts[t[0]].fu, verts[t[0]].fd};
    const SurfacePoint p1{verts[t[1]].fu, verts[t[1]].fd};
    const SurfacePoint p2{verts[t[2]].fu, verts[t[2]].fd};
    if (triangle_area(p0, p1, p2) > area_tol) tris.push_back(t);
  }
}

inline double point_segment_distance(const SurfacePoint& p, const SurfacePoint& a,
                                     const SurfacePoint& b) {
  const double dx = b.fu - a.fu, dy = b.fd - a.fd;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.fu - a.fu) * dx + (p.fd - a.fd) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.fu - (a.fu + t * dx), p.fd - (a.fd + t * dy));
}

// A level curve that merges into the feasibility boundary can kink exactly
// on a straight boundary edge. Such a kink carries no facet structure when
// the cost surface is a single plane across the whole detour; keeping it
// would leave a T-vertex against the boundary polyline. A kink is removed
// only after direct solves confirm that one plane fits the detour triangle
// and probes on both sides of each adjacent chain edge.
inline std::vector<SurfacePoint> drop_boundary_t_vertices(
    const GridModel& model, std::vector<SurfacePoint> chain,
    const std::vector<SurfacePoint>& outer, const Tolerances& tol,
    const SimplexOptions& opts, double extent) {
  const double geps = 1e-6 * extent;
  const auto near_outer_vertex = [&](const SurfacePoint& p) {
    for (const auto& q : outer)
      if (std::hypot(p.fu - q.fu, p.fd - q.fd) <= geps) return true;
    return false;
  };
  const auto on_outer_edge = [&](const SurfacePoint& p) {
    for (std::size_t i = 0; i + 1 < outer.size(); ++i)
      if (point_segment_distance(p, outer[i], outer[i + 1]) <= geps) return true;
    return false;
  };
  const auto minc = [&](const SurfacePoint& p) -> std::optional<double> {
    if (p.fu < 0.0 || p.fd < 0.0) return std::nullopt;
    const LpSolution sol = solve(build_minc_lp(model, p.fu, p.fd), opts);
    if (sol.status != LpStatus::optimal) return std::nullopt;
    return sol.objective;
  };

  bool changed = true;
  while (changed && chain.size() > 2) {
    changed = false;
    for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
      const SurfacePoint v = chain[i];
      if (near_outer_vertex(v) || !on_outer_edge(v)) continue;
      const SurfacePoint u = chain[i - 1];
      const SurfacePoint w = chain[i + 1];
      const auto cu = minc(u), cv = minc(v), cw = minc(w);
      if (!cu || !cv || !cw) continue;

      // Plane through the three detour corners.
      const double den = (w.fd - u.fd) * (v.fu - u.fu) - (w.fu - u.fu) * (v.fd - u.fd);
      if (std::abs(den) < 1e-12 * extent * extent) continue;
      const double gv = *cv - *cu, gw = *cw - *cu;
      const double gfu = (gv * (w.fd - u.fd) - gw * (v.fd - u.fd)) / den;
      const double gfd = (gw * (v.fu - u.fu) - gv * (w.fu - u.fu)) / den;
      const auto plane = [&](const SurfacePoint& p) {
        return *cu + gfu * (p.fu - u.fu) + gfd * (p.fd - u.fd);
      };
      const double v_tol = value_tol(tol, std::max({*cu, *cv, *cw}));

      std::vector<SurfacePoint> probes{{0.5 * (u.fu + w.fu), 0.5 * (u.fd + w.fd)},
                                       {(u.fu + v.fu + w.fu) / 3.0,
                                        (u.fd + v.fd + w.fd) / 3.0}};
      for (const auto& [a, b] : {std::pair{u, v}, std::pair{v, w}}) {
        const double len = std::hypot(b.fu - a.fu, b.fd - a.fd);
        if (len <= 0.0) continue;
        const double eps = std::min(1e-3 * extent, 0.25 * len);
        double nfu = (b.fd - a.fd) / len, nfd = -(b.fu - a.fu) / len;
        const SurfacePoint mid{0.5 * (a.fu + b.fu), 0.5 * (a.fd + b.fd)};
        if (nfu * mid.fu + nfd * mid.fd < 0.0) {
          nfu = -nfu;
          nfd = -nfd;
        }
        probes.push_back({mid.fu + eps * nfu, mid.fd + eps * nfd});
        probes.push_back({mid.fu - eps * nfu, mid.fd - eps * nfd});
      }

      bool affine = true;
      for (const auto& p : probes) {
        const auto c = minc(p);
        if (!c) continue;  // beyond the boundary: no constraint from this probe
        if (std::abs(*c - plane(p)) > v_tol) {
          affine = false;
          break;
        }
      }
      if (!affine) continue;
      chain.erase(chain.begin() + i);
      changed = true;
      break;
    }
  }
  return chain;
}

inline bool inside_chain_region(const std::vector<SurfaceVertex>& verts,
                                const std::vector<int>& chain, SurfacePoint p,
                                double cross_tol) {
  // Region = clockwise polygon (0,0) -> chain start -> ... -> chain end -> (0,0).
  std::vector<SurfacePoint> poly;
  poly.push_back({0.0, 0.0});
  for (int id : chain) poly.push_back({verts[id].fu, verts[id].fd});
  poly.push_back({0.0, 0.0});
  for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
    const SurfacePoint& a = poly[k];
    const SurfacePoint& b = poly[k + 1];
    if (std::abs(a.fu - b.fu) < 1e-15 && std::abs(a.fd - b.fd) < 1e-15) continue;
    if (cross2(a, b, p) > cross_tol) return false;
  }
  return true;
}

}  // namespace detail

namespace detail {

inline void assemble_surface(const GridModel& model, const std::vector<double>& levels,
                             const std::vector<SurfacePoint>& outer_geo,
                             const Tolerances& tol, const SimplexOptions& opts,
                             CostSurface& s) {
  s.vertices.clear();
  s.triangles.clear();
  s.band_first.clear();
  s.chains.clear();

  // Geometry first: the feasibility boundary anchors the T-vertex cleanup,
  // then every chain gets exact per-vertex costs.
  std::vector<RefinedChain> refined;
  for (double level : levels) {
    std::vector<SurfacePoint> geo = build_level_geometry(model, level, tol, opts);
    geo = drop_boundary_t_vertices(model, std::move(geo), outer_geo, tol, opts,
                                   s.extent());
    refined.push_back(refine_chain_costs(model, geo, tol, opts));
  }
  refined.push_back(refine_chain_costs(model, outer_geo, tol, opts));

  const double q = 1e-7 * s.extent();
  std::vector<std::pair<long long, long long>> keys;
  const auto vertex_id = [&](const SurfacePoint& p, double cost) {
    const std::pair<long long, long long> key{std::llround(p.fu / q),
                                              std::llround(p.fd / q)};
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i] == key) return static_cast<int>(i);
    keys.push_back(key);
    s.vertices.push_back({p.fu, p.fd, cost});
    return static_cast<int>(s.vertices.size() - 1);
  };

  for (std::size_t c = 0; c < refined.size(); ++c) {
    SurfaceChain chain;
    chain.level = c + 1 < refined.size() ? std::optional<double>(levels[c]) : std::nullopt;
    for (std::size_t i = 0; i < refined[c].pts.size(); ++i) {
      const int id = vertex_id(refined[c].pts[i], refined[c].costs[i]);
      if (chain.vertex_ids.empty() || chain.vertex_ids.back() != id)
        chain.vertex_ids.push_back(id);
    }
    s.chains.push_back(std::move(chain));
  }

  const double area_tol = 1e-9 * s.extent() * s.extent();
  s.band_first.push_back(0);
  for (std::size_t c = 0; c + 1 < s.chains.size(); ++c) {
    zip_chains(s.chains[c].vertex_ids, s.chains[c + 1].vertex_ids, s.vertices,
               area_tol, s.triangles);
    s.band_first.push_back(static_cast<int>(s.triangles.size()));
  }

  // The non-interesting region is part of the feasible region and is tiled
  // too, as a fan from the origin; queries short-circuit before reaching it.
  const int origin = vertex_id({0.0, 0.0}, s.base_cost);
  const auto& free_ids = s.chains.front().vertex_ids;
  for (std::size_t i = 0; i + 1 < free_ids.size(); ++i) {
    const std::array<int, 3> t{origin, free_ids[i], free_ids[i + 1]};
    const SurfacePoint p0{s.vertices[t[0]].fu, s.vertices[t[0]].fd};
    const SurfacePoint p1{s.vertices[t[1]].fu, s.vertices[t[1]].fd};
    const SurfacePoint p2{s.vertices[t[2]].fu, s.vertices[t[2]].fd};
    if (triangle_area(p0, p1, p2) > area_tol) s.triangles.push_back(t);
  }
}

}  // namespace detail

/// Build the triangulated surface: boundary slices fix the section levels,
/// one level-set chain is constructed per distinct boundary-breakpoint
/// cost, the feasibility boundary closes the stack, and adjacent chains
/// are zipped into triangles. Every triangle's centroid is verified against
/// a direct solve; a failed triangle's true centroid cost is inserted as an
/// additional level and the stitch is redone, so the postcondition holds
/// even when a facet change does not reach the axis boundaries.
inline CostSurface build_surface(const GridModel& model, const Tolerances& tol = {},
                                 const SimplexOptions& opts = {}) {
  CostSurface s;
  s.bounds = feasible_bounds(model, tol, opts);
  s.base_cost = s.bounds.base_cost;
  if (s.bounds.degenerate() || s.bounds.fu_hard_max <= 1e-9 ||
      s.bounds.fd_hard_max <= 1e-9)
    return s;  // region collapses to a point or a segment: nothing to tile

  std::vector<double> levels;
  const auto add_levels = [&](const PiecewiseLinearFn& fn) {
    for (double v : fn.values) levels.push_back(v);
  };
  add_levels(construct_slice(
      model, {ParamFn::min_cost, ParamArg::fd, 0.0, 0.0, s.bounds.fd_hard_max}, tol,
      opts));
  add_levels(construct_slice(
      model, {ParamFn::min_cost, ParamArg::fu, 0.0, 0.0, s.bounds.fu_hard_max}, tol,
      opts));
  std::sort(levels.begin(), levels.end());
  std::vector<double> distinct;
  for (double v : levels)
    if (distinct.empty() || v - distinct.back() > 1e-9 * std::max(1.0, std::abs(v)))
      distinct.push_back(v);
  s.num_sections = distinct.size();

  const std::vector<SurfacePoint> outer_geo =
      detail::build_level_geometry(model, std::nullopt, tol, opts);

  for (int attempt = 0; attempt < 8; ++attempt) {
    detail::assemble_surface(model, distinct, outer_geo, tol, opts, s);

    std::vector<double> extra;
    for (const auto& t : s.triangles) {
      const double fu =
          (s.vertices[t[0]].fu + s.vertices[t[1]].fu + s.vertices[t[2]].fu) / 3.0;
      const double fd =
          (s.vertices[t[0]].fd + s.vertices[t[1]].fd + s.vertices[t[2]].fd) / 3.0;
      const double interp =
          (s.vertices[t[0]].cost + s.vertices[t[1]].cost + s.vertices[t[2]].cost) / 3.0;
      const LpSolution sol =
          solve(build_minc_lp(model, std::max(fu, 0.0), std::max(fd, 0.0)), opts);
      if (sol.status != LpStatus::optimal)
        throw Error(Errc::numerical_failure, "triangle centroid is not dispatchable");
      if (std::abs(sol.objective - interp) > value_tol(tol, sol.objective))
        extra.push_back(sol.objective);
    }
    if (extra.empty()) return s;

    std::size_t inserted = 0;
    for (double v : extra) {
      const auto at = std::lower_bound(distinct.begin(), distinct.end(), v);
      if ((at == distinct.end() || *at - v > 1e-9 * std::max(1.0, v)) &&
          (at == distinct.begin() || v - *(at - 1) > 1e-9 * std::max(1.0, v))) {
        distinct.insert(at, v);
        ++inserted;
      }
    }
    s.healing_levels += inserted;
    if (inserted == 0)
      throw Error(Errc::numerical_failure,
                  "triangulation failed verification without a level to insert");
  }
  throw Error(Errc::numerical_failure,
              "triangulation could not be stitched into exact triangles");
}

/// Interpolated cost at (fu, fd). Points inside the free-ramping region
/// answer the base cost with the non_interesting flag; points beyond the
/// feasibility boundary raise Error(Errc::out_of_region).
inline QueryResult query(const CostSurface& s, double fu, double fd) {
  const double geps = 1e-9 * s.extent();
  if (fu < -geps || fd < -geps)
    throw Error(Errc::out_of_region, "requirements must be nonnegative");
  const SurfacePoint p{std::max(fu, 0.0), std::max(fd, 0.0)};

  if (s.empty_region()) {
    if (p.fu <= geps && p.fd <= geps)
      return {s.base_cost, QueryRegion::non_interesting};
    throw Error(Errc::out_of_region,
                "region of interest is degenerate; only (0,0) is dispatchable");
  }

  const double cross_tol = 1e-9 * s.extent() * s.extent();
  const auto inside = [&](std::size_t c) {
    return detail::inside_chain_region(s.vertices, s.chains[c].vertex_ids, p, cross_tol);
  };
  if (inside(0)) return {s.base_cost, QueryRegion::non_interesting};
  if (!inside(s.chains.size() - 1))
    throw Error(Errc::out_of_region, "point exceeds the feasibility boundary");

  // Chains are nested, so containment is monotone in the chain index.
  std::size_t lo = 0, hi = s.chains.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (inside(mid) ? hi : lo) = mid;
  }
  const std::size_t band = lo;  // between chains[band] and chains[band + 1]

  for (double bary_tol : {1e-9, 1e-6}) {
    for (int t = s.band_first[band]; t < s.band_first[band + 1]; ++t) {
      const auto& tri = s.triangles[t];
      const SurfacePoint a{s.vertices[tri[0]].fu, s.vertices[tri[0]].fd};
      const SurfacePoint b{s.vertices[tri[1]].fu, s.vertices[tri[1]].fd};
      const SurfacePoint c{s.vertices[tri[2]].fu, s.vertices[tri[2]].fd};
      const double den = detail::cross2(a, b, c);
      if (std::abs(den) < 1e-30) continue;
      const double wa = detail::cross2(p, b, c) / den;
      const double wb = detail::cross2(a, p, c) / den;
      const double wc = 1.0 - wa - wb;
      const double slack = bary_tol * (1.0 + s.extent());
      if (wa < -slack || wb < -slack || wc < -slack) continue;
      const double cost = wa * s.vertices[tri[0]].cost + wb * s.vertices[tri[1]].cost +
                          wc * s.vertices[tri[2]].cost;
      return {cost, QueryRegion::interesting};
    }
  }
  throw Error(Errc::numerical_failure, "point location failed inside a band");
}

/// Extra cost caused by the ramping requirements relative to the
/// unconstrained optimum; identically zero across the non-interesting region.
inline double ds(const CostSurface& s, double fu, double fd) {
  const QueryResult r = query(s, fu, fd);
  return r.region == QueryRegion::non_interesting ? 0.0 : r.cost - s.base_cost;
}

/// k equally spaced cost levels from the base cost to the region maximum,
/// each traced as its level-set polyline. The top level coincides with the
/// feasibility boundary.
inline ContourSet contour(const GridModel& model, int k, const Tolerances& tol = {},
                          const SimplexOptions& opts = {}) {
  if (k < 2) throw Error(Errc::bad_input, "contour needs at least two levels");
  const FeasibleBounds bounds = feasible_bounds(model, tol, opts);
  ContourSet out;
  if (bounds.degenerate()) {
    out.levels.push_back(bounds.base_cost);
    return out;  // nothing to trace; caller reports the empty export
  }
  for (int i = 0; i < k; ++i) {
    const double level =
        bounds.base_cost +
        (bounds.theta_max - bounds.base_cost) * static_cast<double>(i) / (k - 1);
    out.levels.push_back(level);
    out.polylines.push_back(detail::build_level_geometry(model, level, tol, opts));
  }
  return out;
}

}  // namespace flexramp

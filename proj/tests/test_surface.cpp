#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "flexramp/surface.hpp"
#include "testutil.hpp"

using namespace flexramp;

namespace {

double direct_minc(const GridModel& m, double fu, double fd) {
  const LpSolution s = solve(build_minc_lp(m, fu, fd));
  REQUIRE(s.status == LpStatus::optimal);
  return s.objective;
}

double polygon_area(const std::vector<SurfacePoint>& chain) {
  // Region enclosed by the axes and the chain, via the shoelace formula on
  // (0,0) -> chain -> (0,0).
  std::vector<SurfacePoint> poly{{0.0, 0.0}};
  poly.insert(poly.end(), chain.begin(), chain.end());
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    twice += a.fu * b.fd - b.fu * a.fd;
  }
  return 0.5 * std::abs(twice);
}

std::vector<SurfacePoint> chain_points(const CostSurface& s, std::size_t c) {
  std::vector<SurfacePoint> pts;
  for (int id : s.chains[c].vertex_ids)
    pts.push_back({s.vertices[id].fu, s.vertices[id].fd});
  return pts;
}

// Full invariant suite shared by every model under test.
void check_surface(const GridModel& m, const CostSurface& s) {
  REQUIRE_FALSE(s.empty_region());
  const double scale = std::max(1.0, s.bounds.theta_max);
  const double area_tol = 1e-9 * s.extent() * s.extent();

  double area_sum = 0.0;
  for (const auto& t : s.triangles) {
    const SurfacePoint a{s.vertices[t[0]].fu, s.vertices[t[0]].fd};
    const SurfacePoint b{s.vertices[t[1]].fu, s.vertices[t[1]].fd};
    const SurfacePoint c{s.vertices[t[2]].fu, s.vertices[t[2]].fd};
    const double area = detail::triangle_area(a, b, c);
    CHECK(area > area_tol);
    area_sum += area;
  }
  // Disjoint interiors + full coverage of the feasible region amount to the
  // areas summing to the region's area.
  const double region = polygon_area(chain_points(s, s.chains.size() - 1));
  CHECK_THAT(area_sum, Catch::Matchers::WithinRel(region, 1e-9));

  for (const auto& v : s.vertices)
    CHECK_THAT(v.cost, Catch::Matchers::WithinAbs(
                           direct_minc(m, std::max(v.fu, 0.0), std::max(v.fd, 0.0)),
                           1e-6 * scale));

  for (const auto& t : s.triangles) {
    const double fu = (s.vertices[t[0]].fu + s.vertices[t[1]].fu + s.vertices[t[2]].fu) / 3.0;
    const double fd = (s.vertices[t[0]].fd + s.vertices[t[1]].fd + s.vertices[t[2]].fd) / 3.0;
    const double interp =
        (s.vertices[t[0]].cost + s.vertices[t[1]].cost + s.vertices[t[2]].cost) / 3.0;
    CHECK_THAT(interp, Catch::Matchers::WithinAbs(direct_minc(m, fu, fd), 1e-6 * scale));
  }
}

int graph_segments(const std::vector<SurfacePoint>& poly) {
  // Segment count of the level curve read as a function fd -> fu; the
  // axis-parallel cap at the top carries no segment of that graph.
  int runs = 0;
  double prev_slope = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const double dfd = poly[i].fd - poly[i + 1].fd;
    if (dfd <= 1e-9) continue;
    const double slope = (poly[i + 1].fu - poly[i].fu) / dfd;
    if (std::isnan(prev_slope) || std::abs(slope - prev_slope) > 1e-6 * (1.0 + std::abs(slope)))
      ++runs;
    prev_slope = slope;
  }
  return runs;
}

}  // namespace

TEST_CASE("three-bus surface has the published triangle count") {
  const GridModel m = testutil::threebus();
  const CostSurface s = build_surface(m);
  CHECK(s.triangles.size() == 29);

  SECTION("sections match the distinct boundary breakpoint costs") {
    const PiecewiseLinearFn sd = construct_slice(
        m, {ParamFn::min_cost, ParamArg::fd, 0.0, 0.0, s.bounds.fd_hard_max});
    const PiecewiseLinearFn su = construct_slice(
        m, {ParamFn::min_cost, ParamArg::fu, 0.0, 0.0, s.bounds.fu_hard_max});
    std::vector<double> costs;
    costs.insert(costs.end(), sd.values.begin(), sd.values.end());
    costs.insert(costs.end(), su.values.begin(), su.values.end());
    std::sort(costs.begin(), costs.end());
    std::size_t distinct = 0;
    double last = -1.0;
    for (double v : costs)
      if (distinct == 0 || v - last > 1e-9 * v) {
        ++distinct;
        last = v;
      }
    CHECK(s.num_sections == distinct);
  }
}

TEST_CASE("surface invariants hold on both bundled models") {
  check_surface(testutil::threebus(), build_surface(testutil::threebus()));
  check_surface(testutil::garver6(), build_surface(testutil::garver6()));
}

TEST_CASE("triangle count stays near-linear in the constraint count") {
  for (const GridModel& m : {testutil::threebus(), testutil::garver6()}) {
    const CostSurface s = build_surface(m);
    const LinearProgram lp = build_minc_lp(m, 0.0, 0.0);
    CHECK(s.triangles.size() <= 10 * lp.ineq_rows.size());
  }
}

TEST_CASE("queries interpolate exactly") {
  const GridModel m = testutil::threebus();
  const CostSurface s = build_surface(m);
  const double scale = std::max(1.0, s.bounds.theta_max);

  SECTION("stored vertices answer their own cost") {
    for (const auto& v : s.vertices) {
      if (v.fu < 0.0 || v.fd < 0.0) continue;
      const QueryResult r = query(s, v.fu, v.fd);
      CHECK_THAT(r.cost, Catch::Matchers::WithinAbs(v.cost, 1e-6 * scale));
    }
  }

  SECTION("base point is non-interesting") {
    const QueryResult r = query(s, 0.0, 0.0);
    CHECK(r.region == QueryRegion::non_interesting);
    CHECK_THAT(r.cost, Catch::Matchers::WithinAbs(s.base_cost, 1e-9 * scale));
  }

  SECTION("random interior points agree with direct solves") {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> uu(0.0, s.bounds.fu_hard_max);
    std::uniform_real_distribution<double> ud(0.0, s.bounds.fd_hard_max);
    int tested = 0;
    while (tested < 100) {
      const double fu = uu(rng), fd = ud(rng);
      QueryResult r;
      try {
        r = query(s, fu, fd);
      } catch (const Error& e) {
        REQUIRE(e.code() == Errc::out_of_region);
        CHECK(solve(build_minc_lp(m, fu, fd)).status != LpStatus::optimal);
        continue;
      }
      ++tested;
      CHECK_THAT(r.cost,
                 Catch::Matchers::WithinAbs(direct_minc(m, fu, fd), 1e-6 * scale));
    }
  }

  SECTION("points beyond the boundary raise out_of_region") {
    CHECK_THROWS_MATCHES(query(s, s.bounds.fu_hard_max + 5.0, 0.0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::out_of_region;
                         }));
    CHECK_THROWS_AS(query(s, -1.0, 0.0), Error);
  }
}

TEST_CASE("distortion cost is the shifted query") {
  const GridModel m = testutil::threebus();
  const CostSurface s = build_surface(m);
  CHECK(ds(s, 0.0, 0.0) == 0.0);
  CHECK(ds(s, 10.0, 10.0) == 0.0);  // inside the free band
  CHECK_THAT(ds(s, 50.0, 70.0),
             Catch::Matchers::WithinAbs(s.bounds.theta_max - s.base_cost, 1e-6));
}

TEST_CASE("surface cost is monotone and convex along axis lines") {
  for (const GridModel& m : {testutil::threebus(), testutil::garver6()}) {
    const CostSurface s = build_surface(m);
    const double scale = std::max(1.0, s.bounds.theta_max);
    const auto value = [&](double fu, double fd) -> std::optional<double> {
      try {
        return query(s, fu, fd).cost;
      } catch (const Error&) {
        return std::nullopt;
      }
    };
    const int n = 25;
    for (int row = 0; row < n; ++row) {
      const double fd = s.bounds.fd_hard_max * row / (n - 1) * 0.999;
      std::vector<double> line;
      for (int col = 0; col < n; ++col) {
        const auto v = value(s.bounds.fu_hard_max * col / (n - 1) * 0.999, fd);
        if (!v) break;
        line.push_back(*v);
      }
      for (std::size_t i = 1; i < line.size(); ++i)
        CHECK(line[i] >= line[i - 1] - 1e-6 * scale);
      for (std::size_t i = 2; i < line.size(); ++i)
        CHECK(line[i] - 2 * line[i - 1] + line[i - 2] >= -1e-6 * scale);
    }
  }
}

TEST_CASE("contours reproduce the published resolution") {
  const GridModel m = testutil::threebus();
  const ContourSet c = contour(m, 30);
  REQUIRE(c.levels.size() == 30);
  REQUIRE(c.polylines.size() == 30);

  SECTION("levels are equally spaced from base to max") {
    const double step = c.levels[1] - c.levels[0];
    for (std::size_t i = 1; i < c.levels.size(); ++i)
      CHECK_THAT(c.levels[i] - c.levels[i - 1], Catch::Matchers::WithinRel(step, 1e-9));
  }

  SECTION("every level curve has at most three graph segments") {
    for (const auto& poly : c.polylines) CHECK(graph_segments(poly) <= 3);
  }

  SECTION("points on each polyline carry the level cost unless boundary-clamped") {
    const FeasibleBounds b = feasible_bounds(m);
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
      for (const auto& p : c.polylines[i]) {
        const double direct = direct_minc(m, p.fu, p.fd);
        const bool on_boundary =
            (b.fu_upper && std::abs(b.fu_upper->value_at(p.fd) - p.fu) <= 1e-5) ||
            (b.fd_upper && std::abs(b.fd_upper->value_at(p.fu) - p.fd) <= 1e-5);
        if (on_boundary)
          CHECK(direct <= c.levels[i] + 1e-6 * c.levels[i]);
        else
          CHECK_THAT(direct, Catch::Matchers::WithinRel(c.levels[i], 1e-6));
      }
    }
  }
}

TEST_CASE("base contour traces the free-ramping boundary") {
  const GridModel m = testutil::threebus();
  const ContourSet c = contour(m, 2);
  REQUIRE(c.polylines.size() == 2);

  // Free boundary passes through the (30, .) and (., 40) edges.
  const auto& base = c.polylines.front();
  bool corner = false;
  for (const auto& p : base)
    if (std::abs(p.fu - 30.0) < 1e-6 && std::abs(p.fd - 40.0) < 1e-6) corner = true;
  CHECK(corner);
  CHECK_THAT(base.front().fd, Catch::Matchers::WithinAbs(40.0, 1e-6));
  CHECK_THAT(base.back().fu, Catch::Matchers::WithinAbs(30.0, 1e-6));

  // The top level is the feasibility boundary.
  const auto& outer = c.polylines.back();
  const FeasibleBounds b = feasible_bounds(m);
  CHECK_THAT(outer.front().fd, Catch::Matchers::WithinAbs(b.fd_hard_max, 1e-6));
  CHECK_THAT(outer.back().fu, Catch::Matchers::WithinAbs(b.fu_hard_max, 1e-6));
}

TEST_CASE("degenerate region reports empty and answers only the base point") {
  GridModel m;
  m.name = "stuck";
  m.buses = {"1"};
  m.slack_bus = "1";
  m.generators.push_back({"G", "1", 25.0, 0.0, 0.0, 50.0, 50.0, 0.0, 0.0});
  m.loads = {{50.0}, {50.0}};
  m.horizon = 2;
  m.validate();

  const CostSurface s = build_surface(m);
  CHECK(s.empty_region());
  const QueryResult r = query(s, 0.0, 0.0);
  CHECK(r.region == QueryRegion::non_interesting);
  CHECK_THAT(r.cost, Catch::Matchers::WithinRel(2500.0, 1e-9));
  CHECK_THROWS_AS(query(s, 1.0, 0.0), Error);
  CHECK(contour(m, 5).polylines.empty());
}

TEST_CASE("tied three-step horizon builds a valid surface") {
  GridModel m = testutil::threebus();
  m.horizon = 3;
  m.loads.push_back({0.0, 0.0, 115.0});
  m.validate();
  const CostSurface s = build_surface(m);
  check_surface(m, s);
}

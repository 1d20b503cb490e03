#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <random>

#include "flexramp/dispatch.hpp"
#include "flexramp/simplex.hpp"
#include "testutil.hpp"

using namespace flexramp;

namespace {

double minc(const GridModel& m, double fu, double fd) {
  const DispatchSolution s = solve_dispatch(m, fu, fd);
  REQUIRE(s.status == LpStatus::optimal);
  return s.objective;
}

bool minc_feasible(const GridModel& m, double fu, double fd) {
  return solve(build_minc_lp(m, fu, fd)).status == LpStatus::optimal;
}

// Bracket the largest feasible up requirement by bisection on LP
// feasibility; independent of the max_up program it cross-checks.
double scan_fu_limit(const GridModel& m, double fd) {
  double lo = 0.0, hi = m.total_ramp_capability();
  REQUIRE(minc_feasible(m, lo, fd));
  if (minc_feasible(m, hi, fd)) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (minc_feasible(m, mid, fd) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("three-bus base dispatch matches the published profile") {
  const GridModel m = testutil::threebus();
  const DispatchSolution s = solve_dispatch(m, 0.0, 0.0);
  REQUIRE(s.status == LpStatus::optimal);

  // 50*100 + 80*10 + 50*100 + 80*20 priced by hand.
  CHECK_THAT(s.objective, Catch::Matchers::WithinRel(12400.0, 1e-9));
  CHECK_THAT(s.g[0][0], Catch::Matchers::WithinAbs(100.0, 1e-7));
  CHECK_THAT(s.g[0][1], Catch::Matchers::WithinAbs(0.0, 1e-7));
  CHECK_THAT(s.g[0][2], Catch::Matchers::WithinAbs(10.0, 1e-7));
  CHECK_THAT(s.g[1][0], Catch::Matchers::WithinAbs(100.0, 1e-7));
  CHECK_THAT(s.g[1][1], Catch::Matchers::WithinAbs(0.0, 1e-7));
  CHECK_THAT(s.g[1][2], Catch::Matchers::WithinAbs(20.0, 1e-7));

  check_dispatch_feasible(m, s);
}

TEST_CASE("requirements beyond the fleet ramp capability are infeasible") {
  const GridModel m = testutil::threebus();
  const double cap = m.total_ramp_capability();
  CHECK(solve(build_minc_lp(m, cap + 1.0, 0.0)).status == LpStatus::infeasible);
  CHECK(solve(build_minc_lp(m, 0.0, cap + 1.0)).status == LpStatus::infeasible);
}

TEST_CASE("negative requirements are rejected") {
  const GridModel m = testutil::threebus();
  CHECK_THROWS_MATCHES(build_minc_lp(m, -1.0, 0.0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::negative_parameter;
                       }));
  CHECK_THROWS_MATCHES(build_maxur_lp(m, -5.0, 0.0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::negative_parameter;
                       }));
}

TEST_CASE("free ramping capacity at the base optimum") {
  const GridModel m = testutil::threebus();
  const double base = minc(m, 0.0, 0.0);

  const LpSolution up = solve(build_maxur_lp(m, base, 0.0));
  REQUIRE(up.status == LpStatus::optimal);
  CHECK_THAT(up.objective, Catch::Matchers::WithinAbs(30.0, 1e-6));

  const LpSolution dn = solve(build_maxdr_lp(m, base, 0.0));
  REQUIRE(dn.status == LpStatus::optimal);
  CHECK_THAT(dn.objective, Catch::Matchers::WithinAbs(40.0, 1e-6));
}

TEST_CASE("unbudgeted max ramp agrees with the feasibility scan") {
  const GridModel m = testutil::threebus();
  const LpSolution up = solve(build_maxur_lp(m, std::nullopt, 0.0));
  REQUIRE(up.status == LpStatus::optimal);
  const double scanned = scan_fu_limit(m, 0.0);
  CHECK_THAT(up.objective, Catch::Matchers::WithinAbs(scanned, 1e-5));
}

TEST_CASE("binding budget is spent exactly") {
  const GridModel m = testutil::threebus();
  const double base = minc(m, 0.0, 0.0);
  const double top = solve(build_maxur_lp(m, std::nullopt, 0.0)).objective;

  // A budget strictly between the base cost and the cost of the hardest
  // requirement must bind.
  const double theta = 0.5 * (base + minc(m, top, 0.0));
  const LinearProgram lp = build_maxur_lp(m, theta, 0.0);
  const LpSolution sol = solve(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective > 30.0 + 1e-6);
  CHECK(sol.objective < top - 1e-6);

  double spent = 0.0;
  const int budget_row = lp.ineq_index("budget");
  REQUIRE(budget_row >= 0);
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    spent += lp.ineq_rows[budget_row][j] * sol.primal[j];
  CHECK_THAT(spent, Catch::Matchers::WithinAbs(theta, 1e-5));
}

TEST_CASE("minc is monotone and midpoint-convex on random models") {
  std::mt19937 rng(99123);
  for (int trial = 0; trial < 8; ++trial) {
    const GridModel m = testutil::random_model(rng);
    if (!minc_feasible(m, 0.0, 0.0)) continue;
    const double fu_top = solve(build_maxur_lp(m, std::nullopt, 0.0)).objective;
    const double fd_top = solve(build_maxdr_lp(m, std::nullopt, 0.0)).objective;
    if (fu_top < 1.0 || fd_top < 1.0) continue;

    std::uniform_real_distribution<double> ufrac(0.0, 0.9);
    const double scale = std::max(1.0, minc(m, 0.0, 0.0));
    for (int probe = 0; probe < 4; ++probe) {
      const double fu1 = ufrac(rng) * fu_top, fd1 = ufrac(rng) * fd_top;
      const double fu2 = ufrac(rng) * fu_top, fd2 = ufrac(rng) * fd_top;
      if (!minc_feasible(m, std::max(fu1, fu2), std::max(fd1, fd2))) continue;

      const double lo = minc(m, std::min(fu1, fu2), std::min(fd1, fd2));
      const double hi = minc(m, std::max(fu1, fu2), std::max(fd1, fd2));
      CHECK(hi >= lo - 1e-6 * scale);

      const double c1 = minc(m, fu1, fd1), c2 = minc(m, fu2, fd2);
      for (const double w : {0.25, 0.5, 0.75}) {
        const double mid =
            minc(m, w * fu1 + (1 - w) * fu2, w * fd1 + (1 - w) * fd2);
        CHECK(mid <= w * c1 + (1 - w) * c2 + 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("dispatch awards satisfy the physical recheck across requirements") {
  const GridModel m = testutil::threebus();
  for (const auto [fu, fd] : {std::pair{10.0, 10.0}, {30.0, 40.0}, {45.0, 60.0}}) {
    const DispatchSolution s = solve_dispatch(m, fu, fd);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK_NOTHROW(check_dispatch_feasible(m, s));
  }
}

TEST_CASE("requirement duals price the requirements") {
  const GridModel m = testutil::threebus();

  // Inside the free band both duals vanish; past it the up price is
  // positive and matches a finite-difference probe.
  const DispatchSolution free_band = solve_dispatch(m, 10.0, 10.0);
  CHECK_THAT(free_band.fu_dual, Catch::Matchers::WithinAbs(0.0, 1e-7));
  CHECK_THAT(free_band.fd_dual, Catch::Matchers::WithinAbs(0.0, 1e-7));

  const double fu = 35.0;
  const DispatchSolution s = solve_dispatch(m, fu, 0.0);
  const double h = 1e-3;
  const double ahead = minc(m, fu + h, 0.0);
  const double behind = minc(m, fu - h, 0.0);
  CHECK(s.fu_dual >= (ahead - s.objective) / h - 1e-4);
  CHECK(s.fu_dual >= (s.objective - behind) / h - 1e-4);
  CHECK(s.fu_dual <= (ahead - behind) / (2 * h) + (ahead - behind) / (2 * h) + 1e-4);
  CHECK(s.fu_dual > 1.0);
}

TEST_CASE("tied requirements extend to a three-step horizon") {
  GridModel m = testutil::threebus();
  m.horizon = 3;
  m.loads.push_back({0.0, 0.0, 115.0});
  m.validate();

  const DispatchSolution s = solve_dispatch(m, 10.0, 10.0);
  REQUIRE(s.status == LpStatus::optimal);
  REQUIRE(s.r_up.size() == 2);
  for (int t = 0; t < 2; ++t) {
    double up = 0.0, dn = 0.0;
    for (double v : s.r_up[t]) up += v;
    for (double v : s.r_down[t]) dn += v;
    CHECK_THAT(up, Catch::Matchers::WithinAbs(10.0, 1e-7));
    CHECK_THAT(dn, Catch::Matchers::WithinAbs(10.0, 1e-7));
  }
  CHECK_NOTHROW(check_dispatch_feasible(m, s));

  // Serving the extra step can only add cost over the two-step prefix.
  const GridModel two = testutil::threebus();
  CHECK(s.objective > solve_dispatch(two, 10.0, 10.0).objective);
}

TEST_CASE("garver model solves at the base point within line limits") {
  const GridModel m = testutil::garver6();
  const DispatchSolution s = solve_dispatch(m, 0.0, 0.0);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK_NOTHROW(check_dispatch_feasible(m, s));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "flexramp/grid.hpp"
#include "flexramp/model_io.hpp"
#include "flexramp/shift_factors.hpp"
#include "testutil.hpp"

using namespace flexramp;

namespace {

GridModel two_bus() {
  GridModel m;
  m.buses = {"1", "2"};
  m.slack_bus = "2";
  m.lines.push_back({"1", "2", 0.05, std::nullopt});
  m.generators.push_back({"G", "1", 10.0, 5.0, 0.0, 50.0, 10.0, 0.0, 0.0});
  m.loads = {{0.0, 10.0}, {0.0, 10.0}};
  m.horizon = 2;
  return m;
}

// Hand oracle for the equal-reactance ring: injection at bus 1, withdrawal
// at bus 3, splits by path impedance 1:2 between the direct line and the
// two-hop path through bus 2.
struct RingOracle {
  double direct = 2.0 / 3.0;
  double two_hop = 1.0 / 3.0;
};

}  // namespace

TEST_CASE("single line carries the whole injection") {
  const Eigen::MatrixXd h = compute_shift_factors(two_bus());
  REQUIRE(h.rows() == 1);
  REQUIRE(h.cols() == 2);
  CHECK_THAT(h(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(h(0, 1), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("equal-reactance ring splits two to one") {
  GridModel m = testutil::threebus();
  m.slack_bus = "3";
  const Eigen::MatrixXd h = compute_shift_factors(m);
  const RingOracle want;

  const int bus1 = m.bus_index("1");
  // Lines are ordered 1-2, 1-3, 2-3 in the bundled model.
  CHECK_THAT(h(1, bus1), Catch::Matchers::WithinAbs(want.direct, 1e-12));
  CHECK_THAT(h(0, bus1), Catch::Matchers::WithinAbs(want.two_hop, 1e-12));
  CHECK_THAT(h(2, bus1), Catch::Matchers::WithinAbs(want.two_hop, 1e-12));

  SECTION("slack column is zero") {
    const int slack = m.bus_index("3");
    for (int l = 0; l < h.rows(); ++l)
      CHECK_THAT(h(l, slack), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("disconnected network is rejected") {
  GridModel m = two_bus();
  m.buses.push_back("3");
  m.loads = {{0.0, 10.0, 0.0}, {0.0, 10.0, 0.0}};
  CHECK_THROWS_MATCHES(compute_shift_factors(m), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::disconnected_graph;
                       }));
}

TEST_CASE("nonpositive reactance is rejected") {
  GridModel m = two_bus();
  m.lines[0].reactance = 0.0;
  CHECK_THROWS_MATCHES(compute_shift_factors(m), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::nonpositive_reactance;
                       }));
}

TEST_CASE("bundled models load and validate") {
  const GridModel three = testutil::threebus();
  CHECK(three.buses.size() == 3);
  CHECK(three.generators.size() == 3);
  CHECK(three.horizon == 2);
  CHECK_THAT(three.total_load(0), Catch::Matchers::WithinAbs(110.0, 1e-12));
  CHECK_THAT(three.total_load(1), Catch::Matchers::WithinAbs(120.0, 1e-12));
  CHECK_FALSE(three.has_line_limits());

  const GridModel six = testutil::garver6();
  CHECK(six.buses.size() == 6);
  CHECK(six.generators.size() == 3);
  CHECK(six.has_line_limits());
  CHECK_THAT(six.total_load(0), Catch::Matchers::WithinAbs(178.5, 1e-12));
}

TEST_CASE("model schema violations raise bad_input") {
  auto expect_bad = [](const char* text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    CHECK_THROWS_MATCHES(parse_grid_model(j), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::bad_input;
                         }));
  };
  expect_bad(R"({"horizon": 2, "buses": ["1"], "lines": [], "generators": [], "loads": []})");
  expect_bad(R"({"horizon": 2, "slack_bus": "1", "buses": ["1"], "lines": [],
                 "generators": [{"id": "G", "bus": "1", "energy_bid": 1.0,
                                  "ramp_limit": 1.0, "g_min": 0.0, "g_max": 10.0,
                                  "initial_output": 20.0}],
                 "loads": [[5.0], [5.0]]})");  // initial output outside range
  expect_bad(R"({"horizon": 1, "slack_bus": "1", "buses": ["1"], "lines": [],
                 "generators": [{"id": "G", "bus": "1", "energy_bid": 1.0,
                                  "ramp_limit": 1.0, "g_min": 0.0, "g_max": 10.0,
                                  "initial_output": 5.0}],
                 "loads": [[5.0]]})");  // horizon below 2
}

TEST_CASE("load vectors must match bus count") {
  GridModel m = two_bus();
  m.loads = {{0.0}, {0.0, 10.0}};
  CHECK_THROWS_AS(m.validate(), Error);
}

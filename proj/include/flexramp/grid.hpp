#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flexramp/core.hpp"

namespace flexramp {

struct Generator {
  std::string id;
  std::string bus;
  double energy_bid = 0.0;     // currency/MW
  double ramp_limit = 0.0;     // MW per time step
  double g_min = 0.0;          // MW
  double g_max = 0.0;          // MW
  double initial_output = 0.0; // MW, output in the step before the horizon
  double ramp_up_bid = 0.0;    // currency/MW, defaults to zero
  double ramp_down_bid = 0.0;
};

struct Line {
  std::string from;
  std::string to;
  double reactance = 0.0;           // p.u. on a 100 MVA base
  std::optional<double> capacity;   // MW; absent means unconstrained
};

/// Static data for the dispatch problem: network, generators and the
/// predicted per-bus loads for each step of the horizon. Immutable after
/// load; safe to share across threads.
struct GridModel {
  std::string name;
  std::vector<std::string> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::string slack_bus;
  std::vector<std::vector<double>> loads;  // loads[t][bus index], MW
  int horizon = 2;

  int bus_index(std::string_view id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i] == id) return static_cast<int>(i);
    return -1;
  }

  double total_load(int t) const {
    return std::accumulate(loads[t].begin(), loads[t].end(), 0.0);
  }

  double total_ramp_capability() const {
    double s = 0.0;
    for (const auto& g : generators) s += g.ramp_limit;
    return s;
  }

  bool has_line_limits() const {
    for (const auto& l : lines)
      if (l.capacity) return true;
    return false;
  }

  void validate() const {
    if (horizon < 2) throw Error(Errc::bad_input, "horizon must be at least 2");
    if (buses.empty()) throw Error(Errc::bad_input, "model has no buses");
    {
      std::unordered_map<std::string_view, int> seen;
      for (const auto& b : buses)
        if (++seen[b] > 1) throw Error(Errc::bad_input, "duplicate bus id: " + b);
    }
    if (bus_index(slack_bus) < 0)
      throw Error(Errc::bad_input, "slack bus not found: " + slack_bus);

    for (const auto& l : lines) {
      if (bus_index(l.from) < 0 || bus_index(l.to) < 0)
        throw Error(Errc::bad_input, "line references unknown bus: " + l.from + "-" + l.to);
      if (!(l.reactance > 0.0))
        throw Error(Errc::nonpositive_reactance,
                    "line " + l.from + "-" + l.to + " has nonpositive reactance");
      if (l.capacity && !(*l.capacity > 0.0))
        throw Error(Errc::bad_input, "line " + l.from + "-" + l.to + " has nonpositive capacity");
    }

    if (generators.empty()) throw Error(Errc::bad_input, "model has no generators");
    std::unordered_map<std::string_view, int> gen_ids;
    for (const auto& g : generators) {
      if (++gen_ids[g.id] > 1) throw Error(Errc::bad_input, "duplicate generator id: " + g.id);
      if (bus_index(g.bus) < 0)
        throw Error(Errc::bad_input, "generator " + g.id + " references unknown bus " + g.bus);
      if (g.g_min < 0.0 || g.g_min > g.g_max)
        throw Error(Errc::bad_input, "generator " + g.id + " has invalid capacity range");
      if (g.ramp_limit < 0.0)
        throw Error(Errc::bad_input, "generator " + g.id + " has negative ramp limit");
      if (g.initial_output < g.g_min || g.initial_output > g.g_max)
        throw Error(Errc::bad_input,
                    "generator " + g.id + " initial output outside capacity range");
    }

    if (static_cast<int>(loads.size()) != horizon)
      throw Error(Errc::bad_input, "load series length does not match horizon");
    for (const auto& lt : loads) {
      if (lt.size() != buses.size())
        throw Error(Errc::bad_input, "load vector length does not match bus count");
      for (double v : lt)
        if (!std::isfinite(v) || v < 0.0)
          throw Error(Errc::bad_input, "loads must be finite and nonnegative");
    }

    check_connected();
  }

  void check_connected() const {
    if (buses.size() == 1) return;
    std::vector<std::vector<int>> adj(buses.size());
    for (const auto& l : lines) {
      const int a = bus_index(l.from), b = bus_index(l.to);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<char> seen(buses.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          q.push(v);
        }
    }
    if (reached != buses.size())
      throw Error(Errc::disconnected_graph, "network graph is not connected");
  }
};

}  // namespace flexramp

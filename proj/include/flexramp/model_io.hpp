#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "flexramp/core.hpp"
#include "flexramp/grid.hpp"

namespace flexramp {

namespace detail {

inline double require_number(const nlohmann::json& j, const char* field,
                             const std::string& context) {
  if (!j.contains(field) || !j[field].is_number())
    throw Error(Errc::bad_input, context + ": missing or non-numeric field '" + field + "'");
  return j[field].get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* field,
                                  const std::string& context) {
  if (!j.contains(field) || !j[field].is_string())
    throw Error(Errc::bad_input, context + ": missing or non-string field '" + field + "'");
  return j[field].get<std::string>();
}

}  // namespace detail

/// Parse a grid model from its JSON document form (see docs/model-schema.md)
/// and validate it against the model invariants.
inline GridModel parse_grid_model(const nlohmann::json& j) {
  using detail::require_number;
  using detail::require_string;

  GridModel m;
  if (j.contains("name")) m.name = j["name"].get<std::string>();
  m.horizon = static_cast<int>(require_number(j, "horizon", "model"));
  m.slack_bus = require_string(j, "slack_bus", "model");

  if (!j.contains("buses") || !j["buses"].is_array())
    throw Error(Errc::bad_input, "model: 'buses' must be an array of ids");
  for (const auto& b : j["buses"]) {
    if (!b.is_string()) throw Error(Errc::bad_input, "model: bus ids must be strings");
    m.buses.push_back(b.get<std::string>());
  }

  if (!j.contains("lines") || !j["lines"].is_array())
    throw Error(Errc::bad_input, "model: 'lines' must be an array");
  for (const auto& lj : j["lines"]) {
    Line l;
    l.from = require_string(lj, "from", "line");
    l.to = require_string(lj, "to", "line");
    l.reactance = require_number(lj, "reactance", "line");
    if (lj.contains("capacity")) {
      if (!lj["capacity"].is_number())
        throw Error(Errc::bad_input, "line: 'capacity' must be numeric when present");
      l.capacity = lj["capacity"].get<double>();
    }
    m.lines.push_back(std::move(l));
  }

  if (!j.contains("generators") || !j["generators"].is_array())
    throw Error(Errc::bad_input, "model: 'generators' must be an array");
  for (const auto& gj : j["generators"]) {
    Generator g;
    g.id = require_string(gj, "id", "generator");
    const std::string ctx = "generator " + g.id;
    g.bus = require_string(gj, "bus", ctx);
    g.energy_bid = require_number(gj, "energy_bid", ctx);
    g.ramp_limit = require_number(gj, "ramp_limit", ctx);
    g.g_min = require_number(gj, "g_min", ctx);
    g.g_max = require_number(gj, "g_max", ctx);
    g.initial_output = require_number(gj, "initial_output", ctx);
    if (gj.contains("ramp_up_bid")) g.ramp_up_bid = gj["ramp_up_bid"].get<double>();
    if (gj.contains("ramp_down_bid")) g.ramp_down_bid = gj["ramp_down_bid"].get<double>();
    m.generators.push_back(std::move(g));
  }

  if (!j.contains("loads") || !j["loads"].is_array())
    throw Error(Errc::bad_input, "model: 'loads' must be an array of per-step arrays");
  for (const auto& lt : j["loads"]) {
    if (!lt.is_array())
      throw Error(Errc::bad_input, "model: each loads entry must be an array");
    std::vector<double> row;
    for (const auto& v : lt) {
      if (!v.is_number()) throw Error(Errc::bad_input, "model: loads must be numeric");
      row.push_back(v.get<double>());
    }
    m.loads.push_back(std::move(row));
  }

  m.validate();
  return m;
}

inline GridModel load_grid_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::bad_input, "cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_input, "model file " + path + " is not valid JSON: " + e.what());
  }
  return parse_grid_model(j);
}

}  // namespace flexramp

#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "tmkit/errors.hpp"
#include "tmkit/sim.hpp"

namespace tmkit {

// Scenario files:
//   {
//     "arrivals": [0, 2],
//     "guards": {"available": true, "approved": 0.5},   // or a per-instance list
//     "seed": 7
//   }
// A boolean fixes a guard, a number in [0,1] makes it probabilistic.

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ScenarioError, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::ScenarioError, "scenario must be a JSON object");

  Scenario scenario;
  if (doc.contains("arrivals")) {
    if (!doc["arrivals"].is_array()) throw Error(Errc::ScenarioError, "arrivals must be an array");
    for (const auto& v : doc["arrivals"]) {
      if (!v.is_number_integer() || v.get<Tick>() < 0) {
        throw Error(Errc::ScenarioError, "arrivals must be non-negative ticks");
      }
      scenario.arrivals.push_back(v.get<Tick>());
    }
  }
  auto read_guard_map = [](const nlohmann::json& obj) {
    std::map<std::string, GuardSpec> out;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const auto& v = it.value();
      if (v.is_boolean()) {
        out[it.key()] = v.get<bool>();
      } else if (v.is_number()) {
        double p = v.get<double>();
        if (p < 0.0 || p > 1.0) throw Error(Errc::ScenarioError, "probability out of [0,1]");
        out[it.key()] = p;
      } else {
        throw Error(Errc::ScenarioError, "guard '" + it.key() + "' must be a bool or probability");
      }
    }
    return out;
  };
  if (doc.contains("guards")) {
    const auto& g = doc["guards"];
    if (g.is_object()) {
      scenario.guards.push_back(read_guard_map(g));
    } else if (g.is_array()) {
      for (const auto& entry : g) {
        if (!entry.is_object()) throw Error(Errc::ScenarioError, "guards list must hold objects");
        scenario.guards.push_back(read_guard_map(entry));
      }
    } else {
      throw Error(Errc::ScenarioError, "guards must be an object or a list of objects");
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw Error(Errc::ScenarioError, "seed must be an integer");
    scenario.seed = doc["seed"].get<std::uint64_t>();
  }
  return scenario;
}

}  // namespace tmkit

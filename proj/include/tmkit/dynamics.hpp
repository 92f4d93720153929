#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tmkit/decls.hpp"
#include "tmkit/diagnostics.hpp"
#include "tmkit/model.hpp"
#include "tmkit/validate.hpp"

namespace tmkit {

enum class EventKind { ProcessLike, EntityLike };

/// A region embedded with time. Extended events persist from first
/// activation to the end of their instance.
struct Event {
  std::string name;
  std::string description;
  Region region;
  int duration = 1;  // ticks
  bool extended = false;
  bool instantaneous = false;
  std::optional<std::string> measure;
  EventKind kind = EventKind::ProcessLike;
};

/// Lupascian counterpart of an event: same region, no time. The region is
/// aliased from the paired event rather than stored again.
struct NegativeEvent {
  std::string name;
  std::string paired_event;
  std::size_t paired_index = 0;
};

struct ChronEdge {
  std::string from;
  std::string to;
  std::optional<std::string> guard;
};

struct ChronJoin {
  std::vector<ChronJoinInput> inputs;
  std::string output;
};

/// Guarded precedence graph over events. Edges sourced at a negative are
/// reset edges: they re-open their target's sub-graph for another round and
/// are excluded from the acyclicity requirement, which covers only the
/// event-to-event subgraph.
struct ChronologyGraph {
  std::vector<std::string> nodes;  // event names, declaration order
  std::vector<ChronEdge> edges;
  std::vector<ChronJoin> joins;
};

struct DynamicModel {
  StaticModel statics;
  std::vector<Event> events;
  std::vector<NegativeEvent> negatives;
  ChronologyGraph chronology;

  const Region& region_of_negative(const NegativeEvent& n) const {
    return events[n.paired_index].region;
  }
  const Event* find_event(const std::string& name) const {
    for (const auto& e : events) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }
  const NegativeEvent* find_negative(const std::string& name) const {
    for (const auto& n : negatives) {
      if (n.name == name) return &n;
    }
    return nullptr;
  }
};

/// Resolves an event declaration's labels against the model and cuts the
/// induced subdiagram they span.
inline Region extract_region(const StaticModel& model, const EventDecl& decl) {
  std::set<StageId> nodes;
  for (const std::string& label : decl.region_labels) {
    auto sid = model.stage_by_label(label);
    if (!sid) throw Error(Errc::UnknownLabel, "event '" + decl.name + "': no stage labeled '" + label + "'");
    nodes.insert(*sid);
  }
  return model.induced_subdiagram(nodes);
}

inline ChronologyGraph build_chronology(const std::vector<Event>& events,
                                        const std::vector<NegativeEvent>& negatives,
                                        const DynamicDecls& decls) {
  ChronologyGraph graph;
  std::unordered_map<std::string, std::size_t> event_index;
  std::set<std::string> negative_names;
  for (const Event& e : events) {
    event_index[e.name] = graph.nodes.size();
    graph.nodes.push_back(e.name);
  }
  for (const NegativeEvent& n : negatives) negative_names.insert(n.name);

  auto require_known = [&](const std::string& name, bool allow_negative) {
    if (event_index.count(name)) return;
    if (allow_negative && negative_names.count(name)) return;
    throw Error(Errc::UnknownEvent, "chronology references unknown event '" + name + "'");
  };

  for (const ChronEdgeDecl& e : decls.chron_edges) {
    require_known(e.from, /*allow_negative=*/true);  // negative source = reset edge
    require_known(e.to, /*allow_negative=*/true);    // negative target = terminal marker
    graph.edges.push_back({e.from, e.to, e.guard});
  }
  for (const ChronJoinDecl& j : decls.chron_joins) {
    for (const ChronJoinInput& input : j.inputs) require_known(input.event, false);
    require_known(j.output, false);
    graph.joins.push_back({j.inputs, j.output});
  }

  // Cycle check over the event-to-event subgraph (join membership included).
  std::vector<std::vector<std::size_t>> succ(events.size());
  for (const ChronEdge& e : graph.edges) {
    auto from = event_index.find(e.from);
    auto to = event_index.find(e.to);
    if (from != event_index.end() && to != event_index.end())
      succ[from->second].push_back(to->second);
  }
  for (const ChronJoin& j : graph.joins) {
    std::size_t out = event_index.at(j.output);
    for (const ChronJoinInput& input : j.inputs)
      succ[event_index.at(input.event)].push_back(out);
  }
  std::vector<int> state(events.size(), 0);  // 0 fresh, 1 on stack, 2 done
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t start = 0; start < events.size(); ++start) {
    if (state[start]) continue;
    stack.push_back({start, 0});
    state[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < succ[node].size()) {
        std::size_t child = succ[node][next++];
        if (state[child] == 1) {
          throw Error(Errc::IntraInstanceCycle,
                      "chronology cycle through '" + events[child].name + "'");
        }
        if (state[child] == 0) {
          state[child] = 1;
          stack.push_back({child, 0});
        }
      } else {
        state[node] = 2;
        stack.pop_back();
      }
    }
  }
  return graph;
}

struct CompileResult {
  std::optional<DynamicModel> model;
  Diagnostics diagnostics;

  bool ok() const { return model.has_value(); }
};

/// Validates and binds declarations into an executable dynamic model. The
/// static model is copied in; afterwards the result is a frozen value.
inline CompileResult compile_dynamic(const StaticModel& model, const DynamicDecls& decls) {
  CompileResult result;
  result.diagnostics = validate(model, decls);
  if (!result.diagnostics.ok()) return result;

  DynamicModel dyn;
  dyn.statics = model;
  for (const EventDecl& decl : decls.events) {
    Event e;
    e.name = decl.name;
    e.description = decl.description;
    e.region = extract_region(dyn.statics, decl);
    e.duration = decl.duration;
    e.kind = decl.entity_like ? EventKind::EntityLike : EventKind::ProcessLike;
    e.extended = decl.extended || decl.entity_like;
    e.instantaneous = decl.instantaneous;
    e.measure = decl.measure;
    dyn.events.push_back(std::move(e));
  }
  for (const NegativeDecl& decl : decls.negatives) {
    NegativeEvent n;
    n.name = decl.name;
    n.paired_event = decl.paired_event;
    for (std::size_t i = 0; i < dyn.events.size(); ++i) {
      if (dyn.events[i].name == decl.paired_event) n.paired_index = i;
    }
    dyn.negatives.push_back(std::move(n));
  }
  try {
    dyn.chronology = build_chronology(dyn.events, dyn.negatives, decls);
  } catch (const Error& e) {
    result.diagnostics.error(to_string(e.code()), e.what());
    return result;
  }
  result.model = std::move(dyn);
  return result;
}

}  // namespace tmkit

#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tmkit/tmkit.hpp"

namespace support {

inline std::string fixture_path(const std::string& name) {
  return std::string(TMKIT_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture: " + name);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline tmkit::ParseResult parse_fixture(const std::string& name) {
  return tmkit::parse(read_fixture(name));
}

inline tmkit::DynamicModel compile_fixture(const std::string& name) {
  tmkit::ParseResult parsed = parse_fixture(name);
  if (!parsed.ok()) throw std::runtime_error("fixture does not parse: " + name);
  tmkit::CompileResult compiled = tmkit::compile_dynamic(parsed.model, parsed.decls);
  if (!compiled.ok()) throw std::runtime_error("fixture does not compile: " + name);
  return std::move(*compiled.model);
}

// -- region oracle -------------------------------------------------------------
// Independent recomputation of induced arcs: scan the whole arc list.

inline std::set<tmkit::ArcId> region_arcs_bruteforce(const tmkit::StaticModel& model,
                                                     const std::set<tmkit::StageId>& nodes) {
  std::set<tmkit::ArcId> arcs;
  for (const tmkit::Arc& a : model.arcs()) {
    if (nodes.count(a.from) && nodes.count(a.to)) arcs.insert(a.id);
  }
  return arcs;
}

// -- chronology linearization oracle ---------------------------------------------
// Brute-force enumeration of every topological order of the guarded
// chronology restricted to a fired set. Traces are then checked by set
// membership, never against one privileged ordering.

inline std::vector<std::pair<std::string, std::string>> chronology_constraints(
    const tmkit::DynamicModel& dyn, const std::map<std::string, bool>& guards,
    const std::set<std::string>& fired) {
  auto holds = [&](const std::optional<std::string>& g) {
    if (!g) return true;
    auto it = guards.find(*g);
    return it != guards.end() && it->second;
  };
  std::vector<std::pair<std::string, std::string>> constraints;
  for (const tmkit::ChronEdge& e : dyn.chronology.edges) {
    if (!fired.count(e.from) || !fired.count(e.to)) continue;
    if (!holds(e.guard)) continue;
    constraints.emplace_back(e.from, e.to);
  }
  for (const tmkit::ChronJoin& j : dyn.chronology.joins) {
    if (!fired.count(j.output)) continue;
    for (const tmkit::ChronJoinInput& input : j.inputs) {
      if (!holds(input.guard)) continue;
      if (fired.count(input.event)) constraints.emplace_back(input.event, j.output);
    }
  }
  return constraints;
}

inline void enumerate_linearizations_rec(
    const std::vector<std::string>& nodes,
    const std::vector<std::pair<std::string, std::string>>& edges, std::set<std::string>& placed,
    std::vector<std::string>& prefix, std::vector<std::vector<std::string>>& out,
    std::size_t cap) {
  if (out.size() >= cap) throw std::runtime_error("linearization enumeration blew the cap");
  if (prefix.size() == nodes.size()) {
    out.push_back(prefix);
    return;
  }
  for (const std::string& candidate : nodes) {
    if (placed.count(candidate)) continue;
    bool ready = true;
    for (const auto& [from, to] : edges) {
      if (to == candidate && !placed.count(from)) ready = false;
    }
    if (!ready) continue;
    placed.insert(candidate);
    prefix.push_back(candidate);
    enumerate_linearizations_rec(nodes, edges, placed, prefix, out, cap);
    prefix.pop_back();
    placed.erase(candidate);
  }
}

inline std::vector<std::vector<std::string>> enumerate_linearizations(
    const std::set<std::string>& fired,
    const std::vector<std::pair<std::string, std::string>>& edges, std::size_t cap = 200000) {
  std::vector<std::string> nodes(fired.begin(), fired.end());
  std::set<std::string> placed;
  std::vector<std::string> prefix;
  std::vector<std::vector<std::string>> out;
  enumerate_linearizations_rec(nodes, edges, placed, prefix, out, cap);
  return out;
}

/// Positive occurrences of one instance, in trace order.
inline std::vector<std::string> positive_projection(const tmkit::Trace& trace, int instance) {
  std::vector<std::string> out;
  for (const tmkit::Occurrence& occ : trace.items) {
    if (occ.instance == instance && !occ.negative) out.push_back(occ.name);
  }
  return out;
}

inline std::set<std::string> fired_set(const tmkit::Trace& trace, int instance) {
  std::set<std::string> out;
  for (const tmkit::Occurrence& occ : trace.items) {
    if (occ.instance == instance && !occ.negative) out.insert(occ.name);
  }
  return out;
}

// -- Lupascian exclusivity checker -----------------------------------------------
// Reconstructs per-(instance, region) timelines from a trace: occupancy
// intervals [start, end) must be pairwise disjoint, and nothing may be
// actualized at or after a negative mark on the same region.

inline std::string region_key(const tmkit::DynamicModel& dyn, std::size_t event_index) {
  std::string key;
  for (tmkit::StageId sid : dyn.events[event_index].region.nodes) {
    key += std::to_string(sid.value) + ",";
  }
  return key;
}

inline bool lupascian_ok(const tmkit::DynamicModel& dyn, const tmkit::Trace& trace,
                         std::string* why = nullptr) {
  struct Timeline {
    std::vector<std::pair<tmkit::Tick, tmkit::Tick>> intervals;
    std::vector<tmkit::Tick> marks;
  };
  std::map<std::pair<int, std::string>, Timeline> timelines;
  for (const tmkit::Occurrence& occ : trace.items) {
    Timeline& t = timelines[{occ.instance, region_key(dyn, occ.region_event)}];
    if (occ.negative) {
      t.marks.push_back(occ.start);
    } else {
      t.intervals.emplace_back(occ.start, occ.end);
    }
  }
  for (const auto& [who, t] : timelines) {
    for (std::size_t i = 0; i < t.intervals.size(); ++i) {
      for (std::size_t j = i + 1; j < t.intervals.size(); ++j) {
        auto [s1, e1] = t.intervals[i];
        auto [s2, e2] = t.intervals[j];
        if (s1 < e2 && s2 < e1) {
          if (why) *why = "overlapping actualizations of one region";
          return false;
        }
      }
      for (tmkit::Tick mark : t.marks) {
        auto [s, e] = t.intervals[i];
        if ((s <= mark && mark < e) || s >= mark) {
          if (why) *why = "region actualized at or after its negative mark";
          return false;
        }
      }
    }
  }
  return true;
}

// -- reachability oracle -----------------------------------------------------------
// Reachability over flow arcs (plus optional extra edges), restricted to
// Create/Process stages; interior stages of any kind may carry the path.

inline std::set<std::pair<std::uint32_t, std::uint32_t>> reach_cp(
    const tmkit::StaticModel& model,
    const std::vector<std::pair<tmkit::StageId, tmkit::StageId>>& extra = {}) {
  using tmkit::ActionKind;
  std::map<std::uint32_t, std::vector<std::uint32_t>> succ;
  for (const tmkit::Arc& a : model.arcs()) {
    if (a.kind == tmkit::ArcKind::Flow) succ[a.from.value].push_back(a.to.value);
  }
  for (const auto& [from, to] : extra) succ[from.value].push_back(to.value);

  auto is_cp = [&](std::uint32_t sid) {
    const tmkit::Stage& s = model.stage(tmkit::StageId{sid});
    return s.kind == ActionKind::Create || s.kind == ActionKind::Process;
  };
  std::set<std::pair<std::uint32_t, std::uint32_t>> result;
  for (const tmkit::Stage& start : model.stages()) {
    if (!is_cp(start.id.value)) continue;
    std::set<std::uint32_t> seen{start.id.value};
    std::vector<std::uint32_t> work{start.id.value};
    while (!work.empty()) {
      std::uint32_t cur = work.back();
      work.pop_back();
      auto it = succ.find(cur);
      if (it == succ.end()) continue;
      for (std::uint32_t next : it->second) {
        if (!seen.insert(next).second) continue;
        if (is_cp(next)) result.insert({start.id.value, next});
        work.push_back(next);
      }
    }
  }
  return result;
}

// -- random builders ------------------------------------------------------------

struct RandomModel {
  tmkit::StaticModel model;
  tmkit::DynamicDecls decls;
};

/// Structured random model for round-trip and id-stability properties.
/// Construction follows document order (a thimac's body is finished before
/// its parent continues), matching how the parser assigns ids, and joins are
/// emitted last like the canonical printer does.
inline RandomModel random_model(std::mt19937_64& rng) {
  using namespace tmkit;
  RandomModel out;
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng() % n); };

  std::vector<StageId> stages;
  std::vector<std::string> labels;
  int label_counter = 0;
  int child_counter = 0;
  int memory_counter = 0;

  auto add_stage_to = [&](ThimacId tid) {
    ActionKind kind = static_cast<ActionKind>(pick(5));
    std::optional<TransferDirection> dir;
    if (kind == ActionKind::Transfer) dir = static_cast<TransferDirection>(pick(3));
    std::optional<std::string> label;
    if (pick(2) == 0) {
      label = "lab." + std::to_string(++label_counter);
      labels.push_back(*label);
    }
    stages.push_back(out.model.add_stage(tid, kind, dir, label));
  };

  auto populate = [&](auto&& self, ThimacId tid, int depth) -> void {
    std::size_t items = 1 + pick(4);
    std::vector<StageId> local;
    for (std::size_t k = 0; k < items; ++k) {
      std::size_t r = pick(6);
      if (r == 0 && depth < 2) {
        ThimacId child = out.model.add_thimac(tid, "C" + std::to_string(++child_counter));
        self(self, child, depth + 1);
      } else if (r == 1 && !local.empty()) {
        ThimacId mem =
            out.model.attach_memory(local[pick(local.size())], "M" + std::to_string(++memory_counter));
        std::size_t count = 1 + pick(2);
        for (std::size_t s = 0; s < count; ++s) {
          stages.push_back(out.model.add_stage(mem, static_cast<ActionKind>(pick(5))));
        }
      } else {
        add_stage_to(tid);
        local.push_back(stages.back());
      }
    }
  };

  std::size_t roots = 1 + pick(3);
  for (std::size_t r = 0; r < roots; ++r) {
    std::string name = pick(6) == 0 ? "odd name " + std::to_string(r) : "T" + std::to_string(r);
    ThingClassification cls = pick(8) == 0 ? ThingClassification::Existing
                                           : ThingClassification::Subsisting;
    ThimacId root = out.model.add_thimac(std::nullopt, name, cls);
    populate(populate, root, 0);
  }
  std::size_t arcs = pick(8);
  for (std::size_t a = 0; a < arcs && stages.size() >= 2; ++a) {
    StageId from = stages[pick(stages.size())];
    StageId to = stages[pick(stages.size())];
    if (pick(2) == 0) {
      out.model.add_flow(from, to);
    } else {
      std::optional<std::string> guard;
      if (pick(3) == 0) guard = "g" + std::to_string(pick(4));
      out.model.add_trigger(from, to, guard);
    }
  }
  if (stages.size() >= 3 && pick(3) == 0) {
    out.model.add_join({{stages[0], std::nullopt}, {stages[1], std::optional<std::string>("gj")}},
                       stages[2]);
  }

  std::size_t events = pick(4);
  for (std::size_t e = 0; e < events && !labels.empty(); ++e) {
    EventDecl decl;
    decl.name = "E" + std::to_string(e + 1);
    decl.description = "event " + std::to_string(e + 1);
    std::size_t span = 1 + pick(std::min<std::size_t>(labels.size(), 3));
    for (std::size_t k = 0; k < span; ++k) {
      decl.region_labels.push_back(labels[pick(labels.size())]);
    }
    decl.extended = pick(4) == 0;
    decl.entity_like = pick(6) == 0;
    decl.instantaneous = pick(6) == 0;
    if (pick(3) == 0) decl.duration = 1 + static_cast<int>(pick(5));
    if (pick(4) == 0) decl.measure = "m" + std::to_string(pick(10));
    out.decls.events.push_back(std::move(decl));
  }
  if (!out.decls.events.empty()) {
    if (pick(2) == 0) {
      out.decls.negatives.push_back({"R1", out.decls.events[0].name});
    }
    for (std::size_t c = 0; c + 1 < out.decls.events.size(); ++c) {
      std::optional<std::string> guard;
      if (pick(3) == 0) guard = "g" + std::to_string(pick(4));
      out.decls.chron_edges.push_back(
          {out.decls.events[c].name, out.decls.events[c + 1].name, guard});
    }
    if (out.decls.events.size() >= 3 && pick(3) == 0) {
      ChronJoinDecl join;
      join.inputs.push_back({out.decls.events[0].name, std::nullopt});
      join.inputs.push_back({out.decls.events[1].name, std::optional<std::string>("gj")});
      join.output = out.decls.events[2].name;
      out.decls.chron_joins.push_back(std::move(join));
    }
  }
  return out;
}

/// Random scenario whose guards always resolve: one guard per branch group is
/// set true (or the whole group false), singletons get a fair coin.
inline tmkit::Scenario random_scenario(const tmkit::DynamicModel& dyn, std::mt19937_64& rng) {
  using namespace tmkit;
  std::map<std::string, std::set<std::string>> groups;
  std::set<std::string> all;
  for (const ChronEdge& e : dyn.chronology.edges) {
    if (!e.guard) continue;
    groups[e.from].insert(*e.guard);
    all.insert(*e.guard);
  }
  for (const ChronJoin& j : dyn.chronology.joins) {
    for (const ChronJoinInput& input : j.inputs) {
      if (input.guard) all.insert(*input.guard);
    }
  }
  std::map<std::string, GuardSpec> assignment;
  std::set<std::string> grouped;
  for (const auto& [node, members] : groups) {
    if (members.size() < 2) continue;
    std::vector<std::string> sorted(members.begin(), members.end());
    std::size_t chosen = rng() % (sorted.size() + 1);  // == size() -> all false
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      assignment[sorted[i]] = (i == chosen);
      grouped.insert(sorted[i]);
    }
  }
  for (const std::string& name : all) {
    if (!grouped.count(name)) assignment[name] = (rng() % 2) == 0;
  }
  Scenario scenario;
  std::size_t instances = 1 + rng() % 3;
  for (std::size_t i = 0; i < instances; ++i) {
    scenario.arrivals.push_back(static_cast<tmkit::Tick>(rng() % 6));
  }
  scenario.guards.push_back(assignment);
  scenario.seed = rng();
  return scenario;
}

}  // namespace support

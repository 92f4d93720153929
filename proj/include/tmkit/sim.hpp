#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tmkit/dynamics.hpp"
#include "tmkit/errors.hpp"

namespace tmkit {

using Tick = std::int64_t;

/// Guard setting: a fixed boolean or a probability in [0,1] drawn once per
/// instance from the scenario seed.
using GuardSpec = std::variant<bool, double>;

struct Scenario {
  std::vector<Tick> arrivals;
  /// One map shared by every instance, or one map per instance.
  std::vector<std::map<std::string, GuardSpec>> guards;
  std::uint64_t seed = 0;
};

struct Occurrence {
  int instance = 0;
  std::string name;
  Tick start = 0;
  Tick end = 0;           // == start for negatives (zero extent)
  bool negative = false;
  std::size_t region_event = 0;  // index of the event owning the region
};

struct Trace {
  std::vector<Occurrence> items;
};

struct RegionStat {
  int active = 0;       // occurrences open at the current clock
  int activations = 0;  // total firings
  int negatives = 0;    // total negative markings
};

struct RegionStats {
  std::vector<std::pair<std::string, RegionStat>> by_event;  // event order
};

// ---------------------------------------------------------------------------
// Engine. Deterministic by construction: the pending queue is totally
// ordered by (tick, phase, instance, event name), completions at a tick are
// processed before firings at the same tick, and all randomness is a seeded
// generator. Firing rules:
//
//  * roots (no chronology predecessors) fire at instance arrival;
//  * an event with plain in-edges fires once any predecessor has completed
//    over an edge whose guard holds;
//  * a join output fires once every guard-satisfied join input has completed;
//  * an edge into a negative emits a zero-extent occurrence and potentializes
//    the paired region permanently for that instance;
//  * edges out of a negative re-open their target's subgraph (the paired
//    region itself stays potentialized), which is how a region can be
//    elevated again at a later time;
//  * a region value is actualized by at most one occurrence per instance at
//    any tick; extended events hold their region until re-activation or
//    instance end.
// ---------------------------------------------------------------------------

class SimState {
 public:
  SimState(const DynamicModel& dyn, const Scenario& scenario) : dyn_(&dyn), scenario_(scenario) {
    build_graph();
    resolve_guards();
    stats_.assign(dyn_->events.size(), RegionStat{});
    instances_.resize(scenario_.arrivals.size());
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      InstanceState& inst = instances_[i];
      inst.fired.assign(dyn_->events.size(), 0);
      inst.completed.assign(dyn_->events.size(), 0);
      inst.pending.assign(dyn_->events.size(), 0);
      inst.negative_fired.assign(dyn_->negatives.size(), 0);
      inst.last_tick = scenario_.arrivals[i];
      for (std::size_t e = 0; e < dyn_->events.size(); ++e) {
        if (is_root_[e]) schedule_fire(static_cast<int>(i), e, scenario_.arrivals[i]);
      }
    }
  }

  Tick clock() const { return clock_; }

  /// Advances to the next firing and returns it; nothing once quiescent.
  std::optional<Occurrence> step() {
    while (!queue_.empty()) {
      QEntry entry = *queue_.begin();
      queue_.erase(queue_.begin());
      clock_ = std::max(clock_, entry.tick);
      switch (entry.kind) {
        case QEntry::Completion:
          complete(entry);
          break;
        case QEntry::FireEvent: {
          auto occ = fire_event(entry);
          if (occ) return occ;
          break;
        }
        case QEntry::FireNegative: {
          auto occ = fire_negative(entry);
          if (occ) return occ;
          break;
        }
      }
    }
    return std::nullopt;
  }

  /// Runs to quiescence (or `until`), finalizes extended occurrences, and
  /// returns the trace ordered by (start, instance, name).
  Trace run(std::optional<Tick> until = std::nullopt, Tick budget = 1'000'000) {
    while (!queue_.empty()) {
      Tick next = queue_.begin()->tick;
      if (next > budget) {
        throw Error(Errc::TickBudgetExceeded, "tick " + std::to_string(next) + " exceeds budget");
      }
      if (until && next > *until) break;
      step();
    }
    finalize();
    Trace trace;
    trace.items = occurrences_;
    std::sort(trace.items.begin(), trace.items.end(), [](const Occurrence& a, const Occurrence& b) {
      if (a.start != b.start) return a.start < b.start;
      if (a.instance != b.instance) return a.instance < b.instance;
      return a.name < b.name;
    });
    return trace;
  }

  RegionStats stats() const {
    RegionStats out;
    for (std::size_t e = 0; e < dyn_->events.size(); ++e) {
      out.by_event.emplace_back(dyn_->events[e].name, stats_[e]);
    }
    return out;
  }

  const DynamicModel& model() const { return *dyn_; }

 private:
  struct QEntry {
    enum Kind { Completion = 0, FireEvent = 1, FireNegative = 2 };
    Tick tick = 0;
    int phase = 0;  // completions first within a tick
    int instance = 0;
    std::string name;
    Kind kind = FireEvent;
    std::size_t index = 0;  // event / negative index
    std::size_t occ = 0;    // completion payload

    bool operator<(const QEntry& other) const {
      return std::tie(tick, phase, instance, name, kind, index, occ) <
             std::tie(other.tick, other.phase, other.instance, other.name, other.kind, other.index,
                      other.occ);
    }
  };

  struct GuardedTarget {
    std::size_t index = 0;
    std::optional<std::string> guard;
  };

  struct JoinSpec {
    std::vector<GuardedTarget> inputs;
  };

  struct InstanceState {
    std::unordered_map<std::string, bool> guards;
    std::vector<char> fired, completed, pending;
    std::vector<char> negative_fired;
    std::set<std::string> negated_regions;                  // permanent per instance
    std::unordered_map<std::string, std::size_t> occupied;  // region key -> open occurrence
    Tick last_tick = 0;
  };

  // -- graph precomputation ---------------------------------------------------

  void build_graph() {
    const auto& events = dyn_->events;
    const auto& negatives = dyn_->negatives;
    event_index_.clear();
    for (std::size_t e = 0; e < events.size(); ++e) event_index_[events[e].name] = e;
    for (std::size_t n = 0; n < negatives.size(); ++n) negative_index_[negatives[n].name] = n;

    region_keys_.resize(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
      std::string key;
      for (StageId sid : events[e].region.nodes) key += std::to_string(sid.value) + ",";
      region_keys_[e] = std::move(key);
    }

    out_events_.assign(events.size(), {});
    out_negatives_.assign(events.size(), {});
    in_edges_.assign(events.size(), {});
    reset_in_.assign(events.size(), {});
    reset_targets_.assign(negatives.size(), {});
    joins_.assign(events.size(), std::nullopt);

    for (const ChronEdge& edge : dyn_->chronology.edges) {
      auto from_event = event_index_.find(edge.from);
      auto to_event = event_index_.find(edge.to);
      auto from_negative = negative_index_.find(edge.from);
      auto to_negative = negative_index_.find(edge.to);
      if (from_event != event_index_.end() && to_event != event_index_.end()) {
        out_events_[from_event->second].push_back({to_event->second, edge.guard});
        in_edges_[to_event->second].push_back({from_event->second, edge.guard});
      } else if (from_event != event_index_.end() && to_negative != negative_index_.end()) {
        out_negatives_[from_event->second].push_back({to_negative->second, edge.guard});
      } else if (from_negative != negative_index_.end() && to_event != event_index_.end()) {
        reset_targets_[from_negative->second].push_back({to_event->second, edge.guard});
        reset_in_[to_event->second].push_back(from_negative->second);
      }
      // negative -> negative carries no behavior
    }
    for (const ChronJoin& join : dyn_->chronology.joins) {
      JoinSpec spec;
      for (const ChronJoinInput& input : join.inputs) {
        spec.inputs.push_back({event_index_.at(input.event), input.guard});
      }
      joins_[event_index_.at(join.output)] = std::move(spec);
    }

    // Reset in-edges do not make an event dependent: it still starts the
    // instance and the reset only re-opens it later.
    is_root_.assign(events.size(), 0);
    for (std::size_t e = 0; e < events.size(); ++e) {
      is_root_[e] = in_edges_[e].empty() && !joins_[e] ? 1 : 0;
    }

    // Descendants over event-to-event edges and join membership, for resets.
    std::vector<std::vector<std::size_t>> succ(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
      for (const GuardedTarget& t : out_events_[e]) succ[e].push_back(t.index);
    }
    for (std::size_t e = 0; e < events.size(); ++e) {
      if (!joins_[e]) continue;
      for (const GuardedTarget& input : joins_[e]->inputs) succ[input.index].push_back(e);
    }
    descendants_.assign(events.size(), {});
    for (std::size_t start = 0; start < events.size(); ++start) {
      std::vector<char> seen(events.size(), 0);
      std::vector<std::size_t> work{start};
      seen[start] = 1;
      while (!work.empty()) {
        std::size_t cur = work.back();
        work.pop_back();
        for (std::size_t next : succ[cur]) {
          if (!seen[next]) {
            seen[next] = 1;
            descendants_[start].push_back(next);
            work.push_back(next);
          }
        }
      }
      std::sort(descendants_[start].begin(), descendants_[start].end());
    }
  }

  // -- guard resolution ---------------------------------------------------------

  static double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  }

  void resolve_guards() {
    // Guard names used anywhere in the chronology.
    std::set<std::string> names;
    std::map<std::string, std::set<std::string>> branch_groups;  // by source node
    for (const ChronEdge& edge : dyn_->chronology.edges) {
      if (!edge.guard) continue;
      names.insert(*edge.guard);
      branch_groups[edge.from].insert(*edge.guard);
    }
    for (const ChronJoin& join : dyn_->chronology.joins) {
      for (const ChronJoinInput& input : join.inputs) {
        if (input.guard) names.insert(*input.guard);
      }
    }

    if (scenario_.guards.size() > 1 && scenario_.guards.size() != scenario_.arrivals.size()) {
      throw Error(Errc::ScenarioError, "per-instance guard list must match the arrival count");
    }

    resolved_guards_.resize(scenario_.arrivals.size());
    for (std::size_t i = 0; i < scenario_.arrivals.size(); ++i) {
      const std::map<std::string, GuardSpec>* spec = nullptr;
      if (!scenario_.guards.empty()) {
        spec = scenario_.guards.size() == 1 ? &scenario_.guards[0] : &scenario_.guards[i];
      }
      std::unordered_map<std::string, bool> values;
      std::mt19937_64 rng(scenario_.seed ^ (0x9E3779B97F4A7C15ull * (i + 1)));
      if (spec) {
        for (const auto& [name, value] : *spec) {  // std::map: sorted, stable draws
          if (const bool* b = std::get_if<bool>(&value)) {
            values[name] = *b;
          } else {
            double p = std::get<double>(value);
            values[name] = unit_draw(rng) < p;
          }
        }
      }
      // Exclusive-branch inference: the guarded out-edges of one node form a
      // choice; one explicit true settles the rest, all-but-one false settles
      // the remaining one.
      for (const auto& [node, group] : branch_groups) {
        if (group.size() < 2) continue;
        int true_count = 0;
        std::vector<std::string> unassigned;
        for (const std::string& g : group) {
          auto it = values.find(g);
          if (it == values.end()) {
            unassigned.push_back(g);
          } else if (it->second) {
            ++true_count;
          }
        }
        if (true_count > 1) {
          throw Error(Errc::UnresolvedGuard, "conflicting guards at branch of '" + node + "'");
        }
        if (true_count == 1) {
          for (const std::string& g : unassigned) values[g] = false;
        } else if (unassigned.size() == 1) {
          values[unassigned.front()] = true;
        } else if (!unassigned.empty()) {
          throw Error(Errc::UnresolvedGuard,
                      "branch of '" + node + "' leaves guard '" + unassigned.front() + "' open");
        }
      }
      for (const std::string& name : names) {
        if (!values.count(name)) {
          throw Error(Errc::UnresolvedGuard, "guard '" + name + "' is not covered by the scenario");
        }
      }
      resolved_guards_[i] = std::move(values);
    }
  }

  bool guard_holds(int instance, const std::optional<std::string>& guard) const {
    if (!guard) return true;
    return resolved_guards_[static_cast<std::size_t>(instance)].at(*guard);
  }

  // -- firing machinery -----------------------------------------------------------

  void schedule_fire(int instance, std::size_t event, Tick tick) {
    InstanceState& inst = instances_[static_cast<std::size_t>(instance)];
    if (inst.fired[event] || inst.pending[event]) return;
    inst.pending[event] = 1;
    queue_.insert({tick, 1, instance, dyn_->events[event].name, QEntry::FireEvent, event, 0});
  }

  void schedule_negative(int instance, std::size_t negative, Tick tick) {
    InstanceState& inst = instances_[static_cast<std::size_t>(instance)];
    if (inst.negative_fired[negative]) return;
    queue_.insert({tick, 1, instance, dyn_->negatives[negative].name, QEntry::FireNegative,
                   negative, 0});
  }

  bool ready(int instance, std::size_t event) const {
    const InstanceState& inst = instances_[static_cast<std::size_t>(instance)];
    if (joins_[event]) {
      bool any_required = false;
      for (const GuardedTarget& input : joins_[event]->inputs) {
        if (!guard_holds(instance, input.guard)) continue;
        any_required = true;
        if (!inst.completed[input.index]) return false;
      }
      return any_required;
    }
    if (in_edges_[event].empty() && reset_in_[event].empty()) return true;  // root
    for (const GuardedTarget& edge : in_edges_[event]) {
      if (inst.completed[edge.index] && guard_holds(instance, edge.guard)) return true;
    }
    for (std::size_t n : reset_in_[event]) {
      if (inst.negative_fired[n]) return true;
    }
    return false;
  }

  std::optional<Occurrence> fire_event(const QEntry& entry) {
    InstanceState& inst = instances_[static_cast<std::size_t>(entry.instance)];
    inst.pending[entry.index] = 0;
    if (inst.fired[entry.index]) return std::nullopt;
    const Event& event = dyn_->events[entry.index];
    const std::string& key = region_keys_[entry.index];
    if (inst.negated_regions.count(key)) return std::nullopt;

    auto occupied = inst.occupied.find(key);
    if (occupied != inst.occupied.end()) {
      Occurrence& open = occurrences_[occupied->second];
      if (open.name == event.name) {
        // re-activation of an extended event: the earlier occupancy closes here
        close_occurrence(inst, occupied->second, entry.tick);
      } else if (!dyn_->events[open.region_event].extended && open.end > entry.tick) {
        inst.pending[entry.index] = 1;
        QEntry retry = entry;
        retry.tick = open.end;
        queue_.insert(retry);
        return std::nullopt;
      } else {
        return std::nullopt;  // held by an open extended occurrence
      }
    }

    inst.fired[entry.index] = 1;
    Occurrence occ;
    occ.instance = entry.instance;
    occ.name = event.name;
    occ.start = entry.tick;
    occ.end = entry.tick + event.duration;
    occ.negative = false;
    occ.region_event = entry.index;
    std::size_t occ_index = occurrences_.size();
    occurrences_.push_back(occ);
    inst.occupied[key] = occ_index;
    stats_[entry.index].activations += 1;
    stats_[entry.index].active += 1;
    queue_.insert({entry.tick + event.duration, 0, entry.instance, event.name, QEntry::Completion,
                   entry.index, occ_index});
    return occ;
  }

  std::optional<Occurrence> fire_negative(const QEntry& entry) {
    InstanceState& inst = instances_[static_cast<std::size_t>(entry.instance)];
    if (inst.negative_fired[entry.index]) return std::nullopt;
    const NegativeEvent& negative = dyn_->negatives[entry.index];
    std::size_t paired = negative.paired_index;
    const std::string& key = region_keys_[paired];

    auto occupied = inst.occupied.find(key);
    if (occupied != inst.occupied.end()) close_occurrence(inst, occupied->second, entry.tick);

    inst.negative_fired[entry.index] = 1;
    inst.negated_regions.insert(key);
    inst.last_tick = std::max(inst.last_tick, entry.tick);
    stats_[paired].negatives += 1;

    Occurrence occ;
    occ.instance = entry.instance;
    occ.name = negative.name;
    occ.start = entry.tick;
    occ.end = entry.tick;
    occ.negative = true;
    occ.region_event = paired;
    occurrences_.push_back(occ);

    // Reset edges: re-open the target and everything event-reachable from it.
    for (const GuardedTarget& target : reset_targets_[entry.index]) {
      if (!guard_holds(entry.instance, target.guard)) continue;
      reset_subtree(inst, target.index);
      if (ready(entry.instance, target.index)) {
        schedule_fire(entry.instance, target.index, entry.tick);
      }
    }
    return occ;
  }

  void reset_subtree(InstanceState& inst, std::size_t event) {
    inst.fired[event] = 0;
    inst.completed[event] = 0;
    for (std::size_t d : descendants_[event]) {
      inst.fired[d] = 0;
      inst.completed[d] = 0;
    }
  }

  void complete(const QEntry& entry) {
    InstanceState& inst = instances_[static_cast<std::size_t>(entry.instance)];
    const Occurrence& occ = occurrences_[entry.occ];
    // An occurrence closed before its nominal completion (cut short by a
    // negative or superseded through a reset) does not complete.
    if (occ.end < entry.tick) return;

    inst.completed[entry.index] = 1;
    inst.last_tick = std::max(inst.last_tick, entry.tick);
    if (!dyn_->events[entry.index].extended) {
      close_occurrence(inst, entry.occ, entry.tick);
    }

    for (const GuardedTarget& edge : out_events_[entry.index]) {
      if (!guard_holds(entry.instance, edge.guard)) continue;
      maybe_schedule(entry.instance, edge.index, entry.tick);
    }
    for (const GuardedTarget& edge : out_negatives_[entry.index]) {
      if (!guard_holds(entry.instance, edge.guard)) continue;
      schedule_negative(entry.instance, edge.index, entry.tick);
    }
    for (std::size_t e = 0; e < joins_.size(); ++e) {
      if (!joins_[e]) continue;
      for (const GuardedTarget& input : joins_[e]->inputs) {
        if (input.index == entry.index) maybe_schedule(entry.instance, e, entry.tick);
      }
    }
  }

  void maybe_schedule(int instance, std::size_t event, Tick tick) {
    InstanceState& inst = instances_[static_cast<std::size_t>(instance)];
    if (inst.fired[event] || inst.pending[event]) return;
    if (!ready(instance, event)) return;
    schedule_fire(instance, event, tick);
  }

  void close_occurrence(InstanceState& inst, std::size_t occ_index, Tick tick) {
    Occurrence& occ = occurrences_[occ_index];
    auto it = inst.occupied.find(region_keys_[occ.region_event]);
    if (it == inst.occupied.end() || it->second != occ_index) return;
    occ.end = std::max(occ.start, tick);
    inst.occupied.erase(it);
    stats_[occ.region_event].active -= 1;
    inst.last_tick = std::max(inst.last_tick, occ.end);
  }

  /// Closes still-open (extended) occurrences at their instance's last tick.
  void finalize() {
    for (auto& inst : instances_) {
      std::vector<std::size_t> open;
      for (const auto& [key, occ_index] : inst.occupied) open.push_back(occ_index);
      for (std::size_t occ_index : open) close_occurrence(inst, occ_index, inst.last_tick);
    }
  }

  const DynamicModel* dyn_;
  Scenario scenario_;
  Tick clock_ = 0;
  std::set<QEntry> queue_;
  std::vector<InstanceState> instances_;
  std::vector<std::unordered_map<std::string, bool>> resolved_guards_;
  std::vector<Occurrence> occurrences_;
  std::vector<RegionStat> stats_;

  std::unordered_map<std::string, std::size_t> event_index_;
  std::unordered_map<std::string, std::size_t> negative_index_;
  std::vector<std::string> region_keys_;
  std::vector<std::vector<GuardedTarget>> out_events_;
  std::vector<std::vector<GuardedTarget>> out_negatives_;
  std::vector<std::vector<GuardedTarget>> in_edges_;
  std::vector<std::vector<std::size_t>> reset_in_;
  std::vector<std::vector<GuardedTarget>> reset_targets_;
  std::vector<std::optional<JoinSpec>> joins_;
  std::vector<char> is_root_;
  std::vector<std::vector<std::size_t>> descendants_;
};

inline SimState init(const DynamicModel& dyn, const Scenario& scenario) {
  return SimState(dyn, scenario);
}

inline std::optional<Occurrence> step(SimState& state) { return state.step(); }

inline Trace run(SimState& state, std::optional<Tick> until = std::nullopt,
                 Tick budget = 1'000'000) {
  return state.run(until, budget);
}

inline RegionStats stats(const SimState& state) { return state.stats(); }

/// Line-per-occurrence export; key order is part of the format.
inline std::string to_jsonl(const Trace& trace) {
  std::string out;
  for (const Occurrence& occ : trace.items) {
    out += "{\"instance\":" + std::to_string(occ.instance) + ",\"name\":\"" + occ.name +
           "\",\"start\":" + std::to_string(occ.start) + ",\"end\":" + std::to_string(occ.end) +
           ",\"negative\":" + (occ.negative ? "true" : "false") + "}\n";
  }
  return out;
}

}  // namespace tmkit

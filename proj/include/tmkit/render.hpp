#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tmkit/dynamics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

namespace dot_detail {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

inline std::string stage_label(const Stage& s) {
  std::string label = to_string(s.kind);
  if (s.kind == ActionKind::Transfer && s.direction && *s.direction != TransferDirection::Both) {
    label += std::string(" ") + to_string(*s.direction);
  }
  if (s.label) label += "\n@" + *s.label;  // escape() renders the line break
  return label;
}

inline std::string node_name(StageId sid, const std::string& prefix = "") {
  return prefix + "s" + std::to_string(sid.value);
}

inline void emit_thimac_cluster(const StaticModel& model, ThimacId tid, const std::string& prefix,
                                const std::set<StageId>* filter, int depth, std::string& out) {
  const Thimac& t = model.thimac(tid);
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out += pad + "subgraph cluster_" + prefix + "t" + std::to_string(tid.value) + " {\n";
  out += pad + "  label=\"" + escape(t.name) + "\";\n";
  if (t.is_memory) out += pad + "  style=dashed;\n";
  for (StageId sid : t.stages) {
    if (filter && !filter->count(sid)) continue;
    const Stage& s = model.stage(sid);
    out += pad + "  " + node_name(sid, prefix) + " [label=\"" + escape(stage_label(s)) + "\"";
    if (t.is_memory) out += ", shape=cylinder";
    out += "];\n";
  }
  for (ThimacId child : t.children) emit_thimac_cluster(model, child, prefix, filter, depth + 1, out);
  out += pad + "}\n";
}

inline void emit_arcs(const StaticModel& model, const std::string& prefix,
                      const std::set<ArcId>* filter, std::string& out) {
  std::set<ArcId> join_arcs;
  for (const JoinBar& j : model.joins()) {
    for (ArcId a : j.inputs) join_arcs.insert(a);
  }
  for (const Arc& a : model.arcs()) {
    if (filter && !filter->count(a.id)) continue;
    if (!filter && join_arcs.count(a.id)) continue;  // drawn through the bar
    out += "  " + node_name(a.from, prefix) + " -> " + node_name(a.to, prefix);
    std::vector<std::string> attrs;
    if (a.kind == ArcKind::Trigger) attrs.push_back("style=dashed");
    if (a.guard) attrs.push_back("label=\"" + escape(*a.guard) + "\"");
    if (!attrs.empty()) {
      out += " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (i) out += ", ";
        out += attrs[i];
      }
      out += "]";
    }
    out += ";\n";
  }
  if (!filter) {
    for (const JoinBar& j : model.joins()) {
      std::string bar = prefix + "j" + std::to_string(j.id.value);
      out += "  " + bar +
             " [shape=box, style=filled, fillcolor=black, label=\"\", height=0.08, width=0.6];\n";
      for (ArcId aid : j.inputs) {
        const Arc& a = model.arc(aid);
        out += "  " + node_name(a.from, prefix) + " -> " + bar + " [style=dashed";
        if (a.guard) out += ", label=\"" + escape(*a.guard) + "\"";
        out += "];\n";
      }
      out += "  " + bar + " -> " + node_name(j.output, prefix) + " [style=dashed];\n";
    }
  }
}

}  // namespace dot_detail

/// Static view: thimacs as nested clusters, flow arcs solid, triggers dashed,
/// memory stores as dashed clusters of cylinder nodes, joins as bar nodes.
inline std::string to_dot(const StaticModel& model) {
  std::string out = "digraph tm {\n";
  out += "  rankdir=LR;\n  node [shape=box, fontsize=10];\n";
  for (ThimacId root : model.roots()) dot_detail::emit_thimac_cluster(model, root, "", nullptr, 1, out);
  dot_detail::emit_arcs(model, "", nullptr, out);
  out += "}\n";
  return out;
}

/// Dynamic view: one shaded cluster per event around a copy of its region.
/// Regions may overlap, so each event draws its own copies of the stages.
inline std::string to_dot_dynamic(const DynamicModel& dyn) {
  std::string out = "digraph tm_dynamic {\n";
  out += "  rankdir=LR;\n  node [shape=box, fontsize=10];\n";
  for (std::size_t i = 0; i < dyn.events.size(); ++i) {
    const Event& e = dyn.events[i];
    std::string prefix = "e" + std::to_string(i) + "_";
    out += "  subgraph cluster_" + prefix + " {\n";
    std::string title = e.name + ": " + e.description;
    if (e.measure) title += " [" + *e.measure + "]";
    if (e.extended) title += " *";
    out += "    label=\"" + dot_detail::escape(title) + "\";\n";
    out += "    style=filled;\n    fillcolor=lightgrey;\n";
    for (StageId sid : e.region.nodes) {
      const Stage& s = dyn.statics.stage(sid);
      out += "    " + dot_detail::node_name(sid, prefix) + " [label=\"" +
             dot_detail::escape(dot_detail::stage_label(s)) + "\"];\n";
    }
    for (ArcId aid : e.region.arcs) {
      const Arc& a = dyn.statics.arc(aid);
      out += "    " + dot_detail::node_name(a.from, prefix) + " -> " +
             dot_detail::node_name(a.to, prefix);
      if (a.kind == ArcKind::Trigger) out += " [style=dashed]";
      out += ";\n";
    }
    out += "  }\n";
  }
  out += "}\n";
  return out;
}

/// Behavior view: events as boxes, negatives as octagons, guards as edge
/// labels, conjunctive joins as bar nodes.
inline std::string to_dot_chronology(const DynamicModel& dyn) {
  std::string out = "digraph tm_chronology {\n";
  out += "  rankdir=LR;\n  node [shape=box, fontsize=10];\n";
  std::map<std::string, std::string> node_of;
  for (std::size_t i = 0; i < dyn.events.size(); ++i) {
    std::string id = "n" + std::to_string(i);
    node_of[dyn.events[i].name] = id;
    out += "  " + id + " [label=\"" + dot_detail::escape(dyn.events[i].name) + "\"];\n";
  }
  for (std::size_t i = 0; i < dyn.negatives.size(); ++i) {
    std::string id = "neg" + std::to_string(i);
    node_of[dyn.negatives[i].name] = id;
    out += "  " + id + " [label=\"" + dot_detail::escape(dyn.negatives[i].name) +
           "\", shape=octagon, style=dashed];\n";
  }
  for (const ChronEdge& e : dyn.chronology.edges) {
    auto from = node_of.find(e.from);
    auto to = node_of.find(e.to);
    if (from == node_of.end() || to == node_of.end()) continue;
    out += "  " + from->second + " -> " + to->second;
    if (e.guard) out += " [label=\"" + dot_detail::escape(*e.guard) + "\"]";
    out += ";\n";
  }
  int join_counter = 0;
  for (const ChronJoin& j : dyn.chronology.joins) {
    std::string bar = "jn" + std::to_string(join_counter++);
    out += "  " + bar +
           " [shape=box, style=filled, fillcolor=black, label=\"\", height=0.08, width=0.6];\n";
    for (const ChronJoinInput& input : j.inputs) {
      out += "  " + node_of.at(input.event) + " -> " + bar;
      if (input.guard) out += " [label=\"" + dot_detail::escape(*input.guard) + "\"]";
      out += ";\n";
    }
    out += "  " + bar + " -> " + node_of.at(j.output) + ";\n";
  }
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Diagram simplification: every flow path that runs from a Create/Process
// stage through Release/Transfer/Receive stages to the next Create/Process
// stage collapses into one simplified arc. Triggers, joins, and memory
// stores survive; triggers anchored on an eliminated stage are re-anchored
// on the nearest kept stages along the flow direction.
// ---------------------------------------------------------------------------

struct SimplifiedArc {
  StageId from;
  StageId to;

  auto operator<=>(const SimplifiedArc&) const = default;
};

struct SimplifiedModel {
  StaticModel model;                // Create/Process skeleton, kept stage ids
  std::vector<SimplifiedArc> arcs;  // collapsed transfer chains
};

namespace simplify_detail {

inline bool eliminated(const Stage& s) {
  return s.kind == ActionKind::Release || s.kind == ActionKind::Transfer ||
         s.kind == ActionKind::Receive;
}

/// Kept stages reachable from `start` by flow arcs whose interior stages are
/// all eliminated. `forward` selects the direction.
inline std::vector<StageId> kept_frontier(const StaticModel& model, StageId start, bool forward) {
  std::vector<StageId> result;
  std::set<StageId> seen{start};
  std::vector<StageId> work{start};
  while (!work.empty()) {
    StageId cur = work.back();
    work.pop_back();
    for (const Arc& a : model.arcs()) {
      if (a.kind != ArcKind::Flow) continue;
      StageId next;
      if (forward && a.from == cur) next = a.to;
      else if (!forward && a.to == cur) next = a.from;
      else continue;
      if (!seen.insert(next).second) continue;
      if (eliminated(model.stage(next))) {
        work.push_back(next);
      } else {
        result.push_back(next);
      }
    }
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

}  // namespace simplify_detail

inline SimplifiedModel simplify(const StaticModel& model) {
  using simplify_detail::eliminated;
  SimplifiedModel out;

  ModelRewriter rewriter(model);
  for (const Stage& s : model.stages()) {
    if (!eliminated(s)) rewriter.keep_stage(s);
  }

  std::set<SimplifiedArc> simplified;
  std::set<ArcId> join_arcs;
  for (const JoinBar& j : model.joins()) {
    for (ArcId a : j.inputs) join_arcs.insert(a);
  }

  auto anchors = [&](StageId sid, bool forward) {
    if (!eliminated(model.stage(sid))) return std::vector<StageId>{sid};
    return simplify_detail::kept_frontier(model, sid, forward);
  };

  for (const Arc& a : model.arcs()) {
    if (a.kind == ArcKind::Flow) {
      const Stage& from = model.stage(a.from);
      const Stage& to = model.stage(a.to);
      if (!eliminated(from) && !eliminated(to)) {
        rewriter.keep_arc(a);  // direct Create/Process adjacency survives as-is
      } else if (!eliminated(from) && eliminated(to)) {
        for (StageId target : simplify_detail::kept_frontier(model, a.to, true)) {
          simplified.insert({a.from, target});
        }
      }
      continue;
    }
    if (join_arcs.count(a.id)) continue;
    if (!eliminated(model.stage(a.from)) && !eliminated(model.stage(a.to))) rewriter.keep_arc(a);
  }
  bool joins_intact = true;
  for (const JoinBar& j : model.joins()) {
    bool intact = !eliminated(model.stage(j.output));
    for (ArcId aid : j.inputs) {
      if (eliminated(model.stage(model.arc(aid).from))) intact = false;
    }
    if (intact) {
      for (ArcId aid : j.inputs) rewriter.keep_arc(model.arc(aid));
      rewriter.keep_join(j);
    } else {
      joins_intact = false;
    }
  }

  StaticModel result = rewriter.take();

  // Triggers anchored on an eliminated stage re-anchor onto the nearest kept
  // stages along the flow direction; unreachable ones are dropped.
  for (const Arc& a : model.arcs()) {
    if (a.kind != ArcKind::Trigger || join_arcs.count(a.id)) continue;
    if (!eliminated(model.stage(a.from)) && !eliminated(model.stage(a.to))) continue;
    for (StageId s : anchors(a.from, false)) {
      for (StageId t : anchors(a.to, true)) result.add_trigger(s, t, a.guard);
    }
  }
  if (!joins_intact) {
    for (const JoinBar& j : model.joins()) {
      bool intact = !eliminated(model.stage(j.output));
      for (ArcId aid : j.inputs) {
        if (eliminated(model.stage(model.arc(aid).from))) intact = false;
      }
      if (intact) continue;
      std::vector<std::pair<StageId, std::optional<std::string>>> inputs;
      for (ArcId aid : j.inputs) {
        const Arc& a = model.arc(aid);
        for (StageId s : anchors(a.from, false)) inputs.emplace_back(s, a.guard);
      }
      std::vector<StageId> outputs = anchors(j.output, true);
      if (inputs.size() >= 2 && !outputs.empty()) result.add_join(inputs, outputs.front());
    }
  }

  // Memory stores whose host stage was eliminated re-home onto the first kept
  // stage of the host thimac.
  for (const Thimac& t : result.thimacs()) {
    if (!t.is_memory || !t.host_stage) continue;
    if (result.has(*t.host_stage)) continue;
    ThimacId host_owner = model.stage(*t.host_stage).owner;
    for (StageId sid : result.thimac(host_owner).stages) {
      result.bind_memory(t.id, sid);
      break;
    }
  }

  out.model = std::move(result);
  out.arcs.assign(simplified.begin(), simplified.end());
  return out;
}

/// Re-expands each simplified arc into the canonical
/// Release -> Transfer(out) -> Transfer(in) -> Receive chain. Fresh stages
/// are minted deterministically, so desugar-of-simplify is idempotent after
/// the first round.
inline StaticModel desugar(const SimplifiedModel& simplified) {
  StaticModel model = simplified.model;
  for (const SimplifiedArc& sarc : simplified.arcs) {
    ThimacId from_owner = model.stage(sarc.from).owner;
    ThimacId to_owner = model.stage(sarc.to).owner;
    StageId release = model.add_stage(from_owner, ActionKind::Release);
    StageId tout = model.add_stage(from_owner, ActionKind::Transfer, TransferDirection::Out);
    StageId tin = model.add_stage(to_owner, ActionKind::Transfer, TransferDirection::In);
    StageId receive = model.add_stage(to_owner, ActionKind::Receive);
    model.add_flow(sarc.from, release);
    model.add_flow(release, tout);
    model.add_flow(tout, tin);
    model.add_flow(tin, receive);
    model.add_flow(receive, sarc.to);
  }
  return model;
}

}  // namespace tmkit

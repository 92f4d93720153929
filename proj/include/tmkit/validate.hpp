#pragma once

#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "tmkit/decls.hpp"
#include "tmkit/diagnostics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

// Flow-grammar adjacency. Flow arcs are restricted to the pairs below;
// trigger arcs may connect any two stages.
//
//   same thimac:   Transfer(in) -> Receive
//                  Receive      -> Process | Release
//                  Create       -> Process | Release
//                  Process      -> Release | Create
//                  Release      -> Transfer(out)
//   cross thimac:  Transfer(out) -> Transfer(in)
//   memory store:  host stage            -> store Receive / Transfer(in)
//                  store Release / Transfer(out) -> host stage
//
// A `both` transfer matches either directional role.

namespace detail {

inline bool transfer_matches(const Stage& s, TransferDirection role) {
  return s.kind == ActionKind::Transfer && s.direction &&
         (*s.direction == role || *s.direction == TransferDirection::Both);
}

inline bool is_memory_boundary_in(const Stage& s) {
  return s.kind == ActionKind::Receive || transfer_matches(s, TransferDirection::In);
}

inline bool is_memory_boundary_out(const Stage& s) {
  return s.kind == ActionKind::Release || transfer_matches(s, TransferDirection::Out);
}

}  // namespace detail

inline bool check_adjacency(const StaticModel& model, const Stage& from, const Stage& to) {
  using detail::transfer_matches;
  const Thimac& from_owner = model.thimac(from.owner);
  const Thimac& to_owner = model.thimac(to.owner);

  // memory-store boundary rules
  if (to_owner.is_memory && to_owner.host_stage &&
      model.stage(*to_owner.host_stage).owner == from.owner) {
    return detail::is_memory_boundary_in(to);
  }
  if (from_owner.is_memory && from_owner.host_stage &&
      model.stage(*from_owner.host_stage).owner == to.owner) {
    return detail::is_memory_boundary_out(from);
  }

  if (from.owner != to.owner) {
    return transfer_matches(from, TransferDirection::Out) &&
           transfer_matches(to, TransferDirection::In);
  }

  switch (from.kind) {
    case ActionKind::Transfer:
      return transfer_matches(from, TransferDirection::In) && to.kind == ActionKind::Receive;
    case ActionKind::Receive:
      return to.kind == ActionKind::Process || to.kind == ActionKind::Release;
    case ActionKind::Create:
      return to.kind == ActionKind::Process || to.kind == ActionKind::Release;
    case ActionKind::Process:
      return to.kind == ActionKind::Release || to.kind == ActionKind::Create;
    case ActionKind::Release:
      return transfer_matches(to, TransferDirection::Out);
  }
  return false;
}

inline bool check_adjacency(const StaticModel& model, StageId from, StageId to) {
  return check_adjacency(model, model.stage(from), model.stage(to));
}

namespace detail {

inline std::string stage_display(const StaticModel& model, const Stage& s) {
  std::string out = model.thimac(s.owner).name + "." + to_string(s.kind);
  if (s.label) out += "@" + *s.label;
  return out;
}

/// Weak connectivity of a resolved region over its own arcs.
inline bool region_connected(const StaticModel& model, const Region& r) {
  if (r.nodes.size() <= 1) return true;
  std::set<StageId> seen;
  std::vector<StageId> work{*r.nodes.begin()};
  while (!work.empty()) {
    StageId cur = work.back();
    work.pop_back();
    if (!seen.insert(cur).second) continue;
    for (ArcId aid : r.arcs) {
      const Arc& a = model.arc(aid);
      if (a.from == cur && !seen.count(a.to)) work.push_back(a.to);
      if (a.to == cur && !seen.count(a.from)) work.push_back(a.from);
    }
  }
  return seen.size() == r.nodes.size();
}

}  // namespace detail

/// Static well-formedness. Empty result (no errors) is the compile gate for
/// the dynamic level. E_GUARD_UNRESOLVED is part of this code space but is
/// raised at simulation setup, when scenario guards are known.
inline Diagnostics validate(const StaticModel& model, const DynamicDecls& decls) {
  Diagnostics diags;

  for (const Arc& a : model.arcs()) {
    if (a.kind != ArcKind::Flow) continue;
    if (!check_adjacency(model, a.from, a.to)) {
      diags.error("E_ADJ", "illegal flow " + detail::stage_display(model, model.stage(a.from)) +
                               " -> " + detail::stage_display(model, model.stage(a.to)));
    }
  }

  for (const JoinBar& j : model.joins()) {
    if (j.inputs.size() < 2) {
      diags.error("E_JOIN_ARITY",
                  "join #" + std::to_string(j.id.value) + " needs at least 2 inputs");
    }
  }

  std::unordered_set<std::string> event_names;
  for (const EventDecl& e : decls.events) {
    if (!event_names.insert(e.name).second) {
      diags.error("DuplicateName", "event '" + e.name + "' declared twice");
      continue;
    }
    if (e.region_labels.empty()) {
      diags.error("E_REGION_EMPTY", "event '" + e.name + "' has an empty region");
      continue;
    }
    std::set<StageId> nodes;
    bool resolved = true;
    for (const std::string& label : e.region_labels) {
      auto sid = model.stage_by_label(label);
      if (!sid) {
        diags.error("E_UNKNOWN_LABEL", "event '" + e.name + "' names unknown label '" + label + "'");
        resolved = false;
        continue;
      }
      nodes.insert(*sid);
      const Stage& s = model.stage(*sid);
      if (model.thimac(s.owner).classification == ThingClassification::Appearing) {
        diags.error("E_APPEARING_IN_REGION",
                    "event '" + e.name + "' covers stage of appearing thimac '" +
                        model.thimac(s.owner).name + "'");
      }
    }
    if (resolved && !nodes.empty()) {
      Region r = model.induced_subdiagram(nodes);
      if (!detail::region_connected(model, r)) {
        diags.warning("W_REGION_DISCONNECTED", "region of event '" + e.name + "' is not connected");
      }
    }
  }

  if (!decls.events.empty() && decls.chron_edges.empty() && decls.chron_joins.empty()) {
    diags.warning("W_NO_CHRONOLOGY",
                  "events are declared but no chronology; chron declarations are never "
                  "inferred from trigger arcs");
  }

  std::unordered_set<std::string> negative_names;
  for (const NegativeDecl& n : decls.negatives) {
    if (!negative_names.insert(n.name).second) {
      diags.error("DuplicateName", "negative '" + n.name + "' declared twice");
      continue;
    }
    if (!event_names.count(n.paired_event)) {
      diags.error("E_NEG_UNPAIRED",
                  "negative '" + n.name + "' pairs unknown event '" + n.paired_event + "'");
    }
  }

  return diags;
}

}  // namespace tmkit

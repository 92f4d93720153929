#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tmkit/decls.hpp"
#include "tmkit/diagnostics.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/model.hpp"
#include "tmkit/validate.hpp"
#include "tmkit/xml.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Supported BPMN 2.0 subset: collaborations with pools/lanes, tasks (send,
// receive, generic), subprocesses, message start/end/intermediate events,
// exclusive and parallel gateways, sequence and message flows. Diagram
// interchange sections are ignored; other constructs are collected as
// warnings.
// ---------------------------------------------------------------------------

enum class BpmnNodeKind {
  Task,
  SendTask,
  ReceiveTask,
  SubProcess,
  StartEvent,
  EndEvent,
  ThrowEvent,
  CatchEvent,
  ExclusiveGateway,
  ParallelGateway,
};

struct BpmnNode {
  std::string id;
  std::string name;
  BpmnNodeKind kind = BpmnNodeKind::Task;
  bool message = false;  // carries a messageEventDefinition
  bool event_subprocess = false;
  std::string process;  // owning process id
  std::string lane;     // owning lane id, if any
  std::string parent;   // enclosing subProcess id, if any
};

struct BpmnSequenceFlow {
  std::string id;
  std::string name;  // branch label on gateway exits
  std::string source;
  std::string target;
};

struct BpmnMessageFlow {
  std::string id;
  std::string name;
  std::string source;  // node, participant, or subProcess id
  std::string target;
};

struct BpmnLane {
  std::string id;
  std::string name;
  std::string process;
  std::vector<std::string> node_refs;
};

struct BpmnParticipant {
  std::string id;
  std::string name;
  std::string process_ref;  // empty for black-box pools
};

struct BpmnProcess {
  std::string id;
  std::string name;
};

struct BpmnGraph {
  std::vector<BpmnParticipant> participants;
  std::vector<BpmnProcess> processes;
  std::vector<BpmnLane> lanes;
  std::vector<BpmnNode> nodes;
  std::vector<BpmnSequenceFlow> sequence_flows;
  std::vector<BpmnMessageFlow> message_flows;
  std::map<std::string, std::string> messages;  // id -> name

  const BpmnNode* find_node(const std::string& id) const {
    for (const auto& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }
  const BpmnParticipant* find_participant(const std::string& id) const {
    for (const auto& p : participants) {
      if (p.id == id) return &p;
    }
    return nullptr;
  }
};

struct BpmnParseResult {
  std::optional<BpmnGraph> graph;
  Diagnostics diagnostics;

  bool ok() const { return graph.has_value(); }
};

namespace bpmn_detail {

inline std::optional<BpmnNodeKind> node_kind(const std::string& local) {
  if (local == "task" || local == "userTask" || local == "serviceTask" || local == "scriptTask" ||
      local == "manualTask" || local == "businessRuleTask") {
    return BpmnNodeKind::Task;
  }
  if (local == "sendTask") return BpmnNodeKind::SendTask;
  if (local == "receiveTask") return BpmnNodeKind::ReceiveTask;
  if (local == "subProcess") return BpmnNodeKind::SubProcess;
  if (local == "startEvent") return BpmnNodeKind::StartEvent;
  if (local == "endEvent") return BpmnNodeKind::EndEvent;
  if (local == "intermediateThrowEvent") return BpmnNodeKind::ThrowEvent;
  if (local == "intermediateCatchEvent") return BpmnNodeKind::CatchEvent;
  if (local == "exclusiveGateway") return BpmnNodeKind::ExclusiveGateway;
  if (local == "parallelGateway") return BpmnNodeKind::ParallelGateway;
  return std::nullopt;
}

inline bool is_event_kind(BpmnNodeKind k) {
  return k == BpmnNodeKind::StartEvent || k == BpmnNodeKind::EndEvent ||
         k == BpmnNodeKind::ThrowEvent || k == BpmnNodeKind::CatchEvent;
}

inline void collect_nodes(const xml::Element& scope, const std::string& process_id,
                          const std::string& parent, BpmnGraph& graph, Diagnostics& diags,
                          std::set<std::string>& skipped) {
  for (const xml::Element& child : scope.children) {
    const std::string& local = child.name;
    if (local == "laneSet") {
      for (const xml::Element& lane_el : child.children) {
        if (lane_el.name != "lane") continue;
        BpmnLane lane;
        lane.id = lane_el.attribute_or("id", "");
        lane.name = lane_el.attribute_or("name", lane.id);
        lane.process = process_id;
        for (const xml::Element& ref : lane_el.children) {
          if (ref.name == "flowNodeRef") {
            std::string id = ref.text;
            while (!id.empty() && std::isspace(static_cast<unsigned char>(id.back()))) id.pop_back();
            while (!id.empty() && std::isspace(static_cast<unsigned char>(id.front()))) id.erase(id.begin());
            lane.node_refs.push_back(id);
          }
        }
        graph.lanes.push_back(std::move(lane));
      }
      continue;
    }
    if (local == "sequenceFlow") {
      BpmnSequenceFlow flow;
      flow.id = child.attribute_or("id", "");
      flow.name = child.attribute_or("name", "");
      flow.source = child.attribute_or("sourceRef", "");
      flow.target = child.attribute_or("targetRef", "");
      if (flow.name.empty()) {
        for (const xml::Element& cond : child.children) {
          if (cond.name == "conditionExpression") flow.name = cond.text;
        }
      }
      graph.sequence_flows.push_back(std::move(flow));
      continue;
    }
    auto kind = node_kind(local);
    if (!kind) {
      if (local == "incoming" || local == "outgoing" || local == "documentation" ||
          local == "extensionElements") {
        continue;
      }
      diags.warning("W_UNSUPPORTED", "ignoring <" + local + ">", child.line, child.col);
      std::string id = child.attribute_or("id", "");
      if (!id.empty()) skipped.insert(id);
      continue;
    }
    BpmnNode node;
    node.id = child.attribute_or("id", "");
    node.name = child.attribute_or("name", "");
    node.kind = *kind;
    node.process = process_id;
    node.parent = parent;
    if (is_event_kind(node.kind)) {
      for (const xml::Element& def : child.children) {
        if (def.name == "messageEventDefinition") {
          node.message = true;
        } else if (def.name.size() > 15 &&
                   def.name.substr(def.name.size() - 15) == "EventDefinition") {
          diags.warning("W_UNSUPPORTED", "ignoring <" + def.name + ">", def.line, def.col);
        }
      }
    }
    if (node.kind == BpmnNodeKind::SubProcess) {
      node.event_subprocess = child.attribute_or("triggeredByEvent", "false") == "true";
      collect_nodes(child, process_id, node.id, graph, diags, skipped);
    }
    graph.nodes.push_back(std::move(node));
  }
}

}  // namespace bpmn_detail

inline BpmnParseResult parse_bpmn(const std::string& xml_text) {
  BpmnParseResult result;
  xml::Element root;
  try {
    root = xml::parse(xml_text);
  } catch (const Error& e) {
    result.diagnostics.error("XmlError", e.what());
    return result;
  }
  if (root.name != "definitions") {
    result.diagnostics.error("XmlError", "document element must be <definitions>, found <" +
                                             root.name + ">");
    return result;
  }

  BpmnGraph graph;
  std::set<std::string> skipped;
  for (const xml::Element& child : root.children) {
    if (child.name == "collaboration") {
      for (const xml::Element& el : child.children) {
        if (el.name == "participant") {
          BpmnParticipant p;
          p.id = el.attribute_or("id", "");
          p.name = el.attribute_or("name", p.id);
          p.process_ref = el.attribute_or("processRef", "");
          graph.participants.push_back(std::move(p));
        } else if (el.name == "messageFlow") {
          BpmnMessageFlow mf;
          mf.id = el.attribute_or("id", "");
          mf.name = el.attribute_or("name", "");
          mf.source = el.attribute_or("sourceRef", "");
          mf.target = el.attribute_or("targetRef", "");
          graph.message_flows.push_back(std::move(mf));
        }
      }
    } else if (child.name == "process") {
      BpmnProcess p;
      p.id = child.attribute_or("id", "");
      p.name = child.attribute_or("name", p.id);
      graph.processes.push_back(p);
      bpmn_detail::collect_nodes(child, p.id, "", graph, result.diagnostics, skipped);
    } else if (child.name == "message") {
      graph.messages[child.attribute_or("id", "")] = child.attribute_or("name", "");
    } else if (child.name == "BPMNDiagram") {
      // diagram interchange: ignored entirely
    } else {
      result.diagnostics.warning("W_UNSUPPORTED", "ignoring <" + child.name + ">", child.line,
                                 child.col);
    }
  }

  // Attach lane membership and check reference closure.
  for (const BpmnLane& lane : graph.lanes) {
    for (const std::string& ref : lane.node_refs) {
      for (BpmnNode& node : graph.nodes) {
        if (node.id == ref && node.parent.empty()) node.lane = lane.id;
      }
    }
  }
  auto known = [&](const std::string& id) {
    return graph.find_node(id) != nullptr || graph.find_participant(id) != nullptr;
  };
  bool dangling = false;
  std::vector<BpmnSequenceFlow> kept_flows;
  for (const BpmnSequenceFlow& flow : graph.sequence_flows) {
    if (skipped.count(flow.source) || skipped.count(flow.target)) {
      result.diagnostics.warning("W_UNSUPPORTED",
                                 "dropping flow '" + flow.id + "' touching an ignored element");
      continue;
    }
    if (!graph.find_node(flow.source) || !graph.find_node(flow.target)) {
      result.diagnostics.error("DanglingRef", "sequence flow '" + flow.id +
                                                  "' references a missing node");
      dangling = true;
      continue;
    }
    kept_flows.push_back(flow);
  }
  graph.sequence_flows = std::move(kept_flows);
  for (const BpmnMessageFlow& mf : graph.message_flows) {
    if (!known(mf.source) || !known(mf.target)) {
      result.diagnostics.error("DanglingRef",
                               "message flow '" + mf.id + "' references a missing element");
      dangling = true;
    }
  }
  if (dangling) return result;

  result.graph = std::move(graph);
  return result;
}

// ---------------------------------------------------------------------------
// Mapping to the thinging-machine form.
//
//   pool / lane / subProcess        -> (nested) thimac
//   task                            -> Process stage
//   sendTask, message throw/end     -> Create -> Release -> Transfer(out)
//   receiveTask, message catch/start-> Transfer(in) -> Receive
//   plain start event               -> Create stage
//   plain end event                 -> terminal marker (no stage)
//   exclusive gateway               -> guarded triggers from the predecessor
//   parallel join gateway           -> join bar
//   message flow                    -> one cross-thimac Transfer(out)->(in) arc
//
// Every task and mapped event node also yields an event declaration over its
// own stages, and sequence/message links become chronology edges, so the
// import is immediately simulable.
// ---------------------------------------------------------------------------

struct BpmnImport {
  StaticModel model;
  DynamicDecls decls;
  Diagnostics diagnostics;

  bool ok() const { return diagnostics.ok(); }
};

namespace bpmn_detail {

inline std::string sanitize_label(const std::string& id, std::set<std::string>& taken) {
  std::string out;
  std::string segment;
  auto flush = [&] {
    if (segment.empty()) segment = "_";
    if (std::isdigit(static_cast<unsigned char>(segment[0]))) {
      bool all_digits = true;
      for (char c : segment) {
        if (!std::isdigit(static_cast<unsigned char>(c))) all_digits = false;
      }
      if (!all_digits) segment.insert(segment.begin(), '_');
    }
    if (!out.empty()) out += ".";
    out += segment;
    segment.clear();
  };
  for (char c : id) {
    if (c == '.') {
      flush();
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      segment.push_back(c);
    } else {
      segment.push_back('_');
    }
  }
  flush();
  if (out.empty()) out = "_";
  while (taken.count(out)) out += "_";
  taken.insert(out);
  return out;
}

struct NodeStages {
  std::optional<StageId> anchor_in;   // where sequence/chronology arrives
  std::optional<StageId> anchor_out;  // where sequence/chronology continues
  std::optional<StageId> transfer_out;
  std::optional<StageId> transfer_in;
  std::vector<std::string> labels;    // region labels of this node's event
  bool yields_event = false;
  bool instantaneous = false;
};

struct Link {
  std::string from;
  std::string to;
  std::vector<std::string> guards;
  std::string parallel_join;  // gateway id when the path runs through a join
};

}  // namespace bpmn_detail

inline BpmnImport map_bpmn(const BpmnGraph& graph) {
  using namespace bpmn_detail;
  BpmnImport out;
  StaticModel& model = out.model;

  // -- thimacs ---------------------------------------------------------------
  std::unordered_map<std::string, ThimacId> process_thimac;  // process id -> pool thimac
  std::unordered_map<std::string, ThimacId> participant_thimac;
  std::unordered_map<std::string, ThimacId> lane_thimac;
  std::unordered_map<std::string, ThimacId> subprocess_thimac;

  auto unique_root_name = [&](std::string name) {
    if (name.empty()) name = "_";
    std::string candidate = name;
    int n = 2;
    while (true) {
      bool clash = false;
      for (ThimacId root : model.roots()) {
        if (model.thimac(root).name == candidate) clash = true;
      }
      if (!clash) return candidate;
      candidate = name + "_" + std::to_string(n++);
    }
  };

  std::set<std::string> mapped_processes;
  for (const BpmnParticipant& p : graph.participants) {
    ThimacId tid = model.add_thimac(std::nullopt, unique_root_name(p.name.empty() ? p.id : p.name));
    participant_thimac[p.id] = tid;
    if (!p.process_ref.empty()) {
      process_thimac[p.process_ref] = tid;
      mapped_processes.insert(p.process_ref);
    }
  }
  for (const BpmnProcess& p : graph.processes) {
    if (mapped_processes.count(p.id)) continue;
    ThimacId tid = model.add_thimac(std::nullopt, unique_root_name(p.name.empty() ? p.id : p.name));
    process_thimac[p.id] = tid;
  }
  for (const BpmnLane& lane : graph.lanes) {
    auto pool = process_thimac.find(lane.process);
    if (pool == process_thimac.end()) continue;
    lane_thimac[lane.id] = model.add_thimac(pool->second, lane.name.empty() ? lane.id : lane.name);
  }

  auto owner_of = [&](const BpmnNode& node) -> ThimacId {
    if (!node.parent.empty()) {
      auto it = subprocess_thimac.find(node.parent);
      if (it != subprocess_thimac.end()) return it->second;
    }
    if (!node.lane.empty()) {
      auto it = lane_thimac.find(node.lane);
      if (it != lane_thimac.end()) return it->second;
    }
    return process_thimac.at(node.process);
  };

  for (const BpmnNode& node : graph.nodes) {
    if (node.kind != BpmnNodeKind::SubProcess) continue;
    if (node.event_subprocess) {
      out.diagnostics.error("UnsupportedConstruct",
                            "event subprocess '" + node.id + "' has no sound mapping");
      continue;
    }
    subprocess_thimac[node.id] = model.add_thimac(
        owner_of(node), node.name.empty() ? node.id : node.name);
  }
  if (!out.diagnostics.ok()) return out;

  // -- stages per node ---------------------------------------------------------
  std::set<std::string> taken_labels;
  std::unordered_map<std::string, NodeStages> stages_of;

  auto send_pattern = [&](ThimacId owner, const std::string& base, NodeStages& ns) {
    StageId create = model.add_stage(owner, ActionKind::Create, std::nullopt, base);
    std::set<std::string>& t = taken_labels;
    StageId release = model.add_stage(owner, ActionKind::Release, std::nullopt, sanitize_label(base + ".rl", t));
    StageId tout = model.add_stage(owner, ActionKind::Transfer, TransferDirection::Out,
                                   sanitize_label(base + ".to", t));
    model.add_flow(create, release);
    model.add_flow(release, tout);
    ns.anchor_in = create;
    ns.anchor_out = create;
    ns.transfer_out = tout;
    ns.labels = {base, *model.stage(release).label, *model.stage(tout).label};
  };
  auto receive_pattern = [&](ThimacId owner, const std::string& base, NodeStages& ns) {
    StageId tin = model.add_stage(owner, ActionKind::Transfer, TransferDirection::In,
                                  sanitize_label(base + ".ti", taken_labels));
    StageId receive = model.add_stage(owner, ActionKind::Receive, std::nullopt, base);
    model.add_flow(tin, receive);
    ns.anchor_in = receive;
    ns.anchor_out = receive;
    ns.transfer_in = tin;
    ns.labels = {*model.stage(tin).label, base};
  };

  for (const BpmnNode& node : graph.nodes) {
    NodeStages ns;
    switch (node.kind) {
      case BpmnNodeKind::Task: {
        std::string base = sanitize_label(node.id, taken_labels);
        StageId process = model.add_stage(owner_of(node), ActionKind::Process, std::nullopt, base);
        ns.anchor_in = process;
        ns.anchor_out = process;
        ns.labels = {base};
        ns.yields_event = true;
        break;
      }
      case BpmnNodeKind::SendTask: {
        send_pattern(owner_of(node), sanitize_label(node.id, taken_labels), ns);
        ns.yields_event = true;
        break;
      }
      case BpmnNodeKind::ReceiveTask: {
        receive_pattern(owner_of(node), sanitize_label(node.id, taken_labels), ns);
        ns.yields_event = true;
        break;
      }
      case BpmnNodeKind::StartEvent:
      case BpmnNodeKind::CatchEvent: {
        if (node.message) {
          receive_pattern(owner_of(node), sanitize_label(node.id, taken_labels), ns);
        } else {
          std::string base = sanitize_label(node.id, taken_labels);
          StageId create = model.add_stage(owner_of(node), ActionKind::Create, std::nullopt, base);
          ns.anchor_in = create;
          ns.anchor_out = create;
          ns.labels = {base};
        }
        ns.yields_event = true;
        ns.instantaneous = true;
        break;
      }
      case BpmnNodeKind::ThrowEvent: {
        send_pattern(owner_of(node), sanitize_label(node.id, taken_labels), ns);
        ns.yields_event = true;
        ns.instantaneous = true;
        break;
      }
      case BpmnNodeKind::EndEvent: {
        if (node.message) {
          send_pattern(owner_of(node), sanitize_label(node.id, taken_labels), ns);
          ns.yields_event = true;
          ns.instantaneous = true;
        }
        // plain end events are terminal markers
        break;
      }
      case BpmnNodeKind::SubProcess:
      case BpmnNodeKind::ExclusiveGateway:
      case BpmnNodeKind::ParallelGateway:
        break;  // no stages of their own
    }
    stages_of[node.id] = std::move(ns);
  }

  // Entry/exit anchors for subprocesses: first internal node without incoming
  // flow and first without outgoing.
  std::unordered_map<std::string, int> incoming_count, outgoing_count;
  for (const BpmnSequenceFlow& flow : graph.sequence_flows) {
    outgoing_count[flow.source] += 1;
    incoming_count[flow.target] += 1;
  }
  std::unordered_map<std::string, std::string> sub_entry, sub_exit;
  for (const BpmnNode& node : graph.nodes) {
    if (node.kind != BpmnNodeKind::SubProcess || node.event_subprocess) continue;
    NodeStages& ns = stages_of[node.id];
    for (const BpmnNode& inner : graph.nodes) {
      if (inner.parent != node.id) continue;
      const NodeStages& inner_stages = stages_of[inner.id];
      if (!ns.anchor_in && incoming_count[inner.id] == 0 && inner_stages.anchor_in) {
        ns.anchor_in = inner_stages.anchor_in;
        sub_entry[node.id] = inner.id;
      }
      if (!ns.anchor_out && outgoing_count[inner.id] == 0 && inner_stages.anchor_out) {
        ns.anchor_out = inner_stages.anchor_out;
        sub_exit[node.id] = inner.id;
      }
    }
  }

  // -- sequence flows, gateways flattened --------------------------------------
  std::unordered_map<std::string, std::vector<const BpmnSequenceFlow*>> outgoing;
  for (const BpmnSequenceFlow& flow : graph.sequence_flows) {
    outgoing[flow.source].push_back(&flow);
  }
  auto is_gateway = [&](const std::string& id) {
    const BpmnNode* n = graph.find_node(id);
    return n && (n->kind == BpmnNodeKind::ExclusiveGateway ||
                 n->kind == BpmnNodeKind::ParallelGateway);
  };

  std::vector<Link> links;
  auto walk = [&](auto&& self, const std::string& origin, const BpmnSequenceFlow& flow,
                  std::vector<std::string> guards, std::string join,
                  std::set<std::string>& visited) -> void {
    const BpmnNode* source = graph.find_node(flow.source);
    if (source && source->kind == BpmnNodeKind::ExclusiveGateway && !flow.name.empty()) {
      guards.push_back(flow.name);
    }
    const BpmnNode* target = graph.find_node(flow.target);
    if (!target) return;
    if (is_gateway(flow.target)) {
      if (!visited.insert(flow.target).second) return;  // gateway cycle guard
      if (target->kind == BpmnNodeKind::ParallelGateway && incoming_count[flow.target] > 1) {
        join = flow.target;
      }
      for (const BpmnSequenceFlow* next : outgoing[flow.target]) {
        self(self, origin, *next, guards, join, visited);
      }
      return;
    }
    links.push_back({origin, flow.target, std::move(guards), std::move(join)});
  };
  for (const BpmnNode& node : graph.nodes) {
    if (is_gateway(node.id)) continue;
    for (const BpmnSequenceFlow* flow : outgoing[node.id]) {
      std::set<std::string> visited;
      walk(walk, node.id, *flow, {}, "", visited);
    }
  }

  auto joined_guard = [](const std::vector<std::string>& guards) -> std::optional<std::string> {
    if (guards.empty()) return std::nullopt;
    std::string g = guards[0];
    for (std::size_t i = 1; i < guards.size(); ++i) g += " & " + guards[i];
    return g;
  };

  // One join bar per (gateway, target): a join gateway with several outgoing
  // flows synchronizes each successor separately.
  std::map<std::string, std::vector<const Link*>> join_groups;
  for (const Link& link : links) {
    const NodeStages& from = stages_of[link.from];
    const NodeStages& to = stages_of[link.to];
    if (!from.anchor_out || !to.anchor_in) continue;  // terminal markers
    if (!link.parallel_join.empty()) {
      join_groups[link.parallel_join + "\n" + link.to].push_back(&link);
      continue;
    }
    auto guard = joined_guard(link.guards);
    if (!guard && check_adjacency(model, *from.anchor_out, *to.anchor_in)) {
      model.add_flow(*from.anchor_out, *to.anchor_in);
    } else {
      model.add_trigger(*from.anchor_out, *to.anchor_in, guard);
    }
  }
  for (const auto& [gateway, members] : join_groups) {
    std::vector<std::pair<StageId, std::optional<std::string>>> inputs;
    std::optional<StageId> output;
    for (const Link* link : members) {
      inputs.emplace_back(*stages_of[link->from].anchor_out, joined_guard(link->guards));
      output = *stages_of[link->to].anchor_in;
    }
    if (inputs.size() >= 2 && output) {
      model.add_join(inputs, *output);
    } else if (output) {
      // degenerate parallel join: plain trigger
      model.add_trigger(inputs[0].first, *output, inputs[0].second);
    }
  }

  // -- message flows -------------------------------------------------------------
  for (const BpmnMessageFlow& mf : graph.message_flows) {
    StageId tout{}, tin{};
    const BpmnNode* src_node = graph.find_node(mf.source);
    if (src_node && stages_of[src_node->id].transfer_out) {
      tout = *stages_of[src_node->id].transfer_out;
    } else {
      // boundary send pattern on a pool, a subprocess, or a node without one
      ThimacId owner;
      if (src_node) {
        owner = src_node->kind == BpmnNodeKind::SubProcess && subprocess_thimac.count(src_node->id)
                    ? subprocess_thimac.at(src_node->id)
                    : owner_of(*src_node);
      } else {
        owner = participant_thimac.at(mf.source);
      }
      NodeStages boundary;
      send_pattern(owner, sanitize_label(mf.id, taken_labels), boundary);
      tout = *boundary.transfer_out;
      if (src_node && stages_of[src_node->id].anchor_out) {
        model.add_trigger(*stages_of[src_node->id].anchor_out, *boundary.anchor_in);
      }
    }
    const BpmnNode* dst_node = graph.find_node(mf.target);
    if (dst_node && stages_of[dst_node->id].transfer_in) {
      tin = *stages_of[dst_node->id].transfer_in;
    } else {
      ThimacId owner;
      if (dst_node) {
        owner = dst_node->kind == BpmnNodeKind::SubProcess && subprocess_thimac.count(dst_node->id)
                    ? subprocess_thimac.at(dst_node->id)
                    : owner_of(*dst_node);
      } else {
        owner = participant_thimac.at(mf.target);
      }
      NodeStages boundary;
      receive_pattern(owner, sanitize_label(mf.id, taken_labels), boundary);
      tin = *boundary.transfer_in;
      if (dst_node && stages_of[dst_node->id].anchor_in) {
        StageId receive = *boundary.anchor_out;
        if (check_adjacency(model, receive, *stages_of[dst_node->id].anchor_in)) {
          model.add_flow(receive, *stages_of[dst_node->id].anchor_in);
        } else {
          model.add_trigger(receive, *stages_of[dst_node->id].anchor_in);
        }
      }
    }
    model.add_flow(tout, tin);
  }

  // -- events and chronology ------------------------------------------------------
  std::unordered_map<std::string, std::string> event_of;  // node id -> event name
  int counter = 0;
  for (const BpmnNode& node : graph.nodes) {
    const NodeStages& ns = stages_of[node.id];
    if (!ns.yields_event) continue;
    EventDecl decl;
    decl.name = "E" + std::to_string(++counter);
    decl.description = node.name.empty() ? node.id : node.name;
    decl.region_labels = ns.labels;
    decl.instantaneous = ns.instantaneous;
    event_of[node.id] = decl.name;
    out.decls.events.push_back(std::move(decl));
  }
  // Subprocess endpoints forward to the entry/exit node's event so the
  // chronology stays connected across the boundary.
  auto chron_source = [&](const std::string& id) -> std::optional<std::string> {
    auto direct = event_of.find(id);
    if (direct != event_of.end()) return direct->second;
    auto fwd = sub_exit.find(id);
    if (fwd != sub_exit.end() && event_of.count(fwd->second)) return event_of.at(fwd->second);
    return std::nullopt;
  };
  auto chron_target = [&](const std::string& id) -> std::optional<std::string> {
    auto direct = event_of.find(id);
    if (direct != event_of.end()) return direct->second;
    auto fwd = sub_entry.find(id);
    if (fwd != sub_entry.end() && event_of.count(fwd->second)) return event_of.at(fwd->second);
    return std::nullopt;
  };

  for (const Link& link : links) {
    if (!link.parallel_join.empty()) continue;
    auto from = chron_source(link.from);
    auto to = chron_target(link.to);
    if (!from || !to) continue;
    out.decls.chron_edges.push_back({*from, *to, joined_guard(link.guards)});
  }
  for (const auto& [gateway, members] : join_groups) {
    ChronJoinDecl join;
    for (const Link* link : members) {
      auto from = chron_source(link->from);
      auto to = chron_target(link->to);
      if (!from || !to) continue;
      join.inputs.push_back({*from, joined_guard(link->guards)});
      join.output = *to;
    }
    if (join.inputs.size() >= 2) {
      out.decls.chron_joins.push_back(std::move(join));
    } else if (join.inputs.size() == 1) {
      out.decls.chron_edges.push_back({join.inputs[0].event, join.output, join.inputs[0].guard});
    }
  }
  for (const BpmnMessageFlow& mf : graph.message_flows) {
    auto from = chron_source(mf.source);
    auto to = chron_target(mf.target);
    if (!from || !to) continue;
    out.decls.chron_edges.push_back({*from, *to, std::nullopt});
  }

  return out;
}

}  // namespace tmkit

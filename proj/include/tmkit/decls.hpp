#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tmkit {

/// Declarations of the dynamic level as written in source: regions are still
/// label sets here, resolution happens at compile time.
struct EventDecl {
  std::string name;
  std::string description;
  std::vector<std::string> region_labels;
  int duration = 1;
  bool extended = false;
  bool entity_like = false;
  bool instantaneous = false;
  std::optional<std::string> measure;

  bool operator==(const EventDecl&) const = default;
};

struct NegativeDecl {
  std::string name;
  std::string paired_event;

  bool operator==(const NegativeDecl&) const = default;
};

struct ChronEdgeDecl {
  std::string from;  // event name, or negative name for a reset edge
  std::string to;    // event name, or negative name for a terminal marker
  std::optional<std::string> guard;

  bool operator==(const ChronEdgeDecl&) const = default;
};

struct ChronJoinInput {
  std::string event;
  std::optional<std::string> guard;  // input required only when guard holds

  bool operator==(const ChronJoinInput&) const = default;
};

struct ChronJoinDecl {
  std::vector<ChronJoinInput> inputs;
  std::string output;

  bool operator==(const ChronJoinDecl&) const = default;
};

struct DynamicDecls {
  std::vector<EventDecl> events;
  std::vector<NegativeDecl> negatives;
  std::vector<ChronEdgeDecl> chron_edges;
  std::vector<ChronJoinDecl> chron_joins;

  bool operator==(const DynamicDecls&) const = default;

  const EventDecl* find_event(const std::string& name) const {
    for (const auto& e : events) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }
  const NegativeDecl* find_negative(const std::string& name) const {
    for (const auto& n : negatives) {
      if (n.name == name) return &n;
    }
    return nullptr;
  }
};

}  // namespace tmkit

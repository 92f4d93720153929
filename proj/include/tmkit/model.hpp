#pragma once

#include <algorithm>
#include <atomic>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tmkit/errors.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Identifiers. Creation-ordered integers, one sequence per entity kind; never
// reused once handed out, so a rewritten model may have gaps.
// ---------------------------------------------------------------------------

template <class Tag>
struct Id {
  std::uint32_t value = 0;
  auto operator<=>(const Id&) const = default;
};

struct ThimacTag {};
struct StageTag {};
struct ArcTag {};
struct JoinTag {};

using ThimacId = Id<ThimacTag>;
using StageId = Id<StageTag>;
using ArcId = Id<ArcTag>;
using JoinId = Id<JoinTag>;

enum class ActionKind { Create, Process, Release, Transfer, Receive };
enum class TransferDirection { In, Out, Both };
enum class ThingClassification { Existing, Subsisting, Appearing };
enum class ArcKind { Flow, Trigger };

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Create: return "create";
    case ActionKind::Process: return "process";
    case ActionKind::Release: return "release";
    case ActionKind::Transfer: return "transfer";
    case ActionKind::Receive: return "receive";
  }
  return "?";
}

inline const char* to_string(TransferDirection d) {
  switch (d) {
    case TransferDirection::In: return "in";
    case TransferDirection::Out: return "out";
    case TransferDirection::Both: return "both";
  }
  return "?";
}

inline const char* to_string(ThingClassification c) {
  switch (c) {
    case ThingClassification::Existing: return "existing";
    case ThingClassification::Subsisting: return "subsisting";
    case ThingClassification::Appearing: return "appearing";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Entities
// ---------------------------------------------------------------------------

struct Stage {
  StageId id;
  ThimacId owner;
  ActionKind kind = ActionKind::Create;
  std::optional<TransferDirection> direction;  // Transfer stages only
  std::optional<std::string> label;            // unique per model when present

  bool operator==(const Stage&) const = default;
};

/// A thimac body item, in declaration order. Keeping the interleaving of
/// stages and nested thimacs makes printing order-faithful.
using BodyItem = std::variant<StageId, ThimacId>;

struct Thimac {
  ThimacId id;
  std::string name;  // non-empty, unique among siblings
  std::optional<ThimacId> parent;
  ThingClassification classification = ThingClassification::Subsisting;
  std::vector<StageId> stages;
  std::vector<ThimacId> children;
  std::vector<BodyItem> body;
  bool is_memory = false;
  std::optional<StageId> host_stage;  // set iff is_memory

  bool operator==(const Thimac&) const = default;
};

struct Arc {
  ArcId id;
  ArcKind kind = ArcKind::Flow;
  StageId from;
  StageId to;
  std::optional<std::string> guard;  // Trigger arcs only

  bool operator==(const Arc&) const = default;
};

struct JoinBar {
  JoinId id;
  std::vector<ArcId> inputs;  // trigger arcs; all must be satisfied
  StageId output;

  bool operator==(const JoinBar&) const = default;
};

/// Induced subdiagram: the locus over which one event occurs. Every arc
/// with both endpoints in `nodes` is in `arcs` and nothing else is.
struct Region {
  std::uint64_t model_uid = 0;
  std::set<StageId> nodes;
  std::set<ArcId> arcs;

  bool operator==(const Region&) const = default;
};

// ---------------------------------------------------------------------------
// StaticModel
// ---------------------------------------------------------------------------

class ModelRewriter;

class StaticModel {
 public:
  StaticModel() : uid_(next_uid()) {}

  /// Identity token: distinguishes structurally equal models.
  std::uint64_t uid() const { return uid_; }

  // -- construction ---------------------------------------------------------

  ThimacId add_thimac(std::optional<ThimacId> parent, std::string name,
                      ThingClassification classification = ThingClassification::Subsisting) {
    if (parent && !has(*parent)) {
      throw Error(Errc::UnknownParent, "no thimac #" + std::to_string(parent->value));
    }
    check_sibling_name(parent, name);
    ThimacId id{next_thimac_++};
    Thimac t;
    t.id = id;
    t.name = std::move(name);
    t.parent = parent;
    t.classification = classification;
    thimac_index_[id.value] = thimacs_.size();
    thimacs_.push_back(std::move(t));
    if (parent) {
      auto& p = mutable_thimac(*parent);
      p.children.push_back(id);
      p.body.emplace_back(id);
    } else {
      roots_.push_back(id);
    }
    return id;
  }

  StageId add_stage(ThimacId owner, ActionKind kind,
                    std::optional<TransferDirection> direction = std::nullopt,
                    std::optional<std::string> label = std::nullopt) {
    if (!has(owner)) throw Error(Errc::UnknownThimac, "no thimac #" + std::to_string(owner.value));
    if (direction && kind != ActionKind::Transfer) {
      throw Error(Errc::DirectionOnNonTransfer,
                  std::string(to_string(kind)) + " stage cannot carry a direction");
    }
    if (kind == ActionKind::Transfer && !direction) direction = TransferDirection::Both;
    if (label) {
      if (labels_.count(*label)) throw Error(Errc::DuplicateLabel, "label '" + *label + "' already used");
    }
    StageId id{next_stage_++};
    Stage s;
    s.id = id;
    s.owner = owner;
    s.kind = kind;
    s.direction = direction;
    s.label = label;
    stage_index_[id.value] = stages_.size();
    stages_.push_back(std::move(s));
    if (label) labels_[*label] = id;
    auto& t = mutable_thimac(owner);
    t.stages.push_back(id);
    t.body.emplace_back(id);
    return id;
  }

  ArcId add_flow(StageId from, StageId to) { return add_arc(ArcKind::Flow, from, to, std::nullopt); }

  ArcId add_trigger(StageId from, StageId to, std::optional<std::string> guard = std::nullopt) {
    return add_arc(ArcKind::Trigger, from, to, std::move(guard));
  }

  ArcId add_arc(ArcKind kind, StageId from, StageId to, std::optional<std::string> guard) {
    if (!has(from)) throw Error(Errc::UnknownStage, "no stage #" + std::to_string(from.value));
    if (!has(to)) throw Error(Errc::UnknownStage, "no stage #" + std::to_string(to.value));
    if (guard && kind == ArcKind::Flow) throw Error(Errc::GuardOnFlow, "flow arcs cannot carry guards");
    ArcId id{next_arc_++};
    arc_index_[id.value] = arcs_.size();
    arcs_.push_back(Arc{id, kind, from, to, std::move(guard)});
    return id;
  }

  /// Creates the memory store for `host`: a fresh thimac (is_memory) added as
  /// a child of the host stage's owner. A stage may carry several stores.
  ThimacId attach_memory(StageId host, std::string name) {
    if (!has(host)) throw Error(Errc::UnknownStage, "no stage #" + std::to_string(host.value));
    ThimacId owner = stage(host).owner;
    ThimacId id = add_thimac(owner, std::move(name));
    bind_memory(id, host);
    return id;
  }

  /// Marks an existing thimac as the memory store of `host`. Split out from
  /// attach_memory because in source form the host stage may be declared
  /// after the store block.
  void bind_memory(ThimacId mem, StageId host) {
    if (!has(mem)) throw Error(Errc::UnknownThimac, "no thimac #" + std::to_string(mem.value));
    if (!has(host)) throw Error(Errc::UnknownStage, "no stage #" + std::to_string(host.value));
    auto& m = mutable_thimac(mem);
    m.is_memory = true;
    m.host_stage = host;
  }

  /// Groups fresh trigger arcs (one per input stage, optionally guarded) into
  /// a conjunctive join bar feeding `output`.
  JoinId add_join(const std::vector<std::pair<StageId, std::optional<std::string>>>& inputs,
                  StageId output) {
    if (!has(output)) throw Error(Errc::UnknownStage, "no stage #" + std::to_string(output.value));
    std::vector<ArcId> arcs;
    arcs.reserve(inputs.size());
    for (const auto& [sid, guard] : inputs) arcs.push_back(add_trigger(sid, output, guard));
    JoinId id{next_join_++};
    join_index_[id.value] = joins_.size();
    joins_.push_back(JoinBar{id, std::move(arcs), output});
    return id;
  }

  // -- queries ---------------------------------------------------------------

  bool has(ThimacId id) const { return thimac_index_.count(id.value) != 0; }
  bool has(StageId id) const { return stage_index_.count(id.value) != 0; }
  bool has(ArcId id) const { return arc_index_.count(id.value) != 0; }
  bool has(JoinId id) const { return join_index_.count(id.value) != 0; }

  const Thimac& thimac(ThimacId id) const { return thimacs_[thimac_index_.at(id.value)]; }
  const Stage& stage(StageId id) const { return stages_[stage_index_.at(id.value)]; }
  const Arc& arc(ArcId id) const { return arcs_[arc_index_.at(id.value)]; }
  const JoinBar& join(JoinId id) const { return joins_[join_index_.at(id.value)]; }

  const std::vector<Thimac>& thimacs() const { return thimacs_; }
  const std::vector<Stage>& stages() const { return stages_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<JoinBar>& joins() const { return joins_; }
  const std::vector<ThimacId>& roots() const { return roots_; }

  std::optional<StageId> stage_by_label(const std::string& label) const {
    auto it = labels_.find(label);
    if (it == labels_.end()) return std::nullopt;
    return it->second;
  }

  /// All labels in creation order of their stages.
  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& s : stages_) {
      if (s.label) out.push_back(*s.label);
    }
    return out;
  }

  /// Root ancestor of a thimac (the participant it belongs to).
  ThimacId root_of(ThimacId id) const {
    const Thimac* t = &thimac(id);
    while (t->parent) t = &thimac(*t->parent);
    return t->id;
  }

  Region induced_subdiagram(const std::set<StageId>& nodes) const {
    if (nodes.empty()) throw Error(Errc::EmptyRegion, "region must contain at least one stage");
    for (StageId sid : nodes) {
      if (!has(sid)) throw Error(Errc::ForeignStage, "stage #" + std::to_string(sid.value) + " is not in this model");
    }
    Region r;
    r.model_uid = uid_;
    r.nodes = nodes;
    for (const Arc& a : arcs_) {
      if (nodes.count(a.from) && nodes.count(a.to)) r.arcs.insert(a.id);
    }
    return r;
  }

  /// Structural equality; the identity token is deliberately excluded.
  bool operator==(const StaticModel& other) const {
    return thimacs_ == other.thimacs_ && stages_ == other.stages_ && arcs_ == other.arcs_ &&
           joins_ == other.joins_ && roots_ == other.roots_;
  }

 private:
  friend class ModelRewriter;

  static std::uint64_t next_uid() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  Thimac& mutable_thimac(ThimacId id) { return thimacs_[thimac_index_.at(id.value)]; }

  void check_sibling_name(std::optional<ThimacId> parent, const std::string& name) const {
    if (name.empty()) throw Error(Errc::DuplicateSiblingName, "thimac name must be non-empty");
    const std::vector<ThimacId>& siblings = parent ? thimac(*parent).children : roots_;
    for (ThimacId sid : siblings) {
      if (thimac(sid).name == name) {
        throw Error(Errc::DuplicateSiblingName, "sibling named '" + name + "' already exists");
      }
    }
  }

  std::uint64_t uid_;
  std::vector<Thimac> thimacs_;
  std::vector<Stage> stages_;
  std::vector<Arc> arcs_;
  std::vector<JoinBar> joins_;
  std::vector<ThimacId> roots_;
  std::unordered_map<std::uint32_t, std::size_t> thimac_index_;
  std::unordered_map<std::uint32_t, std::size_t> stage_index_;
  std::unordered_map<std::uint32_t, std::size_t> arc_index_;
  std::unordered_map<std::uint32_t, std::size_t> join_index_;
  std::unordered_map<std::string, StageId> labels_;
  std::uint32_t next_thimac_ = 0;
  std::uint32_t next_stage_ = 0;
  std::uint32_t next_arc_ = 0;
  std::uint32_t next_join_ = 0;
};

// ---------------------------------------------------------------------------
// ModelRewriter builds a model that keeps a subset of another model's
// stages/arcs under their original identifiers. Id counters carry over, so
// stages minted afterwards never collide with removed ones.
// ---------------------------------------------------------------------------

class ModelRewriter {
 public:
  explicit ModelRewriter(const StaticModel& source) {
    out_.next_thimac_ = source.next_thimac_;
    out_.next_stage_ = source.next_stage_;
    out_.next_arc_ = source.next_arc_;
    out_.next_join_ = source.next_join_;
    for (const Thimac& t : source.thimacs_) {
      Thimac copy = t;
      copy.stages.clear();
      copy.children = t.children;
      copy.body.clear();
      for (const BodyItem& item : t.body) {
        if (std::holds_alternative<ThimacId>(item)) copy.body.push_back(item);
      }
      out_.thimac_index_[copy.id.value] = out_.thimacs_.size();
      out_.thimacs_.push_back(std::move(copy));
    }
    out_.roots_ = source.roots_;
  }

  /// Re-inserts `s` (same id) into the output model.
  void keep_stage(const Stage& s) {
    out_.stage_index_[s.id.value] = out_.stages_.size();
    out_.stages_.push_back(s);
    if (s.label) out_.labels_[*s.label] = s.id;
    auto& t = out_.mutable_thimac(s.owner);
    t.stages.push_back(s.id);
    t.body.emplace_back(s.id);
  }

  void keep_arc(const Arc& a) {
    out_.arc_index_[a.id.value] = out_.arcs_.size();
    out_.arcs_.push_back(a);
  }

  void keep_join(const JoinBar& j) {
    out_.join_index_[j.id.value] = out_.joins_.size();
    out_.joins_.push_back(j);
  }

  /// Finishes the rewrite. Id counters restart just past the largest
  /// surviving id, so ids minted afterwards depend only on the kept content.
  StaticModel take() {
    out_.next_thimac_ = 0;
    for (const Thimac& t : out_.thimacs_) out_.next_thimac_ = std::max(out_.next_thimac_, t.id.value + 1);
    out_.next_stage_ = 0;
    for (const Stage& s : out_.stages_) out_.next_stage_ = std::max(out_.next_stage_, s.id.value + 1);
    out_.next_arc_ = 0;
    for (const Arc& a : out_.arcs_) out_.next_arc_ = std::max(out_.next_arc_, a.id.value + 1);
    out_.next_join_ = 0;
    for (const JoinBar& j : out_.joins_) out_.next_join_ = std::max(out_.next_join_, j.id.value + 1);
    return std::move(out_);
  }

 private:
  StaticModel out_;
};

}  // namespace tmkit

#pragma once

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "tmkit/decls.hpp"
#include "tmkit/diagnostics.hpp"
#include "tmkit/model.hpp"

// Surface syntax (whitespace-insensitive, `#` starts a line comment):
//
//   model    := item*
//   item     := thimac | flow | trigger | join | event | negative | chron
//   thimac   := "thimac" NAME [CLASS] "{" (stage | thimac | memory)* "}"
//   CLASS    := "appearing" | "existing" | "subsisting"
//   stage    := KIND [("in"|"out"|"both")] ["@" LABEL] ";"
//   KIND     := "create" | "process" | "release" | "transfer" | "receive"
//   memory   := "memory" NAME "{" stage* "}" "on" PATH
//   flow     := "flow" PATH "->" PATH ";"
//   trigger  := "trigger" PATH "->" PATH ["when" STRING] ";"
//   join     := "join" "(" PATH ["when" STRING] ("," PATH ["when" STRING])+ ")" "->" PATH ";"
//   event    := "event" NAME ["*"] ["entity"] ["instant"] ["duration" INT]
//               ["measure" STRING] STRING "region" "{" LABEL+ "}"
//   negative := "negative" NAME "of" NAME
//   chron    := "chron" NAME "->" NAME ["when" STRING] ";"
//             | "chron" "join" "(" NAME ["when" STRING] ("," NAME ["when" STRING])+ ")"
//               "->" NAME ";"
//
// NAME is an identifier or a quoted string. PATH is either a stage label
// (optionally prefixed with "@") or a dotted thimac path ending in an action
// kind, e.g. `Customer.create` or `Sales.release[1]` when a thimac owns
// several stages of one kind. LABEL is a dotted token such as `car.12`.
// The `*` flag marks an extended event.

namespace tmkit {

namespace dsl {

// -- lexer -------------------------------------------------------------------

enum class Tok {
  Ident, Number, String,
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Semi, Comma, Dot, At, Star, Arrow,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

inline std::vector<Token> lex(const std::string& src, Diagnostics& diags) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i < src.size() && src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        advance(1);
      t.kind = Tok::Ident;
      t.text = src.substr(start, i - start);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
      t.kind = Tok::Number;
      t.text = src.substr(start, i - start);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      advance(1);
      std::string value;
      bool closed = false;
      while (i < src.size()) {
        char d = src[i];
        if (d == '"') {
          advance(1);
          closed = true;
          break;
        }
        if (d == '\n') break;  // strings do not span lines
        if (d == '\\' && i + 1 < src.size()) {
          char e = src[i + 1];
          if (e == '"' || e == '\\') {
            value.push_back(e);
            advance(2);
            continue;
          }
          if (e == 'n') {
            value.push_back('\n');
            advance(2);
            continue;
          }
        }
        value.push_back(d);
        advance(1);
      }
      if (!closed) diags.error("SyntaxError", "unterminated string", t.line, t.col);
      t.kind = Tok::String;
      t.text = std::move(value);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      t.kind = Tok::Arrow;
      t.text = "->";
      advance(2);
      out.push_back(std::move(t));
      continue;
    }
    switch (c) {
      case '{': t.kind = Tok::LBrace; break;
      case '}': t.kind = Tok::RBrace; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '[': t.kind = Tok::LBracket; break;
      case ']': t.kind = Tok::RBracket; break;
      case ';': t.kind = Tok::Semi; break;
      case ',': t.kind = Tok::Comma; break;
      case '.': t.kind = Tok::Dot; break;
      case '@': t.kind = Tok::At; break;
      case '*': t.kind = Tok::Star; break;
      default:
        diags.error("SyntaxError", std::string("unexpected character '") + c + "'", line, col);
        advance(1);
        continue;
    }
    t.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

inline bool is_reserved(const std::string& word) {
  static const std::unordered_set<std::string> kReserved = {
      "thimac", "memory", "on", "flow", "trigger", "join", "when", "event",
      "negative", "of", "chron", "region", "duration", "measure", "entity",
      "instant", "create", "process", "release", "transfer", "receive",
      "in", "out", "both", "appearing", "existing", "subsisting",
  };
  return kReserved.count(word) != 0;
}

inline std::optional<ActionKind> action_kind_of(const std::string& word) {
  if (word == "create") return ActionKind::Create;
  if (word == "process") return ActionKind::Process;
  if (word == "release") return ActionKind::Release;
  if (word == "transfer") return ActionKind::Transfer;
  if (word == "receive") return ActionKind::Receive;
  return std::nullopt;
}

// -- deferred references ------------------------------------------------------

struct LabelRef {
  std::string label;
};

struct StagePathRef {
  std::vector<std::string> thimac_path;  // root..owner names
  ActionKind kind = ActionKind::Create;
  int index = 0;
};

struct PathRef {
  std::variant<LabelRef, StagePathRef> ref;
  int line = 0;
  int col = 0;
};

}  // namespace dsl

struct ParseResult {
  StaticModel model;
  DynamicDecls decls;
  Diagnostics diagnostics;

  bool ok() const { return diagnostics.ok(); }
};

namespace dsl {

class Parser {
 public:
  explicit Parser(const std::string& src) {
    tokens_ = lex(src, result_.diagnostics);
  }

  ParseResult run() {
    while (!at(Tok::End)) {
      std::size_t before = pos_;
      parse_item();
      if (pos_ == before) skip(1);  // every loop iteration must consume input
    }
    resolve();
    return std::move(result_);
  }

 private:
  // -- token helpers ----------------------------------------------------------

  const Token& cur() const { return tokens_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return tokens_[std::min(pos_ + n, tokens_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_word(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }
  void skip(std::size_t n = 1) { pos_ = std::min(pos_ + n, tokens_.size() - 1); }

  void fail(const std::string& message) {
    result_.diagnostics.error("SyntaxError", message, cur().line, cur().col);
    throw SyncPoint{};
  }

  bool expect(Tok k, const char* what) {
    if (!at(k)) {
      fail(std::string("expected ") + what);
      return false;
    }
    skip();
    return true;
  }

  struct SyncPoint {};

  /// Skip to just past the next ';' or '}' (or to end of input).
  void synchronize() {
    while (!at(Tok::End)) {
      Tok k = cur().kind;
      skip();
      if (k == Tok::Semi || k == Tok::RBrace) return;
    }
  }

  int parse_int(const char* what) {
    if (!at(Tok::Number) || cur().text.size() > 8) {
      fail(std::string("expected ") + what);
      return 0;
    }
    int value = std::stoi(cur().text);
    skip();
    return value;
  }

  // -- grammar ----------------------------------------------------------------

  void parse_item() {
    try {
      if (at_word("thimac")) {
        parse_thimac(std::nullopt);
      } else if (at_word("flow")) {
        parse_arc(ArcKind::Flow);
      } else if (at_word("trigger")) {
        parse_arc(ArcKind::Trigger);
      } else if (at_word("join")) {
        parse_join();
      } else if (at_word("event")) {
        parse_event();
      } else if (at_word("negative")) {
        parse_negative();
      } else if (at_word("chron")) {
        parse_chron();
      } else {
        fail("expected a declaration (thimac, flow, trigger, join, event, negative, chron)");
      }
    } catch (const SyncPoint&) {
      synchronize();
    }
  }

  std::string parse_name(const char* what) {
    if (at(Tok::String)) {
      std::string n = cur().text;
      skip();
      return n;
    }
    if (at(Tok::Ident) && !is_reserved(cur().text)) {
      std::string n = cur().text;
      skip();
      return n;
    }
    fail(std::string("expected ") + what);
    return {};
  }

  void parse_thimac(std::optional<ThimacId> parent, int depth = 0) {
    skip();  // thimac
    if (depth > 64) fail("thimac nesting too deep");
    int line = cur().line, col = cur().col;
    std::string name = parse_name("thimac name");
    ThingClassification cls = ThingClassification::Subsisting;
    if (at_word("appearing")) { cls = ThingClassification::Appearing; skip(); }
    else if (at_word("existing")) { cls = ThingClassification::Existing; skip(); }
    else if (at_word("subsisting")) { skip(); }
    std::optional<ThimacId> id;
    try {
      id = result_.model.add_thimac(parent, name, cls);
    } catch (const Error& e) {
      result_.diagnostics.error("DuplicateName", e.what(), line, col);
    }
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        if (at_word("thimac")) {
          parse_thimac(id, depth + 1);
        } else if (at_word("memory")) {
          parse_memory(id);
        } else if (action_kind_of(cur().text) && at(Tok::Ident)) {
          parse_stage(id);
        } else {
          fail("expected a stage, nested thimac, or memory");
        }
      } catch (const SyncPoint&) {
        synchronize();
      }
    }
    expect(Tok::RBrace, "'}'");
  }

  void parse_stage(std::optional<ThimacId> owner) {
    int line = cur().line, col = cur().col;
    ActionKind kind = *action_kind_of(cur().text);
    skip();
    std::optional<TransferDirection> dir;
    if (at_word("in")) { dir = TransferDirection::In; skip(); }
    else if (at_word("out")) { dir = TransferDirection::Out; skip(); }
    else if (at_word("both")) { dir = TransferDirection::Both; skip(); }
    std::optional<std::string> label;
    if (at(Tok::At)) {
      skip();
      label = parse_label();
    }
    expect(Tok::Semi, "';'");
    if (!owner) return;  // owner failed to build; stage dropped
    try {
      result_.model.add_stage(*owner, kind, dir, label);
    } catch (const Error& e) {
      const char* code = e.code() == Errc::DuplicateLabel ? "DuplicateName" : "SyntaxError";
      result_.diagnostics.error(code, e.what(), line, col);
    }
  }

  void parse_memory(std::optional<ThimacId> host_thimac) {
    skip();  // memory
    int line = cur().line, col = cur().col;
    std::string name = parse_name("memory name");
    std::optional<ThimacId> id;
    if (host_thimac) {
      try {
        id = result_.model.add_thimac(host_thimac, name);
      } catch (const Error& e) {
        result_.diagnostics.error("DuplicateName", e.what(), line, col);
      }
    }
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        if (action_kind_of(cur().text) && at(Tok::Ident)) {
          parse_stage(id);
        } else {
          fail("expected a stage");
        }
      } catch (const SyncPoint&) {
        synchronize();
      }
    }
    expect(Tok::RBrace, "'}'");
    if (!at_word("on")) fail("expected 'on'");
    skip();
    PathRef host = parse_path();
    if (id) pending_memories_.push_back({*id, std::move(host)});
  }

  std::string parse_label() {
    if (!at(Tok::Ident) && !at(Tok::Number)) {
      fail("expected a label");
      return {};
    }
    std::string label = cur().text;
    skip();
    while (at(Tok::Dot) && (peek().kind == Tok::Ident || peek().kind == Tok::Number)) {
      label += ".";
      label += peek().text;
      skip(2);
    }
    return label;
  }

  PathRef parse_path() {
    PathRef out;
    out.line = cur().line;
    out.col = cur().col;
    if (at(Tok::At)) {
      skip();
      out.ref = LabelRef{parse_label()};
      return out;
    }
    if (!at(Tok::Ident) && !at(Tok::String) && !at(Tok::Number)) {
      fail("expected a path or label");
      return out;
    }
    // Collect dotted segments; decide afterwards whether this is a stage path
    // (last segment is an action kind) or a bare label.
    std::vector<Token> segments;
    segments.push_back(cur());
    skip();
    while (at(Tok::Dot)) {
      skip();
      if (!at(Tok::Ident) && !at(Tok::String) && !at(Tok::Number)) {
        fail("expected a path segment");
        return out;
      }
      segments.push_back(cur());
      skip();
    }
    const Token& last = segments.back();
    if (last.kind == Tok::Ident && action_kind_of(last.text) && segments.size() >= 2) {
      StagePathRef path;
      for (std::size_t k = 0; k + 1 < segments.size(); ++k)
        path.thimac_path.push_back(segments[k].text);
      path.kind = *action_kind_of(last.text);
      if (at(Tok::LBracket)) {
        skip();
        path.index = parse_int("a stage index");
        expect(Tok::RBracket, "']'");
      }
      out.ref = std::move(path);
      return out;
    }
    std::string label = segments[0].text;
    for (std::size_t k = 1; k < segments.size(); ++k) label += "." + segments[k].text;
    out.ref = LabelRef{std::move(label)};
    return out;
  }

  void parse_arc(ArcKind kind) {
    skip();  // flow | trigger
    PathRef from = parse_path();
    expect(Tok::Arrow, "'->'");
    PathRef to = parse_path();
    std::optional<std::string> guard;
    if (at_word("when")) {
      if (kind == ArcKind::Flow) fail("flow arcs cannot carry guards");
      skip();
      if (!at(Tok::String)) fail("expected a guard string");
      guard = cur().text;
      skip();
    }
    expect(Tok::Semi, "';'");
    pending_arcs_.push_back({kind, std::move(from), std::move(to), std::move(guard)});
  }

  void parse_join() {
    skip();  // join
    expect(Tok::LParen, "'('");
    std::vector<std::pair<PathRef, std::optional<std::string>>> inputs;
    while (true) {
      PathRef p = parse_path();
      std::optional<std::string> guard;
      if (at_word("when")) {
        skip();
        if (!at(Tok::String)) fail("expected a guard string");
        guard = cur().text;
        skip();
      }
      inputs.emplace_back(std::move(p), std::move(guard));
      if (at(Tok::Comma)) {
        skip();
        continue;
      }
      break;
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Arrow, "'->'");
    PathRef output = parse_path();
    expect(Tok::Semi, "';'");
    pending_joins_.push_back({std::move(inputs), std::move(output)});
  }

  void parse_event() {
    skip();  // event
    int line = cur().line, col = cur().col;
    EventDecl decl;
    decl.name = parse_name("event name");
    if (at(Tok::Star)) { decl.extended = true; skip(); }
    if (at_word("entity")) { decl.entity_like = true; skip(); }
    if (at_word("instant")) { decl.instantaneous = true; skip(); }
    if (at_word("duration")) {
      skip();
      decl.duration = parse_int("a duration");
      if (decl.duration < 1) fail("duration must be at least 1");
    }
    if (at_word("measure")) {
      skip();
      if (!at(Tok::String)) fail("expected a measure string");
      decl.measure = cur().text;
      skip();
    }
    if (!at(Tok::String)) fail("expected an event description");
    decl.description = cur().text;
    skip();
    if (!at_word("region")) fail("expected 'region'");
    skip();
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) decl.region_labels.push_back(parse_label());
    expect(Tok::RBrace, "'}'");
    if (decl.region_labels.empty()) {
      result_.diagnostics.error("SyntaxError", "event region must name at least one label", line, col);
      return;
    }
    for (const auto& e : result_.decls.events) {
      if (e.name == decl.name) {
        result_.diagnostics.error("DuplicateName", "event '" + decl.name + "' declared twice", line, col);
        return;
      }
    }
    event_locations_.emplace_back(line, col);
    result_.decls.events.push_back(std::move(decl));
  }

  void parse_negative() {
    skip();  // negative
    int line = cur().line, col = cur().col;
    NegativeDecl decl;
    decl.name = parse_name("negative name");
    if (!at_word("of")) fail("expected 'of'");
    skip();
    decl.paired_event = parse_name("event name");
    for (const auto& n : result_.decls.negatives) {
      if (n.name == decl.name) {
        result_.diagnostics.error("DuplicateName", "negative '" + decl.name + "' declared twice",
                                  line, col);
        return;
      }
    }
    result_.decls.negatives.push_back(std::move(decl));
  }

  void parse_chron() {
    skip();  // chron
    if (at_word("join")) {
      skip();
      expect(Tok::LParen, "'('");
      ChronJoinDecl decl;
      while (true) {
        ChronJoinInput input;
        input.event = parse_name("event name");
        if (at_word("when")) {
          skip();
          if (!at(Tok::String)) fail("expected a guard string");
          input.guard = cur().text;
          skip();
        }
        decl.inputs.push_back(std::move(input));
        if (at(Tok::Comma)) {
          skip();
          continue;
        }
        break;
      }
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      decl.output = parse_name("event name");
      expect(Tok::Semi, "';'");
      result_.decls.chron_joins.push_back(std::move(decl));
      return;
    }
    ChronEdgeDecl decl;
    decl.from = parse_name("event name");
    expect(Tok::Arrow, "'->'");
    decl.to = parse_name("event name");
    if (at_word("when")) {
      skip();
      if (!at(Tok::String)) fail("expected a guard string");
      decl.guard = cur().text;
      skip();
    }
    expect(Tok::Semi, "';'");
    result_.decls.chron_edges.push_back(std::move(decl));
  }

  // -- resolution --------------------------------------------------------------

  std::optional<StageId> resolve_path(const PathRef& p) {
    if (const auto* label = std::get_if<LabelRef>(&p.ref)) {
      auto sid = result_.model.stage_by_label(label->label);
      if (!sid) {
        result_.diagnostics.error("UnknownReference", "unknown label '" + label->label + "'",
                                  p.line, p.col);
        return std::nullopt;
      }
      return sid;
    }
    const auto& path = std::get<StagePathRef>(p.ref);
    std::optional<ThimacId> current;
    for (std::size_t k = 0; k < path.thimac_path.size(); ++k) {
      const std::string& name = path.thimac_path[k];
      const std::vector<ThimacId>& candidates =
          current ? result_.model.thimac(*current).children : result_.model.roots();
      std::optional<ThimacId> next;
      for (ThimacId tid : candidates) {
        if (result_.model.thimac(tid).name == name) {
          next = tid;
          break;
        }
      }
      if (!next) {
        result_.diagnostics.error("UnknownReference", "unknown thimac '" + name + "'", p.line, p.col);
        return std::nullopt;
      }
      current = next;
    }
    int seen = 0;
    for (StageId sid : result_.model.thimac(*current).stages) {
      if (result_.model.stage(sid).kind == path.kind) {
        if (seen == path.index) return sid;
        ++seen;
      }
    }
    result_.diagnostics.error("UnknownReference",
                              "no " + std::string(to_string(path.kind)) + "[" +
                                  std::to_string(path.index) + "] stage here",
                              p.line, p.col);
    return std::nullopt;
  }

  void resolve() {
    for (const auto& m : pending_memories_) {
      auto host = resolve_path(m.host);
      if (!host) continue;
      result_.model.bind_memory(m.thimac, *host);
    }
    for (const auto& a : pending_arcs_) {
      auto from = resolve_path(a.from);
      auto to = resolve_path(a.to);
      if (!from || !to) continue;
      result_.model.add_arc(a.kind, *from, *to, a.guard);
    }
    for (const auto& j : pending_joins_) {
      std::vector<std::pair<StageId, std::optional<std::string>>> inputs;
      bool ok = true;
      for (const auto& [path, guard] : j.inputs) {
        auto sid = resolve_path(path);
        if (!sid) {
          ok = false;
          continue;
        }
        inputs.emplace_back(*sid, guard);
      }
      auto output = resolve_path(j.output);
      if (!ok || !output) continue;
      result_.model.add_join(inputs, *output);
    }
    // Region labels must resolve at parse time.
    std::size_t idx = 0;
    for (const auto& e : result_.decls.events) {
      auto [line, col] = idx < event_locations_.size() ? event_locations_[idx] : std::pair{0, 0};
      ++idx;
      for (const std::string& label : e.region_labels) {
        if (!result_.model.stage_by_label(label)) {
          result_.diagnostics.error("UnknownReference",
                                    "event '" + e.name + "' names unknown label '" + label + "'",
                                    line, col);
        }
      }
    }
  }

  struct PendingMemory {
    ThimacId thimac;
    PathRef host;
  };
  struct PendingArc {
    ArcKind kind;
    PathRef from;
    PathRef to;
    std::optional<std::string> guard;
  };
  struct PendingJoin {
    std::vector<std::pair<PathRef, std::optional<std::string>>> inputs;
    PathRef output;
  };

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  ParseResult result_;
  std::vector<PendingMemory> pending_memories_;
  std::vector<PendingArc> pending_arcs_;
  std::vector<PendingJoin> pending_joins_;
  std::vector<std::pair<int, int>> event_locations_;
};

}  // namespace dsl

inline ParseResult parse(const std::string& source) { return dsl::Parser(source).run(); }

// -- canonical printer ---------------------------------------------------------
//
// Declaration order is preserved within each section; sections are emitted in
// a fixed order: thimacs, flows/triggers, joins, events, negatives, chron.

namespace dsl {

inline bool plain_ident(const std::string& s) {
  if (s.empty() || is_reserved(s)) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string print_name(const std::string& s) {
  return plain_ident(s) ? s : quote(s);
}

inline std::string thimac_path(const StaticModel& model, ThimacId id) {
  std::vector<std::string> names;
  const Thimac* t = &model.thimac(id);
  while (true) {
    names.push_back(print_name(t->name));
    if (!t->parent) break;
    t = &model.thimac(*t->parent);
  }
  std::string out;
  for (auto it = names.rbegin(); it != names.rend(); ++it) {
    if (!out.empty()) out += ".";
    out += *it;
  }
  return out;
}

inline std::string stage_path(const StaticModel& model, StageId sid) {
  const Stage& s = model.stage(sid);
  if (s.label) return "@" + *s.label;
  const Thimac& owner = model.thimac(s.owner);
  int index = 0, count = 0;
  for (StageId other : owner.stages) {
    if (model.stage(other).kind != s.kind) continue;
    if (other == sid) index = count;
    ++count;
  }
  std::string out = thimac_path(model, s.owner) + "." + to_string(s.kind);
  if (count > 1) out += "[" + std::to_string(index) + "]";
  return out;
}

inline void print_stage_line(const StaticModel& model, StageId sid, int depth, std::string& out) {
  const Stage& s = model.stage(sid);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += to_string(s.kind);
  if (s.kind == ActionKind::Transfer && s.direction && *s.direction != TransferDirection::Both) {
    out += " ";
    out += to_string(*s.direction);
  }
  if (s.label) out += " @" + *s.label;
  out += ";\n";
}

inline void print_thimac_block(const StaticModel& model, ThimacId id, int depth, std::string& out);

inline void print_memory_block(const StaticModel& model, const Thimac& t, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "memory " + print_name(t.name) + " {\n";
  for (const BodyItem& item : t.body) {
    if (const auto* sid = std::get_if<StageId>(&item)) print_stage_line(model, *sid, depth + 1, out);
  }
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "} on " + stage_path(model, *t.host_stage) + "\n";
}

inline void print_thimac_block(const StaticModel& model, ThimacId id, int depth, std::string& out) {
  const Thimac& t = model.thimac(id);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "thimac " + print_name(t.name);
  if (t.classification == ThingClassification::Existing) out += " existing";
  if (t.classification == ThingClassification::Appearing) out += " appearing";
  out += " {\n";
  for (const BodyItem& item : t.body) {
    if (const auto* sid = std::get_if<StageId>(&item)) {
      print_stage_line(model, *sid, depth + 1, out);
    } else {
      const Thimac& child = model.thimac(std::get<ThimacId>(item));
      if (child.is_memory && child.host_stage) {
        print_memory_block(model, child, depth + 1, out);
      } else {
        print_thimac_block(model, child.id, depth + 1, out);
      }
    }
  }
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "}\n";
}

}  // namespace dsl

inline std::string print(const StaticModel& model, const DynamicDecls& decls = {}) {
  using namespace dsl;
  std::string out;
  for (ThimacId root : model.roots()) print_thimac_block(model, root, 0, out);

  std::set<ArcId> join_arcs;
  for (const JoinBar& j : model.joins()) {
    for (ArcId a : j.inputs) join_arcs.insert(a);
  }
  for (const Arc& a : model.arcs()) {
    if (join_arcs.count(a.id)) continue;
    out += a.kind == ArcKind::Flow ? "flow " : "trigger ";
    out += stage_path(model, a.from) + " -> " + stage_path(model, a.to);
    if (a.guard) out += " when " + quote(*a.guard);
    out += ";\n";
  }
  for (const JoinBar& j : model.joins()) {
    out += "join (";
    for (std::size_t k = 0; k < j.inputs.size(); ++k) {
      if (k) out += ", ";
      const Arc& a = model.arc(j.inputs[k]);
      out += stage_path(model, a.from);
      if (a.guard) out += " when " + quote(*a.guard);
    }
    out += ") -> " + stage_path(model, j.output) + ";\n";
  }

  for (const EventDecl& e : decls.events) {
    out += "event " + print_name(e.name);
    if (e.extended) out += " *";
    if (e.entity_like) out += " entity";
    if (e.instantaneous) out += " instant";
    if (e.duration != 1) out += " duration " + std::to_string(e.duration);
    if (e.measure) out += " measure " + quote(*e.measure);
    out += " " + quote(e.description) + " region {";
    for (const std::string& label : e.region_labels) out += " " + label;
    out += " }\n";
  }
  for (const NegativeDecl& n : decls.negatives) {
    out += "negative " + print_name(n.name) + " of " + print_name(n.paired_event) + "\n";
  }
  for (const ChronEdgeDecl& c : decls.chron_edges) {
    out += "chron " + print_name(c.from) + " -> " + print_name(c.to);
    if (c.guard) out += " when " + quote(*c.guard);
    out += ";\n";
  }
  for (const ChronJoinDecl& j : decls.chron_joins) {
    out += "chron join (";
    for (std::size_t k = 0; k < j.inputs.size(); ++k) {
      if (k) out += ", ";
      out += print_name(j.inputs[k].event);
      if (j.inputs[k].guard) out += " when " + quote(*j.inputs[k].guard);
    }
    out += ") -> " + print_name(j.output) + ";\n";
  }
  return out;
}

}  // namespace tmkit

#include <catch2/catch.hpp>

#include <set>

#include "test_support.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/render.hpp"

using namespace tmkit;

TEST_CASE("empty model renders an empty digraph") {
  StaticModel model;
  CHECK(to_dot(model) ==
        "digraph tm {\n"
        "  rankdir=LR;\n"
        "  node [shape=box, fontsize=10];\n"
        "}\n");
}

TEST_CASE("small model dot golden") {
  ParseResult r = parse(
      "thimac A { create @a.1; release; }\n"
      "flow @a.1 -> A.release;\n");
  REQUIRE(r.ok());
  CHECK(to_dot(r.model) ==
        "digraph tm {\n"
        "  rankdir=LR;\n"
        "  node [shape=box, fontsize=10];\n"
        "  subgraph cluster_t0 {\n"
        "    label=\"A\";\n"
        "    s0 [label=\"create\\n@a.1\"];\n"
        "    s1 [label=\"release\"];\n"
        "  }\n"
        "  s0 -> s1;\n"
        "}\n");
}

TEST_CASE("carsale static view carries all 31 anchors plus structure") {
  ParseResult r = support::parse_fixture("carsale.tm");
  REQUIRE(r.ok());
  std::string dot = to_dot(r.model);
  for (int i = 1; i <= 31; ++i) {
    INFO(i);
    CHECK(dot.find("@car." + std::to_string(i) + "\"") != std::string::npos);
  }
  CHECK(dot.find("style=dashed") != std::string::npos);    // triggers and memory cluster
  CHECK(dot.find("shape=cylinder") != std::string::npos);  // memory stages
  CHECK(dot.find("fillcolor=black") != std::string::npos); // join bar
}

TEST_CASE("dynamic view draws one cluster per event, overlap included") {
  DynamicModel dyn = support::compile_fixture("watch.tm");
  std::string dot = to_dot_dynamic(dyn);
  for (const Event& e : dyn.events) {
    CHECK(dot.find(e.name + ": ") != std::string::npos);
  }
  // the shared stage appears once per overlapping event cluster
  CHECK(dot.find("e3_s") != std::string::npos);
  CHECK(dot.find("e4_s") != std::string::npos);
}

TEST_CASE("chronology view separates negatives by shape") {
  DynamicModel dyn = support::compile_fixture("carsale.tm");
  std::string dot = to_dot_chronology(dyn);
  for (const Event& e : dyn.events) CHECK(dot.find("\"" + e.name + "\"") != std::string::npos);
  CHECK(dot.find("\"R16\", shape=octagon") != std::string::npos);
  CHECK(dot.find("label=\"approved\"") != std::string::npos);
}

TEST_CASE("dot output is deterministic") {
  for (int round = 0; round < 2; ++round) {
    ParseResult a = support::parse_fixture("carsale.tm");
    ParseResult b = support::parse_fixture("carsale.tm");
    CHECK(to_dot(a.model) == to_dot(b.model));
    DynamicModel da = support::compile_fixture("carsale.tm");
    DynamicModel db = support::compile_fixture("carsale.tm");
    CHECK(to_dot_dynamic(da) == to_dot_dynamic(db));
    CHECK(to_dot_chronology(da) == to_dot_chronology(db));
  }
}

TEST_CASE("a single transfer chain collapses to one arc") {
  ParseResult r = parse(
      "thimac A { process @a.p; release; transfer out; }\n"
      "thimac B { transfer in; receive; process @b.p; }\n"
      "flow @a.p -> A.release;\n"
      "flow A.release -> A.transfer;\n"
      "flow A.transfer -> B.transfer;\n"
      "flow B.transfer -> B.receive;\n"
      "flow B.receive -> @b.p;\n");
  REQUIRE(r.ok());
  SimplifiedModel s = simplify(r.model);
  REQUIRE(s.arcs.size() == 1);
  CHECK(s.model.stage(s.arcs[0].from).label == "a.p");
  CHECK(s.model.stage(s.arcs[0].to).label == "b.p");
  CHECK(s.model.stages().size() == 2);
  CHECK(s.model.arcs().empty());
}

TEST_CASE("chain-free models are a fixpoint of simplify") {
  ParseResult r = parse(
      "thimac A { create @a.1; process @a.2; }\n"
      "flow @a.1 -> @a.2;\n"
      "trigger @a.2 -> @a.1 when \"again\";\n");
  REQUIRE(r.ok());
  SimplifiedModel s = simplify(r.model);
  CHECK(s.arcs.empty());
  CHECK(s.model == r.model);
  StaticModel back = desugar(s);
  CHECK(back == r.model);
}

TEST_CASE("carsale simplification eliminates all transfer machinery") {
  ParseResult r = support::parse_fixture("carsale.tm");
  REQUIRE(r.ok());
  SimplifiedModel s = simplify(r.model);
  for (const Stage& stage : s.model.stages()) {
    CHECK(stage.kind != ActionKind::Release);
    CHECK(stage.kind != ActionKind::Transfer);
    CHECK(stage.kind != ActionKind::Receive);
  }
  CHECK(!s.arcs.empty());

  SECTION("create/process reachability is preserved through desugar") {
    auto original = support::reach_cp(r.model);
    std::vector<std::pair<StageId, StageId>> extra;
    for (const SimplifiedArc& a : s.arcs) extra.emplace_back(a.from, a.to);
    auto simplified_reach = support::reach_cp(s.model, extra);
    CHECK(simplified_reach == original);

    StaticModel rebuilt = desugar(s);
    CHECK(support::reach_cp(rebuilt) == original);
    CHECK(validate(rebuilt, {}).error_count() == 0);
  }
  SECTION("desugar-of-simplify is idempotent after the first round") {
    StaticModel first = desugar(s);
    SimplifiedModel again = simplify(first);
    CHECK(again.arcs == s.arcs);
    StaticModel second = desugar(again);
    CHECK(second == first);
  }
}

TEST_CASE("memory stores survive simplification") {
  ParseResult r = support::parse_fixture("carsale.tm");
  REQUIRE(r.ok());
  SimplifiedModel s = simplify(r.model);
  bool found = false;
  for (const Thimac& t : s.model.thimacs()) {
    if (t.is_memory) {
      found = true;
      REQUIRE(t.host_stage.has_value());
      CHECK(s.model.has(*t.host_stage));
    }
  }
  CHECK(found);
}

TEST_CASE("simplified textual view reparses and validates") {
  ParseResult r = support::parse_fixture("carsale.tm");
  REQUIRE(r.ok());
  SimplifiedModel s = simplify(r.model);
  StaticModel view = s.model;
  for (const SimplifiedArc& a : s.arcs) view.add_trigger(a.from, a.to);
  ParseResult again = parse(print(view));
  REQUIRE(again.ok());
  CHECK(validate(again.model, {}).error_count() == 0);
}

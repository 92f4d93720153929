#include <catch2/catch.hpp>

#include <algorithm>
#include <iterator>
#include <map>

#include "test_support.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/dynamics.hpp"

using namespace tmkit;

TEST_CASE("extract_region resolves labels to an induced subdiagram") {
  ParseResult r = support::parse_fixture("walking.tm");
  REQUIRE(r.ok());

  SECTION("a proper subregion") {
    const EventDecl* decl = r.decls.find_event("E2");
    REQUIRE(decl != nullptr);
    Region region = extract_region(r.model, *decl);
    CHECK(region.nodes.size() == 2);
    CHECK(region.nodes.size() < r.model.stages().size());
    CHECK(region.arcs == support::region_arcs_bruteforce(r.model, region.nodes));
  }
  SECTION("naming every stage gives the whole model") {
    const EventDecl* decl = r.decls.find_event("E1");
    REQUIRE(decl != nullptr);
    Region region = extract_region(r.model, *decl);
    CHECK(region.nodes.size() == r.model.stages().size());
    CHECK(region.arcs.size() == r.model.arcs().size());
  }
  SECTION("label typo") {
    EventDecl bad{"EX", "typo", {"walk.99"}, 1, false, false, false, std::nullopt};
    CHECK_THROWS_MATCHES(extract_region(r.model, bad), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::UnknownLabel; }));
  }
}

TEST_CASE("every fixture event region matches the brute-force oracle") {
  for (const char* name : {"carsale.tm", "watch.tm", "walking.tm", "hammer.tm"}) {
    INFO(name);
    ParseResult r = support::parse_fixture(name);
    REQUIRE(r.ok());
    for (const EventDecl& decl : r.decls.events) {
      Region region = extract_region(r.model, decl);
      CHECK(region.arcs == support::region_arcs_bruteforce(r.model, region.nodes));
      CHECK(!region.nodes.empty());
    }
  }
}

TEST_CASE("carsale compiles to 17 events and one paired negative") {
  DynamicModel dyn = support::compile_fixture("carsale.tm");
  CHECK(dyn.events.size() == 17);
  REQUIRE(dyn.negatives.size() == 1);
  const NegativeEvent& r16 = dyn.negatives[0];
  CHECK(r16.name == "R16");
  CHECK(r16.paired_event == "E16");
  CHECK(dyn.events[r16.paired_index].name == "E16");

  SECTION("negative region aliases the paired event's region") {
    CHECK(dyn.region_of_negative(r16) == dyn.events[r16.paired_index].region);
  }
  SECTION("no region contains an appearing stage") {
    for (const Event& e : dyn.events) {
      for (StageId sid : e.region.nodes) {
        CHECK(dyn.statics.thimac(dyn.statics.stage(sid).owner).classification !=
              ThingClassification::Appearing);
      }
    }
  }
}

TEST_CASE("watch compiles with extended entity-like events and overlap") {
  DynamicModel dyn = support::compile_fixture("watch.tm");
  CHECK(dyn.events.size() == 5);
  REQUIRE(dyn.negatives.size() == 1);
  CHECK(dyn.negatives[0].name == "R5");
  CHECK(dyn.negatives[0].paired_event == "E5");

  const Event* e1 = dyn.find_event("E1");
  const Event* e2 = dyn.find_event("E2");
  REQUIRE(e1 != nullptr);
  REQUIRE(e2 != nullptr);
  CHECK(e1->extended);
  CHECK(e2->extended);
  CHECK(e1->kind == EventKind::EntityLike);

  // E4 and E5 share a stage; overlapping regions must compile
  const Event* e4 = dyn.find_event("E4");
  const Event* e5 = dyn.find_event("E5");
  std::vector<StageId> shared;
  std::set_intersection(e4->region.nodes.begin(), e4->region.nodes.end(),
                        e5->region.nodes.begin(), e5->region.nodes.end(),
                        std::back_inserter(shared));
  CHECK(!shared.empty());
}

TEST_CASE("entity-like defaults to extended") {
  ParseResult r = parse(
      "thimac A { create @a.1; }\n"
      "event E1 entity \"an object\" region { a.1 }\n");
  REQUIRE(r.ok());
  CompileResult compiled = compile_dynamic(r.model, r.decls);
  REQUIRE(compiled.ok());
  CHECK(compiled.model->events[0].extended);
  CHECK(compiled.model->events[0].kind == EventKind::EntityLike);
}

TEST_CASE("zero events give an empty chronology") {
  ParseResult r = parse("thimac A { create; }");
  REQUIRE(r.ok());
  CompileResult compiled = compile_dynamic(r.model, r.decls);
  REQUIRE(compiled.ok());
  CHECK(compiled.model->events.empty());
  CHECK(compiled.model->chronology.edges.empty());
}

TEST_CASE("compile propagates validation diagnostics") {
  ParseResult r = parse(
      "thimac SquareCircle appearing { create @sq.1; }\n"
      "event E1 \"impossible\" region { sq.1 }\n");
  REQUIRE(r.ok());
  CompileResult compiled = compile_dynamic(r.model, r.decls);
  CHECK_FALSE(compiled.ok());
  CHECK(compiled.diagnostics.has_code("E_APPEARING_IN_REGION"));
}

TEST_CASE("build_chronology checks names and cycles") {
  std::vector<Event> events;
  for (const char* name : {"E1", "E2", "E3"}) {
    Event e;
    e.name = name;
    events.push_back(e);
  }
  std::vector<NegativeEvent> negatives;

  SECTION("single edge is a 2-node graph") {
    DynamicDecls decls;
    decls.chron_edges.push_back({"E1", "E2", std::nullopt});
    ChronologyGraph g = build_chronology(events, negatives, decls);
    CHECK(g.nodes.size() == 3);
    CHECK(g.edges.size() == 1);
  }
  SECTION("edge to an undeclared event") {
    DynamicDecls decls;
    decls.chron_edges.push_back({"E1", "E99", std::nullopt});
    CHECK_THROWS_MATCHES(build_chronology(events, negatives, decls), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::UnknownEvent; }));
  }
  SECTION("cycles inside one instance are rejected") {
    DynamicDecls decls;
    decls.chron_edges.push_back({"E1", "E2", std::nullopt});
    decls.chron_edges.push_back({"E2", "E3", std::nullopt});
    decls.chron_edges.push_back({"E3", "E1", std::nullopt});
    CHECK_THROWS_MATCHES(build_chronology(events, negatives, decls), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::IntraInstanceCycle;
                         }));
  }
  SECTION("a cycle through a negative is a reset, not an error") {
    negatives.push_back({"R2", "E2", 1});
    DynamicDecls decls;
    decls.chron_edges.push_back({"E1", "E2", std::nullopt});
    decls.chron_edges.push_back({"E2", "R2", std::nullopt});
    decls.chron_edges.push_back({"R2", "E1", std::nullopt});
    CHECK_NOTHROW(build_chronology(events, negatives, decls));
  }
}

TEST_CASE("chronology with guards stripped is acyclic on fixtures") {
  for (const char* name : {"carsale.tm", "watch.tm"}) {
    INFO(name);
    DynamicModel dyn = support::compile_fixture(name);
    // Kahn peeling over event-to-event edges only.
    std::map<std::string, int> indegree;
    for (const std::string& n : dyn.chronology.nodes) indegree[n] = 0;
    auto is_event = [&](const std::string& n) { return indegree.count(n) != 0; };
    std::vector<std::pair<std::string, std::string>> edges;
    for (const ChronEdge& e : dyn.chronology.edges) {
      if (is_event(e.from) && is_event(e.to)) edges.emplace_back(e.from, e.to);
    }
    for (const ChronJoin& j : dyn.chronology.joins) {
      for (const ChronJoinInput& in : j.inputs) edges.emplace_back(in.event, j.output);
    }
    for (const auto& [from, to] : edges) indegree[to] += 1;
    std::vector<std::string> queue;
    for (const auto& [n, d] : indegree) {
      if (d == 0) queue.push_back(n);
    }
    std::size_t peeled = 0;
    while (!queue.empty()) {
      std::string cur = queue.back();
      queue.pop_back();
      ++peeled;
      for (const auto& [from, to] : edges) {
        if (from == cur && --indegree[to] == 0) queue.push_back(to);
      }
    }
    CHECK(peeled == dyn.chronology.nodes.size());
  }
}

TEST_CASE("carsale chronology content matches the fixture declarations") {
  DynamicModel dyn = support::compile_fixture("carsale.tm");
  CHECK(dyn.chronology.edges.size() == 18);
  REQUIRE(dyn.chronology.joins.size() == 1);
  const ChronJoin& join = dyn.chronology.joins[0];
  CHECK(join.output == "E16");
  REQUIRE(join.inputs.size() == 3);
  CHECK(join.inputs[0].event == "E13");
  CHECK(join.inputs[1].event == "E14");
  CHECK(join.inputs[2].event == "E15");
  CHECK(join.inputs[2].guard == "factory");

  bool found_terminal = false;
  for (const ChronEdge& e : dyn.chronology.edges) {
    if (e.from == "E17" && e.to == "R16") found_terminal = true;
  }
  CHECK(found_terminal);
}

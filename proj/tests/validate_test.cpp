#include <catch2/catch.hpp>

#include "test_support.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/validate.hpp"

using namespace tmkit;

namespace {

struct Pair {
  StaticModel model;
  ThimacId a, b;

  Pair() {
    a = model.add_thimac(std::nullopt, "A");
    b = model.add_thimac(std::nullopt, "B");
  }
  StageId stage(ThimacId t, ActionKind k,
                std::optional<TransferDirection> d = std::nullopt) {
    return model.add_stage(t, k, d);
  }
  bool legal(StageId from, StageId to) { return check_adjacency(model, from, to); }
};

}  // namespace

TEST_CASE("flow adjacency table") {
  Pair p;
  SECTION("release feeds outbound transfer in the same thimac") {
    CHECK(p.legal(p.stage(p.a, ActionKind::Release),
                  p.stage(p.a, ActionKind::Transfer, TransferDirection::Out)));
  }
  SECTION("outbound transfer feeds inbound transfer across thimacs") {
    CHECK(p.legal(p.stage(p.a, ActionKind::Transfer, TransferDirection::Out),
                  p.stage(p.b, ActionKind::Transfer, TransferDirection::In)));
  }
  SECTION("receive is the sole entry after an inbound transfer") {
    StageId tin = p.stage(p.a, ActionKind::Transfer, TransferDirection::In);
    CHECK(p.legal(tin, p.stage(p.a, ActionKind::Receive)));
    CHECK_FALSE(p.legal(tin, p.stage(p.a, ActionKind::Process)));
  }
  SECTION("receive to create is illegal") {
    CHECK_FALSE(p.legal(p.stage(p.a, ActionKind::Receive), p.stage(p.a, ActionKind::Create)));
  }
  SECTION("process chains are not flows") {
    CHECK_FALSE(p.legal(p.stage(p.a, ActionKind::Process), p.stage(p.a, ActionKind::Process)));
  }
  SECTION("create cannot transfer directly, release mediates") {
    CHECK_FALSE(p.legal(p.stage(p.a, ActionKind::Create),
                        p.stage(p.a, ActionKind::Transfer, TransferDirection::Out)));
  }
  SECTION("create and receive feed process and release; process feeds create") {
    CHECK(p.legal(p.stage(p.a, ActionKind::Create), p.stage(p.a, ActionKind::Process)));
    CHECK(p.legal(p.stage(p.a, ActionKind::Create), p.stage(p.a, ActionKind::Release)));
    CHECK(p.legal(p.stage(p.a, ActionKind::Receive), p.stage(p.a, ActionKind::Process)));
    CHECK(p.legal(p.stage(p.a, ActionKind::Receive), p.stage(p.a, ActionKind::Release)));
    CHECK(p.legal(p.stage(p.a, ActionKind::Process), p.stage(p.a, ActionKind::Release)));
    CHECK(p.legal(p.stage(p.a, ActionKind::Process), p.stage(p.a, ActionKind::Create)));
  }
  SECTION("cross-thimac flows other than transfer pairs are illegal") {
    CHECK_FALSE(p.legal(p.stage(p.a, ActionKind::Release), p.stage(p.b, ActionKind::Receive)));
    CHECK_FALSE(p.legal(p.stage(p.a, ActionKind::Process), p.stage(p.b, ActionKind::Process)));
  }
  SECTION("a both-direction transfer plays either role") {
    StageId both_a = p.stage(p.a, ActionKind::Transfer, TransferDirection::Both);
    StageId both_b = p.stage(p.b, ActionKind::Transfer, TransferDirection::Both);
    CHECK(p.legal(both_a, both_b));
    CHECK(p.legal(p.stage(p.a, ActionKind::Release), both_a));
    CHECK(p.legal(both_a, p.stage(p.a, ActionKind::Receive)));
  }
  SECTION("in-direction transfer cannot be a flow source to another thimac") {
    CHECK_FALSE(p.legal(p.stage(p.a, ActionKind::Transfer, TransferDirection::In),
                        p.stage(p.b, ActionKind::Transfer, TransferDirection::In)));
  }
}

TEST_CASE("memory store adjacency") {
  StaticModel model;
  ThimacId host = model.add_thimac(std::nullopt, "Host");
  StageId process = model.add_stage(host, ActionKind::Process);
  StageId other = model.add_stage(host, ActionKind::Receive);
  ThimacId mem = model.attach_memory(process, "Store");
  StageId mem_receive = model.add_stage(mem, ActionKind::Receive);
  StageId mem_release = model.add_stage(mem, ActionKind::Release);

  CHECK(check_adjacency(model, process, mem_receive));
  CHECK(check_adjacency(model, other, mem_receive));  // any stage of the host
  CHECK(check_adjacency(model, mem_release, process));
  CHECK(check_adjacency(model, mem_receive, mem_release));  // ordinary inside the store
  CHECK_FALSE(check_adjacency(model, process, mem_release));

  // a stage of an unrelated thimac gets no memory shortcut
  ThimacId stranger = model.add_thimac(std::nullopt, "Other");
  StageId far = model.add_stage(stranger, ActionKind::Process);
  CHECK_FALSE(check_adjacency(model, far, mem_receive));
}

TEST_CASE("carsale validates clean and every flow obeys the table") {
  ParseResult r = support::parse_fixture("carsale.tm");
  REQUIRE(r.ok());
  Diagnostics diags = validate(r.model, r.decls);
  CHECK(diags.error_count() == 0);
  for (const Arc& a : r.model.arcs()) {
    if (a.kind != ArcKind::Flow) continue;
    INFO("arc #" << a.id.value);
    CHECK(check_adjacency(r.model, a.from, a.to));
  }
}

TEST_CASE("illegal flow yields E_ADJ") {
  ParseResult r = parse("thimac A { process; process; } flow A.process[0] -> A.process[1];");
  REQUIRE(r.ok());
  Diagnostics diags = validate(r.model, r.decls);
  CHECK(diags.has_code("E_ADJ"));
  CHECK_FALSE(diags.ok());
}

TEST_CASE("appearing things are barred from event regions") {
  ParseResult r = parse(
      "thimac SquareCircle appearing { create @sq.1; }\n"
      "event E1 \"impossible\" region { sq.1 }\n");
  REQUIRE(r.ok());
  Diagnostics diags = validate(r.model, r.decls);
  CHECK(diags.has_code("E_APPEARING_IN_REGION"));
}

TEST_CASE("join arity is enforced") {
  StaticModel model;
  ThimacId t = model.add_thimac(std::nullopt, "A");
  StageId s1 = model.add_stage(t, ActionKind::Process);
  StageId s2 = model.add_stage(t, ActionKind::Create);
  model.add_join({{s1, std::nullopt}}, s2);
  Diagnostics diags = validate(model, {});
  CHECK(diags.has_code("E_JOIN_ARITY"));
}

TEST_CASE("empty regions and unpaired negatives are errors") {
  StaticModel model;
  ThimacId t = model.add_thimac(std::nullopt, "A");
  model.add_stage(t, ActionKind::Create, std::nullopt, "a.1");
  DynamicDecls decls;
  decls.events.push_back({"E1", "desc", {}, 1, false, false, false, std::nullopt});
  decls.negatives.push_back({"R9", "E9"});
  Diagnostics diags = validate(model, decls);
  CHECK(diags.has_code("E_REGION_EMPTY"));
  CHECK(diags.has_code("E_NEG_UNPAIRED"));
}

TEST_CASE("disconnected regions warn but do not fail") {
  ParseResult r = parse(
      "thimac A { create @a.1; }\n"
      "thimac B { create @b.1; }\n"
      "event E1 \"split\" region { a.1 b.1 }\n");
  REQUIRE(r.ok());
  Diagnostics diags = validate(r.model, r.decls);
  CHECK(diags.ok());
  CHECK(diags.has_code("W_REGION_DISCONNECTED"));
}

TEST_CASE("unknown region labels from programmatic decls are flagged") {
  StaticModel model;
  ThimacId t = model.add_thimac(std::nullopt, "A");
  model.add_stage(t, ActionKind::Create, std::nullopt, "a.1");
  DynamicDecls decls;
  decls.events.push_back({"E1", "desc", {"zz.9"}, 1, false, false, false, std::nullopt});
  Diagnostics diags = validate(model, decls);
  CHECK(diags.has_code("E_UNKNOWN_LABEL"));
}

TEST_CASE("watch and walking and hammer fixtures validate clean") {
  for (const char* name : {"watch.tm", "walking.tm", "hammer.tm"}) {
    INFO(name);
    ParseResult r = support::parse_fixture(name);
    REQUIRE(r.ok());
    Diagnostics diags = validate(r.model, r.decls);
    CHECK(diags.error_count() == 0);
  }
}

TEST_CASE("events without any chronology draw a suggestion warning") {
  ParseResult r = parse(
      "thimac A { create @a.1; process @a.2; }\n"
      "trigger @a.1 -> @a.2;\n"
      "event E1 \"one\" region { a.1 }\n"
      "event E2 \"two\" region { a.2 }\n");
  REQUIRE(r.ok());
  Diagnostics diags = validate(r.model, r.decls);
  CHECK(diags.ok());
  CHECK(diags.has_code("W_NO_CHRONOLOGY"));

  ParseResult with_chron = parse(
      "thimac A { create @a.1; process @a.2; }\n"
      "event E1 \"one\" region { a.1 }\n"
      "event E2 \"two\" region { a.2 }\n"
      "chron E1 -> E2;\n");
  REQUIRE(with_chron.ok());
  CHECK_FALSE(validate(with_chron.model, with_chron.decls).has_code("W_NO_CHRONOLOGY"));
}

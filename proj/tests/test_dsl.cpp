#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "termplan/dsl.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace termplan;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(TERMPLAN_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kDomain = R"((define (domain toy)
  (:types box - object_id
          robot - agent)
  (:predicates (p ?x - obj) (holds ?r - robot ?b - box) (m ?t - any))
  (:action Grab
    :agent ?r - robot
    :parameters (?b - box)
    (:actual_event go
      :precondition (not (holds ?r ?b))
      :postcondition ((holds ?r ?b if true)))
    (:event skip
      :precondition true
      :postcondition (id))
    (:edge-conditions
      :go -> go true
      :go -> skip false
      :skip -> go false
      :skip -> skip true)))
)";

const char* kProblem = R"((define (problem toy-1)
  (:domain toy)
  (:universe r1 - robot b1 b2 - box)
  (:constants a - robot c1 - box)
  (:init
    (:actual_world w1
      :constant_map ((a r1) (c1 b1))
      :atoms ((p b1)))
    (:world w2
      :constant_map ((a r1) (c1 b2))
      :atoms ())
    (:edges :r1 ((w1 -- w2))))
  (:goal (exists (?b - box) (p ?b))))
)";

Task toy() { return load_task(kDomain, kProblem); }

void check_roundtrip(const std::string& dom_text, const std::string& prob_text) {
  Task t1 = load_task(dom_text, prob_text);
  std::string ds = serialize_domain(t1.domain);
  std::string ps = serialize_problem(t1);
  Task t2 = load_task(ds, ps);
  CHECK(serialize_domain(t2.domain) == ds);
  CHECK(serialize_problem(t2) == ps);
  CHECK(t2.planning.goal == t1.planning.goal);
  CHECK(is_isomorphic(*t1.planning.initial.model, *t2.planning.initial.model,
                      t1.planning.initial.world, t2.planning.initial.world));
  CHECK(t2.universe == t1.universe);
  CHECK(t2.constant_types == t1.constant_types);
}

}  // namespace

TEST_CASE("types resolve through aliases and declared parents") {
  Task t = toy();
  CHECK(type_root("agent_id", t.domain.types) == Sort::Agt);
  CHECK(type_root("agt", t.domain.types) == Sort::Agt);
  CHECK(type_root("agent", t.domain.types) == Sort::Agt);
  CHECK(type_root("object_id", t.domain.types) == Sort::Obj);
  CHECK(type_root("obj", t.domain.types) == Sort::Obj);
  CHECK(type_root("box", t.domain.types) == Sort::Obj);
  CHECK(type_root("robot", t.domain.types) == Sort::Agt);
  CHECK_THROWS_AS(type_root("ghost", t.domain.types), Error);

  // universe sorts follow the types
  const Domain& dom = *t.planning.initial.model->domain;
  CHECK(dom.agents == std::vector<std::string>{"r1"});
  CHECK(dom.objects == std::vector<std::string>{"b1", "b2"});

  // the any alias admits both sorts
  Formula f = parse_formula("(m a)", t);
  CHECK(well_formed(f, t.planning.sig).ok());
  CHECK(well_formed(parse_formula("(m c1)", t), t.planning.sig).ok());
}

TEST_CASE("worlds, constant maps, and atoms are checked") {
  Task t = toy();
  const Model& m = *t.planning.initial.model;
  CHECK(m.worlds.size() == 2);
  CHECK(t.planning.initial.world == 0);
  CHECK(m.worlds[0].name == "w1");
  CHECK(m.worlds[0].consts.at("c1") == 1);  // b1
  CHECK(m.worlds[1].consts.at("c1") == 2);  // b2
  CHECK(m.worlds[0].rels.at("p").count({1}) == 1);

  auto expect = [&](const std::string& problem, const std::string& phrase) {
    try {
      load_task(kDomain, problem);
      FAIL_CHECK("expected a parse failure mentioning: " << phrase);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(phrase) != std::string::npos);
    }
  };
  expect(R"((define (problem x) (:domain toy)
  (:universe r1 - robot b1 - box)
  (:constants)
  (:init (:actual_world w1 :constant_map () :atoms ()))
  (:goal true) (:axioms)))",
         "unknown problem section");
  expect(R"((define (problem x) (:domain elsewhere)
  (:universe r1 - robot b1 - box) (:constants)
  (:init (:actual_world w1 :constant_map () :atoms ())) (:goal true)))",
         "problem is for domain");
  expect(R"((define (problem x) (:domain toy)
  (:universe r1 - robot)
  (:constants)
  (:init (:actual_world w1 :constant_map () :atoms ())) (:goal true)))",
         "universe has no objects");
  expect(R"((define (problem x) (:domain toy)
  (:universe r1 - robot b1 - box)
  (:constants a - agent)
  (:init (:actual_world w1 :constant_map () :atoms ())) (:goal true)))",
         "does not interpret constant a");
  expect(R"((define (problem x) (:domain toy)
  (:universe r1 - robot b1 - box)
  (:constants)
  (:init (:actual_world w1 :constant_map () :atoms ((= b1 b1)))) (:goal true)))",
         "= may not be listed");
  expect(R"((define (problem x) (:domain toy)
  (:universe r1 - robot b1 - box)
  (:constants)
  (:init (:actual_world w1 :constant_map () :atoms ())
         (:world w1 :constant_map () :atoms ())) (:goal true)))",
         "duplicate world w1");
  expect(R"((define (problem x) (:domain toy)
  (:universe r1 - robot b1 - box)
  (:constants)
  (:init (:world w1 :constant_map () :atoms ())) (:goal true)))",
         "no :actual_world declared");
}

TEST_CASE("edge lists: closure by default, raw pairs, all, identity") {
  auto build = [&](const std::string& edges) {
    std::string text = R"((define (problem e) (:domain toy)
  (:universe r1 r2 - robot b1 - box)
  (:constants)
  (:init
    (:actual_world w1 :constant_map () :atoms ())
    (:world w2 :constant_map () :atoms ())
    (:world w3 :constant_map () :atoms ()))"
                       + edges + R"()
  (:goal true)))";
    return load_task(kDomain, text);
  };

  using Edges = std::set<std::pair<int, int>>;

  // no :edges section at all: identity everywhere
  Task t0 = build("");
  CHECK(t0.planning.initial.model->rel[0] ==
        Edges{{0, 0}, {1, 1}, {2, 2}});

  // default closure: the listed pairs generate an equivalence relation
  Task t1 = build("(:edges :r1 ((w1 -- w2)))");
  CHECK(t1.planning.initial.model->rel[0] ==
        Edges{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}});
  // the unlisted agent keeps identity
  CHECK(t1.planning.initial.model->rel[1] == Edges{{0, 0}, {1, 1}, {2, 2}});

  // a directed pair still merges its endpoints under the default reading
  Task t2 = build("(:edges :r1 ((w1 -> w2)))");
  CHECK(t2.planning.initial.model->rel[0] ==
        Edges{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}});

  // :raw takes the pairs literally; -- abbreviates both directions
  Task t3 = build("(:edges :r1 (:raw (w1 -> w2) (w2 -- w3)))");
  CHECK(t3.planning.initial.model->rel[0] ==
        Edges{{0, 1}, {1, 2}, {2, 1}});

  // (:raw) alone is the empty relation
  Task t4 = build("(:edges :r1 (:raw))");
  CHECK(t4.planning.initial.model->rel[0].empty());

  // (all) is the complete relation
  Task t5 = build("(:edges :r1 (all))");
  CHECK(t5.planning.initial.model->rel[0].size() == 9);

  CHECK_THROWS_AS(build("(:edges :r1 ((w1 -- w2)) :r1 ((w1 -- w3)))"),
                  ParseError);
  CHECK_THROWS_AS(build("(:edges :b1 ((w1 -- w2)))"), ParseError);
  CHECK_THROWS_AS(build("(:edges :r1 ((w1 -- ghost)))"), ParseError);
}

TEST_CASE("lexer errors carry positions") {
  try {
    parse_domain("(define (domain d)\n  (:types");
    FAIL_CHECK("expected unclosed paren");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.col == 3);
    CHECK(std::string(e.what()) == "line 2:3: unclosed '('");
  }
  try {
    parse_domain(")");
    FAIL_CHECK("expected unmatched paren");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.col == 1);
  }
  CHECK_THROWS_AS(parse_domain("(define (domein d))"), ParseError);
  CHECK_THROWS_AS(parse_domain(""), ParseError);
}

TEST_CASE("formulas over a task") {
  Task t = toy();
  Formula f = parse_formula("(forall (?b - box) (implies (p ?b) (p c1)))", t);
  CHECK(f.kind() == Formula::Kind::Forall);
  CHECK(f.var().sort() == Sort::Obj);

  CHECK(to_string(parse_formula("(knows (a) (p c1))", t)) ==
        "(knows (a) (p c1))");

  // both spellings of the dynamic modality parse to the same formula
  Formula g1 = parse_formula("(after (Grab a c1 @go) (holds a c1))", t);
  Formula g2 = parse_formula("(after (Grab a c1) go (holds a c1))", t);
  Formula g3 = parse_formula("(after (Grab a c1) (holds a c1))", t);
  CHECK(g1 == g2);
  CHECK(g1 == g3);  // go is the designated event
  CHECK(g1.kind() == Formula::Kind::Dyn);
  CHECK(g1.event() == "go");

  auto expect = [&](const std::string& text, const std::string& phrase) {
    try {
      parse_formula(text, t);
      FAIL_CHECK("expected a parse failure mentioning: " << phrase);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(phrase) != std::string::npos);
    }
  };
  expect("(after (Grab a c1 @go) go (holds a c1))", "event named twice");
  expect("(after (Grab a c1 @go ?x) (p c1))", "@event must come last");
  expect("(after (Lift a) (p c1))", "no schema named Lift");
  expect("(p ?b)", "unbound variable ?b");
  expect("(p ghost)", "unknown constant: ghost");
  expect("(p c1 c1)", "p takes 1 arguments, 2 given");
  expect("(holds c1 a)", "argument 1 of holds");
  expect("(knows (c1) (p c1))", "knowledge index must be an agent term");
  expect("(forall (?x* - box) (p ?x*))", "?x* may not be bound");
  expect("(p ?x*)", "?x* is only allowed in edge conditions");
  expect("(= b1)", "equality takes two terms");
  expect("(not)", "not takes one operand");
  expect("(and)", "and needs at least one operand");
  expect("", "expected a single formula");
  expect("(p b1) (p b2)", "expected a single formula");

  // goals may not use the dynamic modality
  std::string prob(kProblem);
  auto at = prob.find("(exists (?b - box) (p ?b))");
  REQUIRE(at != std::string::npos);
  prob.replace(at, 26, "(after (Grab a c1) (p c1))");
  try {
    load_task(kDomain, prob);
    FAIL_CHECK("expected goal rejection");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(
              "the dynamic modality is not allowed in this context") !=
          std::string::npos);
  }
}

TEST_CASE("plan files") {
  Task mm = load_task(fixture("mm.tmd"), fixture("mm.tmp"));

  Plan pi = parse_plan(fixture("mm_pi.plan"), mm);
  REQUIRE(pi.size() == 2);
  CHECK(pi[0].display() == "Malfunction(m1,box)@em");
  CHECK(pi[1].display() == "Reboot(a1,sn1)@er1");

  // the designated event is implied when @event is omitted
  Plan bare = parse_plan("((Malfunction m1 box))", mm);
  CHECK(bare[0].event == "em");
  CHECK(action_equal(*bare[0].action, *pi[0].action));

  CHECK(parse_plan("()", mm).empty());
  CHECK(serialize_plan({}) == "()\n");
  std::string round = serialize_plan(pi);
  Plan again = parse_plan(round, mm);
  REQUIRE(again.size() == pi.size());
  for (size_t i = 0; i < pi.size(); ++i)
    CHECK(again[i].display() == pi[i].display());

  CHECK_THROWS_AS(parse_plan("((Reboot @er1 a1 sn1))", mm), ParseError);
  CHECK_THROWS_AS(parse_plan("((Vanish a1))", mm), ParseError);
  CHECK_THROWS_AS(parse_plan("((Reboot a1 sn1 @ghost))", mm), ParseError);
  CHECK_THROWS_AS(parse_plan("((Reboot a1))", mm), ParseError);
  CHECK_THROWS_AS(parse_plan("(Reboot a1 sn1)", mm), ParseError);
  CHECK_THROWS_AS(parse_plan("", mm), ParseError);
}

TEST_CASE("compact action references") {
  ActionRef r = parse_action_ref("Move(a1, b1)@left");
  CHECK(r.name == "Move");
  CHECK(r.args == std::vector<std::string>{"a1", "b1"});
  CHECK(r.event == "left");

  r = parse_action_ref("Reboot");
  CHECK(r.name == "Reboot");
  CHECK(r.args.empty());
  CHECK(r.event.empty());

  r = parse_action_ref("Grab( r1 , b1 )");
  CHECK(r.args == std::vector<std::string>{"r1", "b1"});
  CHECK(r.event.empty());

  r = parse_action_ref("Skip()");
  CHECK(r.args.empty());

  r = parse_action_ref("Wait@tick");
  CHECK(r.name == "Wait");
  CHECK(r.event == "tick");

  CHECK_THROWS_AS(parse_action_ref(""), ParseError);
  CHECK_THROWS_AS(parse_action_ref("@e"), ParseError);
  CHECK_THROWS_AS(parse_action_ref("F(a,)"), ParseError);
  CHECK_THROWS_AS(parse_action_ref("F(a"), ParseError);
  CHECK_THROWS_AS(parse_action_ref("F(a)x"), ParseError);
  CHECK_THROWS_AS(parse_action_ref("F(a)@"), ParseError);
}

TEST_CASE("domain files reject malformed actions") {
  auto expect = [&](const std::string& text, const std::string& phrase) {
    try {
      parse_domain(text);
      FAIL_CHECK("expected a parse failure mentioning: " << phrase);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(phrase) != std::string::npos);
    }
  };
  expect("(define (domain d) (:predicates (= ?x - obj)))", "= is built in");
  expect("(define (domain d) (:predicates (p ?x - obj) (p ?y - obj)))",
         "duplicate predicate p");
  expect(R"((define (domain d)
  (:action A :agent ?a - agent :parameters ()
    (:event e :precondition true :postcondition (id))
    (:edge-conditions :e -> e true))))",
         "has no :actual_event");
  expect(R"((define (domain d)
  (:action A :agent ?a - obj :parameters ()
    (:actual_event e :precondition true :postcondition (id))
    (:edge-conditions :e -> e true))))",
         ":agent must have an agent type");
  expect(R"((define (domain d)
  (:action A :agent ?a - agent :parameters (?a - obj)
    (:actual_event e :precondition true :postcondition (id))
    (:edge-conditions :e -> e true))))",
         "duplicate parameter ?a");
  expect(R"((define (domain d)
  (:action A :agent ?a - agent :parameters ()
    (:actual_event e :precondition true :postcondition (id))
    (:edge-conditions :e -> ghost true))))",
         "unknown event ghost");
  expect(R"((define (domain d)
  (:action A :agent ?a - agent :parameters ()
    (:actual_event e :precondition true
                   :postcondition ((= ?a ?a if true)))
    (:edge-conditions :e -> e true))))",
         "equality may not appear in a postcondition");
  expect(R"((define (domain d) (:predicates (p ?x - obj))
  (:action A :agent ?a - agent :parameters (?b - obj)
    (:actual_event e :precondition true
                   :postcondition ((p ?b if true) (p ?b if false)))
    (:edge-conditions :e -> e true))))",
         "duplicate postcondition for (p ?b)");
}

TEST_CASE("round trips through the canonical form") {
  check_roundtrip(kDomain, kProblem);
  check_roundtrip(fixture("mm.tmd"), fixture("mm.tmp"));
  check_roundtrip(fixture("sc.tmd"), fixture("sc.tmp"));
  check_roundtrip(fixture("nonrigid.tmd"), fixture("nonrigid.tmp"));
}

TEST_CASE("serializing an updated state keeps the format parseable") {
  Task mm = load_task(fixture("mm.tmd"), fixture("mm.tmp"));
  Plan pi = parse_plan(fixture("mm_pi.plan"), mm);
  PointedModel s =
      update_pointed(mm.planning.initial, {pi[0].action, pi[0].event});
  std::string text = serialize_problem(mm, s);
  Task again = parse_problem(text, mm.domain);
  CHECK(is_isomorphic(*s.model, *again.planning.initial.model, s.world,
                      again.planning.initial.world));
  CHECK(again.planning.initial.model->worlds.size() == 2);
}

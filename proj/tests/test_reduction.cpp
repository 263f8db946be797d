#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "termplan/corpus.hpp"
#include "termplan/reduction.hpp"

using namespace termplan;

namespace {

Term c_agt(const std::string& n) { return Term::constant(n, Sort::Agt); }
Term c_obj(const std::string& n) { return Term::constant(n, Sort::Obj); }
Term star() { return Term::var(kStarVar, Sort::Agt); }
Formula diag() { return f_eq(star(), star()); }

ActionPtr skip_action() {
  return ActionModel::create("skip", {"e"}, {f_top()}, {PostMap{}}, {{diag()}});
}

// One world, one agent Ann named a, one object; p() true. Two events: e1
// leaves p alone, e2 clears it; nobody confuses the two.
struct Scene {
  Model model;
  ActionPtr act;

  Scene() {
    auto dom = std::make_shared<Domain>();
    dom->agents = {"Ann"};
    dom->objects = {"O"};
    model.domain = dom;
    model.worlds = {{"w", {{"a", 0}}, {{"p", {{}}}}, {}}};
    model.init_relations();
    model.rel[0] = {{0, 0}};

    PostMap clear;
    clear.entries = {{f_atom("p", {}), f_bottom()}};
    act = ActionModel::create("wipe", {"e1", "e2"}, {f_top(), f_top()},
                              {PostMap{}, clear},
                              {{diag(), f_bottom()}, {f_bottom(), diag()}});
  }
};

}  // namespace

TEST_CASE("complexity of static formulas") {
  Formula p = f_atom("p", {c_obj("o1")});
  Formula q = f_atom("q", {});
  CHECK(complexity(p) == 1);
  CHECK(complexity(f_top()) == 1);
  CHECK(complexity(f_bottom()) == 1);
  CHECK(complexity(f_eq(c_obj("o1"), c_obj("o1"))) == 1);
  CHECK(complexity(f_neq(c_obj("o1"), c_obj("o1"))) == 2);
  CHECK(complexity(f_not(p)) == 2);
  CHECK(complexity(f_knows(c_agt("a"), p)) == 2);
  Term x = Term::var("x", Sort::Obj);
  CHECK(complexity(f_forall(x, f_atom("p", {x}))) == 2);
  CHECK(complexity(f_exists(x, f_atom("p", {x}))) == 2);
  CHECK(complexity(f_and({p, f_not(q)})) == 3);     // 1 + max(1, 2)
  CHECK(complexity(f_or({f_not(p), q})) == 3);
  CHECK(complexity(f_implies(p, f_not(q))) == 3);
  CHECK(complexity(f_iff(p, f_not(q))) == 4);       // 2 + max
}

TEST_CASE("complexity of actions and dynamic formulas") {
  ActionPtr skip = skip_action();
  CHECK(complexity(*skip) == 1);
  Formula p = f_atom("p", {});
  CHECK(complexity(f_dyn(skip, "e", p)) == 5);           // (4 + 1) * 1
  CHECK(complexity(f_dyn(skip, "e", f_not(p))) == 10);   // (4 + 1) * 2

  // the action measure is the max over preconditions, postcondition values,
  // and edge conditions; postcondition keys do not count
  PostMap post;
  post.entries = {{f_atom("p", {}), f_not(f_not(f_not(p)))}};
  ActionPtr heavy = ActionModel::create(
      "heavy", {"e"}, {f_not(p)}, {post}, {{diag()}});
  CHECK(complexity(*heavy) == 4);  // the triple negation wins
  CHECK(complexity(f_dyn(heavy, "e", p)) == 8);

  Scene sc;
  CHECK(complexity(*sc.act) == 1);
  CHECK(complexity(f_dyn(sc.act, "e1", p)) == 5);
}

TEST_CASE("atom axiom") {
  Scene sc;
  Formula p = f_atom("p", {});
  Formula q = f_atom("q", {});

  RewriteStep step;
  // the postcondition table is consulted syntactically
  CHECK(reduce_step(f_dyn(sc.act, "e2", p), {}, &step) ==
        f_implies(f_top(), f_bottom()));
  CHECK(step.axiom == "atom");
  CHECK(step.position == "");
  CHECK(step.before > step.after);

  // atoms outside the table, and the constants, stay put under the guard
  CHECK(reduce_step(f_dyn(sc.act, "e1", p)) == f_implies(f_top(), p));
  CHECK(reduce_step(f_dyn(sc.act, "e2", q)) == f_implies(f_top(), q));
  CHECK(reduce_step(f_dyn(sc.act, "e1", f_top())) == f_implies(f_top(), f_top()));
  CHECK(reduce_step(f_dyn(sc.act, "e1", f_bottom())) ==
        f_implies(f_top(), f_bottom()));
}

TEST_CASE("negation, conjunction, implication axioms") {
  Scene sc;
  Formula p = f_atom("p", {});
  Formula q = f_atom("q", {});
  RewriteStep step;

  CHECK(reduce_step(f_dyn(sc.act, "e1", f_not(p)), {}, &step) ==
        f_implies(f_top(), f_not(f_dyn(sc.act, "e1", p))));
  CHECK(step.axiom == "negation");

  CHECK(reduce_step(f_dyn(sc.act, "e1", f_and({p, q})), {}, &step) ==
        f_and({f_dyn(sc.act, "e1", p), f_dyn(sc.act, "e1", q)}));
  CHECK(step.axiom == "conjunction");

  CHECK(reduce_step(f_dyn(sc.act, "e1", f_implies(p, q)), {}, &step) ==
        f_implies(f_top(), f_implies(f_dyn(sc.act, "e1", p),
                                     f_dyn(sc.act, "e1", q))));
  CHECK(step.axiom == "implication");
}

TEST_CASE("knowledge axiom, guarded and plain") {
  Scene sc;
  Formula p = f_atom("p", {});
  Formula body = f_knows(c_agt("a"), p);
  RewriteStep step;

  Formula guarded = reduce_step(f_dyn(sc.act, "e1", body), {}, &step);
  CHECK(step.axiom == "knowledge");
  Formula expected_conj =
      f_and({f_implies(f_eq(c_agt("a"), c_agt("a")),
                       f_knows(c_agt("a"), f_dyn(sc.act, "e1", p))),
             f_implies(f_bottom(),
                       f_knows(c_agt("a"), f_dyn(sc.act, "e2", p)))});
  CHECK(guarded == f_implies(f_top(), expected_conj));

  ReduceOptions plain;
  plain.knowledge = KnowledgeRow::Plain;
  CHECK(reduce_step(f_dyn(sc.act, "e1", body), plain) == expected_conj);
}

TEST_CASE("the plain knowledge row is refuted by the model oracle") {
  // Two worlds under a full relation; the action requires p and clears q.
  // Where p fails the modality is vacuous, but the unguarded row still looks
  // inside and sees q cleared at the p-world.
  Model m;
  auto dom = std::make_shared<Domain>();
  dom->agents = {"Ann"};
  dom->objects = {"O"};
  m.domain = dom;
  m.worlds = {{"w1", {{"a", 0}}, {{"q", {{}}}}, {}},
              {"w2", {{"a", 0}}, {{"p", {{}}}, {"q", {{}}}}, {}}};
  m.init_relations();
  m.rel[0] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};

  PostMap clearq;
  clearq.entries = {{f_atom("q", {}), f_bottom()}};
  ActionPtr purge = ActionModel::create("purge", {"e"}, {f_atom("p", {})},
                                        {clearq}, {{diag()}});
  Formula phi = f_dyn(purge, "e", f_knows(c_agt("a"), f_atom("q", {})));
  CHECK(satisfies(m, 0, {}, phi));  // vacuous: the precondition fails at w1

  Formula guarded = translate(phi);
  CHECK(is_static(guarded));
  CHECK(satisfies(m, 0, {}, guarded));

  ReduceOptions opts;
  opts.knowledge = KnowledgeRow::Plain;
  Formula plain = translate(phi, opts);
  CHECK(is_static(plain));
  CHECK(!satisfies(m, 0, {}, plain));  // disagrees with the semantics
}

TEST_CASE("quantification axiom renames around captures") {
  Scene sc;
  Term x = Term::var("x", Sort::Obj);
  Formula body = f_forall(x, f_atom("m", {x}));
  RewriteStep step;
  CHECK(reduce_step(f_dyn(sc.act, "e1", body), {}, &step) ==
        f_forall(x, f_dyn(sc.act, "e1", f_atom("m", {x}))));
  CHECK(step.axiom == "quantification");

  // a free occurrence of x in the action forces a fresh bound variable
  ActionPtr picky = ActionModel::create("picky", {"e"}, {f_atom("m", {x})},
                                        {PostMap{}}, {{diag()}});
  Formula out = reduce_step(f_dyn(picky, "e", body));
  REQUIRE(out.kind() == Formula::Kind::Forall);
  CHECK(out.var().name() == "x'");
  CHECK(out.kid() == f_dyn(picky, "e", f_atom("m", {Term::var("x'", Sort::Obj)})));
}

TEST_CASE("composition redex fires innermost-leftmost") {
  Scene sc;
  ActionPtr skip = skip_action();
  Formula p = f_atom("p", {});

  RewriteStep step;
  Formula stacked = f_dyn(skip, "e", f_dyn(sc.act, "e2", p));
  Formula out = reduce_step(stacked, {}, &step);
  CHECK(step.axiom == "composition");
  CHECK(step.position == "");
  REQUIRE(out.kind() == Formula::Kind::Dyn);
  CHECK(out.event() == "e.e2");
  CHECK(out.kid() == p);

  // a deeper pair composes before the outer one
  Formula triple = f_dyn(skip, "e", f_dyn(skip, "e", f_dyn(sc.act, "e1", p)));
  Formula out2 = reduce_step(triple, {}, &step);
  CHECK(step.axiom == "composition");
  CHECK(step.position == "0");
  REQUIRE(out2.kind() == Formula::Kind::Dyn);
  CHECK(out2.event() == "e");
  CHECK(out2.kid().event() == "e.e1");

  // the leftmost of two independent redexes is picked
  Formula wide = f_and({f_dyn(skip, "e", p), f_dyn(sc.act, "e2", p)});
  reduce_step(wide, {}, &step);
  CHECK(step.position == "0");
}

TEST_CASE("static formulas have no redex") {
  Formula p = f_atom("p", {});
  CHECK_THROWS_AS(reduce_step(p), NoRedexError);
  CHECK_THROWS_AS(reduce_step(f_knows(c_agt("a"), p)), NoRedexError);
  // translate is a fixpoint and accepts static input as already done
  CHECK(translate(p) == p);
  CHECK(translate(f_neq(c_obj("o"), c_obj("o"))) ==
        f_not(f_eq(c_obj("o"), c_obj("o"))));
}

TEST_CASE("translate reaches a static fixpoint with a decreasing trace") {
  Scene sc;
  Formula phi = f_dyn(
      sc.act, "e1",
      f_implies(f_knows(c_agt("a"), f_atom("p", {})),
                f_dyn(sc.act, "e2", f_not(f_atom("p", {})))));
  RewriteTrace trace;
  Formula out = translate(phi, {}, &trace);
  CHECK(is_static(out));
  CHECK(!trace.steps.empty());
  for (const auto& s : trace.steps) {
    CAPTURE(s.axiom);
    CHECK(s.before > s.after);
  }
  // translation preserves truth at the scene's only world
  CHECK(satisfies(sc.model, 0, {}, phi) == satisfies(sc.model, 0, {}, out));
}

TEST_CASE("translate normalizes derived connectives away") {
  Scene sc;
  Formula p = f_atom("p", {});
  Formula q = f_atom("q", {});
  Formula phi = f_dyn(sc.act, "e1", f_or({p, f_iff(p, q)}));
  Formula out = translate(phi);
  CHECK(is_static(out));
  std::function<void(const Formula&)> scan = [&](const Formula& f) {
    CHECK(f.kind() != Formula::Kind::Or);
    CHECK(f.kind() != Formula::Kind::Iff);
    CHECK(f.kind() != Formula::Kind::Exists);
    CHECK(f.kind() != Formula::Kind::Neq);
    for (const auto& k : f.kids()) scan(k);
  };
  scan(out);
}

TEST_CASE("translation agrees with the semantics on the random corpus") {
  CorpusGen gen;
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    CorpusItem item = gen.next();
    CAPTURE(i);
    CAPTURE(to_string(item.formula));

    RewriteTrace trace;
    Formula out = translate(item.formula, {}, &trace);
    CHECK(is_static(out));
    for (const auto& s : trace.steps) CHECK(s.before > s.after);

    bool direct = satisfies(item.state, item.formula);
    bool reduced = satisfies(item.state, out);
    CHECK(direct == reduced);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("composition agrees with sequential update on the random corpus") {
  CorpusGen gen;
  for (int i = 0; i < 100; ++i) {
    CompositionItem item = gen.next_composition();
    CAPTURE(i);
    Formula nested = f_dyn(item.first, item.first_event,
                           f_dyn(item.second, item.second_event, item.body));
    PointedAction comp = compose({item.first, item.first_event},
                                 {item.second, item.second_event});
    Formula fused = f_dyn(comp.action, comp.event, item.body);
    CHECK(satisfies(item.state, nested) == satisfies(item.state, fused));
  }
}

TEST_CASE("check_equivalence reports disagreements") {
  CorpusGen gen;
  Signature sig;  // filled by the generator's model builder
  std::vector<ModelPtr> corpus;
  for (int i = 0; i < 5; ++i) corpus.push_back(gen.next_model(sig, 2, 1).model);

  Formula q = f_atom("q", {});
  EquivalenceReport same = check_equivalence(q, f_not(f_not(q)), corpus);
  CHECK(!same.disagree);
  CHECK(same.checks > 0);

  EquivalenceReport diff = check_equivalence(q, f_not(q), corpus);
  CHECK(diff.disagree);
  CHECK(!diff.detail.empty());
}

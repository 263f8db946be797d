#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "termplan/dynamics.hpp"
#include "termplan/syntax.hpp"

using namespace termplan;

namespace {

Signature small_sig() {
  Signature sig;
  sig.add_constant("a", Sort::Agt);
  sig.add_constant("b", Sort::Agt);
  sig.add_constant("o", Sort::Obj);
  sig.add_relation("p", {ArgSort::Obj});
  sig.add_relation("r", {ArgSort::Agt, ArgSort::Obj});
  sig.add_relation("q", {});
  sig.add_relation("m", {ArgSort::Any});
  return sig;
}

ActionPtr skip_action() {
  return ActionModel::create("skip", {"e"}, {f_top()}, {PostMap{}},
                             {{f_eq(Term::var(kStarVar, Sort::Agt),
                                    Term::var(kStarVar, Sort::Agt))}});
}

}  // namespace

TEST_CASE("signature basics") {
  Signature sig = small_sig();
  CHECK(sig.constant_sort("a") == Sort::Agt);
  CHECK(sig.constant_sort("o") == Sort::Obj);
  CHECK(!sig.constant_sort("zzz").has_value());
  REQUIRE(sig.relation_type("r") != nullptr);
  CHECK(sig.relation_type("r")->size() == 2);
  CHECK(sig.relation_type("nope") == nullptr);
  CHECK(sig.has_symbol("p"));
  CHECK(sig.has_symbol("a"));
  CHECK(!sig.has_symbol("zzz"));

  // equality is built in and sort-agnostic
  REQUIRE(sig.relation_type("=") != nullptr);
  CHECK(*sig.relation_type("=") ==
        std::vector<ArgSort>{ArgSort::Any, ArgSort::Any});

  // declaration order of constants is preserved
  REQUIRE(sig.constants.size() == 3);
  CHECK(sig.constants[0].first == "a");
  CHECK(sig.constants[2].first == "o");
}

TEST_CASE("admits") {
  CHECK(admits(ArgSort::Agt, Sort::Agt));
  CHECK(!admits(ArgSort::Agt, Sort::Obj));
  CHECK(admits(ArgSort::Obj, Sort::Obj));
  CHECK(!admits(ArgSort::Obj, Sort::Agt));
  CHECK(admits(ArgSort::Any, Sort::Agt));
  CHECK(admits(ArgSort::Any, Sort::Obj));
}

TEST_CASE("fresh names") {
  CHECK(fresh_name("x", {}) == "x'");
  CHECK(fresh_name("x", {"x'"}) == "x''");
  CHECK(fresh_name("x", {"x'", "x''"}) == "x'''");
}

TEST_CASE("terms") {
  Term x = Term::var("x", Sort::Obj);
  Term x2 = Term::var("x", Sort::Obj);
  Term y = Term::var("y", Sort::Obj);
  Term c = Term::constant("c", Sort::Obj);
  CHECK(x == x2);
  CHECK(x != y);
  CHECK(x != c);
  CHECK(x.hash() == x2.hash());

  CHECK(to_string(x) == "?x");
  CHECK(to_string(c) == "c");

  CHECK(!is_ground(x));
  CHECK(is_ground(c));
  CHECK(is_free_term(x));
  CHECK(!is_free_term(c));

  std::map<std::string, Sort> vars;
  collect_vars(x, vars);
  collect_vars(c, vars);
  CHECK(vars.size() == 1);
  CHECK(vars.at("x") == Sort::Obj);

  Signature sig = small_sig();
  CHECK(Term::constant("a", sig).sort() == Sort::Agt);
  CHECK_THROWS_AS(Term::constant("zzz", sig), UnknownSymbolError);
}

TEST_CASE("term ordering is strict and total on distinct terms") {
  Term x = Term::var("x", Sort::Obj);
  Term y = Term::var("y", Sort::Obj);
  Term c = Term::constant("c", Sort::Obj);
  CHECK(!(x < x));
  CHECK((x < y) != (y < x));
  CHECK((x < c) != (c < x));
}

TEST_CASE("connective builders") {
  Formula p = f_atom("q", {});
  Formula top = f_top();

  // a single operand collapses
  CHECK(f_and({p}) == p);
  CHECK(f_or({p}) == p);
  CHECK_THROWS_AS(f_and({}), Error);
  CHECK_THROWS_AS(f_or({}), Error);

  Formula conj = f_and({p, top, p});
  CHECK(conj.kind() == Formula::Kind::And);
  CHECK(conj.kids().size() == 3);

  CHECK(f_implies(p, top).kind() == Formula::Kind::Implies);
  CHECK(f_not(p).kid() == p);
}

TEST_CASE("binder restrictions") {
  Formula p = f_atom("q", {});
  Term c = Term::constant("c", Sort::Obj);
  CHECK_THROWS_AS(f_forall(c, p), Error);
  CHECK_THROWS_AS(f_forall(Term::var(kStarVar, Sort::Agt), p), Error);
  CHECK_THROWS_AS(f_exists(Term::var(kStarVar, Sort::Obj), p), Error);
}

TEST_CASE("formula printing") {
  Term a = Term::constant("a", Sort::Agt);
  Term o = Term::constant("o", Sort::Obj);
  Term x = Term::var("x", Sort::Obj);
  CHECK(to_string(f_atom("p", {o})) == "(p o)");
  CHECK(to_string(f_eq(a, a)) == "(= a a)");
  CHECK(to_string(f_knows(a, f_atom("q", {}))) == "(knows (a) (q))");
  CHECK(to_string(f_forall(x, f_atom("p", {x}))) ==
        "(forall (?x - obj) (p ?x))");
  CHECK(to_string(f_and({f_top(), f_bottom()})) == "(and true false)");
}

TEST_CASE("structural sharing and equality of formulas") {
  Formula p = f_atom("p", {Term::constant("o", Sort::Obj)});
  Formula q1 = f_and({p, f_top()});
  Formula q2 = f_and({p, f_top()});
  CHECK(q1 == q2);
  CHECK(q1.hash() == q2.hash());
  CHECK(q1 != f_and({f_top(), p}));
}

TEST_CASE("sort_of validates terms") {
  Signature sig = small_sig();
  CHECK(sort_of(Term::constant("a", Sort::Agt), sig) == Sort::Agt);
  CHECK(sort_of(Term::var("x", Sort::Obj), sig) == Sort::Obj);
  CHECK_THROWS_AS(sort_of(Term::constant("zzz", Sort::Obj), sig),
                  UnknownSymbolError);
}

TEST_CASE("well_formed collects all violations with positions") {
  Signature sig = small_sig();
  Term a = Term::constant("a", Sort::Agt);
  Term o = Term::constant("o", Sort::Obj);

  CHECK(well_formed(f_atom("r", {a, o}), sig).ok());

  // wrong arity and wrong sort, in one formula
  Formula bad = f_and({f_atom("p", {o, o}), f_atom("p", {a})});
  Report rep = well_formed(bad, sig);
  CHECK(!rep.ok());
  CHECK(rep.items.size() == 2);

  // unknown relation
  CHECK(!well_formed(f_atom("nope", {}), sig).ok());

  // knowledge index must be agent-sorted
  CHECK(!well_formed(f_knows(o, f_top()), sig).ok());
  CHECK(well_formed(f_knows(a, f_top()), sig).ok());
}

TEST_CASE("free variables") {
  Term x = Term::var("x", Sort::Obj);
  Term y = Term::var("y", Sort::Agt);
  Formula px = f_atom("p", {x});

  CHECK(free_vars(px).count("x") == 1);
  CHECK(free_vars(f_forall(x, px)).empty());
  CHECK(free_vars(f_exists(x, f_atom("r", {y, x}))).count("y") == 1);

  // the knowledge index contributes its variables
  auto fv = free_vars(f_knows(y, f_top()));
  CHECK(fv.size() == 1);
  CHECK(fv.at("y") == Sort::Agt);

  // dynamic modalities contribute only their body
  Formula dyn = f_dyn(skip_action(), "e", px);
  CHECK(free_vars(dyn).size() == 1);
}

TEST_CASE("substitution") {
  Term x = Term::var("x", Sort::Obj);
  Term y = Term::var("y", Sort::Obj);
  Term c = Term::constant("c", Sort::Obj);
  Formula px = f_atom("p", {x});

  CHECK(substitute(px, "x", c) == f_atom("p", {c}));
  CHECK(substitute(f_forall(x, px), "x", c) == f_forall(x, px));

  // sort clash is rejected
  CHECK_THROWS_AS(substitute(px, "x", Term::constant("a", Sort::Agt)),
                  SortMismatchError);

  // capture avoidance: substituting x for y under a binder on x renames it
  Formula inner = f_forall(x, f_atom("r2", {x, y}));
  Formula subbed = substitute(inner, "y", x);
  CHECK(subbed.kind() == Formula::Kind::Forall);
  CHECK(subbed.var().name() == "x'");
  CHECK(subbed.kid() == f_atom("r2", {Term::var("x'", Sort::Obj), x}));
}

TEST_CASE("classification") {
  Term x = Term::var("x", Sort::Obj);
  Term c = Term::constant("c", Sort::Obj);
  Formula ga = f_atom("p", {c});
  Formula fa = f_atom("p", {x});

  Classification cl = classify(ga);
  CHECK(cl.is_sentence);
  CHECK(cl.is_ground_atom);
  CHECK(!cl.is_free_atom);
  CHECK(cl.is_static);

  cl = classify(fa);
  CHECK(!cl.is_sentence);
  CHECK(!cl.is_ground_atom);
  CHECK(cl.is_free_atom);

  CHECK(is_static(ga));
  CHECK(!is_static(f_dyn(skip_action(), "e", ga)));
  CHECK(!classify(f_dyn(skip_action(), "e", ga)).is_static);
}

TEST_CASE("normalization hits the reduction basis") {
  Term x = Term::var("x", Sort::Obj);
  Term c = Term::constant("c", Sort::Obj);
  Formula p = f_atom("p", {c});
  Formula q = f_atom("q", {});

  CHECK(normalize(f_or({p, q})) == f_not(f_and({f_not(p), f_not(q)})));
  CHECK(normalize(f_iff(p, q)) ==
        f_and({f_implies(p, q), f_implies(q, p)}));
  CHECK(normalize(f_neq(c, c)) == f_not(f_eq(c, c)));
  CHECK(normalize(f_exists(x, f_atom("p", {x}))) ==
        f_not(f_forall(x, f_not(f_atom("p", {x})))));

  // normalization recurses below every operator, including Dyn
  Formula deep = f_dyn(skip_action(), "e", f_or({p, q}));
  Formula norm = normalize(deep);
  CHECK(norm.kind() == Formula::Kind::Dyn);
  CHECK(norm.kid().kind() == Formula::Kind::Not);

  // already-normal formulas are preserved
  Formula basis = f_implies(f_knows(Term::constant("a", Sort::Agt), p),
                            f_forall(x, f_atom("p", {x})));
  CHECK(normalize(basis) == basis);
}

TEST_CASE("action equality ignores the label") {
  ActionPtr a = skip_action();
  ActionPtr b = ActionModel::create("other", {"e"}, {f_top()}, {PostMap{}},
                                    {{f_eq(Term::var(kStarVar, Sort::Agt),
                                           Term::var(kStarVar, Sort::Agt))}});
  CHECK(action_equal(*a, *b));
  Formula body = f_atom("q", {});
  CHECK(f_dyn(a, "e", body) == f_dyn(b, "e", body));
}

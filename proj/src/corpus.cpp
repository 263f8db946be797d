#include "termplan/corpus.hpp"

#include <cstdlib>
#include <string>
#include <vector>

namespace termplan {

uint64_t corpus_seed(uint64_t fallback) {
  const char* env = std::getenv("TERMPLAN_SEED");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (end && *end == '\0') return static_cast<uint64_t>(v);
  return fallback;
}

CorpusGen::CorpusGen(const CorpusConfig& cfg)
    : cfg_(cfg), rng_(corpus_seed(cfg.seed)) {}

namespace {

// Relations p, r, and q may appear in postcondition keys; those keys and
// every generated atom over them use only the a*/o* constants, which every
// corpus model interprets rigidly and injectively. Relation m and equality
// are never rewritten and may mention anything, including the non-rigid
// constants b1 and c1. This keeps the syntactic postcondition lookup of the
// translation in agreement with evaluation.
struct Shape {
  int agents = 1;
  int objects = 1;
};

struct Rng {
  std::mt19937_64& g;
  int ri(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(g);
  }
  bool coin(double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(g) < p;
  }
};

Signature make_sig(const Shape& sh) {
  Signature sig;
  for (int i = 1; i <= sh.agents; ++i)
    sig.add_constant("a" + std::to_string(i), Sort::Agt);
  for (int j = 1; j <= sh.objects; ++j)
    sig.add_constant("o" + std::to_string(j), Sort::Obj);
  sig.add_constant("b1", Sort::Agt);
  sig.add_constant("c1", Sort::Obj);
  sig.add_relation("p", {ArgSort::Obj});
  sig.add_relation("r", {ArgSort::Agt, ArgSort::Obj});
  sig.add_relation("q", {});
  sig.add_relation("m", {ArgSort::Any});
  return sig;
}

Term rigid_agent(Rng& rng, const Shape& sh) {
  return Term::constant("a" + std::to_string(rng.ri(1, sh.agents)), Sort::Agt);
}

Term rigid_object(Rng& rng, const Shape& sh) {
  return Term::constant("o" + std::to_string(rng.ri(1, sh.objects)),
                        Sort::Obj);
}

// Any term of the given sort: a bound variable when available, sometimes a
// non-rigid constant, otherwise a rigid one.
Term any_term(Rng& rng, const Shape& sh, const std::vector<Term>& bound,
              Sort s) {
  std::vector<const Term*> vars;
  for (const Term& v : bound)
    if (v.sort() == s) vars.push_back(&v);
  if (!vars.empty() && rng.coin(0.45))
    return *vars[rng.ri(0, static_cast<int>(vars.size()) - 1)];
  if (rng.coin(0.25))
    return s == Sort::Agt ? Term::constant("b1", Sort::Agt)
                          : Term::constant("c1", Sort::Obj);
  return s == Sort::Agt ? rigid_agent(rng, sh) : rigid_object(rng, sh);
}

Formula touched_atom(Rng& rng, const Shape& sh) {
  switch (rng.ri(0, 2)) {
    case 0:
      return f_atom("p", {rigid_object(rng, sh)});
    case 1:
      return f_atom("r", {rigid_agent(rng, sh), rigid_object(rng, sh)});
    default:
      return f_atom("q", {});
  }
}

Formula leaf(Rng& rng, const Shape& sh, const std::vector<Term>& bound) {
  switch (rng.ri(0, 9)) {
    case 0:
    case 1:
    case 2:
      return touched_atom(rng, sh);
    case 3:
    case 4: {
      Sort s = rng.coin(0.5) ? Sort::Agt : Sort::Obj;
      return f_atom("m", {any_term(rng, sh, bound, s)});
    }
    case 5:
    case 6: {
      Sort s1 = rng.coin(0.5) ? Sort::Agt : Sort::Obj;
      Sort s2 = rng.coin(0.85) ? s1 : (s1 == Sort::Agt ? Sort::Obj : Sort::Agt);
      Term a = any_term(rng, sh, bound, s1);
      Term b = any_term(rng, sh, bound, s2);
      return rng.coin(0.75) ? f_eq(a, b) : f_neq(a, b);
    }
    case 7:
      return f_top();
    case 8:
      return f_bottom();
    default:
      return f_atom("q", {});
  }
}

Term knows_index(Rng& rng, const Shape& sh, const std::vector<Term>& bound) {
  std::vector<const Term*> vars;
  for (const Term& v : bound)
    if (v.sort() == Sort::Agt) vars.push_back(&v);
  if (!vars.empty() && rng.coin(0.35))
    return *vars[rng.ri(0, static_cast<int>(vars.size()) - 1)];
  if (rng.coin(0.2)) return Term::constant("b1", Sort::Agt);
  return rigid_agent(rng, sh);
}

ActionPtr gen_action(Rng& rng, const Shape& sh, int& action_counter);

Formula gen_formula(Rng& rng, const Shape& sh, int depth, int dyn_left,
                    std::vector<Term>& bound, int& var_counter,
                    int& action_counter) {
  if (depth <= 0 || rng.coin(0.18)) return leaf(rng, sh, bound);
  int pick = rng.ri(0, 99);
  if (pick < 14)
    return f_not(gen_formula(rng, sh, depth - 1, dyn_left, bound, var_counter,
                             action_counter));
  if (pick < 34) {
    int n = rng.ri(2, 3);
    std::vector<Formula> kids;
    for (int i = 0; i < n; ++i)
      kids.push_back(gen_formula(rng, sh, depth - 1, dyn_left, bound,
                                 var_counter, action_counter));
    return rng.coin(0.5) ? f_and(std::move(kids)) : f_or(std::move(kids));
  }
  if (pick < 46) {
    Formula a = gen_formula(rng, sh, depth - 1, dyn_left, bound, var_counter,
                            action_counter);
    Formula b = gen_formula(rng, sh, depth - 1, dyn_left, bound, var_counter,
                            action_counter);
    return rng.coin(0.6) ? f_implies(a, b) : f_iff(a, b);
  }
  if (pick < 62) {
    Term t = knows_index(rng, sh, bound);
    return f_knows(t, gen_formula(rng, sh, depth - 1, dyn_left, bound,
                                  var_counter, action_counter));
  }
  if (pick < 80 || dyn_left <= 0) {
    Sort s = rng.coin(0.5) ? Sort::Agt : Sort::Obj;
    Term x = Term::var("x" + std::to_string(++var_counter), s);
    bound.push_back(x);
    Formula body = gen_formula(rng, sh, depth - 1, dyn_left, bound,
                               var_counter, action_counter);
    bound.pop_back();
    return rng.coin(0.5) ? f_forall(x, body) : f_exists(x, body);
  }
  ActionPtr a = gen_action(rng, sh, action_counter);
  const std::string& e =
      a->events[rng.ri(0, static_cast<int>(a->events.size()) - 1)];
  return f_dyn(a, e, gen_formula(rng, sh, depth - 1, dyn_left - 1, bound,
                                 var_counter, action_counter));
}

// A closed static formula for preconditions and postcondition values.
Formula gen_condition(Rng& rng, const Shape& sh, int depth) {
  std::vector<Term> bound;
  int vc = 0, ac = 0;
  Formula f = gen_formula(rng, sh, depth, /*dyn_left=*/0, bound, vc, ac);
  return f;
}

Formula edge_condition(Rng& rng, const Shape& sh, bool diagonal) {
  Term star = Term::var(kStarVar, Sort::Agt);
  int pick = rng.ri(0, 99);
  if (pick < 35) return f_top();
  if (pick < 60) return f_eq(star, rigid_agent(rng, sh));
  if (pick < 75) return f_not(f_eq(star, rigid_agent(rng, sh)));
  if (pick < 90) return f_atom("m", {star});
  return diagonal ? f_top() : f_bottom();
}

ActionPtr gen_action(Rng& rng, const Shape& sh, int& action_counter) {
  int ne = rng.ri(1, 2);
  std::vector<std::string> events;
  for (int i = 1; i <= ne; ++i) events.push_back("e" + std::to_string(i));
  std::vector<Formula> pres;
  std::vector<PostMap> posts;
  for (int i = 0; i < ne; ++i) {
    pres.push_back(rng.coin(0.25) ? f_top() : gen_condition(rng, sh, 1));
    PostMap pm;
    if (rng.coin(0.5)) {
      int entries = rng.ri(1, 2);
      std::vector<std::string> seen;
      for (int k = 0; k < entries; ++k) {
        Formula key = touched_atom(rng, sh);
        std::string printed = to_string(key);
        bool dup = false;
        for (const std::string& s : seen) dup = dup || s == printed;
        if (dup) continue;
        seen.push_back(printed);
        pm.entries.emplace_back(key, gen_condition(rng, sh, 1));
      }
    }
    posts.push_back(std::move(pm));
  }
  std::vector<std::vector<Formula>> edges(ne, std::vector<Formula>(ne));
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < ne; ++j) edges[i][j] = edge_condition(rng, sh, i == j);
  std::string label = "G" + std::to_string(++action_counter);
  return ActionModel::create(std::move(label), std::move(events),
                             std::move(pres), std::move(posts),
                             std::move(edges));
}

}  // namespace

PointedModel CorpusGen::next_model(const Signature& sig, int agents,
                                   int objects) {
  Rng rng{rng_};
  auto dom = std::make_shared<Domain>();
  for (int i = 1; i <= agents; ++i)
    dom->agents.push_back("A" + std::to_string(i));
  for (int j = 1; j <= objects; ++j)
    dom->objects.push_back("O" + std::to_string(j));

  auto m = std::make_shared<Model>();
  m->domain = dom;
  int nw = rng.ri(1, cfg_.max_worlds);
  for (int w = 0; w < nw; ++w) {
    World world;
    world.name = "w" + std::to_string(w);
    for (const auto& [name, sort] : sig.constants) {
      Elem e = 0;
      if (name[0] == 'a')
        e = std::stoi(name.substr(1)) - 1;
      else if (name[0] == 'o')
        e = agents + std::stoi(name.substr(1)) - 1;
      else if (sort == Sort::Agt)
        e = rng.ri(0, agents - 1);
      else
        e = agents + rng.ri(0, objects - 1);
      world.consts[name] = e;
    }
    for (const auto& [rel, slots] : sig.relations) {
      if (rel == "=") continue;
      std::vector<std::vector<Elem>> pools;
      for (ArgSort s : slots) {
        std::vector<Elem> pool;
        if (s != ArgSort::Obj)
          for (int i = 0; i < agents; ++i) pool.push_back(i);
        if (s != ArgSort::Agt)
          for (int j = 0; j < objects; ++j) pool.push_back(agents + j);
        pools.push_back(std::move(pool));
      }
      std::vector<size_t> idx(slots.size(), 0);
      while (true) {
        std::vector<Elem> tuple;
        for (size_t k = 0; k < slots.size(); ++k)
          tuple.push_back(pools[k][idx[k]]);
        if (rng.coin(0.4)) world.rels[rel].insert(tuple);
        size_t k = 0;
        for (; k < slots.size(); ++k) {
          if (++idx[k] < pools[k].size()) break;
          idx[k] = 0;
        }
        if (k == slots.size()) break;
      }
    }
    m->worlds.push_back(std::move(world));
  }
  m->init_relations();
  for (int a = 0; a < agents; ++a)
    for (int w1 = 0; w1 < nw; ++w1)
      for (int w2 = 0; w2 < nw; ++w2)
        if (rng.coin(0.5)) m->rel[a].insert({w1, w2});
  return {m, rng.ri(0, nw - 1)};
}

CorpusItem CorpusGen::next() {
  Rng rng{rng_};
  Shape sh{rng.ri(1, cfg_.max_agents), rng.ri(1, cfg_.max_objects)};
  CorpusItem item;
  item.sig = make_sig(sh);
  item.state = next_model(item.sig, sh.agents, sh.objects);
  std::vector<Term> bound;
  int vc = 0, ac = 0;
  int depth = rng.ri(1, cfg_.max_depth);
  item.formula = gen_formula(rng, sh, depth, cfg_.max_dyn, bound, vc, ac);
  if (is_static(item.formula) && rng.coin(0.85)) {
    ActionPtr a = gen_action(rng, sh, ac);
    const std::string& e =
        a->events[rng.ri(0, static_cast<int>(a->events.size()) - 1)];
    item.formula = f_dyn(a, e, item.formula);
  }
  return item;
}

CompositionItem CorpusGen::next_composition() {
  Rng rng{rng_};
  Shape sh{rng.ri(1, cfg_.max_agents), rng.ri(1, cfg_.max_objects)};
  CompositionItem item;
  item.sig = make_sig(sh);
  item.state = next_model(item.sig, sh.agents, sh.objects);
  int ac = 0;
  item.first = gen_action(rng, sh, ac);
  item.second = gen_action(rng, sh, ac);
  item.first_event =
      item.first->events[rng.ri(0, static_cast<int>(item.first->events.size()) - 1)];
  item.second_event = item.second->events[rng.ri(
      0, static_cast<int>(item.second->events.size()) - 1)];
  item.body = gen_condition(rng, sh, rng.ri(1, 2));
  return item;
}

}  // namespace termplan

#include "termplan/reduction.hpp"

#include <algorithm>

namespace termplan {

uint64_t complexity(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
    case K::Top:
    case K::Bottom:
      return 1;
    case K::Neq:
      return 2;
    case K::Not:
    case K::Knows:
    case K::Forall:
    case K::Exists:
      return 1 + complexity(f.kid());
    case K::And:
    case K::Or:
    case K::Implies: {
      uint64_t m = 0;
      for (const auto& k : f.kids()) m = std::max(m, complexity(k));
      return 1 + m;
    }
    case K::Iff:
      return 2 + std::max(complexity(f.kid(0)), complexity(f.kid(1)));
    default:  // Dyn
      return (4 + complexity(*f.action())) * complexity(f.kid());
  }
}

uint64_t complexity(const ActionModel& a) {
  uint64_t m = 1;
  for (const auto& p : a.pres) m = std::max(m, complexity(p));
  for (const auto& pm : a.posts)
    for (const auto& [atom, v] : pm.entries) {
      (void)atom;
      m = std::max(m, complexity(v));
    }
  for (const auto& row : a.edges)
    for (const auto& q : row) m = std::max(m, complexity(q));
  return m;
}

// ---------------------------------------------------------------------------
// Redex selection

namespace {

// A redex is a Dyn node that either wraps another Dyn directly (composition)
// or has a fully static body and is not itself directly wrapped (the wrapped
// case belongs to its parent's composition redex).
bool find_redex(const Formula& f, bool parent_is_dyn, std::string path,
                std::string& out) {
  if (f.kind() == Formula::Kind::Dyn) {
    std::string inner_path = path.empty() ? "0" : path + ".0";
    if (find_redex(f.kid(), true, inner_path, out)) return true;
    if (f.kid().kind() == Formula::Kind::Dyn || !parent_is_dyn) {
      out = path;
      return true;
    }
    return false;
  }
  for (size_t i = 0; i < f.kids().size(); ++i) {
    std::string p = path.empty() ? std::to_string(i)
                                 : path + "." + std::to_string(i);
    if (find_redex(f.kids()[i], false, p, out)) return true;
  }
  return false;
}

std::set<std::string> action_free_vars(const ActionModel& a) {
  std::set<std::string> out;
  auto grab = [&](const Formula& f) {
    for (const auto& [n, s] : free_vars(f)) {
      (void)s;
      out.insert(n);
    }
  };
  for (const auto& p : a.pres) grab(p);
  for (const auto& pm : a.posts)
    for (const auto& [atom, v] : pm.entries) {
      grab(atom);
      grab(v);
    }
  for (const auto& row : a.edges)
    for (const auto& q : row) grab(q);
  return out;
}

Formula rewrite_redex(const Formula& d, const ReduceOptions& opts,
                      std::string& axiom) {
  using K = Formula::Kind;
  const ActionPtr& a = d.action();
  const std::string& e = d.event();
  int ei = a->event_index(e);
  const Formula& pre = a->pres[ei];
  const Formula& body = d.kid();

  switch (body.kind()) {
    case K::Atom: {
      axiom = "atom";
      const Formula* v = a->posts[ei].find(body);
      return f_implies(pre, v ? *v : body);
    }
    case K::Top:
    case K::Bottom:
      axiom = "atom";
      return f_implies(pre, body);
    case K::Not:
      axiom = "negation";
      return f_implies(pre, f_not(f_dyn(a, e, body.kid())));
    case K::And: {
      axiom = "conjunction";
      std::vector<Formula> ks;
      ks.reserve(body.kids().size());
      for (const auto& k : body.kids()) ks.push_back(f_dyn(a, e, k));
      return f_and(std::move(ks));
    }
    case K::Implies:
      axiom = "implication";
      return f_implies(pre, f_implies(f_dyn(a, e, body.kid(0)),
                                      f_dyn(a, e, body.kid(1))));
    case K::Knows: {
      axiom = "knowledge";
      const Term& t = body.index();
      std::vector<Formula> conjuncts;
      for (size_t j = 0; j < a->events.size(); ++j) {
        Formula guard = substitute(a->edges[ei][j], kStarVar, t);
        conjuncts.push_back(f_implies(
            guard, f_knows(t, f_dyn(a, a->events[j], body.kid()))));
      }
      Formula conj = f_and(std::move(conjuncts));
      if (opts.knowledge == KnowledgeRow::Guarded) return f_implies(pre, conj);
      return conj;
    }
    case K::Forall: {
      axiom = "quantification";
      Term x = body.var();
      Formula inner = body.kid();
      std::set<std::string> avoid = action_free_vars(*a);
      if (avoid.count(x.name())) {
        for (const auto& [n, s] : free_vars(body)) {
          (void)s;
          avoid.insert(n);
        }
        Term x2 = Term::var(fresh_name(x.name(), avoid), x.sort());
        inner = substitute(inner, x.name(), x2);
        x = x2;
      }
      return f_forall(x, f_dyn(a, e, inner));
    }
    case K::Dyn: {
      axiom = "composition";
      PointedAction c = compose({a, e}, {body.action(), body.event()});
      return f_dyn(c.action, c.event, body.kid());
    }
    default:
      throw Error("unexpected connective in reduction basis");
  }
}

Formula replace_at(const Formula& f, const std::string& path, size_t pos,
                   const Formula& repl) {
  if (pos >= path.size()) return repl;
  size_t dot = path.find('.', pos);
  size_t idx = std::stoul(path.substr(pos, dot - pos));
  size_t next = dot == std::string::npos ? path.size() : dot + 1;
  using K = Formula::Kind;
  std::vector<Formula> ks = f.kids();
  ks[idx] = replace_at(ks[idx], path, next, repl);
  switch (f.kind()) {
    case K::Not: return f_not(ks[0]);
    case K::And: return f_and(std::move(ks));
    case K::Or: return f_or(std::move(ks));
    case K::Implies: return f_implies(ks[0], ks[1]);
    case K::Iff: return f_iff(ks[0], ks[1]);
    case K::Knows: return f_knows(f.index(), ks[0]);
    case K::Forall: return f_forall(f.var(), ks[0]);
    case K::Exists: return f_exists(f.var(), ks[0]);
    case K::Dyn: return f_dyn(f.action(), f.event(), ks[0]);
    default: throw Error("replacement path through a leaf");
  }
}

const Formula& subformula_at(const Formula& f, const std::string& path,
                             size_t pos) {
  if (pos >= path.size()) return f;
  size_t dot = path.find('.', pos);
  size_t idx = std::stoul(path.substr(pos, dot - pos));
  size_t next = dot == std::string::npos ? path.size() : dot + 1;
  return subformula_at(f.kids()[idx], path, next);
}

}  // namespace

Formula reduce_step(const Formula& f, const ReduceOptions& opts,
                    RewriteStep* step) {
  Formula n = normalize(f);
  std::string path;
  if (!find_redex(n, false, "", path)) throw NoRedexError("formula is static");
  const Formula& redex = subformula_at(n, path, 0);
  std::string axiom;
  Formula repl = rewrite_redex(redex, opts, axiom);
  if (step) {
    step->axiom = axiom;
    step->position = path;
    step->before = complexity(redex);
    step->after = complexity(repl);
  }
  return replace_at(n, path, 0, repl);
}

Formula translate(const Formula& f, const ReduceOptions& opts,
                  RewriteTrace* trace) {
  Formula cur = normalize(f);
  while (!is_static(cur)) {
    RewriteStep step;
    cur = reduce_step(cur, opts, &step);
    if (step.after >= step.before)
      throw Error("complexity failed to decrease at " + step.axiom + " step");
    if (trace) trace->steps.push_back(std::move(step));
  }
  return cur;
}

EquivalenceReport check_equivalence(const Formula& a, const Formula& b,
                                    const std::vector<ModelPtr>& corpus) {
  EquivalenceReport rep;
  std::map<std::string, Sort> vars = free_vars(a);
  for (const auto& [n, s] : free_vars(b)) vars[n] = s;
  for (size_t mi = 0; mi < corpus.size(); ++mi) {
    const Model& m = *corpus[mi];
    for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
      bool stop = false;
      for_each_valuation(*m.domain, vars, [&](const Valuation& v) {
        if (stop || rep.disagree) return;
        bool ra = satisfies(m, w, v, a);
        bool rb = satisfies(m, w, v, b);
        ++rep.checks;
        if (ra != rb) {
          rep.disagree = true;
          rep.detail = "model " + std::to_string(mi) + ", world " +
                       m.worlds[w].name + ": " + (ra ? "left" : "right") +
                       " side true";
          stop = true;
        }
      });
      if (rep.disagree) return rep;
    }
  }
  return rep;
}

}  // namespace termplan

#include "termplan/semantics.hpp"

#include <algorithm>
#include <sstream>

#include "termplan/dynamics.hpp"

namespace termplan {

std::optional<Elem> Domain::find(const std::string& n) const {
  for (int i = 0; i < agent_count(); ++i)
    if (agents[i] == n) return i;
  for (size_t i = 0; i < objects.size(); ++i)
    if (objects[i] == n) return agent_count() + static_cast<int>(i);
  return std::nullopt;
}

std::vector<Elem> Domain::elems(Sort s) const {
  std::vector<Elem> out;
  if (s == Sort::Agt) {
    for (int i = 0; i < agent_count(); ++i) out.push_back(i);
  } else {
    for (int i = agent_count(); i < size(); ++i) out.push_back(i);
  }
  return out;
}

std::optional<int> Model::world_index(const std::string& name) const {
  for (size_t i = 0; i < worlds.size(); ++i)
    if (worlds[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

std::vector<int> Model::successors(Elem agent, int w) const {
  std::vector<int> out;
  for (const auto& [a, b] : rel[agent])
    if (a == w) out.push_back(b);
  return out;
}

// ---------------------------------------------------------------------------
// Extension and satisfaction

std::optional<Elem> extension(const Term& t, const Model& m, int w,
                              const Valuation& v) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = v.find(t.name());
      if (it == v.end())
        throw UnboundVariableError("unbound variable: ?" + t.name());
      return it->second;
    }
    case Term::Kind::Const: {
      auto it = m.worlds[w].consts.find(t.name());
      if (it == m.worlds[w].consts.end()) return std::nullopt;
      return it->second;
    }
    default: {
      std::vector<Elem> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) {
        auto e = extension(a, m, w, v);
        if (!e) return std::nullopt;
        args.push_back(*e);
      }
      auto fit = m.worlds[w].funcs.find(t.name());
      if (fit == m.worlds[w].funcs.end()) return std::nullopt;
      auto vit = fit->second.find(args);
      if (vit == fit->second.end()) return std::nullopt;
      return vit->second;
    }
  }
}

bool satisfies(const Model& m, int w, const Valuation& v, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom: {
      if (f.rel() == "=") {
        auto a = extension(f.terms()[0], m, w, v);
        auto b = extension(f.terms()[1], m, w, v);
        return a && b && *a == *b;
      }
      std::vector<Elem> tuple;
      tuple.reserve(f.terms().size());
      for (const auto& t : f.terms()) {
        auto e = extension(t, m, w, v);
        if (!e) return false;  // undefined-term atoms are false
        tuple.push_back(*e);
      }
      auto it = m.worlds[w].rels.find(f.rel());
      return it != m.worlds[w].rels.end() && it->second.count(tuple) > 0;
    }
    case K::Top: return true;
    case K::Bottom: return false;
    case K::Not: return !satisfies(m, w, v, f.kid());
    case K::And:
      for (const auto& k : f.kids())
        if (!satisfies(m, w, v, k)) return false;
      return true;
    case K::Or:
      for (const auto& k : f.kids())
        if (satisfies(m, w, v, k)) return true;
      return false;
    case K::Implies:
      return !satisfies(m, w, v, f.kid(0)) || satisfies(m, w, v, f.kid(1));
    case K::Iff:
      return satisfies(m, w, v, f.kid(0)) == satisfies(m, w, v, f.kid(1));
    case K::Neq: {
      auto a = extension(f.terms()[0], m, w, v);
      auto b = extension(f.terms()[1], m, w, v);
      return !(a && b && *a == *b);
    }
    case K::Knows: {
      auto idx = extension(f.index(), m, w, v);
      if (!idx)
        throw UndefinedModalIndexError("knowledge index " +
                                       to_string(f.index()) +
                                       " undefined at world " +
                                       m.worlds[w].name);
      if (!m.domain->is_agent(*idx))
        throw SortMismatchError("knowledge index is not an agent");
      for (const auto& [a, b] : m.rel[*idx]) {
        if (a != w) continue;
        if (!satisfies(m, b, v, f.kid())) return false;
      }
      return true;
    }
    case K::Forall: {
      Valuation v2 = v;
      for (Elem d : m.domain->elems(f.var().sort())) {
        v2[f.var().name()] = d;
        if (!satisfies(m, w, v2, f.kid())) return false;
      }
      return true;
    }
    case K::Exists: {
      Valuation v2 = v;
      for (Elem d : m.domain->elems(f.var().sort())) {
        v2[f.var().name()] = d;
        if (satisfies(m, w, v2, f.kid())) return true;
      }
      return false;
    }
    default: {  // Dyn
      const ActionModel& a = *f.action();
      const Formula& pre = a.pre_of(f.event());
      if (!satisfies(m, w, v, pre)) return true;
      std::map<std::pair<int, int>, int> index;
      ModelPtr m2 = product_update(m, a, &index);
      auto w2 = index.find({w, a.event_index(f.event())});
      if (w2 == index.end()) throw Error("updated world lookup failed");
      return satisfies(*m2, w2->second, v, f.kid());
    }
  }
}

bool satisfies(const PointedModel& s, const Formula& f, const Valuation& v) {
  return satisfies(*s.model, s.world, v, f);
}

namespace {

bool all_valuations_satisfy(const Model& m, int w, const Formula& f,
                            const std::vector<std::pair<std::string, Sort>>& vars,
                            size_t i, Valuation& v) {
  if (i == vars.size()) return satisfies(m, w, v, f);
  for (Elem d : m.domain->elems(vars[i].second)) {
    v[vars[i].first] = d;
    if (!all_valuations_satisfy(m, w, f, vars, i + 1, v)) return false;
  }
  v.erase(vars[i].first);
  return true;
}

}  // namespace

bool valid_on_model(const Model& m, const Formula& f) {
  std::vector<std::pair<std::string, Sort>> vars;
  for (const auto& [n, s] : free_vars(f)) vars.push_back({n, s});
  for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
    Valuation v;
    if (!all_valuations_satisfy(m, w, f, vars, 0, v)) return false;
  }
  return true;
}

void for_each_valuation(const Domain& d, const std::map<std::string, Sort>& vars,
                        const std::function<void(const Valuation&)>& fn) {
  std::vector<std::pair<std::string, Sort>> vs(vars.begin(), vars.end());
  Valuation v;
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == vs.size()) {
      fn(v);
      return;
    }
    for (Elem e : d.elems(vs[i].second)) {
      v[vs[i].first] = e;
      rec(i + 1);
    }
    v.erase(vs[i].first);
  };
  rec(0);
}

// ---------------------------------------------------------------------------
// Model validation

namespace {

void collect_ground_apps(const Term& t, std::set<Term>& out) {
  if (t.kind() == Term::Kind::App && is_ground(t)) out.insert(t);
  for (const auto& a : t.args()) collect_ground_apps(a, out);
}

void collect_ground_apps(const Formula& f, std::set<Term>& out) {
  for (const auto& t : f.terms()) collect_ground_apps(t, out);
  if (!f.index().empty()) collect_ground_apps(f.index(), out);
  for (const auto& k : f.kids()) collect_ground_apps(k, out);
}

}  // namespace

Report validate_model(const Model& m, const Signature& sig,
                      const std::vector<Formula>& formulas) {
  Report rep;
  if (!m.domain) {
    rep.add("domain", "missing domain");
    return rep;
  }
  if (m.domain->agents.empty()) rep.add("domain", "no agents");
  if (m.domain->objects.empty()) rep.add("domain", "no objects");
  if (m.worlds.empty()) rep.add("worlds", "no worlds");
  if (m.rel.size() != static_cast<size_t>(m.domain->agent_count()))
    rep.add("relations", "relation table does not cover every agent");

  std::set<std::string> seen;
  for (const auto& w : m.worlds) {
    if (!seen.insert(w.name).second)
      rep.add("worlds", "duplicate world name: " + w.name);
  }

  int n = static_cast<int>(m.worlds.size());
  for (size_t a = 0; a < m.rel.size(); ++a) {
    for (const auto& [x, y] : m.rel[a]) {
      if (x < 0 || x >= n || y < 0 || y >= n)
        rep.add("relations", "edge out of range for agent " +
                                 m.domain->agents[a]);
    }
  }

  for (const auto& w : m.worlds) {
    const std::string where = "world " + w.name;
    for (const auto& [c, declared] : sig.constants) {
      auto it = w.consts.find(c);
      if (it == w.consts.end()) {
        rep.add(where, "constant " + c + " undefined");
        continue;
      }
      if (it->second < 0 || it->second >= m.domain->size()) {
        rep.add(where, "constant " + c + " maps outside the domain");
        continue;
      }
      if (m.domain->sort_of(it->second) != declared)
        rep.add(where, "constant " + c + " violates its sort");
    }
    for (const auto& [c, e] : w.consts) {
      if (!sig.constant_sort(c)) rep.add(where, "undeclared constant " + c);
      (void)e;
    }
    for (const auto& [r, tuples] : w.rels) {
      if (r == "=") {
        rep.add(where, "equality must not be stored explicitly");
        continue;
      }
      const auto* rt = sig.relation_type(r);
      if (!rt) {
        rep.add(where, "undeclared relation " + r);
        continue;
      }
      for (const auto& tup : tuples) {
        if (tup.size() != rt->size()) {
          rep.add(where, "relation " + r + " tuple arity mismatch");
          continue;
        }
        for (size_t i = 0; i < tup.size(); ++i) {
          if (tup[i] < 0 || tup[i] >= m.domain->size()) {
            rep.add(where, "relation " + r + " tuple outside the domain");
          } else if (!admits((*rt)[i], m.domain->sort_of(tup[i]))) {
            rep.add(where, "relation " + r + " argument " + std::to_string(i) +
                               " violates its sort");
          }
        }
      }
    }
    for (const auto& [fn, table] : w.funcs) {
      const FuncType* ft = sig.function_type(fn);
      if (!ft) {
        rep.add(where, "undeclared function " + fn);
        continue;
      }
      for (const auto& [args, res] : table) {
        if (args.size() != ft->args.size()) {
          rep.add(where, "function " + fn + " arity mismatch");
          continue;
        }
        bool ok = true;
        for (size_t i = 0; i < args.size(); ++i) {
          if (args[i] < 0 || args[i] >= m.domain->size() ||
              !admits(ft->args[i], m.domain->sort_of(args[i]))) {
            rep.add(where, "function " + fn + " argument " + std::to_string(i) +
                               " violates its sort");
            ok = false;
          }
        }
        if (ok && (res < 0 || res >= m.domain->size() ||
                   m.domain->sort_of(res) != ft->result))
          rep.add(where, "function " + fn + " result violates its sort");
      }
    }
  }

  std::set<Term> apps;
  for (const auto& f : formulas) collect_ground_apps(f, apps);
  for (const auto& t : apps) {
    for (int w = 0; w < n; ++w) {
      try {
        if (!extension(t, m, w, {}))
          rep.add("world " + m.worlds[w].name,
                  "ground term " + to_string(t) + " undefined");
      } catch (const Error&) {
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Canonical labeling (worlds only; domain elements are fixed)

namespace {

std::string world_fingerprint(const World& w) {
  std::ostringstream os;
  os << "C{";
  for (const auto& [c, e] : w.consts) os << c << ":" << e << ";";
  os << "}R{";
  for (const auto& [r, tuples] : w.rels) {
    os << r << ":";
    for (const auto& tup : tuples) {
      os << "(";
      for (Elem e : tup) os << e << ",";
      os << ")";
    }
    os << ";";
  }
  os << "}F{";
  for (const auto& [fn, table] : w.funcs) {
    os << fn << ":";
    for (const auto& [args, res] : table) {
      os << "(";
      for (Elem e : args) os << e << ",";
      os << ")->" << res << ";";
    }
  }
  os << "}";
  return os.str();
}

struct Canon {
  const Model& m;
  int n, na;
  std::vector<std::string> fp;
  std::vector<int> color;
  std::vector<int> perm;
  std::vector<bool> used;
  std::vector<std::string> cur, best;

  Canon(const Model& model, int point)
      : m(model),
        n(static_cast<int>(model.worlds.size())),
        na(model.domain->agent_count()) {
    fp.resize(n);
    for (int i = 0; i < n; ++i) {
      fp[i] = world_fingerprint(m.worlds[i]);
      if (i == point) fp[i] += "#pt";
    }
    refine();
  }

  void refine() {
    std::map<std::string, int> ids;
    color.resize(n);
    for (int i = 0; i < n; ++i) {
      auto [it, _] = ids.insert({fp[i], static_cast<int>(ids.size())});
      color[i] = it->second;
    }
    for (int round = 0; round < n; ++round) {
      std::vector<std::string> sig(n);
      for (int i = 0; i < n; ++i) {
        std::ostringstream os;
        os << color[i];
        for (int a = 0; a < na; ++a) {
          std::vector<int> out, in;
          for (const auto& [x, y] : m.rel[a]) {
            if (x == i) out.push_back(color[y]);
            if (y == i) in.push_back(color[x]);
          }
          std::sort(out.begin(), out.end());
          std::sort(in.begin(), in.end());
          os << "|" << a << ">";
          for (int c : out) os << c << ",";
          os << "<";
          for (int c : in) os << c << ",";
        }
        sig[i] = os.str();
      }
      std::map<std::string, int> next;
      std::vector<int> nc(n);
      for (int i = 0; i < n; ++i) {
        auto [it, _] = next.insert({sig[i], static_cast<int>(next.size())});
        nc[i] = it->second;
      }
      if (nc == color) break;
      color = nc;
    }
  }

  // Chunk emitted when world w is placed at position i: its fingerprint plus
  // all edges between position i and positions 0..i.
  std::string chunk(int w, int i) const {
    std::ostringstream os;
    os << "[" << fp[w] << "]";
    for (int a = 0; a < na; ++a) {
      os << "|" << a << ":";
      for (int j = 0; j <= i; ++j) {
        int u = (j == i) ? w : perm[j];
        os << (m.rel[a].count({u, w}) ? "1" : "0");
        os << (m.rel[a].count({w, u}) ? "1" : "0");
      }
    }
    return os.str();
  }

  void dfs(int i) {
    if (i == n) {
      if (best.empty() || cur < best) best = cur;
      return;
    }
    if (!best.empty() && cur > std::vector<std::string>(best.begin(),
                                                        best.begin() + i))
      return;
    std::vector<std::pair<std::pair<int, std::string>, int>> cands;
    for (int w = 0; w < n; ++w)
      if (!used[w]) cands.push_back({{color[w], fp[w]}, w});
    std::sort(cands.begin(), cands.end());
    for (const auto& [_, w] : cands) {
      std::string c = chunk(w, i);
      if (!best.empty() && i < static_cast<int>(best.size())) {
        std::vector<std::string> pref(cur);
        pref.push_back(c);
        std::vector<std::string> bpref(best.begin(), best.begin() + i + 1);
        if (pref > bpref) continue;
      }
      used[w] = true;
      perm.push_back(w);
      cur.push_back(c);
      dfs(i + 1);
      cur.pop_back();
      perm.pop_back();
      used[w] = false;
    }
  }

  std::string run() {
    used.assign(n, false);
    dfs(0);
    std::ostringstream os;
    for (const auto& c : best) os << c << "\n";
    return os.str();
  }
};

}  // namespace

std::string canonical_key(const Model& m, int point) {
  std::ostringstream os;
  os << "A{";
  for (const auto& a : m.domain->agents) os << a << ",";
  os << "}O{";
  for (const auto& o : m.domain->objects) os << o << ",";
  os << "}\n";
  Canon c(m, point);
  os << c.run();
  return os.str();
}

bool is_isomorphic(const Model& a, const Model& b, int point_a, int point_b) {
  if (a.domain->agents != b.domain->agents ||
      a.domain->objects != b.domain->objects)
    return false;
  if (a.worlds.size() != b.worlds.size()) return false;
  return canonical_key(a, point_a) == canonical_key(b, point_b);
}

}  // namespace termplan

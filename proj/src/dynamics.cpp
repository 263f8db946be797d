#include "termplan/dynamics.hpp"

#include <algorithm>
#include <sstream>

namespace termplan {

namespace {

size_t mix(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

bool is_diagonal_top(const Formula& atom, const Formula& value) {
  return atom.kind() == Formula::Kind::Atom && atom.rel() == "=" &&
         atom.terms().size() == 2 && atom.terms()[0] == atom.terms()[1] &&
         value.kind() == Formula::Kind::Top;
}

}  // namespace

const Formula* PostMap::find(const Formula& atom) const {
  for (const auto& [a, v] : entries)
    if (a == atom) return &v;
  return nullptr;
}

ActionPtr ActionModel::create(std::string label, std::vector<std::string> events,
                              std::vector<Formula> pres,
                              std::vector<PostMap> posts,
                              std::vector<std::vector<Formula>> edges) {
  size_t n = events.size();
  if (n == 0) throw Error("action model needs at least one event");
  if (pres.size() != n || posts.size() != n || edges.size() != n)
    throw Error("action model tables must cover every event");
  for (const auto& row : edges)
    if (row.size() != n) throw Error("edge table must be total");

  auto a = std::make_shared<ActionModel>();
  a->label = std::move(label);
  a->events = std::move(events);
  for (auto& f : pres) a->pres.push_back(normalize(f));
  for (auto& pm : posts) {
    PostMap out;
    for (auto& [atom, value] : pm.entries) {
      Formula v = normalize(value);
      if (is_diagonal_top(atom, v)) continue;
      out.entries.push_back({atom, std::move(v)});
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const auto& x, const auto& y) {
                return to_string(x.first) < to_string(y.first);
              });
    for (size_t i = 1; i < out.entries.size(); ++i)
      if (out.entries[i - 1].first == out.entries[i].first)
        throw Error("duplicate postcondition atom: " +
                    to_string(out.entries[i].first));
    a->posts.push_back(std::move(out));
  }
  for (auto& row : edges) {
    std::vector<Formula> r;
    r.reserve(row.size());
    for (auto& f : row) r.push_back(normalize(f));
    a->edges.push_back(std::move(r));
  }
  return a;
}

int ActionModel::event_index(const std::string& e) const {
  for (size_t i = 0; i < events.size(); ++i)
    if (events[i] == e) return static_cast<int>(i);
  return -1;
}

const Formula& ActionModel::pre_of(const std::string& e) const {
  int i = event_index(e);
  if (i < 0) throw Error("unknown event: " + e);
  return pres[i];
}

const PostMap& ActionModel::post_of(const std::string& e) const {
  int i = event_index(e);
  if (i < 0) throw Error("unknown event: " + e);
  return posts[i];
}

size_t action_hash(const ActionModel& a) {
  size_t h = 0x5eed;
  for (const auto& e : a.events) h = mix(h, std::hash<std::string>{}(e));
  for (const auto& f : a.pres) h = mix(h, f.hash());
  for (const auto& pm : a.posts)
    for (const auto& [atom, v] : pm.entries) {
      h = mix(h, atom.hash());
      h = mix(h, v.hash());
    }
  for (const auto& row : a.edges)
    for (const auto& f : row) h = mix(h, f.hash());
  return h;
}

std::string action_label(const ActionModel& a) {
  return a.label.empty() ? "(anon)" : a.label;
}

bool action_has_event(const ActionModel& a, const std::string& event) {
  return a.event_index(event) >= 0;
}

bool action_equal(const ActionModel& a, const ActionModel& b) {
  if (a.events != b.events) return false;
  if (a.pres.size() != b.pres.size()) return false;
  for (size_t i = 0; i < a.pres.size(); ++i)
    if (!(a.pres[i] == b.pres[i])) return false;
  if (a.posts.size() != b.posts.size()) return false;
  for (size_t i = 0; i < a.posts.size(); ++i) {
    const auto& x = a.posts[i].entries;
    const auto& y = b.posts[i].entries;
    if (x.size() != y.size()) return false;
    for (size_t j = 0; j < x.size(); ++j)
      if (!(x[j].first == y[j].first) || !(x[j].second == y[j].second))
        return false;
  }
  for (size_t i = 0; i < a.edges.size(); ++i)
    for (size_t j = 0; j < a.edges[i].size(); ++j)
      if (!(a.edges[i][j] == b.edges[i][j])) return false;
  return true;
}

std::string GroundAction::display() const {
  std::string s = schema + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ",";
    s += args[i];
  }
  return s + ")@" + event;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_post_entry(const Formula& atom, const Formula& value, bool ground,
                      const std::vector<SchemaParam>* params,
                      const Signature& sig, const std::string& where,
                      Report& rep) {
  if (atom.kind() != Formula::Kind::Atom) {
    rep.add(where, "postcondition key is not an atom");
    return;
  }
  if (atom.rel() == "=") {
    if (!(atom.terms().size() == 2 && atom.terms()[0] == atom.terms()[1] &&
          value.kind() == Formula::Kind::Top))
      rep.add(where, "equality postconditions must preserve the diagonal");
    return;
  }
  Report wf = well_formed(atom, sig);
  for (const auto& it : wf.items) rep.add(where, it.message);
  if (ground) {
    for (const auto& t : atom.terms())
      if (!is_ground(t)) rep.add(where, "postcondition atom is not ground");
  } else {
    for (const auto& t : atom.terms()) {
      if (t.kind() != Term::Kind::Var) {
        rep.add(where, "schema postcondition arguments must be parameters");
        continue;
      }
      bool found = false;
      for (const auto& p : *params)
        if (p.var.name() == t.name()) found = true;
      if (!found)
        rep.add(where, "postcondition argument ?" + t.name() +
                           " is not a parameter");
    }
  }
}

void check_free_vars(const Formula& f, const std::set<std::string>& allowed,
                     const std::string& where, const std::string& what,
                     Report& rep) {
  for (const auto& [n, s] : free_vars(f)) {
    (void)s;
    if (!allowed.count(n))
      rep.add(where, what + " has stray free variable ?" + n);
  }
}

void check_common(const std::vector<std::string>& events,
                  const std::vector<Formula>& pres,
                  const std::vector<PostMap>& posts,
                  const std::vector<std::vector<Formula>>& edges,
                  const std::set<std::string>& param_names,
                  const std::vector<SchemaParam>* params, bool ground,
                  const Signature& sig, Report& rep) {
  if (events.empty()) rep.add("events", "no events");
  std::set<std::string> seen;
  for (const auto& e : events)
    if (!seen.insert(e).second) rep.add("events", "duplicate event: " + e);
  if (pres.size() != events.size() || posts.size() != events.size() ||
      edges.size() != events.size()) {
    rep.add("events", "tables do not cover every event");
    return;
  }
  std::set<std::string> edge_allowed = param_names;
  edge_allowed.insert(kStarVar);
  for (size_t i = 0; i < events.size(); ++i) {
    const std::string where = "event " + events[i];
    Report wf = well_formed(pres[i], sig);
    for (const auto& it : wf.items) rep.add(where, "precondition: " + it.message);
    check_free_vars(pres[i], param_names, where, "precondition", rep);
    for (const auto& [atom, value] : posts[i].entries) {
      check_post_entry(atom, value, ground, params, sig, where, rep);
      Report vwf = well_formed(value, sig);
      for (const auto& it : vwf.items)
        rep.add(where, "postcondition: " + it.message);
      check_free_vars(value, param_names, where, "postcondition value", rep);
    }
    if (edges[i].size() != events.size()) {
      rep.add(where, "edge row does not cover every event");
      continue;
    }
    for (size_t j = 0; j < events.size(); ++j) {
      const Formula& q = edges[i][j];
      Report ewf = well_formed(q, sig);
      for (const auto& it : ewf.items)
        rep.add(where, "edge condition: " + it.message);
      check_free_vars(q, edge_allowed, where, "edge condition", rep);
    }
  }
}

}  // namespace

Report validate_action(const ActionModel& a, const Signature& sig) {
  Report rep;
  check_common(a.events, a.pres, a.posts, a.edges, {}, nullptr, true, sig, rep);
  return rep;
}

Report validate_action(const ActionSchema& s, const Signature& sig) {
  Report rep;
  std::set<std::string> names;
  for (const auto& p : s.params) {
    if (p.var.kind() != Term::Kind::Var) {
      rep.add("params", "parameter is not a variable");
      continue;
    }
    if (p.var.name() == kStarVar)
      rep.add("params", "reserved variable cannot be a parameter");
    if (!names.insert(p.var.name()).second)
      rep.add("params", "duplicate parameter ?" + p.var.name());
  }
  if (s.actual.empty()) {
    rep.add("events", "no designated event");
  } else if (std::find(s.events.begin(), s.events.end(), s.actual) ==
             s.events.end()) {
    rep.add("events", "designated event " + s.actual + " not declared");
  }
  check_common(s.events, s.pres, s.posts, s.edges, names, &s.params, false, sig,
               rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Update

bool applicable(const PointedModel& s, const PointedAction& a) {
  return satisfies(*s.model, s.world, {}, a.action->pre_of(a.event));
}

ModelPtr product_update(const Model& m, const ActionModel& a,
                        std::map<std::pair<int, int>, int>* index_out) {
  auto out = std::make_shared<Model>();
  out->domain = m.domain;
  out->init_relations();

  int n = static_cast<int>(m.worlds.size());
  int k = static_cast<int>(a.events.size());
  std::map<std::pair<int, int>, int> idx;
  std::set<std::string> used_names;

  for (int w = 0; w < n; ++w) {
    for (int e = 0; e < k; ++e) {
      if (!satisfies(m, w, {}, a.pres[e])) continue;
      World nw;
      nw.name = m.worlds[w].name + "." + a.events[e];
      while (used_names.count(nw.name)) nw.name += "~";
      used_names.insert(nw.name);
      nw.consts = m.worlds[w].consts;
      nw.funcs = m.worlds[w].funcs;
      nw.rels = m.worlds[w].rels;
      for (const auto& [atom, cond] : a.posts[e].entries) {
        if (atom.rel() == "=") continue;
        std::vector<Elem> tuple;
        bool defined = true;
        for (const auto& t : atom.terms()) {
          auto el = extension(t, m, w, {});
          if (!el) {
            defined = false;
            break;
          }
          tuple.push_back(*el);
        }
        if (!defined) continue;
        if (satisfies(m, w, {}, cond))
          nw.rels[atom.rel()].insert(tuple);
        else if (auto it = nw.rels.find(atom.rel()); it != nw.rels.end())
          it->second.erase(tuple);
      }
      idx[{w, e}] = static_cast<int>(out->worlds.size());
      out->worlds.push_back(std::move(nw));
    }
  }
  if (out->worlds.empty())
    throw EmptyUpdateError("product update yields no worlds");

  for (int agent = 0; agent < m.domain->agent_count(); ++agent) {
    Valuation v{{kStarVar, agent}};
    for (const auto& [we, i] : idx) {
      for (const auto& [we2, j] : idx) {
        if (!m.edge(agent, we.first, we2.first)) continue;
        if (satisfies(m, we.first, v, a.edges[we.second][we2.second]))
          out->rel[agent].insert({i, j});
      }
    }
  }
  if (index_out) *index_out = std::move(idx);
  return out;
}

PointedModel update_pointed(const PointedModel& s, const PointedAction& a) {
  int e = a.action->event_index(a.event);
  if (e < 0) throw NotApplicableError("unknown event: " + a.event);
  if (!applicable(s, a))
    throw NotApplicableError("precondition fails at " + s.point().name);
  std::map<std::pair<int, int>, int> idx;
  ModelPtr m2 = product_update(*s.model, *a.action, &idx);
  return PointedModel{m2, idx.at({s.world, e})};
}

// ---------------------------------------------------------------------------
// Schemas

ActionPtr instantiate(const ActionSchema& s, const GroundingSubstitution& sigma,
                      const Signature& sig) {
  std::map<std::string, Term> sub;
  std::string label = "(" + s.name;
  for (const auto& p : s.params) {
    auto it = sigma.find(p.var.name());
    if (it == sigma.end())
      throw IncompleteSubstitutionError("parameter ?" + p.var.name() +
                                        " not substituted");
    const Term& c = it->second;
    if (c.kind() != Term::Kind::Const)
      throw SortMismatchError("substitution for ?" + p.var.name() +
                              " is not a constant");
    if (!sig.constant_sort(c.name()))
      throw UnknownSymbolError("unknown constant: " + c.name());
    if (c.sort() != p.var.sort())
      throw SortMismatchError("parameter ?" + p.var.name() + " has sort " +
                              to_string(p.var.sort()) + ", got " +
                              to_string(c.sort()));
    sub[p.var.name()] = c;
    label += " " + c.name();
  }
  label += ")";

  std::vector<Formula> pres;
  for (const auto& f : s.pres) pres.push_back(substitute(f, sub));
  std::vector<PostMap> posts;
  for (const auto& pm : s.posts) {
    PostMap out;
    for (const auto& [atom, value] : pm.entries) {
      Formula ga = substitute(atom, sub);
      Formula gv = substitute(value, sub);
      if (const Formula* prev = out.find(ga)) {
        // Parameter aliasing can collapse two keys; merge conjunctively.
        if (!(*prev == gv)) {
          for (auto& [k, v] : out.entries)
            if (k == ga) v = f_and({v, gv});
        }
      } else {
        out.entries.push_back({ga, gv});
      }
    }
    posts.push_back(std::move(out));
  }
  std::vector<std::vector<Formula>> edges;
  for (const auto& row : s.edges) {
    std::vector<Formula> r;
    for (const auto& q : row) r.push_back(substitute(q, sub));
    edges.push_back(std::move(r));
  }
  return ActionModel::create(label, s.events, std::move(pres), std::move(posts),
                             std::move(edges));
}

namespace {

std::vector<Term> candidates(const SchemaParam& p, const Signature& sig,
                             const SubtypeTable* table) {
  std::vector<Term> out;
  if (table && !p.subtype.empty()) {
    auto it = table->find(p.subtype);
    if (it != table->end()) {
      for (const auto& name : it->second) {
        auto s = sig.constant_sort(name);
        if (s && *s == p.var.sort()) out.push_back(Term::constant(name, *s));
      }
      return out;
    }
  }
  for (const auto& [name, s] : sig.constants)
    if (s == p.var.sort()) out.push_back(Term::constant(name, s));
  return out;
}

}  // namespace

std::vector<GroundAction> ground_actions(const ActionSchema& s,
                                         const Signature& sig,
                                         const SubtypeTable* table) {
  std::vector<std::vector<Term>> cands;
  for (const auto& p : s.params) {
    cands.push_back(candidates(p, sig, table));
    if (cands.back().empty()) return {};
  }
  std::vector<GroundAction> out;
  std::vector<size_t> pick(cands.size(), 0);
  while (true) {
    GroundingSubstitution sigma;
    std::vector<std::string> args;
    for (size_t i = 0; i < cands.size(); ++i) {
      sigma[s.params[i].var.name()] = cands[i][pick[i]];
      args.push_back(cands[i][pick[i]].name());
    }
    out.push_back({s.name, args, instantiate(s, sigma, sig), s.actual});
    size_t i = cands.size();
    while (i > 0 && ++pick[i - 1] == cands[i - 1].size()) pick[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

std::vector<ActionPtr> ground_all(const ActionSchema& s, const Signature& sig,
                                  const SubtypeTable* table) {
  std::vector<ActionPtr> out;
  for (auto& g : ground_actions(s, sig, table)) out.push_back(g.action);
  return out;
}

// ---------------------------------------------------------------------------
// Composition

PointedAction compose(const PointedAction& a, const PointedAction& b) {
  const ActionModel& a1 = *a.action;
  const ActionModel& a2 = *b.action;
  int n1 = static_cast<int>(a1.events.size());
  int n2 = static_cast<int>(a2.events.size());

  std::vector<std::string> events;
  std::vector<Formula> pres;
  std::vector<PostMap> posts;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      events.push_back(a1.events[i] + "." + a2.events[j]);
      pres.push_back(
          f_and({a1.pres[i], f_dyn(a.action, a1.events[i], a2.pres[j])}));
      PostMap pm;
      for (const auto& [atom, value] : a2.posts[j].entries)
        pm.entries.push_back({atom, f_dyn(a.action, a1.events[i], value)});
      for (const auto& [atom, value] : a1.posts[i].entries)
        if (!pm.find(atom)) pm.entries.push_back({atom, value});
      posts.push_back(std::move(pm));
    }
  }
  std::vector<std::vector<Formula>> edges(n1 * n2,
                                          std::vector<Formula>(n1 * n2));
  for (int i1 = 0; i1 < n1; ++i1)
    for (int j1 = 0; j1 < n2; ++j1)
      for (int i2 = 0; i2 < n1; ++i2)
        for (int j2 = 0; j2 < n2; ++j2)
          edges[i1 * n2 + j1][i2 * n2 + j2] =
              f_and({a1.edges[i1][i2],
                     f_dyn(a.action, a1.events[i1], a2.edges[j1][j2])});

  ActionPtr c = ActionModel::create(
      "(compose " + action_label(a1) + " " + action_label(a2) + ")",
      std::move(events), std::move(pres), std::move(posts), std::move(edges));
  return PointedAction{c, a.event + "." + b.event};
}

}  // namespace termplan

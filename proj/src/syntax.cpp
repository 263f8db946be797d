#include "termplan/syntax.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace termplan {

namespace {

size_t mix(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

size_t hash_str(const std::string& s) { return std::hash<std::string>{}(s); }

}  // namespace

std::string to_string(Sort s) { return s == Sort::Agt ? "agt" : "obj"; }

std::string to_string(ArgSort s) {
  switch (s) {
    case ArgSort::Agt: return "agt";
    case ArgSort::Obj: return "obj";
    default: return "any";
  }
}

bool admits(ArgSort slot, Sort s) {
  switch (slot) {
    case ArgSort::Agt: return s == Sort::Agt;
    case ArgSort::Obj: return s == Sort::Obj;
    default: return true;
  }
}

// ---------------------------------------------------------------------------
// Signature

Signature::Signature() {
  relations["="] = {ArgSort::Any, ArgSort::Any};
}

void Signature::add_variable(const std::string& name, Sort s) {
  if (has_symbol(name)) throw Error("duplicate symbol: " + name);
  variables.push_back({name, s});
  var_index_[name] = s;
}

void Signature::add_constant(const std::string& name, Sort s) {
  if (has_symbol(name)) throw Error("duplicate symbol: " + name);
  constants.push_back({name, s});
  const_index_[name] = s;
}

void Signature::add_relation(const std::string& name, std::vector<ArgSort> args) {
  if (has_symbol(name)) throw Error("duplicate symbol: " + name);
  relations[name] = std::move(args);
}

void Signature::add_function(const std::string& name, FuncType t) {
  if (has_symbol(name)) throw Error("duplicate symbol: " + name);
  functions[name] = std::move(t);
}

std::optional<Sort> Signature::variable_sort(const std::string& name) const {
  auto it = var_index_.find(name);
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Sort> Signature::constant_sort(const std::string& name) const {
  auto it = const_index_.find(name);
  if (it == const_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<ArgSort>* Signature::relation_type(const std::string& name) const {
  auto it = relations.find(name);
  return it == relations.end() ? nullptr : &it->second;
}

const FuncType* Signature::function_type(const std::string& name) const {
  auto it = functions.find(name);
  return it == functions.end() ? nullptr : &it->second;
}

bool Signature::has_symbol(const std::string& name) const {
  return var_index_.count(name) || const_index_.count(name) ||
         relations.count(name) || functions.count(name);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string name = base + "'";
  while (avoid.count(name)) name += "'";
  return name;
}

// ---------------------------------------------------------------------------
// Terms

Term Term::make(Node n) {
  size_t h = mix(static_cast<size_t>(n.kind), hash_str(n.name));
  h = mix(h, static_cast<size_t>(n.sort));
  for (const auto& a : n.args) h = mix(h, a.hash());
  n.hash = h;
  return Term(std::make_shared<const Node>(std::move(n)));
}

Term Term::var(const std::string& name, Sort s) {
  return make(Node{Kind::Var, name, s, {}, 0});
}

Term Term::constant(const std::string& name, Sort s) {
  return make(Node{Kind::Const, name, s, {}, 0});
}

Term Term::constant(const std::string& name, const Signature& sig) {
  auto s = sig.constant_sort(name);
  if (!s) throw UnknownSymbolError("unknown constant: " + name);
  return constant(name, *s);
}

Term Term::app(const std::string& fn, std::vector<Term> args, Sort result) {
  return make(Node{Kind::App, fn, result, std::move(args), 0});
}

bool Term::operator==(const Term& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  if (node_->hash != o.node_->hash) return false;
  if (node_->kind != o.node_->kind || node_->name != o.node_->name ||
      node_->sort != o.node_->sort || node_->args.size() != o.node_->args.size())
    return false;
  for (size_t i = 0; i < node_->args.size(); ++i)
    if (!(node_->args[i] == o.node_->args[i])) return false;
  return true;
}

bool Term::operator<(const Term& o) const {
  if (node_ == o.node_) return false;
  if (!node_) return static_cast<bool>(o.node_);
  if (!o.node_) return false;
  if (node_->kind != o.node_->kind) return node_->kind < o.node_->kind;
  if (node_->name != o.node_->name) return node_->name < o.node_->name;
  if (node_->sort != o.node_->sort) return node_->sort < o.node_->sort;
  if (node_->args.size() != o.node_->args.size())
    return node_->args.size() < o.node_->args.size();
  for (size_t i = 0; i < node_->args.size(); ++i) {
    if (node_->args[i] < o.node_->args[i]) return true;
    if (o.node_->args[i] < node_->args[i]) return false;
  }
  return false;
}

bool is_ground(const Term& t) {
  if (t.kind() == Term::Kind::Var) return false;
  for (const auto& a : t.args())
    if (!is_ground(a)) return false;
  return true;
}

bool is_free_term(const Term& t) {
  if (t.kind() == Term::Kind::Const) return false;
  for (const auto& a : t.args())
    if (!is_free_term(a)) return false;
  return true;
}

void collect_vars(const Term& t, std::map<std::string, Sort>& out) {
  if (t.kind() == Term::Kind::Var) {
    out[t.name()] = t.sort();
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

std::string to_string(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var: return "?" + t.name();
    case Term::Kind::Const: return t.name();
    default: {
      std::string s = "(" + t.name();
      for (const auto& a : t.args()) s += " " + to_string(a);
      return s + ")";
    }
  }
}

// ---------------------------------------------------------------------------
// Formulas

// Defined in dynamics.cpp with the action type.
size_t action_hash(const ActionModel& a);
std::string action_label(const ActionModel& a);
bool action_has_event(const ActionModel& a, const std::string& event);

Formula Formula::make(Node n) {
  size_t h = mix(0xa5a5, static_cast<size_t>(n.kind));
  h = mix(h, hash_str(n.rel));
  for (const auto& t : n.terms) h = mix(h, t.hash());
  for (const auto& k : n.kids) h = mix(h, k.hash());
  if (!n.index.empty()) h = mix(h, n.index.hash());
  if (!n.var.empty()) h = mix(h, n.var.hash());
  if (n.action) h = mix(h, action_hash(*n.action));
  h = mix(h, hash_str(n.event));
  n.hash = h;
  return Formula(std::make_shared<const Node>(std::move(n)));
}

struct FormulaFactory {
  static Formula make(Formula::Node n) { return Formula::make(std::move(n)); }
};

Formula f_atom(const std::string& rel, std::vector<Term> terms) {
  Formula::Node n;
  n.kind = Formula::Kind::Atom;
  n.rel = rel;
  n.terms = std::move(terms);
  return FormulaFactory::make(std::move(n));
}

Formula f_eq(const Term& a, const Term& b) { return f_atom("=", {a, b}); }

Formula f_top() {
  Formula::Node n;
  n.kind = Formula::Kind::Top;
  return FormulaFactory::make(std::move(n));
}

Formula f_bottom() {
  Formula::Node n;
  n.kind = Formula::Kind::Bottom;
  return FormulaFactory::make(std::move(n));
}

Formula f_not(const Formula& f) {
  Formula::Node n;
  n.kind = Formula::Kind::Not;
  n.kids = {f};
  return FormulaFactory::make(std::move(n));
}

static Formula nary(Formula::Kind kind, std::vector<Formula> fs) {
  if (fs.empty()) throw Error("empty connective");
  if (fs.size() == 1) return fs[0];
  Formula::Node n;
  n.kind = kind;
  n.kids = std::move(fs);
  return FormulaFactory::make(std::move(n));
}

Formula f_and(std::vector<Formula> fs) { return nary(Formula::Kind::And, std::move(fs)); }
Formula f_or(std::vector<Formula> fs) { return nary(Formula::Kind::Or, std::move(fs)); }

Formula f_implies(const Formula& a, const Formula& b) {
  Formula::Node n;
  n.kind = Formula::Kind::Implies;
  n.kids = {a, b};
  return FormulaFactory::make(std::move(n));
}

Formula f_iff(const Formula& a, const Formula& b) {
  Formula::Node n;
  n.kind = Formula::Kind::Iff;
  n.kids = {a, b};
  return FormulaFactory::make(std::move(n));
}

Formula f_neq(const Term& a, const Term& b) {
  Formula::Node n;
  n.kind = Formula::Kind::Neq;
  n.terms = {a, b};
  return FormulaFactory::make(std::move(n));
}

Formula f_knows(const Term& index, const Formula& f) {
  Formula::Node n;
  n.kind = Formula::Kind::Knows;
  n.index = index;
  n.kids = {f};
  return FormulaFactory::make(std::move(n));
}

static Formula binder(Formula::Kind kind, const Term& var, const Formula& f) {
  if (var.kind() != Term::Kind::Var) throw Error("binder needs a variable");
  if (var.name() == kStarVar) throw Error("reserved variable cannot be bound");
  Formula::Node n;
  n.kind = kind;
  n.var = var;
  n.kids = {f};
  return FormulaFactory::make(std::move(n));
}

Formula f_forall(const Term& var, const Formula& f) {
  return binder(Formula::Kind::Forall, var, f);
}

Formula f_exists(const Term& var, const Formula& f) {
  return binder(Formula::Kind::Exists, var, f);
}

Formula f_dyn(ActionPtr action, const std::string& event, const Formula& f) {
  if (!action) throw Error("dynamic modality needs an action");
  Formula::Node n;
  n.kind = Formula::Kind::Dyn;
  n.action = std::move(action);
  n.event = event;
  n.kids = {f};
  return FormulaFactory::make(std::move(n));
}

bool Formula::operator==(const Formula& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  if (node_->hash != o.node_->hash) return false;
  if (node_->kind != o.node_->kind || node_->rel != o.node_->rel ||
      node_->event != o.node_->event)
    return false;
  if (node_->terms.size() != o.node_->terms.size() ||
      node_->kids.size() != o.node_->kids.size())
    return false;
  for (size_t i = 0; i < node_->terms.size(); ++i)
    if (!(node_->terms[i] == o.node_->terms[i])) return false;
  if (!(node_->index == o.node_->index) || !(node_->var == o.node_->var))
    return false;
  if (static_cast<bool>(node_->action) != static_cast<bool>(o.node_->action))
    return false;
  if (node_->action && node_->action != o.node_->action &&
      !action_equal(*node_->action, *o.node_->action))
    return false;
  for (size_t i = 0; i < node_->kids.size(); ++i)
    if (!(node_->kids[i] == o.node_->kids[i])) return false;
  return true;
}

bool Formula::operator<(const Formula& o) const {
  // Deterministic within a process; used only for in-memory containers.
  if (node_ == o.node_) return false;
  if (!node_) return static_cast<bool>(o.node_);
  if (!o.node_) return false;
  if (node_->hash != o.node_->hash) return node_->hash < o.node_->hash;
  if (*this == o) return false;
  return to_string(*this) < to_string(o);
}

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Formula& f) {
  using K = Formula::Kind;
  std::ostringstream os;
  switch (f.kind()) {
    case K::Atom: {
      os << "(" << f.rel();
      for (const auto& t : f.terms()) os << " " << to_string(t);
      os << ")";
      break;
    }
    case K::Top: os << "true"; break;
    case K::Bottom: os << "false"; break;
    case K::Not: os << "(not " << to_string(f.kid()) << ")"; break;
    case K::And:
    case K::Or: {
      os << (f.kind() == K::And ? "(and" : "(or");
      for (const auto& k : f.kids()) os << " " << to_string(k);
      os << ")";
      break;
    }
    case K::Implies:
      os << "(implies " << to_string(f.kid(0)) << " " << to_string(f.kid(1)) << ")";
      break;
    case K::Iff:
      os << "(iff " << to_string(f.kid(0)) << " " << to_string(f.kid(1)) << ")";
      break;
    case K::Neq:
      os << "(neq " << to_string(f.terms()[0]) << " " << to_string(f.terms()[1]) << ")";
      break;
    case K::Knows:
      os << "(knows (" << to_string(f.index()) << ") " << to_string(f.kid()) << ")";
      break;
    case K::Forall:
    case K::Exists:
      os << (f.kind() == K::Forall ? "(forall (" : "(exists (")
         << to_string(f.var()) << " - " << to_string(f.var().sort()) << ") "
         << to_string(f.kid()) << ")";
      break;
    case K::Dyn:
      os << "(after " << action_label(*f.action()) << " " << f.event() << " "
         << to_string(f.kid()) << ")";
      break;
  }
  return os.str();
}

std::string Report::summary() const {
  std::ostringstream os;
  for (const auto& it : items) {
    if (os.tellp() > 0) os << "\n";
    os << (it.path.empty() ? std::string("root") : it.path) << ": " << it.message;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Sorting and well-formedness

Sort sort_of(const Term& t, const Signature& sig) {
  switch (t.kind()) {
    case Term::Kind::Var:
      return t.sort();
    case Term::Kind::Const: {
      auto s = sig.constant_sort(t.name());
      if (!s) throw UnknownSymbolError("unknown constant: " + t.name());
      if (*s != t.sort())
        throw SortMismatchError("constant " + t.name() + " declared " +
                                to_string(*s) + ", used as " + to_string(t.sort()));
      return *s;
    }
    default: {
      const FuncType* ft = sig.function_type(t.name());
      if (!ft) throw UnknownSymbolError("unknown function: " + t.name());
      if (ft->args.size() != t.args().size())
        throw SortMismatchError("function " + t.name() + " expects " +
                                std::to_string(ft->args.size()) + " arguments");
      for (size_t i = 0; i < t.args().size(); ++i) {
        Sort s = sort_of(t.args()[i], sig);
        if (!admits(ft->args[i], s))
          throw SortMismatchError("argument " + std::to_string(i) + " of " +
                                  t.name() + " has sort " + to_string(s));
      }
      if (ft->result != t.sort())
        throw SortMismatchError("function " + t.name() + " returns " +
                                to_string(ft->result));
      return ft->result;
    }
  }
}

namespace {

std::optional<Sort> checked_sort(const Term& t, const Signature& sig,
                                 const std::string& path, Report& rep) {
  try {
    return sort_of(t, sig);
  } catch (const Error& e) {
    rep.add(path, e.what());
    return std::nullopt;
  }
}

void wf_walk(const Formula& f, const Signature& sig, const std::string& path,
             Report& rep) {
  using K = Formula::Kind;
  auto child = [&](size_t i) {
    return path.empty() ? std::to_string(i) : path + "." + std::to_string(i);
  };
  switch (f.kind()) {
    case K::Atom: {
      const auto* rt = sig.relation_type(f.rel());
      if (!rt) {
        rep.add(path, "unknown relation: " + f.rel());
      } else if (rt->size() != f.terms().size()) {
        rep.add(path, "relation " + f.rel() + " expects " +
                          std::to_string(rt->size()) + " arguments, got " +
                          std::to_string(f.terms().size()));
      }
      for (size_t i = 0; i < f.terms().size(); ++i) {
        auto s = checked_sort(f.terms()[i], sig, path, rep);
        if (s && rt && i < rt->size() && !admits((*rt)[i], *s))
          rep.add(path, "argument " + std::to_string(i) + " of " + f.rel() +
                            " has sort " + to_string(*s));
      }
      break;
    }
    case K::Neq:
      for (const auto& t : f.terms()) checked_sort(t, sig, path, rep);
      break;
    case K::Knows: {
      auto s = checked_sort(f.index(), sig, path, rep);
      if (s && *s != Sort::Agt)
        rep.add(path, "knowledge index must be agent-sorted");
      wf_walk(f.kid(), sig, child(0), rep);
      break;
    }
    case K::Forall:
    case K::Exists:
      if (f.var().name() == kStarVar)
        rep.add(path, "reserved variable cannot be bound");
      wf_walk(f.kid(), sig, child(0), rep);
      break;
    case K::Dyn: {
      if (!action_has_event(*f.action(), f.event()))
        rep.add(path, "unknown event: " + f.event());
      wf_walk(f.kid(), sig, child(0), rep);
      break;
    }
    default:
      for (size_t i = 0; i < f.kids().size(); ++i)
        wf_walk(f.kids()[i], sig, child(i), rep);
  }
}

}  // namespace

Report well_formed(const Formula& f, const Signature& sig) {
  Report rep;
  wf_walk(f, sig, "", rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Free variables and substitution

namespace {

void fv_walk(const Formula& f, std::set<std::string>& bound,
             std::map<std::string, Sort>& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
    case K::Neq: {
      std::map<std::string, Sort> vars;
      for (const auto& t : f.terms()) collect_vars(t, vars);
      for (const auto& [n, s] : vars)
        if (!bound.count(n)) out[n] = s;
      break;
    }
    case K::Knows: {
      std::map<std::string, Sort> vars;
      collect_vars(f.index(), vars);
      for (const auto& [n, s] : vars)
        if (!bound.count(n)) out[n] = s;
      fv_walk(f.kid(), bound, out);
      break;
    }
    case K::Forall:
    case K::Exists: {
      bool was = bound.count(f.var().name()) > 0;
      bound.insert(f.var().name());
      fv_walk(f.kid(), bound, out);
      if (!was) bound.erase(f.var().name());
      break;
    }
    default:
      for (const auto& k : f.kids()) fv_walk(k, bound, out);
  }
}

}  // namespace

std::map<std::string, Sort> free_vars(const Formula& f) {
  std::set<std::string> bound;
  std::map<std::string, Sort> out;
  fv_walk(f, bound, out);
  return out;
}

Term substitute(const Term& t, const std::map<std::string, Term>& sub) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = sub.find(t.name());
      if (it == sub.end()) return t;
      if (it->second.sort() != t.sort())
        throw SortMismatchError("substituting " + to_string(it->second.sort()) +
                                " term for " + to_string(t.sort()) +
                                " variable " + t.name());
      return it->second;
    }
    case Term::Kind::Const:
      return t;
    default: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(substitute(a, sub));
      return Term::app(t.name(), std::move(args), t.sort());
    }
  }
}

namespace {

void term_names(const Term& t, std::set<std::string>& out) {
  if (t.kind() == Term::Kind::Var) out.insert(t.name());
  for (const auto& a : t.args()) term_names(a, out);
}

void all_names(const Formula& f, std::set<std::string>& out) {
  for (const auto& t : f.terms()) term_names(t, out);
  if (!f.index().empty()) term_names(f.index(), out);
  if (!f.var().empty()) out.insert(f.var().name());
  for (const auto& k : f.kids()) all_names(k, out);
}

Formula subst_walk(const Formula& f, std::map<std::string, Term> sub) {
  using K = Formula::Kind;
  // Drop identity entries; an empty map is a no-op.
  for (auto it = sub.begin(); it != sub.end();) {
    const Term& r = it->second;
    if (r.kind() == Term::Kind::Var && r.name() == it->first)
      it = sub.erase(it);
    else
      ++it;
  }
  if (sub.empty()) return f;
  switch (f.kind()) {
    case K::Atom: {
      std::vector<Term> ts;
      ts.reserve(f.terms().size());
      for (const auto& t : f.terms()) ts.push_back(substitute(t, sub));
      return f_atom(f.rel(), std::move(ts));
    }
    case K::Neq:
      return f_neq(substitute(f.terms()[0], sub), substitute(f.terms()[1], sub));
    case K::Top:
    case K::Bottom:
      return f;
    case K::Not:
      return f_not(subst_walk(f.kid(), sub));
    case K::And:
    case K::Or: {
      std::vector<Formula> ks;
      ks.reserve(f.kids().size());
      for (const auto& k : f.kids()) ks.push_back(subst_walk(k, sub));
      return f.kind() == K::And ? f_and(std::move(ks)) : f_or(std::move(ks));
    }
    case K::Implies:
      return f_implies(subst_walk(f.kid(0), sub), subst_walk(f.kid(1), sub));
    case K::Iff:
      return f_iff(subst_walk(f.kid(0), sub), subst_walk(f.kid(1), sub));
    case K::Knows:
      return f_knows(substitute(f.index(), sub), subst_walk(f.kid(), sub));
    case K::Forall:
    case K::Exists: {
      Term v = f.var();
      sub.erase(v.name());
      if (sub.empty()) return f;
      std::set<std::string> incoming;
      for (const auto& [_, t] : sub) term_names(t, incoming);
      Formula body = f.kid();
      if (incoming.count(v.name())) {
        std::set<std::string> avoid = incoming;
        all_names(body, avoid);
        for (const auto& [n, _] : sub) avoid.insert(n);
        Term v2 = Term::var(fresh_name(v.name(), avoid), v.sort());
        std::map<std::string, Term> rename{{v.name(), v2}};
        body = subst_walk(body, std::move(rename));
        v = v2;
      }
      body = subst_walk(body, sub);
      return f.kind() == K::Forall ? f_forall(v, body) : f_exists(v, body);
    }
    default:  // Dyn: actions are closed, substitute only in the body
      return f_dyn(f.action(), f.event(), subst_walk(f.kid(), sub));
  }
}

}  // namespace

Formula substitute(const Formula& f, const std::map<std::string, Term>& sub) {
  return subst_walk(f, sub);
}

Formula substitute(const Formula& f, const std::string& var, const Term& t) {
  return subst_walk(f, {{var, t}});
}

// ---------------------------------------------------------------------------
// Classification and normalization

bool is_static(const Formula& f) {
  if (f.kind() == Formula::Kind::Dyn) return false;
  for (const auto& k : f.kids())
    if (!is_static(k)) return false;
  return true;
}

Classification classify(const Formula& f) {
  Classification c;
  c.is_sentence = free_vars(f).empty();
  c.is_static = is_static(f);
  if (f.kind() == Formula::Kind::Atom) {
    c.is_ground_atom = std::all_of(f.terms().begin(), f.terms().end(),
                                   [](const Term& t) { return is_ground(t); });
    c.is_free_atom = std::all_of(f.terms().begin(), f.terms().end(),
                                 [](const Term& t) { return is_free_term(t); });
  }
  return c;
}

Formula normalize(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
    case K::Top:
    case K::Bottom:
      return f;
    case K::Not:
      return f_not(normalize(f.kid()));
    case K::And: {
      std::vector<Formula> ks;
      ks.reserve(f.kids().size());
      for (const auto& k : f.kids()) ks.push_back(normalize(k));
      return f_and(std::move(ks));
    }
    case K::Or: {
      std::vector<Formula> ks;
      ks.reserve(f.kids().size());
      for (const auto& k : f.kids()) ks.push_back(f_not(normalize(k)));
      return f_not(f_and(std::move(ks)));
    }
    case K::Implies:
      return f_implies(normalize(f.kid(0)), normalize(f.kid(1)));
    case K::Iff: {
      Formula a = normalize(f.kid(0)), b = normalize(f.kid(1));
      return f_and({f_implies(a, b), f_implies(b, a)});
    }
    case K::Neq:
      return f_not(f_eq(f.terms()[0], f.terms()[1]));
    case K::Knows:
      return f_knows(f.index(), normalize(f.kid()));
    case K::Forall:
      return f_forall(f.var(), normalize(f.kid()));
    case K::Exists:
      return f_not(f_forall(f.var(), f_not(normalize(f.kid()))));
    default:
      return f_dyn(f.action(), f.event(), normalize(f.kid()));
  }
}

}  // namespace termplan

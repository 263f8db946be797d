#include "termplan/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

namespace termplan {

namespace {

// ---------------------------------------------------------------------------
// S-expression reader

struct SNode {
  bool list = false;
  std::string sym;
  std::vector<SNode> items;
  int line = 1;
  int col = 1;
};

[[noreturn]] void fail(const SNode& at, const std::string& msg) {
  throw ParseError(msg, at.line, at.col);
}

bool is_sym_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' &&
         c != ';';
}

std::vector<SNode> read_all(const std::string& text) {
  std::vector<SNode> stack_root;
  std::vector<SNode*> open;
  auto sink = [&]() -> std::vector<SNode>& {
    return open.empty() ? stack_root : open.back()->items;
  };
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') advance(text[i++]);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    if (c == '(') {
      SNode n;
      n.list = true;
      n.line = line;
      n.col = col;
      // While a node is open every append goes into it, so the pointers in
      // `open` never dangle: no sibling can move an open node.
      sink().push_back(n);
      open.push_back(&sink().back());
      advance(c);
      ++i;
      continue;
    }
    if (c == ')') {
      if (open.empty()) throw ParseError("unmatched ')'", line, col);
      open.pop_back();
      advance(c);
      ++i;
      continue;
    }
    SNode n;
    n.line = line;
    n.col = col;
    while (i < text.size() && is_sym_char(text[i])) {
      n.sym.push_back(text[i]);
      advance(text[i]);
      ++i;
    }
    sink().push_back(n);
  }
  if (!open.empty())
    throw ParseError("unclosed '('", open.back()->line, open.back()->col);
  return stack_root;
}

const std::string& sym_of(const SNode& n, const std::string& what) {
  if (n.list || n.sym.empty()) fail(n, "expected " + what);
  return n.sym;
}

const SNode& list_of(const SNode& n, const std::string& what) {
  if (!n.list) fail(n, "expected " + what);
  return n;
}

bool is_kw(const SNode& n, const std::string& kw) {
  return !n.list && n.sym == kw;
}

// ---------------------------------------------------------------------------
// Types

bool root_sort_name(const std::string& t, Sort& out) {
  if (t == "agent_id" || t == "agent" || t == "agt") {
    out = Sort::Agt;
    return true;
  }
  if (t == "object_id" || t == "object" || t == "obj") {
    out = Sort::Obj;
    return true;
  }
  return false;
}

}  // namespace

Sort type_root(const std::string& type, const std::vector<TypeDecl>& types) {
  std::set<std::string> seen;
  std::string cur = type;
  while (true) {
    Sort s;
    if (root_sort_name(cur, s)) return s;
    if (!seen.insert(cur).second) throw Error("type cycle through: " + cur);
    auto it = std::find_if(types.begin(), types.end(),
                           [&](const TypeDecl& d) { return d.name == cur; });
    if (it == types.end()) throw Error("unknown type: " + cur);
    if (it->parent.empty()) throw Error("type has no parent: " + cur);
    cur = it->parent;
  }
}

namespace {

Sort type_root_at(const SNode& at, const std::string& type,
                  const std::vector<TypeDecl>& types) {
  try {
    return type_root(type, types);
  } catch (const Error& e) {
    fail(at, e.what());
  }
}

ArgSort arg_sort_of_type(const SNode& at, const std::string& type,
                         const std::vector<TypeDecl>& types) {
  if (type == "any" || type == "agt_or_obj") return ArgSort::Any;
  return type_root_at(at, type, types) == Sort::Agt ? ArgSort::Agt
                                                    : ArgSort::Obj;
}

// Typed lists: "a b - T c - S d" yields (a,T) (b,T) (c,S) (d,"").
std::vector<std::pair<const SNode*, std::string>> typed_groups(
    const std::vector<SNode>& items, size_t from, size_t to) {
  std::vector<std::pair<const SNode*, std::string>> out;
  std::vector<const SNode*> pending;
  for (size_t i = from; i < to; ++i) {
    const SNode& n = items[i];
    if (is_kw(n, "-")) {
      if (pending.empty()) fail(n, "dangling '-' in typed list");
      if (i + 1 >= to) fail(n, "missing type after '-'");
      const std::string& t = sym_of(items[i + 1], "a type name");
      for (const SNode* p : pending) out.emplace_back(p, t);
      pending.clear();
      ++i;
    } else {
      sym_of(n, "a name");
      pending.push_back(&n);
    }
  }
  for (const SNode* p : pending) out.emplace_back(p, "");
  return out;
}

std::string var_name_of(const SNode& n) {
  const std::string& s = sym_of(n, "a variable");
  if (s.size() < 2 || s[0] != '?') fail(n, "variable must start with '?'");
  return s.substr(1);
}

// ---------------------------------------------------------------------------
// Formula parsing

struct Scope {
  const Signature* sig = nullptr;
  const std::vector<TypeDecl>* types = nullptr;
  const Task* task = nullptr;  // enables (after ...)
  std::map<std::string, Sort> vars;
  bool allow_star = false;
};

Formula parse_formula_node(const SNode& n, const Scope& sc);

Term parse_term(const SNode& n, const Scope& sc) {
  if (n.list) fail(n, "function terms are not supported in files");
  const std::string& s = sym_of(n, "a term");
  if (s[0] == '?') {
    std::string name = s.substr(1);
    if (name == kStarVar) {
      if (!sc.allow_star)
        fail(n, "the edge variable ?x* is only allowed in edge conditions");
      return Term::var(kStarVar, Sort::Agt);
    }
    auto it = sc.vars.find(name);
    if (it == sc.vars.end()) fail(n, "unbound variable ?" + name);
    return Term::var(name, it->second);
  }
  if (auto s2 = sc.sig->constant_sort(s)) return Term::constant(s, *s2);
  fail(n, "unknown constant: " + s);
}

Formula parse_atom(const SNode& n, const Scope& sc) {
  const std::string& rel = sym_of(n.items[0], "a relation name");
  const auto* slots = sc.sig->relation_type(rel);
  if (!slots) fail(n.items[0], "unknown relation: " + rel);
  if (n.items.size() - 1 != slots->size())
    fail(n, rel + " takes " + std::to_string(slots->size()) + " arguments, " +
                std::to_string(n.items.size() - 1) + " given");
  std::vector<Term> terms;
  for (size_t i = 1; i < n.items.size(); ++i) {
    Term t = parse_term(n.items[i], sc);
    if (!admits((*slots)[i - 1], t.sort()))
      fail(n.items[i], "argument " + std::to_string(i) + " of " + rel +
                           " has the wrong sort");
    terms.push_back(t);
  }
  return f_atom(rel, std::move(terms));
}

Formula parse_quantifier(const SNode& n, const Scope& sc, bool universal) {
  if (n.items.size() != 3) fail(n, "quantifier takes a binder and a body");
  const SNode& binder = list_of(n.items[1], "a binder list");
  auto groups = typed_groups(binder.items, 0, binder.items.size());
  if (groups.empty()) fail(binder, "empty binder");
  std::vector<Term> vars;
  Scope inner = sc;
  for (const auto& [node, type] : groups) {
    if (type.empty()) fail(*node, "bound variable needs a type");
    std::string name = var_name_of(*node);
    if (name == kStarVar) fail(*node, "?x* may not be bound");
    Sort s = type_root_at(*node, type, *sc.types);
    vars.push_back(Term::var(name, s));
    inner.vars[name] = s;
  }
  Formula body = parse_formula_node(n.items[2], inner);
  for (auto it = vars.rbegin(); it != vars.rend(); ++it)
    body = universal ? f_forall(*it, body) : f_exists(*it, body);
  return body;
}

Formula parse_after(const SNode& n, const Scope& sc) {
  if (!sc.task)
    fail(n, "the dynamic modality is not allowed in this context");
  if (n.items.size() != 3 && n.items.size() != 4)
    fail(n, "after takes an action instance and a body");
  const SNode& act = list_of(n.items[1], "an action instance");
  if (act.items.empty()) fail(act, "empty action instance");
  const std::string& name = sym_of(act.items[0], "an action name");
  std::vector<std::string> args;
  std::string event;
  for (size_t i = 1; i < act.items.size(); ++i) {
    const std::string& tok = sym_of(act.items[i], "a constant");
    if (tok[0] == '@') {
      if (i + 1 != act.items.size()) fail(act.items[i], "@event must come last");
      event = tok.substr(1);
      if (event.empty()) fail(act.items[i], "empty event name");
    } else {
      args.push_back(tok);
    }
  }
  if (n.items.size() == 4) {
    if (!event.empty()) fail(n.items[2], "event named twice");
    event = sym_of(n.items[2], "an event name");
  }
  GroundAction ga;
  try {
    ga = resolve_action(sc.task->planning, name, args, event);
  } catch (const Error& e) {
    fail(act, e.what());
  }
  return f_dyn(ga.action, ga.event, parse_formula_node(n.items.back(), sc));
}

Formula parse_formula_node(const SNode& n, const Scope& sc) {
  if (!n.list) {
    if (n.sym == "true" || n.sym == "TRUE") return f_top();
    if (n.sym == "false" || n.sym == "FALSE") return f_bottom();
    fail(n, "expected a formula");
  }
  if (n.items.empty()) fail(n, "empty formula");
  const SNode& head = n.items[0];
  if (!head.list) {
    const std::string& h = head.sym;
    if (n.items.size() == 1 && (h == "true" || h == "TRUE")) return f_top();
    if (n.items.size() == 1 && (h == "false" || h == "FALSE"))
      return f_bottom();
    if (h == "and" || h == "or") {
      if (n.items.size() < 2) fail(n, h + " needs at least one operand");
      std::vector<Formula> kids;
      for (size_t i = 1; i < n.items.size(); ++i)
        kids.push_back(parse_formula_node(n.items[i], sc));
      return h == "and" ? f_and(std::move(kids)) : f_or(std::move(kids));
    }
    if (h == "not") {
      if (n.items.size() != 2) fail(n, "not takes one operand");
      return f_not(parse_formula_node(n.items[1], sc));
    }
    if (h == "implies" || h == "iff") {
      if (n.items.size() != 3) fail(n, h + " takes two operands");
      Formula a = parse_formula_node(n.items[1], sc);
      Formula b = parse_formula_node(n.items[2], sc);
      return h == "implies" ? f_implies(a, b) : f_iff(a, b);
    }
    if (h == "=" || h == "neq" || h == "!=") {
      if (n.items.size() != 3) fail(n, "equality takes two terms");
      Term a = parse_term(n.items[1], sc);
      Term b = parse_term(n.items[2], sc);
      return h == "=" ? f_eq(a, b) : f_neq(a, b);
    }
    if (h == "knows") {
      if (n.items.size() != 3) fail(n, "knows takes an index and a body");
      const SNode* idx = &n.items[1];
      if (idx->list) {
        if (idx->items.size() != 1)
          fail(*idx, "knowledge index must be a single term");
        idx = &idx->items[0];
      }
      Term t = parse_term(*idx, sc);
      if (t.sort() != Sort::Agt)
        fail(*idx, "knowledge index must be an agent term");
      return f_knows(t, parse_formula_node(n.items[2], sc));
    }
    if (h == "forall") return parse_quantifier(n, sc, true);
    if (h == "exists") return parse_quantifier(n, sc, false);
    if (h == "after") return parse_after(n, sc);
    return parse_atom(n, sc);
  }
  fail(n, "expected an operator or relation name");
}

// ---------------------------------------------------------------------------
// Domain parsing

PostMap parse_post(const SNode& n, const Scope& sc) {
  const SNode& l = list_of(n, "a postcondition");
  PostMap pm;
  if (l.items.size() == 1 && is_kw(l.items[0], "id")) return pm;
  std::set<std::string> seen;
  for (const SNode& entry : l.items) {
    const SNode& e = list_of(entry, "a postcondition entry");
    if (e.items.empty()) fail(e, "empty postcondition entry");
    size_t if_at = e.items.size();
    for (size_t i = 1; i < e.items.size(); ++i)
      if (is_kw(e.items[i], "if")) {
        if_at = i;
        break;
      }
    size_t key_end = if_at;
    SNode key;
    key.list = true;
    key.line = e.line;
    key.col = e.col;
    key.items.assign(e.items.begin(), e.items.begin() + key_end);
    Formula atom = parse_atom(key, sc);
    if (atom.rel() == "=")
      fail(e, "equality may not appear in a postcondition");
    Formula cond = f_top();
    if (if_at < e.items.size()) {
      if (if_at + 1 >= e.items.size()) fail(e, "missing condition after if");
      if (if_at + 2 < e.items.size()) fail(e, "one condition expected");
      cond = parse_formula_node(e.items[if_at + 1], sc);
    }
    if (!seen.insert(to_string(atom)).second)
      fail(e, "duplicate postcondition for " + to_string(atom));
    pm.entries.emplace_back(atom, cond);
  }
  return pm;
}

struct EventBlock {
  std::string name;
  bool actual = false;
  Formula pre;
  PostMap post;
  const SNode* node = nullptr;
};

EventBlock parse_event_block(const SNode& n, const Scope& sc) {
  EventBlock eb;
  eb.node = &n;
  eb.actual = is_kw(n.items[0], ":actual_event");
  if (n.items.size() < 2) fail(n, "event needs a name");
  eb.name = sym_of(n.items[1], "an event name");
  bool have_pre = false, have_post = false;
  size_t i = 2;
  while (i < n.items.size()) {
    if (is_kw(n.items[i], ":precondition")) {
      if (have_pre) fail(n.items[i], "duplicate :precondition");
      if (i + 1 >= n.items.size()) fail(n.items[i], "missing precondition");
      eb.pre = parse_formula_node(n.items[i + 1], sc);
      have_pre = true;
      i += 2;
    } else if (is_kw(n.items[i], ":postcondition")) {
      if (have_post) fail(n.items[i], "duplicate :postcondition");
      if (i + 1 >= n.items.size()) fail(n.items[i], "missing postcondition");
      eb.post = parse_post(n.items[i + 1], sc);
      have_post = true;
      i += 2;
    } else {
      fail(n.items[i], "unexpected token in event");
    }
  }
  if (!have_pre) fail(n, "event " + eb.name + " has no :precondition");
  if (!have_post) fail(n, "event " + eb.name + " has no :postcondition");
  return eb;
}

ActionSchema parse_action(const SNode& n, const DomainFile& df,
                          const Signature& sig) {
  ActionSchema s;
  if (n.items.size() < 2) fail(n, "action needs a name");
  s.name = sym_of(n.items[1], "an action name");

  const SNode* agent_var = nullptr;
  std::string agent_type;
  const SNode* params_node = nullptr;
  std::vector<const SNode*> event_nodes;
  const SNode* edges_node = nullptr;

  size_t i = 2;
  while (i < n.items.size()) {
    const SNode& item = n.items[i];
    if (is_kw(item, ":agent")) {
      if (agent_var) fail(item, "duplicate :agent");
      if (i + 3 >= n.items.size() || !is_kw(n.items[i + 2], "-"))
        fail(item, ":agent takes '?var - type'");
      agent_var = &n.items[i + 1];
      agent_type = sym_of(n.items[i + 3], "a type name");
      i += 4;
    } else if (is_kw(item, ":parameters")) {
      if (params_node) fail(item, "duplicate :parameters");
      if (i + 1 >= n.items.size()) fail(item, "missing parameter list");
      params_node = &list_of(n.items[i + 1], "a parameter list");
      i += 2;
    } else if (item.list && !item.items.empty() &&
               (is_kw(item.items[0], ":actual_event") ||
                is_kw(item.items[0], ":event"))) {
      event_nodes.push_back(&item);
      ++i;
    } else if (item.list && !item.items.empty() &&
               is_kw(item.items[0], ":edge-conditions")) {
      if (edges_node) fail(item, "duplicate :edge-conditions");
      edges_node = &item;
      ++i;
    } else {
      fail(item, "unexpected token in action " + s.name);
    }
  }
  if (!agent_var) fail(n, "action " + s.name + " has no :agent");

  Scope sc;
  sc.sig = &sig;
  sc.types = &df.types;
  {
    std::string name = var_name_of(*agent_var);
    Sort sort = type_root_at(*agent_var, agent_type, df.types);
    if (sort != Sort::Agt) fail(*agent_var, ":agent must have an agent type");
    s.params.push_back({Term::var(name, sort), agent_type});
    sc.vars[name] = sort;
  }
  if (params_node) {
    auto groups = typed_groups(params_node->items, 0, params_node->items.size());
    for (const auto& [node, type] : groups) {
      if (type.empty()) fail(*node, "parameter needs a type");
      std::string name = var_name_of(*node);
      if (name == kStarVar) fail(*node, "?x* may not be a parameter");
      if (sc.vars.count(name)) fail(*node, "duplicate parameter ?" + name);
      Sort sort = type_root_at(*node, type, df.types);
      s.params.push_back({Term::var(name, sort), type});
      sc.vars[name] = sort;
    }
  }

  if (event_nodes.empty()) fail(n, "action " + s.name + " has no events");
  for (const SNode* en : event_nodes) {
    EventBlock eb = parse_event_block(*en, sc);
    if (std::find(s.events.begin(), s.events.end(), eb.name) != s.events.end())
      fail(*en, "duplicate event " + eb.name);
    if (eb.actual) {
      if (!s.actual.empty()) fail(*en, "more than one :actual_event");
      s.actual = eb.name;
    }
    s.events.push_back(eb.name);
    s.pres.push_back(eb.pre);
    s.posts.push_back(eb.post);
  }
  if (s.actual.empty()) fail(n, "action " + s.name + " has no :actual_event");

  size_t ne = s.events.size();
  Term star = Term::var(kStarVar, Sort::Agt);
  s.edges.assign(ne, std::vector<Formula>(ne, f_bottom()));
  for (size_t a = 0; a < ne; ++a) s.edges[a][a] = f_eq(star, star);
  std::set<std::pair<size_t, size_t>> assigned;

  if (edges_node) {
    Scope esc = sc;
    esc.allow_star = true;
    const auto& items = edges_node->items;
    size_t j = 1;
    while (j < items.size()) {
      const std::string& from_kw = sym_of(items[j], "an event (as :name)");
      if (from_kw.size() < 2 || from_kw[0] != ':')
        fail(items[j], "edge source must be written :event");
      std::string from = from_kw.substr(1);
      if (j + 3 >= items.size())
        fail(items[j], "edge needs ':from -- to (condition)'");
      const std::string& arrow = sym_of(items[j + 1], "'--' or '->'");
      if (arrow != "--" && arrow != "->")
        fail(items[j + 1], "expected '--' or '->'");
      std::string to = sym_of(items[j + 2], "an event name");
      int fi = -1, ti = -1;
      for (size_t k = 0; k < ne; ++k) {
        if (s.events[k] == from) fi = static_cast<int>(k);
        if (s.events[k] == to) ti = static_cast<int>(k);
      }
      if (fi < 0) fail(items[j], "unknown event " + from);
      if (ti < 0) fail(items[j + 2], "unknown event " + to);
      Formula cond = parse_formula_node(items[j + 3], esc);
      auto put = [&](size_t a, size_t b, const SNode& at) {
        if (!assigned.insert({a, b}).second)
          fail(at, "edge condition already given for " + s.events[a] + " -> " +
                       s.events[b]);
        s.edges[a][b] = cond;
      };
      put(fi, ti, items[j]);
      if (arrow == "--" && fi != ti) put(ti, fi, items[j]);
      j += 4;
    }
  }
  return s;
}

const SNode& single_define(std::vector<SNode>& nodes, const std::string& what) {
  if (nodes.size() != 1 || !nodes[0].list)
    throw ParseError("expected a single (define ...) form", 1, 1);
  const SNode& top = nodes[0];
  if (top.items.empty() || !is_kw(top.items[0], "define"))
    fail(top, "expected (define (" + what + " ...) ...)");
  if (top.items.size() < 2 || !top.items[1].list ||
      top.items[1].items.size() != 2 || !is_kw(top.items[1].items[0], what))
    fail(top, "expected (" + what + " NAME) after define");
  return top;
}

}  // namespace

DomainFile parse_domain(const std::string& text) {
  std::vector<SNode> nodes = read_all(text);
  const SNode& top = single_define(nodes, "domain");
  DomainFile df;
  df.name = sym_of(top.items[1].items[1], "a domain name");

  std::vector<const SNode*> action_nodes;
  std::vector<std::pair<const SNode*, std::string>> pred_arg_nodes;
  for (size_t i = 2; i < top.items.size(); ++i) {
    const SNode& sec = list_of(top.items[i], "a domain section");
    if (sec.items.empty()) fail(sec, "empty section");
    if (is_kw(sec.items[0], ":types")) {
      auto groups = typed_groups(sec.items, 1, sec.items.size());
      for (const auto& [node, parent] : groups) {
        const std::string& name = node->sym;
        Sort s;
        if (parent.empty() && !root_sort_name(name, s))
          fail(*node, "type " + name + " needs a parent");
        if (std::any_of(df.types.begin(), df.types.end(),
                        [&](const TypeDecl& d) { return d.name == name; }))
          fail(*node, "duplicate type " + name);
        df.types.push_back({name, parent});
      }
    } else if (is_kw(sec.items[0], ":predicates")) {
      for (size_t j = 1; j < sec.items.size(); ++j) {
        const SNode& p = list_of(sec.items[j], "a predicate declaration");
        if (p.items.empty()) fail(p, "empty predicate declaration");
        const std::string& name = sym_of(p.items[0], "a predicate name");
        if (name == "=") fail(p.items[0], "= is built in");
        if (std::any_of(df.predicates.begin(), df.predicates.end(),
                        [&](const PredicateDecl& d) { return d.name == name; }))
          fail(p.items[0], "duplicate predicate " + name);
        PredicateDecl d;
        d.name = name;
        auto groups = typed_groups(p.items, 1, p.items.size());
        for (const auto& [node, type] : groups) {
          if (type.empty()) fail(*node, "predicate argument needs a type");
          var_name_of(*node);
          d.arg_types.push_back(type);
          pred_arg_nodes.emplace_back(node, type);
        }
        df.predicates.push_back(d);
      }
    } else if (is_kw(sec.items[0], ":action")) {
      action_nodes.push_back(&sec);
    } else {
      fail(sec.items[0], "unknown domain section");
    }
  }

  // Validate the type tree, then build a relations-only signature for the
  // formulas inside actions.
  for (const TypeDecl& d : df.types)
    if (!d.parent.empty()) type_root(d.name, df.types);
  for (const auto& [node, type] : pred_arg_nodes)
    arg_sort_of_type(*node, type, df.types);
  Signature sig;
  for (const PredicateDecl& d : df.predicates) {
    std::vector<ArgSort> slots;
    for (const std::string& t : d.arg_types) {
      SNode dummy;
      slots.push_back(arg_sort_of_type(dummy, t, df.types));
    }
    sig.add_relation(d.name, slots);
  }

  std::set<std::string> names;
  for (const SNode* an : action_nodes) {
    ActionSchema s = parse_action(*an, df, sig);
    if (!names.insert(s.name).second) fail(*an, "duplicate action " + s.name);
    df.schemas.push_back(std::move(s));
  }
  return df;
}

namespace {

int entity_index(const SNode& at, const Domain& dom, const std::string& name) {
  auto e = dom.find(name);
  if (!e) fail(at, "unknown entity " + name);
  return *e;
}

void parse_world(const SNode& n, const Task& t, Model& m, const Domain& dom) {
  World w;
  if (n.items.size() < 2) fail(n, "world needs a name");
  w.name = sym_of(n.items[1], "a world name");
  for (const World& other : m.worlds)
    if (other.name == w.name) fail(n.items[1], "duplicate world " + w.name);

  const SNode* map_node = nullptr;
  const SNode* atoms_node = nullptr;
  size_t i = 2;
  while (i < n.items.size()) {
    if (is_kw(n.items[i], ":constant_map")) {
      if (map_node) fail(n.items[i], "duplicate :constant_map");
      if (i + 1 >= n.items.size()) fail(n.items[i], "missing constant map");
      map_node = &list_of(n.items[i + 1], "a constant map");
      i += 2;
    } else if (is_kw(n.items[i], ":atoms")) {
      if (atoms_node) fail(n.items[i], "duplicate :atoms");
      if (i + 1 >= n.items.size()) fail(n.items[i], "missing atom list");
      atoms_node = &list_of(n.items[i + 1], "an atom list");
      i += 2;
    } else {
      fail(n.items[i], "unexpected token in world " + w.name);
    }
  }

  const Signature& sig = t.planning.sig;
  if (map_node) {
    for (const SNode& pair : map_node->items) {
      const SNode& p = list_of(pair, "a (constant Entity) pair");
      if (p.items.size() != 2) fail(p, "expected (constant Entity)");
      const std::string& c = sym_of(p.items[0], "a constant");
      auto cs = sig.constant_sort(c);
      if (!cs) fail(p.items[0], "unknown constant " + c);
      int e = entity_index(p.items[1], dom, sym_of(p.items[1], "an entity"));
      if (dom.sort_of(e) != *cs)
        fail(p.items[1], "entity sort does not match constant " + c);
      if (!w.consts.emplace(c, e).second)
        fail(p.items[0], "constant " + c + " mapped twice");
    }
  }
  for (const auto& [c, s] : sig.constants)
    if (!w.consts.count(c))
      fail(n, "world " + w.name + " does not interpret constant " + c);

  if (atoms_node) {
    for (const SNode& atom : atoms_node->items) {
      const SNode& a = list_of(atom, "an atom");
      if (a.items.empty()) fail(a, "empty atom");
      const std::string& rel = sym_of(a.items[0], "a relation name");
      if (rel == "=") fail(a.items[0], "= may not be listed");
      const auto* slots = sig.relation_type(rel);
      if (!slots) fail(a.items[0], "unknown relation " + rel);
      if (a.items.size() - 1 != slots->size())
        fail(a, rel + " takes " + std::to_string(slots->size()) + " arguments");
      std::vector<Elem> tuple;
      for (size_t k = 1; k < a.items.size(); ++k) {
        const std::string& arg = sym_of(a.items[k], "a constant or entity");
        Elem e;
        if (sig.constant_sort(arg)) {
          e = w.consts.at(arg);
        } else if (auto d = dom.find(arg)) {
          e = *d;
        } else {
          fail(a.items[k], "unknown constant or entity " + arg);
        }
        if (!admits((*slots)[k - 1], dom.sort_of(e)))
          fail(a.items[k], "argument " + std::to_string(k) + " of " + rel +
                               " has the wrong sort");
        tuple.push_back(e);
      }
      w.rels[rel].insert(tuple);
    }
  }
  m.worlds.push_back(std::move(w));
}

void parse_edges(const SNode& n, Model& m, const Domain& dom) {
  std::set<int> listed;
  size_t i = 1;
  int nw = static_cast<int>(m.worlds.size());
  while (i < n.items.size()) {
    const std::string& kw = sym_of(n.items[i], "an agent (as :Entity)");
    if (kw.size() < 2 || kw[0] != ':')
      fail(n.items[i], "agent must be written :Entity");
    std::string agent_name = kw.substr(1);
    auto e = dom.find(agent_name);
    if (!e || !dom.is_agent(*e))
      fail(n.items[i], "unknown agent entity " + agent_name);
    if (!listed.insert(*e).second)
      fail(n.items[i], "edges listed twice for " + agent_name);
    if (i + 1 >= n.items.size()) fail(n.items[i], "missing edge list");
    const SNode& spec = list_of(n.items[i + 1], "an edge list");

    auto world_at = [&](const SNode& wn) {
      auto idx = m.world_index(sym_of(wn, "a world name"));
      if (!idx) fail(wn, "unknown world " + wn.sym);
      return *idx;
    };

    if (spec.items.size() == 1 && is_kw(spec.items[0], "all")) {
      for (int a = 0; a < nw; ++a)
        for (int b = 0; b < nw; ++b) m.rel[*e].insert({a, b});
    } else {
      bool raw = false;
      std::vector<std::tuple<int, int, bool>> pairs;  // from, to, directed
      for (const SNode& item : spec.items) {
        if (is_kw(item, ":raw")) {
          raw = true;
          continue;
        }
        const SNode& p = list_of(item, "an edge pair");
        if (p.items.size() != 3) fail(p, "expected (w -- w') or (w -> w')");
        const std::string& arrow = sym_of(p.items[1], "'--' or '->'");
        if (arrow != "--" && arrow != "->")
          fail(p.items[1], "expected '--' or '->'");
        pairs.emplace_back(world_at(p.items[0]), world_at(p.items[2]),
                           arrow == "->");
      }
      if (raw) {
        for (const auto& [a, b, directed] : pairs) {
          m.rel[*e].insert({a, b});
          if (!directed) m.rel[*e].insert({b, a});
        }
      } else {
        std::vector<int> parent(nw);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
          return parent[x] == x ? x : parent[x] = find(parent[x]);
        };
        for (const auto& [a, b, directed] : pairs) parent[find(a)] = find(b);
        for (int a = 0; a < nw; ++a)
          for (int b = 0; b < nw; ++b)
            if (find(a) == find(b)) m.rel[*e].insert({a, b});
      }
    }
    i += 2;
  }
  // Unlisted agents keep the identity relation.
  for (int a = 0; a < dom.agent_count(); ++a)
    if (!listed.count(a))
      for (int w = 0; w < nw; ++w) m.rel[a].insert({w, w});
}

}  // namespace

Task parse_problem(const std::string& text, const DomainFile& domain) {
  std::vector<SNode> nodes = read_all(text);
  const SNode& top = single_define(nodes, "problem");
  Task t;
  t.domain = domain;
  t.problem_name = sym_of(top.items[1].items[1], "a problem name");

  const SNode* universe_node = nullptr;
  const SNode* constants_node = nullptr;
  const SNode* init_node = nullptr;
  const SNode* goal_node = nullptr;

  for (size_t i = 2; i < top.items.size(); ++i) {
    const SNode& sec = list_of(top.items[i], "a problem section");
    if (sec.items.empty()) fail(sec, "empty section");
    if (is_kw(sec.items[0], ":domain")) {
      if (sec.items.size() != 2) fail(sec, ":domain takes a name");
      t.domain_name = sym_of(sec.items[1], "a domain name");
      if (t.domain_name != domain.name)
        fail(sec.items[1], "problem is for domain " + t.domain_name +
                               ", not " + domain.name);
    } else if (is_kw(sec.items[0], ":universe")) {
      universe_node = &sec;
    } else if (is_kw(sec.items[0], ":constants")) {
      constants_node = &sec;
    } else if (is_kw(sec.items[0], ":init")) {
      init_node = &sec;
    } else if (is_kw(sec.items[0], ":goal")) {
      if (sec.items.size() != 2) fail(sec, ":goal takes one formula");
      goal_node = &sec.items[1];
    } else {
      fail(sec.items[0], "unknown problem section");
    }
  }
  if (t.domain_name.empty()) fail(top, "missing :domain section");
  if (!universe_node) fail(top, "missing :universe section");
  if (!constants_node) fail(top, "missing :constants section");
  if (!init_node) fail(top, "missing :init section");
  if (!goal_node) fail(top, "missing :goal section");

  // Universe: entities split into agents and objects by their type's root.
  auto dom = std::make_shared<Domain>();
  {
    auto groups =
        typed_groups(universe_node->items, 1, universe_node->items.size());
    std::set<std::string> seen;
    for (const auto& [node, utype] : groups) {
      if (utype.empty()) fail(*node, "universe entity needs a type");
      const std::string& name = node->sym;
      if (!seen.insert(name).second) fail(*node, "duplicate entity " + name);
      Sort s;
      bool resolved = false;
      {
        // Prefer the _id-suffixed constant type; fall back to direct names.
        std::string idname = utype + "_id";
        try {
          s = type_root(idname, domain.types);
          resolved = true;
        } catch (const Error&) {
        }
        if (!resolved) s = type_root_at(*node, utype, domain.types);
      }
      t.universe.emplace_back(name, utype);
      (s == Sort::Agt ? dom->agents : dom->objects).push_back(name);
    }
    if (dom->agents.empty()) fail(*universe_node, "universe has no agents");
    if (dom->objects.empty()) fail(*universe_node, "universe has no objects");
  }

  // Signature: relations from the domain, constants from this problem.
  Signature& sig = t.planning.sig;
  for (const PredicateDecl& d : domain.predicates) {
    std::vector<ArgSort> slots;
    for (const std::string& ty : d.arg_types) {
      SNode dummy;
      slots.push_back(arg_sort_of_type(dummy, ty, domain.types));
    }
    sig.add_relation(d.name, slots);
  }
  {
    auto groups =
        typed_groups(constants_node->items, 1, constants_node->items.size());
    for (const auto& [node, ctype] : groups) {
      if (ctype.empty()) fail(*node, "constant needs a type");
      const std::string& name = node->sym;
      if (dom->find(name)) fail(*node, name + " already names an entity");
      if (sig.constant_sort(name)) fail(*node, "duplicate constant " + name);
      Sort s = type_root_at(*node, ctype, domain.types);
      sig.add_constant(name, s);
      t.constant_types.emplace_back(name, ctype);
      std::string cur = ctype;
      while (true) {
        t.planning.subtypes[cur].push_back(name);
        Sort root;
        if (root_sort_name(cur, root)) break;
        auto it = std::find_if(domain.types.begin(), domain.types.end(),
                               [&](const TypeDecl& d) { return d.name == cur; });
        cur = it->parent;
      }
    }
  }

  // Worlds, point, and edges.
  auto model = std::make_shared<Model>();
  model->domain = dom;
  int point = -1;
  {
    const SNode* edges_node = nullptr;
    std::vector<const SNode*> world_nodes;
    std::vector<bool> actual_flags;
    for (size_t i = 1; i < init_node->items.size(); ++i) {
      const SNode& item = list_of(init_node->items[i], "an :init entry");
      if (item.items.empty()) fail(item, "empty :init entry");
      if (is_kw(item.items[0], ":actual_world") ||
          is_kw(item.items[0], ":world")) {
        world_nodes.push_back(&item);
        actual_flags.push_back(is_kw(item.items[0], ":actual_world"));
      } else if (is_kw(item.items[0], ":edges")) {
        if (edges_node) fail(item, "duplicate :edges");
        edges_node = &item;
      } else {
        fail(item.items[0], "unknown :init entry");
      }
    }
    if (world_nodes.empty()) fail(*init_node, "no worlds declared");
    for (size_t i = 0; i < world_nodes.size(); ++i) {
      if (actual_flags[i]) {
        if (point >= 0) fail(*world_nodes[i], "more than one :actual_world");
        point = static_cast<int>(i);
      }
      parse_world(*world_nodes[i], t, *model, *dom);
    }
    if (point < 0) fail(*init_node, "no :actual_world declared");
    model->init_relations();
    if (edges_node) parse_edges(*edges_node, *model, *dom);
    else
      for (int a = 0; a < dom->agent_count(); ++a)
        for (int w = 0; w < static_cast<int>(model->worlds.size()); ++w)
          model->rel[a].insert({w, w});
  }
  t.planning.initial = {model, point};
  t.planning.schemas = domain.schemas;

  // Goal: a closed static formula.
  {
    Scope sc;
    sc.sig = &sig;
    sc.types = &domain.types;
    t.planning.goal = parse_formula_node(*goal_node, sc);
  }
  return t;
}

Task load_task(const std::string& domain_text, const std::string& problem_text) {
  DomainFile df = parse_domain(domain_text);
  return parse_problem(problem_text, df);
}

Formula parse_formula(const std::string& text, const Task& task) {
  std::vector<SNode> nodes = read_all(text);
  if (nodes.size() != 1) throw ParseError("expected a single formula", 1, 1);
  Scope sc;
  sc.sig = &task.planning.sig;
  sc.types = &task.domain.types;
  sc.task = &task;
  return parse_formula_node(nodes[0], sc);
}

Plan parse_plan(const std::string& text, const Task& task) {
  std::vector<SNode> nodes = read_all(text);
  if (nodes.size() != 1 || !nodes[0].list)
    throw ParseError("expected a plan list", 1, 1);
  Plan plan;
  for (const SNode& step : nodes[0].items) {
    const SNode& s = list_of(step, "a plan step");
    if (s.items.empty()) fail(s, "empty plan step");
    const std::string& name = sym_of(s.items[0], "an action name");
    std::vector<std::string> args;
    std::string event;
    for (size_t i = 1; i < s.items.size(); ++i) {
      const std::string& tok = sym_of(s.items[i], "an argument");
      if (tok[0] == '@') {
        if (i + 1 != s.items.size()) fail(s.items[i], "@event must come last");
        event = tok.substr(1);
        if (event.empty()) fail(s.items[i], "empty event name");
      } else {
        args.push_back(tok);
      }
    }
    try {
      plan.push_back(resolve_action(task.planning, name, args, event));
    } catch (const Error& e) {
      fail(s, e.what());
    }
  }
  return plan;
}

ActionRef parse_action_ref(const std::string& text) {
  ActionRef ref;
  size_t i = 0;
  auto bad = [&](const std::string& msg) -> void {
    throw ParseError(msg, 1, static_cast<int>(i) + 1);
  };
  while (i < text.size() && text[i] != '(' && text[i] != '@')
    ref.name.push_back(text[i++]);
  while (!ref.name.empty() && ref.name.back() == ' ') ref.name.pop_back();
  if (ref.name.empty()) bad("missing action name");
  if (i < text.size() && text[i] == '(') {
    ++i;
    std::string cur;
    bool closed = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (c == ')') {
        closed = true;
        ++i;
        break;
      }
      if (c == ',') {
        if (cur.empty()) bad("empty argument");
        ref.args.push_back(cur);
        cur.clear();
      } else if (c != ' ') {
        cur.push_back(c);
      }
    }
    if (!closed) bad("missing ')'");
    if (!cur.empty()) ref.args.push_back(cur);
    else if (!ref.args.empty()) bad("empty argument");
  }
  if (i < text.size() && text[i] == '@') {
    ref.event = text.substr(i + 1);
    if (ref.event.empty()) bad("empty event name");
    i = text.size();
  }
  if (i != text.size()) bad("unexpected trailing text");
  return ref;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string root_type_name(Sort s) {
  return s == Sort::Agt ? "agent_id" : "object_id";
}

void write_post(std::ostream& os, const PostMap& pm) {
  if (pm.entries.empty()) {
    os << "(id)";
    return;
  }
  os << "(";
  bool first = true;
  for (const auto& [atom, cond] : pm.entries) {
    if (!first) os << " ";
    first = false;
    os << "(" << atom.rel();
    for (const Term& t : atom.terms()) os << " " << to_string(t);
    os << " if " << to_string(cond) << ")";
  }
  os << ")";
}

}  // namespace

std::string serialize_domain(const DomainFile& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.types.empty()) {
    os << "  (:types";
    for (const TypeDecl& t : d.types) {
      os << "\n    " << t.name;
      if (!t.parent.empty()) os << " - " << t.parent;
    }
    os << ")\n";
  }
  if (!d.predicates.empty()) {
    os << "  (:predicates";
    for (const PredicateDecl& p : d.predicates) {
      os << "\n    (" << p.name;
      for (size_t i = 0; i < p.arg_types.size(); ++i)
        os << " ?x" << i + 1 << " - " << p.arg_types[i];
      os << ")";
    }
    os << ")\n";
  }
  for (const ActionSchema& s : d.schemas) {
    os << "  (:action " << s.name << "\n";
    const SchemaParam& agent = s.params.front();
    std::string agent_type = agent.subtype.empty()
                                 ? root_type_name(agent.var.sort())
                                 : agent.subtype;
    os << "    :agent " << to_string(agent.var) << " - " << agent_type << "\n";
    os << "    :parameters (";
    for (size_t i = 1; i < s.params.size(); ++i) {
      if (i > 1) os << " ";
      std::string ty = s.params[i].subtype.empty()
                           ? root_type_name(s.params[i].var.sort())
                           : s.params[i].subtype;
      os << to_string(s.params[i].var) << " - " << ty;
    }
    os << ")\n";
    for (size_t e = 0; e < s.events.size(); ++e) {
      os << "    (" << (s.events[e] == s.actual ? ":actual_event" : ":event")
         << " " << s.events[e] << "\n";
      os << "      :precondition " << to_string(s.pres[e]) << "\n";
      os << "      :postcondition ";
      write_post(os, s.posts[e]);
      os << ")\n";
    }
    os << "    (:edge-conditions";
    for (size_t a = 0; a < s.events.size(); ++a)
      for (size_t b = 0; b < s.events.size(); ++b)
        os << "\n      :" << s.events[a] << " -> " << s.events[b] << " "
           << to_string(s.edges[a][b]);
    os << "))\n";
  }
  os << ")\n";
  return os.str();
}

std::string serialize_problem(const Task& t) {
  return serialize_problem(t, t.planning.initial);
}

std::string serialize_problem(const Task& t, const PointedModel& state) {
  const Model& m = *state.model;
  const Domain& dom = *m.domain;
  std::ostringstream os;
  os << "(define (problem " << t.problem_name << ")\n";
  os << "  (:domain " << t.domain_name << ")\n";
  os << "  (:universe";
  for (const auto& [name, type] : t.universe) os << "\n    " << name << " - " << type;
  os << ")\n";
  os << "  (:constants";
  for (const auto& [name, type] : t.constant_types)
    os << "\n    " << name << " - " << type;
  os << ")\n";
  os << "  (:init\n";
  for (size_t w = 0; w < m.worlds.size(); ++w) {
    const World& world = m.worlds[w];
    if (!world.funcs.empty())
      throw Error("functions are not supported in problem files");
    os << "    (" << (static_cast<int>(w) == state.world ? ":actual_world"
                                                         : ":world")
       << " " << world.name << "\n";
    os << "      :constant_map (";
    bool first = true;
    for (const auto& [c, s] : t.planning.sig.constants) {
      if (!first) os << " ";
      first = false;
      os << "(" << c << " " << dom.name(world.consts.at(c)) << ")";
    }
    os << ")\n";
    os << "      :atoms (";
    first = true;
    for (const auto& [rel, tuples] : world.rels) {
      for (const auto& tuple : tuples) {
        if (!first) os << " ";
        first = false;
        os << "(" << rel;
        for (Elem e : tuple) os << " " << dom.name(e);
        os << ")";
      }
    }
    os << "))\n";
  }
  os << "    (:edges";
  for (int a = 0; a < dom.agent_count(); ++a) {
    os << "\n      :" << dom.name(a) << " (:raw";
    for (const auto& [x, y] : m.rel[a])
      os << " (" << m.worlds[x].name << " -> " << m.worlds[y].name << ")";
    os << ")";
  }
  os << "))\n";
  os << "  (:goal " << to_string(t.planning.goal) << ")\n";
  os << ")\n";
  return os.str();
}

std::string serialize_plan(const Plan& p) {
  if (p.empty()) return "()\n";
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < p.size(); ++i) {
    if (i > 0) os << "\n ";
    os << "(" << p[i].schema;
    for (const std::string& a : p[i].args) os << " " << a;
    os << " @" << p[i].event << ")";
  }
  os << ")\n";
  return os.str();
}

}  // namespace termplan

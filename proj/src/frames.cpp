#include "termplan/frames.hpp"

#include <algorithm>
#include <sstream>

namespace termplan {

namespace {

using RelSet = std::set<std::pair<int, int>>;

bool rel_reflexive(const RelSet& r, int w) {
  for (int i = 0; i < w; ++i)
    if (!r.count({i, i})) return false;
  return true;
}

bool rel_serial(const RelSet& r, int w) {
  for (int i = 0; i < w; ++i) {
    bool out = false;
    for (int j = 0; j < w && !out; ++j) out = r.count({i, j}) > 0;
    if (!out) return false;
  }
  return true;
}

bool rel_transitive(const RelSet& r, int) {
  for (const auto& [a, b] : r)
    for (const auto& [b2, c] : r)
      if (b == b2 && !r.count({a, c})) return false;
  return true;
}

bool rel_euclidean(const RelSet& r, int) {
  for (const auto& [a, b] : r)
    for (const auto& [a2, c] : r)
      if (a == a2 && !r.count({b, c})) return false;
  return true;
}

bool rel_has_property(FrameKind k, const RelSet& r, int w) {
  switch (k) {
    case FrameKind::T: return rel_reflexive(r, w);
    case FrameKind::D: return rel_serial(r, w);
    case FrameKind::Four: return rel_transitive(r, w);
    case FrameKind::Five: return rel_euclidean(r, w);
  }
  return false;
}

std::vector<Formula> pairwise_neq(const std::vector<Term>& vars) {
  std::vector<Formula> out;
  for (size_t i = 0; i < vars.size(); ++i)
    for (size_t j = i + 1; j < vars.size(); ++j)
      out.push_back(f_neq(vars[i], vars[j]));
  return out;
}

Formula exists_chain(const std::vector<Term>& vars, Formula body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it)
    body = f_exists(*it, body);
  return body;
}

std::string describe_rel(const Model& m, Elem agent) {
  std::ostringstream os;
  os << "R[" << m.domain->name(agent) << "]={";
  bool first = true;
  for (const auto& [a, b] : m.rel[agent]) {
    if (!first) os << ",";
    first = false;
    os << "(" << m.worlds[a].name << "," << m.worlds[b].name << ")";
  }
  os << "}";
  return os.str();
}

std::string describe_model(const Model& m, int interp_mask) {
  std::ostringstream os;
  os << "agents=" << m.domain->agent_count() << " worlds=" << m.worlds.size();
  for (Elem a = 0; a < m.domain->agent_count(); ++a)
    os << " " << describe_rel(m, a);
  if (interp_mask >= 0) {
    os << " p@{";
    bool first = true;
    for (size_t w = 0; w < m.worlds.size(); ++w)
      if (interp_mask >> w & 1) {
        if (!first) os << ",";
        first = false;
        os << m.worlds[w].name;
      }
    os << "}";
  }
  return os.str();
}

Model blank_model(int agents, int objects, int worlds) {
  auto dom = std::make_shared<Domain>();
  for (int i = 0; i < agents; ++i) dom->agents.push_back("A" + std::to_string(i + 1));
  for (int i = 0; i < objects; ++i) dom->objects.push_back("O" + std::to_string(i + 1));
  Model m;
  m.domain = dom;
  for (int i = 0; i < worlds; ++i) m.worlds.push_back({"w" + std::to_string(i), {}, {}, {}});
  m.init_relations();
  return m;
}

struct Budget {
  std::uint64_t used = 0;
  std::uint64_t limit = 0;
  void charge(std::uint64_t n) {
    used += n;
    if (used > limit)
      throw EnumerationBudgetExceeded("enumeration budget exhausted");
  }
};

}  // namespace

bool FrameReport::all_reflexive() const {
  return std::all_of(reflexive.begin(), reflexive.end(),
                     [](const auto& kv) { return kv.second; });
}
bool FrameReport::all_serial() const {
  return std::all_of(serial.begin(), serial.end(),
                     [](const auto& kv) { return kv.second; });
}
bool FrameReport::all_transitive() const {
  return std::all_of(transitive.begin(), transitive.end(),
                     [](const auto& kv) { return kv.second; });
}
bool FrameReport::all_euclidean() const {
  return std::all_of(euclidean.begin(), euclidean.end(),
                     [](const auto& kv) { return kv.second; });
}

FrameReport frame_properties(const Model& m) {
  FrameReport r;
  r.agent_count = m.domain->agent_count();
  r.object_count = static_cast<int>(m.domain->objects.size());
  r.world_count = static_cast<int>(m.worlds.size());
  int w = r.world_count;
  for (Elem a = 0; a < r.agent_count; ++a) {
    const std::string& name = m.domain->name(a);
    r.reflexive[name] = rel_reflexive(m.rel[a], w);
    r.serial[name] = rel_serial(m.rel[a], w);
    r.transitive[name] = rel_transitive(m.rel[a], w);
    r.euclidean[name] = rel_euclidean(m.rel[a], w);
  }
  return r;
}

const char* frame_kind_name(FrameKind k) {
  switch (k) {
    case FrameKind::T: return "T";
    case FrameKind::D: return "D";
    case FrameKind::Four: return "4";
    case FrameKind::Five: return "5";
  }
  return "?";
}

Formula characterization_formula(FrameKind k, const Formula& phi) {
  std::set<std::string> avoid;
  for (const auto& [name, sort] : free_vars(phi)) avoid.insert(name);
  Term x = Term::var(avoid.count("x") ? fresh_name("x", avoid) : "x", Sort::Agt);
  Formula kx = f_knows(x, phi);
  switch (k) {
    case FrameKind::T:
      return f_forall(x, f_implies(kx, phi));
    case FrameKind::D:
      return f_forall(x, f_not(f_knows(x, f_bottom())));
    case FrameKind::Four:
      return f_forall(x, f_implies(kx, f_knows(x, kx)));
    case FrameKind::Five:
      return f_forall(x, f_implies(f_not(kx), f_knows(x, f_not(kx))));
  }
  throw Error("unknown frame kind");
}

Formula domain_size_agents(int n) {
  if (n < 1) throw Error("agent count sentence needs n >= 1");
  std::vector<Term> xs;
  for (int i = 1; i <= n; ++i)
    xs.push_back(Term::var("x" + std::to_string(i), Sort::Agt));
  std::vector<Formula> conj;
  for (const Term& x : xs) conj.push_back(f_knows(x, f_top()));
  for (Formula& f : pairwise_neq(xs)) conj.push_back(f);
  Term y = Term::var("y", Sort::Agt);
  std::vector<Formula> eqs;
  for (const Term& x : xs) eqs.push_back(f_eq(y, x));
  conj.push_back(f_forall(y, f_implies(f_knows(y, f_top()), f_or(eqs))));
  return exists_chain(xs, f_and(conj));
}

Formula domain_size_total(int m) {
  if (m < 2) throw Error("combined count sentence needs m >= 2");
  std::vector<Formula> splits;
  for (int k = 1; k <= m - 1; ++k) {
    std::vector<Term> as, os;
    for (int i = 1; i <= k; ++i)
      as.push_back(Term::var("x" + std::to_string(i), Sort::Agt));
    for (int i = 1; i <= m - k; ++i)
      os.push_back(Term::var("z" + std::to_string(i), Sort::Obj));
    std::vector<Formula> conj;
    for (Formula& f : pairwise_neq(as)) conj.push_back(f);
    for (Formula& f : pairwise_neq(os)) conj.push_back(f);
    Term y = Term::var("y", Sort::Agt);
    std::vector<Formula> yeqs;
    for (const Term& a : as) yeqs.push_back(f_eq(y, a));
    conj.push_back(f_forall(y, f_or(yeqs)));
    Term u = Term::var("u", Sort::Obj);
    std::vector<Formula> ueqs;
    for (const Term& o : os) ueqs.push_back(f_eq(u, o));
    conj.push_back(f_forall(u, f_or(ueqs)));
    splits.push_back(exists_chain(as, exists_chain(os, f_and(conj))));
  }
  return f_or(splits);
}

namespace {

Sort unary_arg_sort(const std::string& relation, const Signature& sig) {
  const auto* slots = sig.relation_type(relation);
  if (!slots) throw UnknownSymbolError("unknown relation: " + relation);
  if (slots->size() != 1)
    throw Error("relation must be unary: " + relation);
  switch ((*slots)[0]) {
    case ArgSort::Agt: return Sort::Agt;
    case ArgSort::Obj: return Sort::Obj;
    case ArgSort::Any:
      throw Error("relation argument must carry a sort: " + relation);
  }
  throw Error("unknown argument sort");
}

}  // namespace

Formula rigidity_formula(const std::string& relation, const Signature& sig) {
  Term x = Term::var("x", unary_arg_sort(relation, sig));
  Term y = Term::var("y", Sort::Agt);
  Formula rx = f_atom(relation, {x});
  return f_forall(x, f_iff(rx, f_forall(y, f_knows(y, rx))));
}

Formula rigidity_formula_const(const std::string& constant,
                               const Signature& sig) {
  Term a = Term::constant(constant, sig);
  Term x = Term::var("x", a.sort());
  Term y = Term::var("y", Sort::Agt);
  return f_exists(x, f_and({f_eq(x, a), f_forall(y, f_knows(y, f_eq(x, a)))}));
}

bool rigid_relation_condition(const Model& m, const std::string& relation,
                              const Signature& sig) {
  const auto* slots = sig.relation_type(relation);
  if (!slots) throw UnknownSymbolError("unknown relation: " + relation);
  if (slots->size() != 1) throw Error("relation must be unary: " + relation);
  std::set<std::vector<Elem>> full;
  for (int e = 0; e < m.domain->size(); ++e)
    if (admits((*slots)[0], m.domain->sort_of(e))) full.insert({e});

  auto ext = [&](int w) -> std::set<std::vector<Elem>> {
    auto it = m.worlds[w].rels.find(relation);
    return it == m.worlds[w].rels.end() ? std::set<std::vector<Elem>>{}
                                        : it->second;
  };

  int n = static_cast<int>(m.worlds.size());
  for (int w = 0; w < n; ++w) {
    std::set<std::vector<Elem>> inter = full;
    bool has_succ = false;
    for (Elem a = 0; a < m.domain->agent_count(); ++a) {
      for (const auto& [s, t] : m.rel[a]) {
        if (s != w) continue;
        has_succ = true;
        std::set<std::vector<Elem>> next = ext(t);
        std::set<std::vector<Elem>> keep;
        for (const auto& tuple : inter)
          if (next.count(tuple)) keep.insert(tuple);
        inter = std::move(keep);
      }
    }
    if (!has_succ) inter = full;
    if (ext(w) != inter) return false;
  }
  return true;
}

bool rigid_constant_condition(const Model& m, const std::string& constant) {
  auto value = [&](int w) {
    auto it = m.worlds[w].consts.find(constant);
    if (it == m.worlds[w].consts.end())
      throw UnknownSymbolError("constant not interpreted: " + constant);
    return it->second;
  };
  for (Elem a = 0; a < m.domain->agent_count(); ++a)
    for (const auto& [s, t] : m.rel[a])
      if (value(s) != value(t)) return false;
  return true;
}

Formula guarded_four(const std::string& relation, const Signature& sig,
                     const Formula& phi) {
  Sort s = unary_arg_sort(relation, sig);
  if (s != Sort::Agt)
    throw SortMismatchError("guard relation must range over agents: " +
                            relation);
  std::set<std::string> avoid;
  for (const auto& [name, sort] : free_vars(phi)) avoid.insert(name);
  Term x = Term::var(avoid.count("x") ? fresh_name("x", avoid) : "x", Sort::Agt);
  Formula kx = f_knows(x, phi);
  return f_forall(
      x, f_implies(f_atom(relation, {x}), f_implies(kx, f_knows(x, kx))));
}

Formula constant_four(const std::string& constant, const Signature& sig,
                      const Formula& phi) {
  Term a = Term::constant(constant, sig);
  if (a.sort() != Sort::Agt)
    throw SortMismatchError("modal index must be an agent constant: " +
                            constant);
  Formula ka = f_knows(a, phi);
  return f_implies(ka, f_knows(a, ka));
}

CharacterizationReport check_characterization(FrameKind k,
                                              const EnumerationSpec& spec) {
  CharacterizationReport report;
  report.kind = frame_kind_name(k);
  if (spec.max_agents < 1 || spec.max_worlds < 1 || spec.objects < 1)
    throw Error("enumeration bounds must be positive");

  Formula p = f_atom("p", {});
  Formula axiom = characterization_formula(k, p);
  Budget budget{0, spec.budget};

  try {
    for (int agents = 1; agents <= spec.max_agents; ++agents) {
      for (int worlds = 1; worlds <= spec.max_worlds; ++worlds) {
        Model model = blank_model(agents, spec.objects, worlds);
        int bits = worlds * worlds;
        std::vector<std::uint32_t> masks(agents, 0);
        while (true) {
          ++report.frames_checked;
          bool prop = true;
          for (int a = 0; a < agents; ++a) {
            model.rel[a].clear();
            for (int b = 0; b < bits; ++b)
              if (masks[a] >> b & 1)
                model.rel[a].insert({b / worlds, b % worlds});
            prop = prop && rel_has_property(k, model.rel[a], worlds);
          }

          bool all_valid = true;
          int bad_interp = -1;
          for (int interp = 0; interp < (1 << worlds); ++interp) {
            for (int w = 0; w < worlds; ++w) {
              if (interp >> w & 1)
                model.worlds[w].rels["p"] = {{}};
              else
                model.worlds[w].rels.erase("p");
            }
            budget.charge(static_cast<std::uint64_t>(worlds));
            ++report.models_checked;
            if (!valid_on_model(model, axiom)) {
              all_valid = false;
              bad_interp = interp;
              break;
            }
          }

          if (prop && !all_valid) {
            report.sound = false;
            report.detail = "axiom fails on a frame with the property: " +
                            describe_model(model, bad_interp);
            return report;
          }
          if (!prop && all_valid) {
            report.complete = false;
            report.detail = "axiom is valid on a frame without the property: " +
                            describe_model(model, -1);
            return report;
          }

          int i = agents;
          while (i > 0 && ++masks[i - 1] == (1u << bits)) masks[--i] = 0;
          if (i == 0) break;
        }
      }
    }
  } catch (const EnumerationBudgetExceeded&) {
    report.inconclusive = true;
    report.detail = "enumeration budget exhausted";
  }
  return report;
}

CharacterizationReport check_domain_size(int count, bool total,
                                         const EnumerationSpec& spec) {
  CharacterizationReport report;
  report.kind = total ? "M" : "N";
  if (spec.max_agents < 1 || spec.max_worlds < 1 || spec.objects < 1)
    throw Error("enumeration bounds must be positive");

  Formula sentence = total ? domain_size_total(count) : domain_size_agents(count);
  Budget budget{0, spec.budget};

  try {
    for (int agents = 1; agents <= spec.max_agents; ++agents) {
      for (int objects = 1; objects <= spec.objects; ++objects) {
        for (int worlds = 1; worlds <= spec.max_worlds; ++worlds) {
          for (int structure = 0; structure < 3; ++structure) {
            Model model = blank_model(agents, objects, worlds);
            for (int a = 0; a < agents; ++a) {
              for (int i = 0; i < worlds; ++i) {
                if (structure == 1) model.rel[a].insert({i, i});
                if (structure == 2)
                  for (int j = 0; j < worlds; ++j) model.rel[a].insert({i, j});
              }
            }
            ++report.frames_checked;
            ++report.models_checked;
            budget.charge(static_cast<std::uint64_t>(worlds));
            bool expected =
                total ? agents + objects == count : agents == count;
            bool valid = valid_on_model(model, sentence);
            if (expected && !valid) {
              report.sound = false;
              report.detail = "sentence fails on a matching domain: " +
                              describe_model(model, -1);
              return report;
            }
            if (!expected && valid) {
              report.complete = false;
              report.detail = "sentence holds on a mismatched domain: " +
                              describe_model(model, -1);
              return report;
            }
          }
        }
      }
    }
  } catch (const EnumerationBudgetExceeded&) {
    report.inconclusive = true;
    report.detail = "enumeration budget exhausted";
  }
  return report;
}

PointedModel nonrigid_counterexample(Signature& sig) {
  sig.add_constant("a", Sort::Agt);
  sig.add_constant("b", Sort::Agt);
  sig.add_constant("c", Sort::Agt);

  auto dom = std::make_shared<Domain>();
  dom->agents = {"alpha", "beta"};
  dom->objects = {"o1"};

  auto model = std::make_shared<Model>();
  model->domain = dom;
  model->worlds = {
      {"w0", {{"a", 0}, {"b", 1}, {"c", 0}}, {}, {}},
      {"w1", {{"a", 0}, {"b", 1}, {"c", 1}}, {}, {}},
      {"w2", {{"a", 0}, {"b", 1}, {"c", 0}}, {}, {}},
  };
  model->init_relations();
  model->rel[0].insert({0, 1});
  model->rel[1].insert({1, 2});
  return {model, 0};
}

}  // namespace termplan

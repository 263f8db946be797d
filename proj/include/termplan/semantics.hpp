#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "termplan/syntax.hpp"

// First-order Kripke models over a two-sorted constant domain and the
// satisfaction relation, including the dynamic clause.

namespace termplan {

// Domain elements are interned: agents first (0..|A|-1), then objects.
using Elem = int;

struct Domain {
  std::vector<std::string> agents;
  std::vector<std::string> objects;

  int size() const { return static_cast<int>(agents.size() + objects.size()); }
  int agent_count() const { return static_cast<int>(agents.size()); }
  bool is_agent(Elem e) const { return e >= 0 && e < agent_count(); }
  Sort sort_of(Elem e) const { return is_agent(e) ? Sort::Agt : Sort::Obj; }
  const std::string& name(Elem e) const {
    return is_agent(e) ? agents[e] : objects[e - agent_count()];
  }
  std::optional<Elem> find(const std::string& n) const;
  std::vector<Elem> elems(Sort s) const;
};

using DomainPtr = std::shared_ptr<const Domain>;

// Per-world interpretation. Constants must be total, functions may be partial.
struct World {
  std::string name;
  std::map<std::string, Elem> consts;
  std::map<std::string, std::set<std::vector<Elem>>> rels;
  std::map<std::string, std::map<std::vector<Elem>, Elem>> funcs;
};

struct Model {
  DomainPtr domain;
  std::vector<World> worlds;
  // Accessibility per agent element, as ordered pairs of world indices.
  std::vector<std::set<std::pair<int, int>>> rel;

  void init_relations() { rel.assign(domain->agent_count(), {}); }
  std::optional<int> world_index(const std::string& name) const;
  bool edge(Elem agent, int w, int w2) const {
    return rel[agent].count({w, w2}) > 0;
  }
  std::vector<int> successors(Elem agent, int w) const;
};

using ModelPtr = std::shared_ptr<const Model>;

struct PointedModel {
  ModelPtr model;
  int world = 0;
  const World& point() const { return model->worlds[world]; }
};

// Sparse valuation; looking up an unbound variable is an error.
using Valuation = std::map<std::string, Elem>;

// ---------------------------------------------------------------------------

// Term extension at a world. Undefined function values propagate as nullopt.
std::optional<Elem> extension(const Term& t, const Model& m, int w,
                              const Valuation& v);

bool satisfies(const Model& m, int w, const Valuation& v, const Formula& f);
bool satisfies(const PointedModel& s, const Formula& f, const Valuation& v = {});

// True iff f holds at every world under every valuation of its free variables.
bool valid_on_model(const Model& m, const Formula& f);

// Checks every structural model invariant; with formulas given, additionally
// flags ground terms whose extension is undefined at some world.
Report validate_model(const Model& m, const Signature& sig,
                      const std::vector<Formula>& formulas = {});

// Enumerates all sort-respecting valuations of vars, in lexicographic order
// by variable name then element id.
void for_each_valuation(const Domain& d, const std::map<std::string, Sort>& vars,
                        const std::function<void(const Valuation&)>& fn);

// ---------------------------------------------------------------------------
// Isomorphism of models over the same domain: a world bijection preserving
// interpretations, accessibility, and (when given) the designated point.

std::string canonical_key(const Model& m, int point = -1);
bool is_isomorphic(const Model& a, const Model& b, int point_a = -1,
                   int point_b = -1);

}  // namespace termplan

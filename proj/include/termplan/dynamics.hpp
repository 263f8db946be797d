#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "termplan/semantics.hpp"
#include "termplan/syntax.hpp"

// Edge-conditioned action models, schemas, grounding, product update, and
// action composition.

namespace termplan {

struct NotApplicableError : Error { using Error::Error; };
struct EmptyUpdateError : Error { using Error::Error; };
struct IncompleteSubstitutionError : Error { using Error::Error; };
struct UnknownActionError : Error { using Error::Error; };

// Sparse postcondition table for one event, sorted by the atom's printed form.
// Atoms outside the table keep their truth value (identity).
struct PostMap {
  std::vector<std::pair<Formula, Formula>> entries;
  const Formula* find(const Formula& atom) const;
};

struct ActionModel {
  std::string label;  // display only; not part of equality
  std::vector<std::string> events;
  std::vector<Formula> pres;            // parallel to events
  std::vector<PostMap> posts;           // parallel to events
  std::vector<std::vector<Formula>> edges;  // edges[from][to]

  // Normalizes every formula into the reduction basis, sorts postcondition
  // tables, and drops redundant diagonal-equality entries. Throws Error on
  // shape mismatches (wrong table sizes); logical violations are left for
  // validate_action to report.
  static ActionPtr create(std::string label, std::vector<std::string> events,
                          std::vector<Formula> pres, std::vector<PostMap> posts,
                          std::vector<std::vector<Formula>> edges);

  int event_index(const std::string& e) const;
  const Formula& pre_of(const std::string& e) const;
  const PostMap& post_of(const std::string& e) const;
  const Formula& edge_of(int from, int to) const { return edges[from][to]; }
};

size_t action_hash(const ActionModel& a);
std::string action_label(const ActionModel& a);
bool action_has_event(const ActionModel& a, const std::string& event);

struct PointedAction {
  ActionPtr action;
  std::string event;
};

struct SchemaParam {
  Term var;             // a Var term carrying the root sort
  std::string subtype;  // dsl-level type tag; empty = whole sort
};

// Parameterized action. The first parameter is the acting agent by file
// convention; nothing below depends on it.
struct ActionSchema {
  std::string name;
  std::vector<SchemaParam> params;
  std::string actual;  // designated event
  std::vector<std::string> events;
  std::vector<Formula> pres;
  std::vector<PostMap> posts;
  std::vector<std::vector<Formula>> edges;
};

// Constant names per dsl subtype, in declaration order.
using SubtypeTable = std::map<std::string, std::vector<std::string>>;

// Parameter name → constant term.
using GroundingSubstitution = std::map<std::string, Term>;

struct GroundAction {
  std::string schema;
  std::vector<std::string> args;  // constant names, parameter order
  ActionPtr action;
  std::string event;
  std::string display() const;  // Name(c1,c2)@event
};

// ---------------------------------------------------------------------------

Report validate_action(const ActionModel& a, const Signature& sig);
Report validate_action(const ActionSchema& s, const Signature& sig);

bool applicable(const PointedModel& s, const PointedAction& a);

// Product update M ⊗ A. Throws EmptyUpdateError when no (world, event) pair
// survives the preconditions. index_out, when given, receives the map from
// surviving (world index, event index) pairs to new world indices.
ModelPtr product_update(const Model& m, const ActionModel& a,
                        std::map<std::pair<int, int>, int>* index_out = nullptr);

// Pointed update; throws NotApplicableError unless applicable.
PointedModel update_pointed(const PointedModel& s, const PointedAction& a);

ActionPtr instantiate(const ActionSchema& s, const GroundingSubstitution& sigma,
                      const Signature& sig);

// All sort-respecting groundings, lexicographic by (parameter order, constant
// declaration order); the subtype table, when given, restricts candidates.
std::vector<ActionPtr> ground_all(const ActionSchema& s, const Signature& sig,
                                  const SubtypeTable* table = nullptr);
std::vector<GroundAction> ground_actions(const ActionSchema& s,
                                         const Signature& sig,
                                         const SubtypeTable* table = nullptr);

PointedAction compose(const PointedAction& a, const PointedAction& b);

}  // namespace termplan

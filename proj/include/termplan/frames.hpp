#pragma once

#include "termplan/semantics.hpp"
#include "termplan/syntax.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>

namespace termplan {

// Thrown when an enumeration-based check exhausts its evaluation budget.
struct EnumerationBudgetExceeded : Error {
  using Error::Error;
};

// Relational properties of a model's accessibility relations, per agent.
struct FrameReport {
  std::map<std::string, bool> reflexive;
  std::map<std::string, bool> serial;
  std::map<std::string, bool> transitive;
  std::map<std::string, bool> euclidean;
  int agent_count = 0;
  int object_count = 0;
  int world_count = 0;

  bool all_reflexive() const;
  bool all_serial() const;
  bool all_transitive() const;
  bool all_euclidean() const;
};

FrameReport frame_properties(const Model& m);

enum class FrameKind { T, D, Four, Five };

const char* frame_kind_name(FrameKind k);

// Quantified axiom schema instance for the given frame kind. The supplied
// formula is the schema's body; it is ignored for D, whose axiom mentions
// no body formula. Bound variables are freshened against the body.
Formula characterization_formula(FrameKind k, const Formula& phi);

// Sentence valid exactly on models with n agents. Uses knowledge-operator
// guards so the count constrains the agent sort.
Formula domain_size_agents(int n);

// Sentence valid exactly on models whose combined domain has m elements,
// built as a disjunction over agent/object splits.
Formula domain_size_total(int m);

// Interpretation-invariance sentences. The relation form takes a unary
// relation; the constant form takes a declared constant.
Formula rigidity_formula(const std::string& relation, const Signature& sig);
Formula rigidity_formula_const(const std::string& constant,
                               const Signature& sig);

// Semantic counterparts checked directly on a model. The relation condition
// is a fixpoint equality: in every world, the relation's extension equals
// the intersection of its extensions at all worlds reachable in one step by
// any agent (the full sort if there is no successor). The constant
// condition requires the constant's value to be unchanged along every
// directed edge of every agent.
bool rigid_relation_condition(const Model& m, const std::string& relation,
                              const Signature& sig);
bool rigid_constant_condition(const Model& m, const std::string& constant);

// Per-group variants of the transitivity axiom: membership-guarded and
// constant-indexed. Constructible for experimentation; neither is claimed
// to pin down a frame condition.
Formula guarded_four(const std::string& relation, const Signature& sig,
                     const Formula& phi);
Formula constant_four(const std::string& constant, const Signature& sig,
                      const Formula& phi);

struct EnumerationSpec {
  int max_agents = 2;
  int max_worlds = 3;
  int objects = 1;
  std::uint64_t budget = 200000000;
};

struct CharacterizationReport {
  std::string kind;
  std::uint64_t frames_checked = 0;
  std::uint64_t models_checked = 0;
  bool sound = true;
  bool complete = true;
  bool inconclusive = false;
  std::string detail;

  bool confirmed() const { return sound && complete && !inconclusive; }
};

// Exhaustively checks both directions of a frame correspondence over all
// frames within the enumeration bounds, instantiating the schema body with a
// nullary relation letter and enumerating its interpretations. Budget
// exhaustion is reported as inconclusive rather than thrown.
CharacterizationReport check_characterization(FrameKind k,
                                              const EnumerationSpec& spec);

// Checks the agent-count sentence (total=false, parameter n) or the
// combined-count sentence (total=true, parameter m) against enumerated
// models of every size within bounds.
CharacterizationReport check_domain_size(int count, bool total,
                                         const EnumerationSpec& spec);

// Three-world model with non-rigid constants on which the unquantified,
// constant-indexed transitivity axiom fails even though every relation is
// transitive. Returns the model pointed at its first world and fills the
// signature used to build it.
PointedModel nonrigid_counterexample(Signature& sig);

}  // namespace termplan

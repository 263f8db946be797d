#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "termplan/dynamics.hpp"
#include "termplan/semantics.hpp"
#include "termplan/syntax.hpp"

// Epistemic planning tasks, the induced transition system, bounded search and
// plan verification.

namespace termplan {

struct PlanningTask {
  Signature sig;
  SubtypeTable subtypes;
  PointedModel initial;
  std::vector<ActionSchema> schemas;
  Formula goal;  // static sentence
};

using Plan = std::vector<GroundAction>;

struct SearchConfig {
  int max_depth = 0;  // mandatory bound; plan length never exceeds it
  enum class Strategy { Bfs, Iddfs } strategy = Strategy::Bfs;
  enum class Dedup { None, Isomorphism } dedup = Dedup::Isomorphism;
  // Optional ground-action filter; actions rejected here are never applied.
  std::function<bool(const GroundAction&)> allow;
};

struct VerifyResult {
  bool valid = false;
  std::vector<PointedModel> trace;  // initial state, then one per applied step
  std::string failure;              // set when invalid
};

// γ: update when applicable, undefined otherwise.
std::optional<PointedModel> transition(const PointedModel& s,
                                       const PointedAction& a);

bool goal_holds(const PointedModel& s, const Formula& goal);

// Resolves a named ground action against the task's schemas; throws
// UnknownActionError if no schema matches, SortMismatch on bad arguments.
// An empty event name selects the schema's designated event.
GroundAction resolve_action(const PlanningTask& task, const std::string& name,
                            const std::vector<std::string>& args,
                            const std::string& event = "");

// All ground instances of the task's schemas, sorted by (schema name,
// constant tuple in declaration order); cfg-filtered.
std::vector<GroundAction> task_actions(const PlanningTask& task,
                                       const std::function<bool(const GroundAction&)>& allow = {});

// Valid iff every prefix transition is defined and the final state satisfies
// the goal. Cross-checks the outcome by model checking nested dynamic
// modalities at the initial state; disagreement raises Error.
VerifyResult verify_plan(const PlanningTask& task, const Plan& plan);

// Shortest solution within cfg.max_depth, deterministic lexicographic
// tie-break; nullopt when no plan within the bound (not a non-existence proof).
std::optional<Plan> find_plan(const PlanningTask& task, const SearchConfig& cfg);

std::string plan_to_string(const Plan& plan);

}  // namespace termplan

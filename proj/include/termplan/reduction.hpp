#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "termplan/dynamics.hpp"
#include "termplan/semantics.hpp"
#include "termplan/syntax.hpp"

// Translation of dynamic formulas to static ones by reduction axioms, with a
// complexity measure certifying termination.

namespace termplan {

struct NoRedexError : Error { using Error::Error; };

// Complexity measure: atoms and constants 1; negation, knowledge, and
// quantifiers add 1; conjunction and implication are 1 + max over children;
// a dynamic modality multiplies by 4 + the action's complexity, which is the
// max over its preconditions, postcondition values, and edge conditions.
uint64_t complexity(const Formula& f);
uint64_t complexity(const ActionModel& a);

// The knowledge axiom exists in two textual variants; the guarded one is the
// semantically valid reading and the default. The plain variant is kept for
// comparison and is refuted by the model-checking oracle.
enum class KnowledgeRow { Guarded, Plain };

struct ReduceOptions {
  KnowledgeRow knowledge = KnowledgeRow::Guarded;
};

struct RewriteStep {
  std::string axiom;     // atom, negation, conjunction, implication,
                         // knowledge, quantification, composition
  std::string position;  // tree path of the rewritten node
  uint64_t before = 0;   // complexity of the redex
  uint64_t after = 0;    // complexity of its replacement
};

struct RewriteTrace {
  std::vector<RewriteStep> steps;
};

// One innermost-leftmost rewrite. Directly nested modalities form a
// composition redex at the outer node. Input is normalized into the reduction
// basis first. Throws NoRedexError on static formulas.
Formula reduce_step(const Formula& f, const ReduceOptions& opts = {},
                    RewriteStep* step = nullptr);

// Fixpoint of reduce_step; the result contains no dynamic modality. Every
// step strictly decreases the redex's complexity (checked at runtime).
Formula translate(const Formula& f, const ReduceOptions& opts = {},
                  RewriteTrace* trace = nullptr);

struct EquivalenceReport {
  size_t checks = 0;   // (model, world, valuation) triples compared
  bool disagree = false;
  std::string detail;  // first disagreement, if any
};

// Compares two formulas on every world and valuation of every corpus model.
EquivalenceReport check_equivalence(const Formula& a, const Formula& b,
                                    const std::vector<ModelPtr>& corpus);

}  // namespace termplan

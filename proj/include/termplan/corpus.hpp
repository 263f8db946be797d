#pragma once

#include <cstdint>
#include <random>

#include "termplan/dynamics.hpp"
#include "termplan/semantics.hpp"

// Seeded random generator for models, formulas, and action models, used by
// the property tests and the fuzzing harness. The default seed is fixed so
// runs are reproducible; the TERMPLAN_SEED environment variable overrides it.

namespace termplan {

struct CorpusConfig {
  uint64_t seed = 0x7e52b1a9c0ffee11ull;
  int max_worlds = 4;   // >= 1
  int max_agents = 3;   // >= 1
  int max_objects = 2;  // >= 1
  int max_depth = 3;    // connective nesting in generated formulas
  int max_dyn = 2;      // dynamic modalities stacked along any branch
};

// The configured seed unless TERMPLAN_SEED is set to an unsigned integer.
uint64_t corpus_seed(uint64_t fallback);

// One random instance: a pointed model together with a closed formula over
// the same signature. Formulas may contain dynamic modalities whose action
// models only rewrite relations through constants that are interpreted
// rigidly and injectively, so evaluation and translation agree.
struct CorpusItem {
  Signature sig;
  PointedModel state;
  Formula formula;
};

// One random composition instance: two pointed action models over the model's
// signature and a static body.
struct CompositionItem {
  Signature sig;
  PointedModel state;
  ActionPtr first;
  std::string first_event;
  ActionPtr second;
  std::string second_event;
  Formula body;
};

class CorpusGen {
 public:
  explicit CorpusGen(const CorpusConfig& cfg = {});

  CorpusItem next();
  CompositionItem next_composition();

  // A fresh random model over the given signature shape; exposed for the
  // equivalence corpus.
  PointedModel next_model(const Signature& sig, int agents, int objects);

 private:
  CorpusConfig cfg_;
  std::mt19937_64 rng_;
};

}  // namespace termplan

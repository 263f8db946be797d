#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Two-sorted term-modal syntax: terms over agent/object sorts, formulas with
// term-indexed knowledge operators and dynamic (action) modalities.

namespace termplan {

struct ActionModel;  // defined in dynamics.hpp
using ActionPtr = std::shared_ptr<const ActionModel>;

// ---------------------------------------------------------------------------
// Sorts and signature

enum class Sort { Agt, Obj };

// Argument positions of relations and functions may additionally be
// sort-agnostic.
enum class ArgSort { Agt, Obj, Any };

std::string to_string(Sort s);
std::string to_string(ArgSort s);
bool admits(ArgSort slot, Sort s);

// The designated edge-condition variable. Edge conditions of action models
// have at most this variable free; it is reserved and may not be bound.
inline const std::string kStarVar = "x*";

struct FuncType {
  std::vector<ArgSort> args;
  Sort result;
};

// A finite signature. Declared variables exist so that files and the CLI can
// mention free variables with known sorts; bound variables are introduced
// locally by binders and need no declaration (their sort travels with the
// term). The equality relation "=" is always present and sort-agnostic.
struct Signature {
  std::vector<std::pair<std::string, Sort>> variables;
  std::vector<std::pair<std::string, Sort>> constants;  // declaration order
  std::map<std::string, std::vector<ArgSort>> relations;
  std::map<std::string, FuncType> functions;

  Signature();

  void add_variable(const std::string& name, Sort s);
  void add_constant(const std::string& name, Sort s);
  void add_relation(const std::string& name, std::vector<ArgSort> args);
  void add_function(const std::string& name, FuncType t);

  std::optional<Sort> variable_sort(const std::string& name) const;
  std::optional<Sort> constant_sort(const std::string& name) const;
  const std::vector<ArgSort>* relation_type(const std::string& name) const;
  const FuncType* function_type(const std::string& name) const;
  bool has_symbol(const std::string& name) const;

 private:
  std::map<std::string, Sort> var_index_, const_index_;
};

// Deterministic fresh-name generation: smallest "base'", "base''", ... not in
// `avoid`. Stands in for an infinite variable supply.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

// ---------------------------------------------------------------------------
// Terms

class Term {
 public:
  enum class Kind { Var, Const, App };

  struct Node {
    Kind kind;
    std::string name;
    Sort sort;  // Var/Const: carried sort. App: result sort.
    std::vector<Term> args;
    size_t hash = 0;
  };

  Term() = default;  // empty handle; only for containers
  bool empty() const { return !node_; }

  Kind kind() const { return node_->kind; }
  const std::string& name() const { return node_->name; }
  Sort sort() const { return node_->sort; }
  const std::vector<Term>& args() const { return node_->args; }
  size_t hash() const { return node_->hash; }

  bool operator==(const Term& o) const;
  bool operator!=(const Term& o) const { return !(*this == o); }
  bool operator<(const Term& o) const;  // structural, deterministic

  static Term var(const std::string& name, Sort s);
  static Term constant(const std::string& name, Sort s);
  // Looks the constant up in sig; throws UnknownSymbolError if absent.
  static Term constant(const std::string& name, const Signature& sig);
  static Term app(const std::string& fn, std::vector<Term> args, Sort result);

 private:
  std::shared_ptr<const Node> node_;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Term make(Node n);
};

bool is_ground(const Term& t);
// A term is free when it contains no constants: every leaf is a variable.
bool is_free_term(const Term& t);
void collect_vars(const Term& t, std::map<std::string, Sort>& out);
std::string to_string(const Term& t);

// ---------------------------------------------------------------------------
// Formulas

class Formula {
 public:
  enum class Kind {
    Atom,     // rel(terms); "=" is the equality relation
    Top,
    Bottom,
    Not,      // kids[0]
    And,      // kids[0..n), n >= 2
    Or,       // kids[0..n), n >= 2
    Implies,  // kids[0] -> kids[1]
    Iff,      // kids[0] <-> kids[1]
    Neq,      // terms[0] != terms[1]
    Knows,    // K_{index} kids[0]
    Forall,   // forall var. kids[0]
    Exists,   // exists var. kids[0]
    Dyn,      // [action, event] kids[0]
  };

  struct Node {
    Kind kind;
    std::string rel;           // Atom
    std::vector<Term> terms;   // Atom, Neq
    std::vector<Formula> kids;
    Term index;                // Knows
    Term var;                  // Forall/Exists (a Var term)
    ActionPtr action;          // Dyn
    std::string event;         // Dyn
    size_t hash = 0;
  };

  Formula() = default;
  bool empty() const { return !node_; }

  Kind kind() const { return node_->kind; }
  const std::string& rel() const { return node_->rel; }
  const std::vector<Term>& terms() const { return node_->terms; }
  const std::vector<Formula>& kids() const { return node_->kids; }
  const Formula& kid(size_t i = 0) const { return node_->kids[i]; }
  const Term& index() const { return node_->index; }
  const Term& var() const { return node_->var; }
  const ActionPtr& action() const { return node_->action; }
  const std::string& event() const { return node_->event; }
  size_t hash() const { return node_->hash; }

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }
  bool operator<(const Formula& o) const;

 private:
  std::shared_ptr<const Node> node_;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Node n);
  friend struct FormulaFactory;
};

// Constructors. And/Or flatten nothing and require >= 1 child; a single child
// is returned as-is so lists collapse naturally.
Formula f_atom(const std::string& rel, std::vector<Term> terms);
Formula f_eq(const Term& a, const Term& b);
Formula f_top();
Formula f_bottom();
Formula f_not(const Formula& f);
Formula f_and(std::vector<Formula> fs);
Formula f_or(std::vector<Formula> fs);
Formula f_implies(const Formula& a, const Formula& b);
Formula f_iff(const Formula& a, const Formula& b);
Formula f_neq(const Term& a, const Term& b);
Formula f_knows(const Term& index, const Formula& f);
Formula f_forall(const Term& var, const Formula& f);
Formula f_exists(const Term& var, const Formula& f);
Formula f_dyn(ActionPtr action, const std::string& event, const Formula& f);

std::string to_string(const Formula& f);

// ---------------------------------------------------------------------------
// Errors and reports

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownSymbolError : Error { using Error::Error; };
struct SortMismatchError : Error { using Error::Error; };
struct UnboundVariableError : Error { using Error::Error; };
struct UndefinedModalIndexError : Error { using Error::Error; };

struct ReportItem {
  std::string path;  // tree position, e.g. "1.0"; "" for the root
  std::string message;
};

struct Report {
  std::vector<ReportItem> items;
  bool ok() const { return items.empty(); }
  void add(const std::string& path, const std::string& message) {
    items.push_back({path, message});
  }
  std::string summary() const;
};

// ---------------------------------------------------------------------------
// Syntactic operations

// Sort of a term, validated against the signature (symbols known, arities and
// argument sorts respected). Throws UnknownSymbolError / SortMismatchError.
Sort sort_of(const Term& t, const Signature& sig);

// Structural well-formedness of a formula over sig. Collects all violations
// with tree positions instead of stopping at the first.
Report well_formed(const Formula& f, const Signature& sig);

// Free variables with their sorts. The knowledge operator's index contributes
// its variables; dynamic modalities contribute only their body (action models
// are closed except for the reserved edge variable).
std::map<std::string, Sort> free_vars(const Formula& f);

// Capture-free simultaneous substitution of terms for free variables. Bound
// variables are renamed (deterministically) when they would capture. Throws
// SortMismatchError if a replacement's sort differs from its variable's.
Formula substitute(const Formula& f, const std::map<std::string, Term>& sub);
Formula substitute(const Formula& f, const std::string& var, const Term& t);
Term substitute(const Term& t, const std::map<std::string, Term>& sub);

struct Classification {
  bool is_sentence = false;    // no free variables
  bool is_ground_atom = false; // atom over ground terms
  bool is_free_atom = false;   // atom over constant-free terms
  bool is_static = false;      // no dynamic modality
};
Classification classify(const Formula& f);
bool is_static(const Formula& f);

// Rewrites Or/Iff/Exists/Neq into the reduction basis
// {Atom, Top, Bottom, Not, And, Implies, Knows, Forall, Dyn}.
Formula normalize(const Formula& f);

// Structural action-model equality; lives here so Formula::operator== can use
// it, defined with the action type.
bool action_equal(const ActionModel& a, const ActionModel& b);

}  // namespace termplan

#pragma once

#include "termplan/planning.hpp"

#include <string>
#include <utility>
#include <vector>

// File formats: domain and problem descriptions in an s-expression syntax,
// plan files, and goal/query formulas. Parsing is strict and reports
// positions; serialization emits a canonical form that parses back to an
// equal structure (an isomorphic model, for problems).

namespace termplan {

struct ParseError : Error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int l, int c)
      : Error("line " + std::to_string(l) + ":" + std::to_string(c) + ": " +
              msg),
        line(l),
        col(c) {}
};

// A dsl type. Roots are agent_id and object_id; every other type names a
// parent. Constants and schema parameters are declared with these types;
// universe entities use the same names with the "_id" suffix dropped.
struct TypeDecl {
  std::string name;
  std::string parent;  // empty for roots
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> arg_types;
};

struct DomainFile {
  std::string name;
  std::vector<TypeDecl> types;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> schemas;
};

// A parsed problem joined with its domain: everything needed to plan, check
// formulas, and serialize back out.
struct Task {
  std::string domain_name;
  std::string problem_name;
  DomainFile domain;
  // Entity name -> universe type, in declaration order.
  std::vector<std::pair<std::string, std::string>> universe;
  // Constant name -> type, in declaration order.
  std::vector<std::pair<std::string, std::string>> constant_types;
  PlanningTask planning;
};

struct ActionRef {
  std::string name;
  std::vector<std::string> args;
  std::string event;  // empty selects the designated event
};

DomainFile parse_domain(const std::string& text);
Task parse_problem(const std::string& text, const DomainFile& domain);
Task load_task(const std::string& domain_text, const std::string& problem_text);

// Closed formula over the task's signature; supports the dynamic modality
// (after (Name args) event body).
Formula parse_formula(const std::string& text, const Task& task);

// Plan file: () or ((Name args... @event) ...); a missing @event selects the
// schema's designated event.
Plan parse_plan(const std::string& text, const Task& task);

// Compact reference "Name(c1,c2)@event"; args and event are optional.
ActionRef parse_action_ref(const std::string& text);

std::string serialize_domain(const DomainFile& d);
std::string serialize_problem(const Task& t);
std::string serialize_problem(const Task& t, const PointedModel& state);
std::string serialize_plan(const Plan& p);

// Root sort of a dsl type; accepts the root names, their aliases
// (agent/agt, object/obj), and declared type names.
Sort type_root(const std::string& type, const std::vector<TypeDecl>& types);

}  // namespace termplan

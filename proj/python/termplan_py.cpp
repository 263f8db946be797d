#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "termplan/corpus.hpp"
#include "termplan/dsl.hpp"
#include "termplan/frames.hpp"
#include "termplan/planning.hpp"
#include "termplan/reduction.hpp"

namespace py = pybind11;
using namespace termplan;

namespace {

// Python-facing wrapper: a parsed task plus the operations the command-line
// tool exposes, working on strings so callers never touch the C++ AST.
struct PyTask {
  Task task;

  std::vector<std::pair<std::string, std::string>> validate() const {
    const PlanningTask& pt = task.planning;
    Report report = validate_model(*pt.initial.model, pt.sig, {pt.goal});
    for (const ActionSchema& s : pt.schemas) {
      Report r = validate_action(s, pt.sig);
      for (const ReportItem& item : r.items)
        report.add(s.name + "/" + item.path, item.message);
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const ReportItem& item : report.items)
      out.emplace_back(item.path, item.message);
    return out;
  }

  bool check(const std::string& formula, const std::string& at) const {
    Formula f = parse_formula(formula, task);
    if (!free_vars(f).empty()) throw Error("formula must be closed");
    PointedModel state = task.planning.initial;
    if (!at.empty()) {
      auto idx = state.model->world_index(at);
      if (!idx) throw Error("unknown world: " + at);
      state.world = *idx;
    }
    return satisfies(state, f);
  }

  py::object apply(const std::string& action) const {
    ActionRef ref = parse_action_ref(action);
    GroundAction ga =
        resolve_action(task.planning, ref.name, ref.args, ref.event);
    PointedAction pa{ga.action, ga.event};
    if (!applicable(task.planning.initial, pa)) return py::none();
    PointedModel next = update_pointed(task.planning.initial, pa);
    PyTask out{task};
    out.task.planning.initial = next;
    return py::cast(out);
  }

  py::object plan(int max_depth, const std::string& strategy,
                  const std::string& dedup) const {
    SearchConfig cfg;
    cfg.max_depth = max_depth;
    if (strategy == "bfs")
      cfg.strategy = SearchConfig::Strategy::Bfs;
    else if (strategy == "iddfs")
      cfg.strategy = SearchConfig::Strategy::Iddfs;
    else
      throw Error("unknown strategy: " + strategy);
    if (dedup == "iso")
      cfg.dedup = SearchConfig::Dedup::Isomorphism;
    else if (dedup == "none")
      cfg.dedup = SearchConfig::Dedup::None;
    else
      throw Error("unknown dedup mode: " + dedup);
    std::optional<Plan> found = find_plan(task.planning, cfg);
    if (!found) return py::none();
    py::list steps;
    for (const GroundAction& g : *found) steps.append(g.display());
    return steps;
  }

  py::dict verify(const std::string& plan_text) const {
    Plan p = parse_plan(plan_text, task);
    VerifyResult res = verify_plan(task.planning, p);
    py::dict out;
    out["valid"] = res.valid;
    out["failure"] = res.failure;
    py::list worlds;
    for (const PointedModel& s : res.trace)
      worlds.append(static_cast<int>(s.model->worlds.size()));
    out["trace_worlds"] = worlds;
    return out;
  }

  py::dict translate_formula(const std::string& formula,
                             const std::string& row) const {
    Formula f = parse_formula(formula, task);
    ReduceOptions opts;
    if (row == "guarded")
      opts.knowledge = KnowledgeRow::Guarded;
    else if (row == "plain")
      opts.knowledge = KnowledgeRow::Plain;
    else
      throw Error("unknown knowledge row: " + row);
    RewriteTrace trace;
    Formula out = translate(f, opts, &trace);
    py::dict d;
    d["input"] = to_string(normalize(f));
    d["output"] = to_string(out);
    d["complexity_in"] = complexity(normalize(f));
    d["complexity_out"] = complexity(out);
    py::list steps;
    for (const RewriteStep& s : trace.steps) {
      py::dict step;
      step["axiom"] = s.axiom;
      step["position"] = s.position;
      step["before"] = s.before;
      step["after"] = s.after;
      steps.append(step);
    }
    d["steps"] = steps;
    return d;
  }

  py::dict frames() const {
    FrameReport rep = frame_properties(*task.planning.initial.model);
    py::dict agents;
    for (const auto& [name, refl] : rep.reflexive) {
      py::dict a;
      a["reflexive"] = refl;
      a["serial"] = rep.serial.at(name);
      a["transitive"] = rep.transitive.at(name);
      a["euclidean"] = rep.euclidean.at(name);
      agents[py::str(name)] = a;
    }
    py::dict out;
    out["agents"] = agents;
    out["worlds"] = rep.world_count;
    out["agent_count"] = rep.agent_count;
    out["object_count"] = rep.object_count;
    return out;
  }

  std::vector<std::string> actions() const {
    std::vector<std::string> out;
    for (const GroundAction& g : task_actions(task.planning))
      out.push_back(g.display());
    return out;
  }

  std::string problem_text() const { return serialize_problem(task); }
  std::string domain_text() const { return serialize_domain(task.domain); }
  std::string goal_text() const { return to_string(task.planning.goal); }
  std::string actual_world() const {
    const PointedModel& s = task.planning.initial;
    return s.model->worlds[s.world].name;
  }
  int worlds() const {
    return static_cast<int>(task.planning.initial.model->worlds.size());
  }
};

py::dict check_frame_kind(const std::string& kind, int n, int agents,
                          int worlds, int objects, long long budget) {
  EnumerationSpec spec;
  spec.max_agents = agents;
  spec.max_worlds = worlds;
  spec.objects = objects;
  spec.budget = budget;
  CharacterizationReport rep;
  if (kind == "T")
    rep = check_characterization(FrameKind::T, spec);
  else if (kind == "D")
    rep = check_characterization(FrameKind::D, spec);
  else if (kind == "4")
    rep = check_characterization(FrameKind::Four, spec);
  else if (kind == "5")
    rep = check_characterization(FrameKind::Five, spec);
  else if (kind == "N")
    rep = check_domain_size(n, false, spec);
  else if (kind == "M")
    rep = check_domain_size(n, true, spec);
  else
    throw Error("unknown check kind: " + kind);
  py::dict out;
  out["kind"] = rep.kind;
  out["frames_checked"] = rep.frames_checked;
  out["models_checked"] = rep.models_checked;
  out["sound"] = rep.sound;
  out["complete"] = rep.complete;
  out["inconclusive"] = rep.inconclusive;
  out["confirmed"] = rep.confirmed();
  out["detail"] = rep.detail;
  return out;
}

}  // namespace

PYBIND11_MODULE(_termplan, m) {
  m.doc() = "term-modal epistemic planning toolkit";

  static py::exception<ParseError> parse_exc(m, "ParseFailure",
                                             PyExc_ValueError);
  static py::exception<Error> base_exc(m, "EngineError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      PyErr_SetString(parse_exc.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base_exc.ptr(), e.what());
    }
  });

  py::class_<PyTask>(m, "Task")
      .def("validate", &PyTask::validate,
           "list of (path, message) issues; empty means the task is well "
           "formed")
      .def("check", &PyTask::check, py::arg("formula"), py::arg("at") = "",
           "evaluate a closed formula at the actual world (or at a named "
           "world)")
      .def("apply", &PyTask::apply, py::arg("action"),
           "apply one ground action 'Name(c1,c2)@event'; returns the updated "
           "task, or None when not applicable")
      .def("plan", &PyTask::plan, py::arg("max_depth"),
           py::arg("strategy") = "bfs", py::arg("dedup") = "iso",
           "shortest plan within the bound as a list of step labels, or None")
      .def("verify", &PyTask::verify, py::arg("plan_text"),
           "verify a plan file's text; returns valid, failure, trace_worlds")
      .def("translate", &PyTask::translate_formula, py::arg("formula"),
           py::arg("knowledge_row") = "guarded",
           "rewrite a formula to a static one; returns the result and the "
           "rewrite steps")
      .def("frames", &PyTask::frames,
           "relational properties of the initial model's accessibility "
           "relations")
      .def("actions", &PyTask::actions,
           "all ground actions in deterministic order")
      .def("problem_text", &PyTask::problem_text)
      .def("domain_text", &PyTask::domain_text)
      .def("goal_text", &PyTask::goal_text)
      .def("actual_world", &PyTask::actual_world)
      .def("worlds", &PyTask::worlds)
      .def("__repr__", [](const PyTask& t) {
        return "<termplan.Task '" + t.task.problem_name + "' (" +
               std::to_string(t.worlds()) + " worlds)>";
      });

  m.def(
      "load_task",
      [](const std::string& domain_text, const std::string& problem_text) {
        return PyTask{load_task(domain_text, problem_text)};
      },
      py::arg("domain_text"), py::arg("problem_text"),
      "parse a domain and problem from strings");

  m.def("check_frame", &check_frame_kind, py::arg("kind"), py::arg("n") = 1,
        py::arg("agents") = 2, py::arg("worlds") = 3, py::arg("objects") = 1,
        py::arg("budget") = 200000000LL,
        "exhaustive small-frame check; kind is one of T, D, 4, 5, N, M");
}

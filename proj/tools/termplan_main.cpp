#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "termplan/corpus.hpp"
#include "termplan/dsl.hpp"
#include "termplan/frames.hpp"
#include "termplan/planning.hpp"
#include "termplan/reduction.hpp"

using nlohmann::json;
using namespace termplan;

namespace {

// Exit codes: 0 success, 1 negative answer, 2 usage or parse error,
// 3 internal error.
struct UsageError {
  std::string message;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError{"cannot read file: " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Task load(const std::string& domain_path, const std::string& problem_path) {
  return load_task(slurp(domain_path), slurp(problem_path));
}

void emit(bool as_json, const json& j, const std::string& plain) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << plain;
}

int cmd_validate(const Task& task, bool as_json) {
  const PlanningTask& pt = task.planning;
  Report report = validate_model(*pt.initial.model, pt.sig, {pt.goal});
  for (const ActionSchema& s : pt.schemas) {
    Report r = validate_action(s, pt.sig);
    for (const ReportItem& item : r.items)
      report.add(s.name + "/" + item.path, item.message);
  }
  json j = {{"ok", report.ok()}, {"items", json::array()}};
  std::ostringstream plain;
  for (const ReportItem& item : report.items) {
    j["items"].push_back({{"path", item.path}, {"message", item.message}});
    plain << item.path << ": " << item.message << "\n";
  }
  if (report.ok()) plain << "ok\n";
  emit(as_json, j, plain.str());
  return report.ok() ? 0 : 1;
}

int cmd_check(const Task& task, const std::string& formula_text,
              const std::string& at, bool as_json) {
  Formula f = parse_formula(formula_text, task);
  if (!free_vars(f).empty()) throw UsageError{"formula must be closed"};
  PointedModel state = task.planning.initial;
  if (!at.empty()) {
    auto idx = state.model->world_index(at);
    if (!idx) throw UsageError{"unknown world: " + at};
    state.world = *idx;
  }
  bool value = satisfies(state, f);
  json j = {{"formula", to_string(f)},
            {"world", state.model->worlds[state.world].name},
            {"value", value}};
  emit(as_json, j, std::string(value ? "true" : "false") + "\n");
  return value ? 0 : 1;
}

int cmd_update(const Task& task, const std::string& action_text,
               const std::string& out_path, bool as_json) {
  ActionRef ref = parse_action_ref(action_text);
  GroundAction ga =
      resolve_action(task.planning, ref.name, ref.args, ref.event);
  PointedAction pa{ga.action, ga.event};
  if (!applicable(task.planning.initial, pa)) {
    json j = {{"applicable", false}, {"action", ga.display()}};
    emit(as_json, j, "not applicable: " + ga.display() + "\n");
    return 1;
  }
  PointedModel next = update_pointed(task.planning.initial, pa);
  std::string text = serialize_problem(task, next);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw UsageError{"cannot write file: " + out_path};
    out << text;
    json j = {{"applicable", true},
              {"worlds", static_cast<int>(next.model->worlds.size())},
              {"file", out_path}};
    emit(as_json, j, "wrote " + out_path + "\n");
  } else {
    json j = {{"applicable", true},
              {"worlds", static_cast<int>(next.model->worlds.size())},
              {"problem", text}};
    emit(as_json, j, text);
  }
  return 0;
}

int cmd_plan(const Task& task, int max_depth, const std::string& strategy,
             const std::string& dedup, bool as_json) {
  SearchConfig cfg;
  cfg.max_depth = max_depth;
  if (strategy == "bfs")
    cfg.strategy = SearchConfig::Strategy::Bfs;
  else if (strategy == "iddfs")
    cfg.strategy = SearchConfig::Strategy::Iddfs;
  else
    throw UsageError{"unknown strategy: " + strategy};
  if (dedup == "iso")
    cfg.dedup = SearchConfig::Dedup::Isomorphism;
  else if (dedup == "none")
    cfg.dedup = SearchConfig::Dedup::None;
  else
    throw UsageError{"unknown dedup mode: " + dedup};
  std::optional<Plan> plan = find_plan(task.planning, cfg);
  if (!plan) {
    json j = {{"found", false}, {"max_depth", max_depth}};
    emit(as_json, j, "no plan within bound\n");
    return 1;
  }
  json steps = json::array();
  for (const GroundAction& ga : *plan) steps.push_back(ga.display());
  json j = {{"found", true},
            {"length", static_cast<int>(plan->size())},
            {"plan", steps}};
  emit(as_json, j, serialize_plan(*plan));
  return 0;
}

int cmd_verify(const Task& task, const std::string& plan_path, bool as_json) {
  Plan plan = parse_plan(slurp(plan_path), task);
  VerifyResult res = verify_plan(task.planning, plan);
  json j = {{"valid", res.valid},
            {"steps", static_cast<int>(plan.size())},
            {"failure", res.failure}};
  std::string plain =
      res.valid ? "valid\n" : ("invalid: " + res.failure + "\n");
  emit(as_json, j, plain);
  return res.valid ? 0 : 1;
}

int cmd_translate(const Task& task, const std::string& formula_text,
                  bool with_trace, const std::string& row, bool as_json) {
  Formula f = parse_formula(formula_text, task);
  ReduceOptions opts;
  if (row == "guarded")
    opts.knowledge = KnowledgeRow::Guarded;
  else if (row == "plain")
    opts.knowledge = KnowledgeRow::Plain;
  else
    throw UsageError{"unknown knowledge row: " + row};
  RewriteTrace trace;
  Formula out = translate(f, opts, &trace);
  json j = {{"input", to_string(normalize(f))},
            {"output", to_string(out)},
            {"complexity_in", complexity(normalize(f))},
            {"complexity_out", complexity(out)},
            {"steps", json::array()}};
  std::ostringstream plain;
  plain << to_string(out) << "\n";
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const RewriteStep& s = trace.steps[i];
    j["steps"].push_back({{"axiom", s.axiom},
                          {"position", s.position},
                          {"before", s.before},
                          {"after", s.after}});
    if (with_trace)
      plain << "step " << i + 1 << ": " << s.axiom << " at ["
            << (s.position.empty() ? "root" : s.position) << "] " << s.before
            << " -> " << s.after << "\n";
  }
  emit(as_json, j, plain.str());
  return 0;
}

int cmd_frames_report(const Task& task, bool as_json) {
  const Model& m = *task.planning.initial.model;
  FrameReport rep = frame_properties(m);
  json agents = json::object();
  std::ostringstream plain;
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  for (const auto& [name, refl] : rep.reflexive) {
    agents[name] = {{"reflexive", refl},
                    {"serial", rep.serial.at(name)},
                    {"transitive", rep.transitive.at(name)},
                    {"euclidean", rep.euclidean.at(name)}};
    plain << name << ": reflexive=" << yn(refl)
          << " serial=" << yn(rep.serial.at(name))
          << " transitive=" << yn(rep.transitive.at(name))
          << " euclidean=" << yn(rep.euclidean.at(name)) << "\n";
  }
  plain << "worlds=" << rep.world_count << " agents=" << rep.agent_count
        << " objects=" << rep.object_count << "\n";
  json j = {{"agents", agents},
            {"worlds", rep.world_count},
            {"agent_count", rep.agent_count},
            {"object_count", rep.object_count}};
  emit(as_json, j, plain.str());
  return 0;
}

int cmd_frames_check(const std::string& kind, int n, const EnumerationSpec& spec,
                     bool as_json) {
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
    throw UsageError{"unknown check kind: " + kind};
  json j = {{"kind", rep.kind},
            {"frames_checked", rep.frames_checked},
            {"models_checked", rep.models_checked},
            {"sound", rep.sound},
            {"complete", rep.complete},
            {"inconclusive", rep.inconclusive},
            {"confirmed", rep.confirmed()},
            {"detail", rep.detail}};
  std::ostringstream plain;
  plain << "kind=" << rep.kind << " frames=" << rep.frames_checked
        << " models=" << rep.models_checked
        << " sound=" << (rep.sound ? "yes" : "no")
        << " complete=" << (rep.complete ? "yes" : "no")
        << (rep.inconclusive ? " inconclusive" : "")
        << (rep.confirmed() ? " confirmed" : "") << "\n";
  if (!rep.detail.empty()) plain << rep.detail << "\n";
  emit(as_json, j, plain.str());
  return rep.confirmed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"term-modal epistemic planning toolkit"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");
  app.fallthrough();

  std::string domain_path, problem_path;
  std::string formula_text, at_world, action_text, out_path, plan_path;
  std::string strategy = "bfs", dedup = "iso", row = "guarded", kind;
  int max_depth = 0, check_n = 1;
  bool with_trace = false;
  EnumerationSpec spec;

  auto add_paths = [&](CLI::App* cmd, bool required = true) {
    auto* d = cmd->add_option("domain", domain_path, "domain file");
    auto* p = cmd->add_option("problem", problem_path, "problem file");
    if (required) {
      d->required();
      p->required();
    }
  };

  CLI::App* validate = app.add_subcommand("validate", "check a task's files");
  add_paths(validate);

  CLI::App* check = app.add_subcommand("check", "evaluate a formula");
  add_paths(check);
  check->add_option("--formula", formula_text, "closed formula")->required();
  check->add_option("--at", at_world, "world name (default: actual)");

  CLI::App* update = app.add_subcommand("update", "apply one ground action");
  add_paths(update);
  update->add_option("--action", action_text, "Name(c1,c2)@event")->required();
  update->add_option("-o,--output", out_path, "write resulting problem here");

  CLI::App* plan = app.add_subcommand("plan", "search for a plan");
  add_paths(plan);
  plan->add_option("--max-depth", max_depth, "depth bound")->required();
  plan->add_option("--strategy", strategy, "bfs or iddfs");
  plan->add_option("--dedup", dedup, "iso or none");

  CLI::App* verify = app.add_subcommand("verify", "verify a plan file");
  add_paths(verify);
  verify->add_option("--plan", plan_path, "plan file")->required();

  CLI::App* translate =
      app.add_subcommand("translate", "rewrite to a static formula");
  add_paths(translate);
  translate->add_option("--formula", formula_text, "formula")->required();
  translate->add_flag("--trace", with_trace, "print rewrite steps");
  translate->add_option("--knowledge-row", row, "guarded or plain");

  CLI::App* frames =
      app.add_subcommand("frames", "frame properties or characterizations");
  add_paths(frames, false);
  frames->add_option("--check", kind, "one of T, D, 4, 5, N, M");
  frames->add_option("--n", check_n, "domain size for N and M");
  frames->add_option("--agents", spec.max_agents, "max agents to enumerate");
  frames->add_option("--worlds", spec.max_worlds, "max worlds to enumerate");
  frames->add_option("--objects", spec.objects, "objects in enumerated models");
  frames->add_option("--budget", spec.budget, "evaluation budget");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      int rc = app.exit(e);
      return rc == 0 ? 0 : 2;
    }
    if (validate->parsed())
      return cmd_validate(load(domain_path, problem_path), as_json);
    if (check->parsed())
      return cmd_check(load(domain_path, problem_path), formula_text, at_world,
                       as_json);
    if (update->parsed())
      return cmd_update(load(domain_path, problem_path), action_text, out_path,
                        as_json);
    if (plan->parsed())
      return cmd_plan(load(domain_path, problem_path), max_depth, strategy,
                      dedup, as_json);
    if (verify->parsed())
      return cmd_verify(load(domain_path, problem_path), plan_path, as_json);
    if (translate->parsed())
      return cmd_translate(load(domain_path, problem_path), formula_text,
                           with_trace, row, as_json);
    if (frames->parsed()) {
      if (!kind.empty()) return cmd_frames_check(kind, check_n, spec, as_json);
      if (domain_path.empty() || problem_path.empty())
        throw UsageError{"frames needs either files or --check"};
      return cmd_frames_report(load(domain_path, problem_path), as_json);
    }
    throw UsageError{"no subcommand"};
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownSymbolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SortMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownActionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnboundVariableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

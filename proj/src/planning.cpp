#include "termplan/planning.hpp"

#include <algorithm>
#include <deque>

namespace termplan {

std::optional<PointedModel> transition(const PointedModel& s,
                                       const PointedAction& a) {
  if (a.action->event_index(a.event) < 0) return std::nullopt;
  if (!applicable(s, a)) return std::nullopt;
  return update_pointed(s, a);
}

bool goal_holds(const PointedModel& s, const Formula& goal) {
  return satisfies(s, goal);
}

GroundAction resolve_action(const PlanningTask& task, const std::string& name,
                            const std::vector<std::string>& args,
                            const std::string& event) {
  for (const auto& s : task.schemas) {
    if (s.name != name) continue;
    if (s.params.size() != args.size())
      throw UnknownActionError("action " + name + " expects " +
                               std::to_string(s.params.size()) + " arguments");
    GroundingSubstitution sigma;
    for (size_t i = 0; i < args.size(); ++i) {
      auto sort = task.sig.constant_sort(args[i]);
      if (!sort) throw UnknownSymbolError("unknown constant: " + args[i]);
      sigma[s.params[i].var.name()] = Term::constant(args[i], *sort);
    }
    GroundAction g;
    g.schema = name;
    g.args = args;
    g.action = instantiate(s, sigma, task.sig);
    g.event = event.empty() ? s.actual : event;
    if (g.action->event_index(g.event) < 0)
      throw UnknownActionError("action " + name + " has no event " + g.event);
    return g;
  }
  throw UnknownActionError("no schema named " + name);
}

namespace {

std::vector<int> intern_indices(const Signature& sig,
                                const std::vector<std::string>& args) {
  std::vector<int> out;
  for (const auto& a : args) {
    int idx = 0;
    for (size_t i = 0; i < sig.constants.size(); ++i)
      if (sig.constants[i].first == a) idx = static_cast<int>(i);
    out.push_back(idx);
  }
  return out;
}

}  // namespace

std::vector<GroundAction> task_actions(
    const PlanningTask& task,
    const std::function<bool(const GroundAction&)>& allow) {
  std::vector<GroundAction> out;
  for (const auto& s : task.schemas) {
    for (auto& g : ground_actions(s, task.sig, &task.subtypes)) {
      if (allow && !allow(g)) continue;
      out.push_back(std::move(g));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](const GroundAction& a, const GroundAction& b) {
                     if (a.schema != b.schema) return a.schema < b.schema;
                     return intern_indices(task.sig, a.args) <
                            intern_indices(task.sig, b.args);
                   });
  return out;
}

VerifyResult verify_plan(const PlanningTask& task, const Plan& plan) {
  VerifyResult res;
  res.trace.push_back(task.initial);
  res.valid = true;
  for (size_t i = 0; i < plan.size(); ++i) {
    const GroundAction& g = plan[i];
    if (!g.action) throw UnknownActionError("unresolved plan step " + g.schema);
    auto next = transition(res.trace.back(), {g.action, g.event});
    if (!next) {
      res.valid = false;
      res.failure = "step " + std::to_string(i + 1) + " (" + g.display() +
                    ") not applicable";
      break;
    }
    res.trace.push_back(std::move(*next));
  }
  if (res.valid && !goal_holds(res.trace.back(), task.goal)) {
    res.valid = false;
    res.failure = "goal fails in the final state";
  }

  // Independent route: nested dynamic modalities at the initial state. The
  // diamond nest equals plan validity; the box nest must agree whenever every
  // step was applicable.
  Formula diamond = task.goal;
  Formula box = task.goal;
  for (size_t i = plan.size(); i > 0; --i) {
    const GroundAction& g = plan[i - 1];
    diamond = f_not(f_dyn(g.action, g.event, f_not(diamond)));
    box = f_dyn(g.action, g.event, box);
  }
  bool diamond_holds = satisfies(task.initial, diamond);
  if (diamond_holds != res.valid)
    throw Error("plan verification cross-check disagrees");
  if (res.trace.size() == plan.size() + 1) {
    bool box_holds = satisfies(task.initial, box);
    if (box_holds != res.valid)
      throw Error("plan verification cross-check disagrees");
  }
  return res;
}

namespace {

struct Node {
  PointedModel state;
  Plan plan;
};

std::optional<Plan> bfs(const PlanningTask& task,
                        const std::vector<GroundAction>& actions,
                        const SearchConfig& cfg) {
  if (goal_holds(task.initial, task.goal)) return Plan{};
  std::deque<Node> frontier;
  frontier.push_back({task.initial, {}});
  std::set<std::string> visited;
  if (cfg.dedup == SearchConfig::Dedup::Isomorphism)
    visited.insert(canonical_key(*task.initial.model, task.initial.world));
  while (!frontier.empty()) {
    Node cur = std::move(frontier.front());
    frontier.pop_front();
    if (static_cast<int>(cur.plan.size()) >= cfg.max_depth) continue;
    for (const auto& g : actions) {
      auto next = transition(cur.state, {g.action, g.event});
      if (!next) continue;
      Plan p = cur.plan;
      p.push_back(g);
      if (goal_holds(*next, task.goal)) return p;
      if (cfg.dedup == SearchConfig::Dedup::Isomorphism) {
        std::string key = canonical_key(*next->model, next->world);
        if (!visited.insert(key).second) continue;
      }
      frontier.push_back({std::move(*next), std::move(p)});
    }
  }
  return std::nullopt;
}

bool dls(const PlanningTask& task, const std::vector<GroundAction>& actions,
         const PointedModel& state, int remaining, Plan& plan,
         std::optional<Plan>& found) {
  if (remaining == 0) return false;
  for (const auto& g : actions) {
    auto next = transition(state, {g.action, g.event});
    if (!next) continue;
    plan.push_back(g);
    if (goal_holds(*next, task.goal)) {
      found = plan;
      return true;
    }
    if (dls(task, actions, *next, remaining - 1, plan, found)) return true;
    plan.pop_back();
  }
  return false;
}

std::optional<Plan> iddfs(const PlanningTask& task,
                          const std::vector<GroundAction>& actions,
                          const SearchConfig& cfg) {
  if (goal_holds(task.initial, task.goal)) return Plan{};
  for (int depth = 1; depth <= cfg.max_depth; ++depth) {
    Plan plan;
    std::optional<Plan> found;
    if (dls(task, actions, task.initial, depth, plan, found)) return found;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Plan> find_plan(const PlanningTask& task, const SearchConfig& cfg) {
  Classification c = classify(task.goal);
  if (!c.is_sentence || !c.is_static)
    throw Error("goal must be a static sentence");
  if (cfg.max_depth < 0) throw Error("max_depth must be non-negative");
  std::vector<GroundAction> actions = task_actions(task, cfg.allow);
  if (cfg.strategy == SearchConfig::Strategy::Iddfs)
    return iddfs(task, actions, cfg);
  return bfs(task, actions, cfg);
}

std::string plan_to_string(const Plan& plan) {
  std::string out;
  for (const auto& g : plan) out += g.display() + "\n";
  return out;
}

}  // namespace termplan

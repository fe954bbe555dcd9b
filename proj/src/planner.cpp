#include "execdesc/planner.hpp"

#include <algorithm>
#include <queue>

#include "detail/cycles.hpp"
#include "execdesc/executor.hpp"

namespace execdesc {

using rdf::Iri;

std::set<Iri> dependency_closure(const ExecutionDescription &description,
                                 const std::vector<Iri> &targets) {
  std::set<Iri> closure;
  std::vector<Iri> pending;
  for (const auto &target : targets) {
    if (!description.find(target)) {
      throw PlanError(PlanError::Kind::UnknownTarget, "unknown process <" + target.value + ">",
                      {target});
    }
    pending.push_back(target);
  }
  while (!pending.empty()) {
    Iri current = std::move(pending.back());
    pending.pop_back();
    if (!closure.insert(current).second) continue;
    for (const auto &dep : description.find(current)->depends_on) {
      if (!description.find(dep)) {
        throw PlanError(PlanError::Kind::DanglingDependency,
                        "<" + current.value + "> depends on <" + dep.value +
                            ">, which is not a process in this document",
                        {dep});
      }
      if (!closure.contains(dep)) pending.push_back(dep);
    }
  }
  return closure;
}

std::vector<Iri> topological_order(const ExecutionDescription &description,
                                   const std::set<Iri> &nodes) {
  std::map<Iri, std::size_t> waiting;
  std::map<Iri, std::vector<Iri>> dependents;
  for (const auto &node : nodes) {
    const auto *process = description.find(node);
    if (!process) {
      throw PlanError(PlanError::Kind::UnknownTarget, "unknown process <" + node.value + ">", {node});
    }
    std::size_t count = 0;
    for (const auto &dep : process->depends_on) {
      if (!nodes.contains(dep)) {
        throw PlanError(PlanError::Kind::DanglingDependency,
                        "<" + node.value + "> depends on <" + dep.value +
                            ">, which is outside the node set",
                        {dep});
      }
      dependents[dep].push_back(node);
      ++count;
    }
    waiting[node] = count;
  }

  std::priority_queue<Iri, std::vector<Iri>, std::greater<>> ready;
  for (const auto &[node, count] : waiting) {
    if (count == 0) ready.push(node);
  }
  std::vector<Iri> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    Iri next = ready.top();
    ready.pop();
    for (const auto &dependent : dependents[next]) {
      if (--waiting[dependent] == 0) ready.push(dependent);
    }
    order.push_back(std::move(next));
  }

  if (order.size() != nodes.size()) {
    std::map<Iri, std::vector<Iri>> remaining;
    for (const auto &[node, count] : waiting) {
      if (count == 0) continue;
      auto &edges = remaining[node];
      for (const auto &dep : description.find(node)->depends_on) {
        if (waiting[dep] != 0) edges.push_back(dep);
      }
    }
    auto cycles = detail::find_cycles(remaining);
    std::vector<Iri> path = cycles.empty() ? std::vector<Iri>{} : cycles.front();
    std::string text;
    for (const auto &iri : path) text += (text.empty() ? "<" : " -> <") + iri.value + ">";
    throw PlanError(PlanError::Kind::Cycle, "dependency cycle " + text, path);
  }
  return order;
}

Plan build_plan(const ExecutionDescription &description, const std::vector<Iri> &targets,
                const Bindings &bindings, bool strict) {
  if (targets.empty()) throw PlanError(PlanError::Kind::NoTargets, "no targets selected");

  Plan plan;
  plan.targets = targets;
  std::set<std::string> used;
  for (const auto &id : topological_order(description, dependency_closure(description, targets))) {
    const auto &process = *description.find(id);
    Bindings relevant;
    for (const auto &name : process.command.placeholders) {
      if (auto it = bindings.find(name); it != bindings.end()) {
        relevant.insert(*it);
        used.insert(name);
      }
    }
    plan.steps.push_back(
        {id, bind_parameters(process.command, relevant, process.parameters, strict), process.depends_on});
  }
  for (const auto &[name, _] : bindings) {
    if (used.contains(name)) continue;
    std::string message = "binding '" + name + "' is not used by any selected command";
    if (strict) throw BindError(BindError::Kind::UnknownName, name, message);
    plan.warnings.push_back(std::move(message));
  }
  return plan;
}

} // namespace execdesc

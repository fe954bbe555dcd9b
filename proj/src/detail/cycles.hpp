#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace execdesc::detail {

/// One explicit cycle per strongly connected component that contains a
/// cycle. Each path starts at the component's smallest node and repeats it at
/// the end. Edges to nodes missing from `edges` are ignored.
template <typename T>
std::vector<std::vector<T>> find_cycles(const std::map<T, std::vector<T>> &edges) {
  // Tarjan's algorithm; recursion depth is bounded by the number of processes.
  std::map<T, int> index, low;
  std::set<T> on_stack;
  std::vector<T> stack;
  std::vector<std::vector<T>> components;
  int counter = 0;

  std::function<void(const T &)> connect = [&](const T &v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto &w : edges.at(v)) {
      if (!edges.contains(w)) continue;
      if (!index.contains(w)) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.contains(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<T> component;
      T w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component.push_back(w);
      } while (w != v);
      components.push_back(std::move(component));
    }
  };
  for (const auto &[v, _] : edges) {
    if (!index.contains(v)) connect(v);
  }

  std::vector<std::vector<T>> cycles;
  for (auto &component : components) {
    std::set<T> members(component.begin(), component.end());
    const T start = *members.begin();
    const auto &out = edges.at(start);
    bool self_loop = std::find(out.begin(), out.end(), start) != out.end();
    if (members.size() == 1 && !self_loop) continue;
    if (self_loop) {
      cycles.push_back({start, start});
      continue;
    }
    // Breadth-first search for the shortest way back to `start` inside the component.
    std::map<T, T> parent;
    std::vector<T> frontier{start};
    std::optional<T> closing;
    while (!frontier.empty() && !closing) {
      std::vector<T> next;
      for (const auto &v : frontier) {
        for (const auto &w : edges.at(v)) {
          if (!members.contains(w)) continue;
          if (w == start) {
            closing = v;
            break;
          }
          if (parent.contains(w)) continue;
          parent.emplace(w, v);
          next.push_back(w);
        }
        if (closing) break;
      }
      std::sort(next.begin(), next.end());
      frontier = std::move(next);
    }
    std::vector<T> path{start};
    for (T v = *closing; v != start; v = parent.at(v)) path.push_back(v);
    std::reverse(path.begin() + 1, path.end());
    path.push_back(start);
    cycles.push_back(std::move(path));
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

} // namespace execdesc::detail

#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace resil::graph {

using Adjacency = std::vector<std::vector<std::size_t>>;

/// Tarjan's algorithm restricted to vertices with alive[v] != 0 (all when alive
/// is empty). Components come out with sorted members, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> strongly_connected_components(
    const Adjacency& adj, const std::vector<char>& alive = {}) {
  const std::size_t n = adj.size();
  auto is_alive = [&](std::size_t v) { return alive.empty() || alive[v]; };
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  // Explicit call stack: (vertex, next edge position).
  std::vector<std::pair<std::size_t, std::size_t>> calls;
  for (std::size_t root = 0; root < n; ++root) {
    if (!is_alive(root) || index[root] != unvisited) continue;
    calls.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!calls.empty()) {
      auto& [v, pos] = calls.back();
      if (pos < adj[v].size()) {
        std::size_t w = adj[v][pos++];
        if (!is_alive(w)) continue;
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          calls.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
      std::size_t finished = v;
      calls.pop_back();
      if (!calls.empty()) {
        std::size_t parent = calls.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return components;
}

/// Components with no edge leaving them (bottom SCCs).
inline std::vector<std::vector<std::size_t>> bottom_components(const Adjacency& adj,
                                                               const std::vector<char>& alive = {}) {
  auto comps = strongly_connected_components(adj, alive);
  std::vector<std::size_t> comp_of(adj.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (auto v : comps[i]) comp_of[v] = i;
  std::vector<std::vector<std::size_t>> bottoms;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    bool closed = true;
    for (auto v : comps[i])
      for (auto w : adj[v])
        if ((alive.empty() || alive[w]) && comp_of[w] != i) closed = false;
    if (closed) bottoms.push_back(comps[i]);
  }
  return bottoms;
}

/// Vertices reachable from `sources` (sources included).
inline std::vector<char> forward_reachable(const Adjacency& adj, const std::vector<std::size_t>& sources) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<std::size_t> work;
  for (auto s : sources)
    if (!seen[s]) {
      seen[s] = 1;
      work.push_back(s);
    }
  while (!work.empty()) {
    auto v = work.back();
    work.pop_back();
    for (auto w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        work.push_back(w);
      }
  }
  return seen;
}

/// Vertices that can reach a marked target while only passing through `via`
/// vertices (targets always count; `via` empty means unrestricted).
inline std::vector<char> backward_reachable(const Adjacency& adj, const std::vector<char>& target,
                                            const std::vector<char>& via = {}) {
  const std::size_t n = adj.size();
  Adjacency rev(n);
  for (std::size_t v = 0; v < n; ++v)
    for (auto w : adj[v]) rev[w].push_back(v);
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> work;
  for (std::size_t v = 0; v < n; ++v)
    if (target[v]) {
      seen[v] = 1;
      work.push_back(v);
    }
  while (!work.empty()) {
    auto v = work.back();
    work.pop_back();
    for (auto u : rev[v])
      if (!seen[u] && (via.empty() || via[u])) {
        seen[u] = 1;
        work.push_back(u);
      }
  }
  return seen;
}

}  // namespace resil::graph

#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

namespace dirlat {

/// Out-neighbour lists of a directed graph on nodes 0..n-1, kept sorted.
using Adjacency = std::vector<std::vector<int>>;

/// Strongly connected components in topological order (sources first).
/// Members of each component are sorted.
inline std::vector<std::vector<int>> strongly_connected_components(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> comps;
  int counter = 0;
  // Iterative Tarjan; frames hold (node, next edge position).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adj[v].size()) {
        int w = adj[v][pos++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      int done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  std::reverse(comps.begin(), comps.end());
  return comps;
}

/// Nodes reachable from src using only nodes with allowed[v] (all nodes when empty).
inline std::vector<char> reachable_from(const Adjacency& adj, int src, const std::vector<char>& allowed = {}) {
  std::vector<char> seen(adj.size(), 0);
  if (!allowed.empty() && !allowed[src]) return seen;
  std::vector<int> todo{src};
  seen[src] = 1;
  while (!todo.empty()) {
    int v = todo.back();
    todo.pop_back();
    for (int w : adj[v]) {
      if (seen[w] || (!allowed.empty() && !allowed[w])) continue;
      seen[w] = 1;
      todo.push_back(w);
    }
  }
  return seen;
}

/// Shortest (fewest arcs) u-w path through allowed nodes, smallest-index neighbours first.
inline std::optional<std::vector<int>> bfs_path(const Adjacency& adj, int u, int w,
                                                const std::vector<char>& allowed = {}) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> parent(n, -2);
  std::queue<int> q;
  parent[u] = -1;
  q.push(u);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    if (v == w) break;
    for (int x : adj[v]) {
      if (parent[x] != -2 || (!allowed.empty() && !allowed[x])) continue;
      parent[x] = v;
      q.push(x);
    }
  }
  if (parent[w] == -2) return std::nullopt;
  std::vector<int> path;
  for (int v = w; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

/// Builds sorted adjacency lists from an arc predicate over ordered pairs u != v.
inline Adjacency adjacency_from(int n, const std::function<bool(int, int)>& arc) {
  Adjacency adj(n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && arc(u, v)) adj[u].push_back(v);
  return adj;
}

}  // namespace dirlat

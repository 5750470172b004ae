#pragma once

#include <queue>
#include <vector>

#include "dirlat/errors.hpp"
#include "dirlat/metric.hpp"

namespace dirlat {

struct FlowResult {
  Rational value;
  Matrix flow;                    // flow[u][v] >= 0, at most one direction positive
  std::vector<char> source_side;  // residual-reachable set from the sources
};

/// Edmonds-Karp on a dense capacity matrix with sets of merged sources and sinks.
inline FlowResult max_flow_min_cut(const Matrix& cap, const std::vector<int>& sources, const std::vector<int>& sinks) {
  const int n = static_cast<int>(cap.size());
  std::vector<char> is_src(n, 0), is_snk(n, 0);
  for (int s : sources) is_src[s] = 1;
  for (int t : sinks) {
    require(!is_src[t], "source and sink must differ");
    is_snk[t] = 1;
  }
  require(!sources.empty() && !sinks.empty(), "flow needs a source and a sink");
  for (const auto& row : cap)
    for (const auto& c : row) require(c.sign() >= 0, "capacities must be non-negative");

  FlowResult res;
  res.flow.assign(n, std::vector<Rational>(n));
  auto residual = [&](int u, int v) { return cap[u][v] - res.flow[u][v] + res.flow[v][u]; };
  std::vector<int> parent(n);
  for (;;) {
    std::fill(parent.begin(), parent.end(), -2);
    std::queue<int> q;
    for (int s : sources) {
      parent[s] = -1;
      q.push(s);
    }
    int end = -1;
    while (!q.empty() && end < 0) {
      int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        if (parent[v] != -2 || residual(u, v).sign() <= 0) continue;
        parent[v] = u;
        if (is_snk[v]) {
          end = v;
          break;
        }
        q.push(v);
      }
    }
    if (end < 0) break;
    Rational push = residual(parent[end], end);
    for (int v = end; parent[v] != -1; v = parent[v]) push = min(push, residual(parent[v], v));
    for (int v = end; parent[v] != -1; v = parent[v]) {
      int u = parent[v];
      Rational back = min(push, res.flow[v][u]);
      res.flow[v][u] -= back;
      res.flow[u][v] += push - back;
    }
    res.value += push;
  }
  res.source_side.assign(n, 0);
  for (int v = 0; v < n; ++v) res.source_side[v] = parent[v] != -2;
  return res;
}

inline FlowResult max_flow_min_cut(const Matrix& cap, int source, int sink) {
  require(source != sink, "source and sink must differ");
  return max_flow_min_cut(cap, std::vector<int>{source}, std::vector<int>{sink});
}

/// Capacity of arcs leaving the marked set.
inline Rational cut_capacity(const Matrix& cap, const std::vector<char>& side) {
  Rational c;
  const int n = static_cast<int>(cap.size());
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (side[u] && !side[v]) c += cap[u][v];
  return c;
}

}  // namespace dirlat

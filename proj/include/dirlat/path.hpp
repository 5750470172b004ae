#pragma once

#include <vector>

#include "dirlat/metric.hpp"

namespace dirlat {

using Path = std::vector<int>;

inline Rational path_cost(const Path& p, const Metric& m) {
  Rational c;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) c += m(p[i], p[i + 1]);
  return c;
}

struct LatencyProfile {
  Rational total;
  std::vector<Rational> arrival;  // arrival[v] = c_P(v) for every node on P
};

/// Arrival times along a path that starts at the depot; total excludes the start node.
inline LatencyProfile latency(const Path& p, const Metric& m) {
  LatencyProfile out;
  out.arrival.assign(m.n(), Rational());
  Rational clock;
  for (std::size_t i = 1; i < p.size(); ++i) {
    clock += m(p[i - 1], p[i]);
    out.arrival[p[i]] = clock;
    out.total += clock;
  }
  return out;
}

/// Keeps the first occurrence of each node; `last` (if >= 0) is moved to the end.
inline Path shortcut(const std::vector<int>& walk, int n, int last = -1) {
  std::vector<char> seen(n, 0);
  Path out;
  for (int v : walk) {
    if (seen[v] || v == last) continue;
    seen[v] = 1;
    out.push_back(v);
  }
  if (last >= 0) out.push_back(last);
  return out;
}

/// True iff p visits exactly the nodes in `nodes` once each, starting at s and ending at t.
inline bool is_hamiltonian_path(const Path& p, const std::vector<int>& nodes, int s, int t) {
  if (p.empty() || p.front() != s || p.back() != t) return false;
  if (p.size() != nodes.size()) return false;
  int n = 0;
  for (int v : nodes) n = std::max(n, v + 1);
  for (int v : p) n = std::max(n, v + 1);
  std::vector<int> want(n, 0), got(n, 0);
  for (int v : nodes) ++want[v];
  for (int v : p) ++got[v];
  return want == got && (s != t || p.size() == 1);
}

inline std::vector<int> all_nodes(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace dirlat

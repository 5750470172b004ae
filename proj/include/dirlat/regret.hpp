#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dirlat/atspp.hpp"
#include "dirlat/errors.hpp"
#include "dirlat/max_flow.hpp"
#include "dirlat/metric.hpp"
#include "dirlat/path.hpp"

namespace dirlat {

/// Out-branching rooted at `root`; parent[v] == -1 means v is not on it.
struct Branching {
  int root = 0;
  std::vector<int> parent;

  [[nodiscard]] bool contains(int v) const { return v == root || parent[v] >= 0; }
  [[nodiscard]] bool has_arc(int u, int v) const { return v != root && parent[v] == u; }
  [[nodiscard]] std::vector<std::pair<int, int>> arcs() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < static_cast<int>(parent.size()); ++v)
      if (v != root && parent[v] >= 0) out.emplace_back(parent[v], v);
    return out;
  }
  /// Every present node reaches the root through present parents.
  [[nodiscard]] bool valid() const {
    const int n = static_cast<int>(parent.size());
    for (int v = 0; v < n; ++v) {
      if (v == root || parent[v] < 0) continue;
      int u = v;
      for (int steps = 0; u != root; ++steps) {
        if (steps > n || parent[u] < 0) return false;
        u = parent[u];
      }
    }
    return true;
  }
};

struct WeightedBranchingSet {
  std::vector<Branching> branchings;
  std::vector<Rational> gamma;
  Rational k;
};

/// r-v connectivity under capacities x.
inline Rational connectivity(const Matrix& x, int root, int v) {
  if (v == root) return Rational();
  return max_flow_min_cut(x, root, v).value;
}

/// Empty string when the decomposition satisfies the weight, arc and node inequalities.
inline std::string check_branching_contract(const Matrix& x, int root, const Rational& k, const WeightedBranchingSet& w) {
  const int n = static_cast<int>(x.size());
  Rational total;
  for (std::size_t i = 0; i < w.branchings.size(); ++i) {
    if (w.gamma[i].sign() < 0) return "negative weight";
    if (w.branchings[i].root != root || !w.branchings[i].valid()) return "not an out-branching from the root";
    total += w.gamma[i];
  }
  if (total != k) return "weights sum to " + total.str() + " instead of " + k.str();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      Rational load;
      for (std::size_t i = 0; i < w.branchings.size(); ++i)
        if (w.branchings[i].has_arc(a, b)) load += w.gamma[i];
      if (load > x[a][b]) return "arc " + std::to_string(a) + "->" + std::to_string(b) + " over capacity";
    }
  for (int v = 0; v < n; ++v) {
    if (v == root) continue;
    Rational cover;
    for (std::size_t i = 0; i < w.branchings.size(); ++i)
      if (w.branchings[i].contains(v)) cover += w.gamma[i];
    if (cover < min(k, connectivity(x, root, v))) return "node " + std::to_string(v) + " under-covered";
  }
  return "";
}

namespace detail {

// Largest gamma in (0, cap] keeping lambda_v(x - gamma B) >= req_v - gamma [v in B] for all v;
// Newton steps on the violated min cut, starting from the cap. Returns 0 when none exists.
inline Rational peel_weight(const Matrix& x, const std::vector<Rational>& req, const Branching& b, Rational gamma) {
  const int n = static_cast<int>(x.size());
  for (int guard = 0; guard < 10000 && gamma.sign() > 0; ++guard) {
    Matrix cap = x;
    for (auto [u, v] : b.arcs()) cap[u][v] -= gamma;
    bool violated = false;
    for (int v = 0; v < n && !violated; ++v) {
      if (v == b.root) continue;
      const Rational e = b.contains(v) ? Rational(1) : Rational();
      const Rational need = req[v] - gamma * e;
      if (need.sign() <= 0) continue;
      auto f = max_flow_min_cut(cap, b.root, v);
      if (f.value >= need) continue;
      violated = true;
      Rational base;
      int entering = 0;
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c)
          if (a != c && f.source_side[a] && !f.source_side[c]) {
            base += x[a][c];
            entering += b.has_arc(a, c);
          }
      const Rational slope = Rational(entering) - e;
      ensure(slope.sign() > 0, "peel: violated cut with non-negative slope");
      gamma = max(Rational(), (base - req[v]) / slope);
    }
    if (!violated) return gamma;
  }
  return Rational();
}

// Candidate branchings inside supp(x), nodes with a mandatory flag always present.
// Options per node are tried parents first, absent last, so wide branchings come first.
inline bool search_branching(const Matrix& x, int root, const std::vector<char>& mandatory,
                             const std::function<bool(const Branching&)>& accept, long& budget) {
  const int n = static_cast<int>(x.size());
  Branching b;
  b.root = root;
  b.parent.assign(n, -1);
  std::function<bool(int)> rec = [&](int v) -> bool {
    if (v == n) {
      if (--budget < 0) return true;
      return b.valid() && accept(b);
    }
    if (v == root) return rec(v + 1);
    for (int u = 0; u < n; ++u) {
      if (u == v || x[u][v].sign() <= 0) continue;
      b.parent[v] = u;
      if (rec(v + 1)) return true;
    }
    b.parent[v] = -1;
    if (!mandatory[v]) return rec(v + 1);
    return false;
  };
  return rec(0);
}

}  // namespace detail

/// Weighted out-branchings with total weight K, dominated by x per arc, covering each v at
/// least min(K, lambda_v) times. Peels one branching at a time at the largest feasible weight.
inline WeightedBranchingSet branching_decomposition(const Matrix& x, int root, const Rational& k) {
  require(k.sign() > 0, "branching decomposition needs K > 0");
  const int n = static_cast<int>(x.size());
  WeightedBranchingSet out;
  out.k = k;
  Matrix res = x;
  Rational k_left = k;
  std::vector<Rational> req(n);
  for (int v = 0; v < n; ++v)
    if (v != root) req[v] = min(k, connectivity(x, root, v));
  for (int round = 0; k_left.sign() > 0; ++round) {
    ensure(round < 100000, "branching decomposition did not terminate");
    std::vector<char> mandatory(n, 0);
    for (int v = 0; v < n; ++v)
      if (v != root && req[v].sign() > 0 && req[v] == k_left) mandatory[v] = 1;
    std::optional<Branching> pick;
    Rational gamma;
    long budget = 2000000;
    detail::search_branching(res, root, mandatory, [&](const Branching& b) {
      Rational cap = k_left;
      for (auto [u, v] : b.arcs()) cap = min(cap, res[u][v]);
      for (int v = 0; v < n; ++v)
        if (v != root && !b.contains(v)) cap = min(cap, k_left - req[v]);
      if (cap.sign() <= 0) return false;
      Rational g = detail::peel_weight(res, req, b, cap);
      if (g.sign() <= 0) return false;
      pick = b;
      gamma = g;
      return true;
    }, budget);
    ensure(pick.has_value(), "no branching admits a positive peel weight");
    for (auto [u, v] : pick->arcs()) res[u][v] -= gamma;
    for (int v = 0; v < n; ++v)
      if (v != root && pick->contains(v)) req[v] = max(Rational(), req[v] - gamma);
    k_left -= gamma;
    out.branchings.push_back(*pick);
    out.gamma.push_back(gamma);
  }
  return out;
}

/// Double the off-path arcs of B, walk it Eulerian from s to t and shortcut.
inline Path branching_to_path(const Branching& b, int t) {
  require(b.contains(t), "branching_to_path: t is not on the branching");
  const int n = static_cast<int>(b.parent.size());
  std::vector<char> on_st(n, 0);
  for (int v = t; v != b.root; v = b.parent[v]) on_st[v] = 1;
  on_st[b.root] = 1;
  std::vector<std::vector<int>> children(n);
  for (auto [u, v] : b.arcs()) children[u].push_back(v);
  std::vector<int> walk;
  std::function<void(int)> visit = [&](int u) {
    walk.push_back(u);
    int next_on_path = -1;
    for (int c : children[u]) {
      if (on_st[c] && u != t) {
        next_on_path = c;
        continue;
      }
      visit(c);
      walk.push_back(u);
    }
    if (next_on_path >= 0) visit(next_on_path);
  };
  visit(b.root);
  return shortcut(walk, n, t);
}

struct RedDecoration {
  std::vector<char> red;                          // red[k]: edge (p[k], p[k+1])
  std::vector<std::pair<int, int>> intervals;     // edge index ranges [first, last]
  std::vector<int> interval_of;                   // per path position, -1 when not on a red edge
};

/// Edge (p[k], p[k+1]) is red when some earlier-or-equal node is at least as far from s as
/// some later node; s = p[0] is the regret root.
inline RedDecoration red_edges(const Path& p, const Metric& base) {
  const int len = static_cast<int>(p.size());
  RedDecoration r;
  r.red.assign(std::max(0, len - 1), 0);
  r.interval_of.assign(len, -1);
  if (len < 2) return r;
  const int s = p[0];
  std::vector<Rational> pre(len), suf(len);
  for (int k = 0; k < len; ++k) pre[k] = k == 0 ? base(s, p[k]) : max(pre[k - 1], base(s, p[k]));
  for (int k = len - 1; k >= 0; --k) suf[k] = k == len - 1 ? base(s, p[k]) : min(suf[k + 1], base(s, p[k]));
  for (int k = 0; k + 1 < len; ++k) r.red[k] = pre[k] >= suf[k + 1];
  for (int k = 0; k + 1 < len;) {
    if (!r.red[k]) {
      ++k;
      continue;
    }
    int e = k;
    while (e + 1 < len - 1 && r.red[e + 1]) ++e;
    const int id = static_cast<int>(r.intervals.size());
    r.intervals.emplace_back(k, e);
    for (int pos = k; pos <= e + 1; ++pos) r.interval_of[pos] = id;
    k = e + 1;
  }
  return r;
}

inline Rational red_cost(const Path& p, const RedDecoration& r, const Metric& base) {
  Rational c;
  for (std::size_t k = 0; k + 1 < p.size(); ++k)
    if (r.red[k]) c += base(p[k], p[k + 1]);
  return c;
}

/// Node set of red(v, P); empty when v is off P or touches no red edge.
inline NodeSet red_interval_nodes(const Path& p, const RedDecoration& r, int v) {
  auto it = std::find(p.begin(), p.end(), v);
  if (it == p.end()) return 0;
  int id = r.interval_of[static_cast<std::size_t>(it - p.begin())];
  if (id < 0) return 0;
  NodeSet s = 0;
  for (int pos = r.intervals[id].first; pos <= r.intervals[id].second + 1; ++pos) s |= NodeSet(1) << p[pos];
  return s;
}

struct DecoratedPath {
  Path path;
  Rational gamma;
  RedDecoration red;
};

/// Weight of paths through v whose red interval at v stays inside S.
inline Rational contained_weight(const std::vector<DecoratedPath>& paths, int v, NodeSet s) {
  Rational w;
  for (const auto& dp : paths) {
    if (std::find(dp.path.begin(), dp.path.end(), v) == dp.path.end()) continue;
    NodeSet r = red_interval_nodes(dp.path, dp.red, v);
    if ((r & ~s) == 0) w += dp.gamma;
  }
  return w;
}

/// f(S) = 1 iff every v in S has contained weight below delta.
inline bool cut_requirement(const std::vector<DecoratedPath>& paths, const Rational& delta, NodeSet s) {
  require(s != 0, "cut requirement needs a nonempty set");
  for (int v : members(s))
    if (contained_weight(paths, v, s) >= delta) return false;
  return true;
}

using Edge = std::pair<int, int>;  // undirected, first < second

/// Primal-dual forest for a downward-monotone 0/1 requirement, followed by reverse delete.
/// Returns the edges in the order they were kept.
inline std::vector<Edge> pd_forest(int n, const std::function<bool(NodeSet)>& f, const Metric& base) {
  NodeSet all = (NodeSet(1) << n) - 1;
  ensure(!f(all), "cut requirement demands crossing V");
  std::vector<int> comp(n);
  for (int v = 0; v < n; ++v) comp[v] = v;
  auto comp_set = [&](int c) {
    NodeSet s = 0;
    for (int v = 0; v < n; ++v)
      if (comp[v] == c) s |= NodeSet(1) << v;
    return s;
  };
  std::vector<Rational> load(n);  // dual accumulated on each node's side so far
  std::vector<Edge> added;
  for (int guard = 0; guard <= n; ++guard) {
    std::vector<char> active(n, 0);
    bool any = false;
    for (int c = 0; c < n; ++c) {
      NodeSet s = comp_set(c);
      if (s != 0 && f(s)) {
        active[c] = 1;
        any = true;
      }
    }
    if (!any) break;
    std::optional<Rational> best;
    Edge pick{-1, -1};
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        if (comp[u] == comp[v]) continue;
        int rate = active[comp[u]] + active[comp[v]];
        if (rate == 0) continue;
        Rational time = (base(u, v) - load[u] - load[v]) / Rational(rate);
        if (!best || time < *best) {
          best = time;
          pick = {u, v};
        }
      }
    ensure(best.has_value(), "primal-dual forest found no edge to grow");
    for (int v = 0; v < n; ++v)
      if (active[comp[v]]) load[v] += *best;
    int from = comp[pick.second], to = comp[pick.first];
    for (int v = 0; v < n; ++v)
      if (comp[v] == from) comp[v] = to;
    added.push_back(pick);
  }
  // Reverse delete: F stays feasible iff every component C has f(C) = 0.
  auto feasible = [&](const std::vector<Edge>& edges) {
    std::vector<int> c(n);
    for (int v = 0; v < n; ++v) c[v] = v;
    for (auto [a, b] : edges) {
      int from = c[b], to = c[a];
      for (int v = 0; v < n; ++v)
        if (c[v] == from) c[v] = to;
    }
    for (int r = 0; r < n; ++r) {
      NodeSet s = 0;
      for (int v = 0; v < n; ++v)
        if (c[v] == r) s |= NodeSet(1) << v;
      if (s != 0 && f(s)) return false;
    }
    return true;
  };
  std::vector<Edge> kept = added;
  for (int i = static_cast<int>(added.size()) - 1; i >= 0; --i) {
    std::vector<Edge> trial;
    for (const auto& e : kept)
      if (e != added[i]) trial.push_back(e);
    if (feasible(trial)) kept = std::move(trial);
  }
  ensure(feasible(kept), "primal-dual forest is infeasible");
  return kept;
}

inline Rational forest_cost(const std::vector<Edge>& f, const Metric& base) {
  Rational c;
  for (auto [u, v] : f) c += base(u, v);
  return c;
}

struct WitnessStructure {
  std::vector<Edge> forest;
  std::vector<Path> cycles;    // each starts at its witness
  std::vector<NodeSet> parts;  // node set of each cycle
  std::vector<int> witness;
  Rational delta;
};

/// Doubles and shortcuts each component of F into a cycle and picks its smallest witness.
inline WitnessStructure witness_structure(int n, const std::vector<Edge>& forest, const std::vector<DecoratedPath>& paths,
                                          const Rational& delta) {
  WitnessStructure ws;
  ws.forest = forest;
  ws.delta = delta;
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : forest) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  std::vector<char> seen(n, 0);
  for (int start = 0; start < n; ++start) {
    if (seen[start]) continue;
    NodeSet part = 0;
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      part |= NodeSet(1) << u;
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
    int w = -1;
    for (int v : members(part))
      if (contained_weight(paths, v, part) >= delta) {
        w = v;
        break;
      }
    ensure(w >= 0, "component of F has no witness");
    // Preorder from the witness is the doubled tree with repeats shortcut.
    Path cyc;
    std::vector<char> vis(n, 0);
    std::function<void(int)> dfs = [&](int u) {
      vis[u] = 1;
      cyc.push_back(u);
      for (int v : adj[u])
        if (!vis[v]) dfs(v);
    };
    dfs(w);
    ws.cycles.push_back(cyc);
    ws.parts.push_back(part);
    ws.witness.push_back(w);
  }
  return ws;
}

inline Rational cycle_cost(const Path& c, const Metric& m) {
  if (c.size() < 2) return Rational();
  Rational s = path_cost(c, m);
  return s + m(c.back(), c.front());
}

/// Keeps s, t and the witnesses whose red interval on P_i stays inside their own cycle.
inline Path shortcut_to_witnesses(const DecoratedPath& dp, const WitnessStructure& ws, int s, int t) {
  Path out;
  for (int v : dp.path) {
    bool keep = v == s || v == t;
    for (std::size_t j = 0; j < ws.witness.size() && !keep; ++j)
      if (ws.witness[j] == v && (red_interval_nodes(dp.path, dp.red, v) & ~ws.parts[j]) == 0) keep = true;
    if (keep) out.push_back(v);
  }
  return out;
}

/// Cheapest s-t path in the union of the shortcut paths that visits every witness, taking
/// witnesses in increasing distance from s.
inline Path witness_path(const std::vector<Path>& shortcuts, const std::vector<int>& witnesses, const Metric& reg,
                         const Metric& base, int s, int t) {
  const int n = reg.n();
  std::vector<std::vector<char>> arc(n, std::vector<char>(n, 0));
  for (const auto& p : shortcuts)
    for (std::size_t k = 0; k + 1 < p.size(); ++k) arc[p[k]][p[k + 1]] = 1;
  std::vector<int> order;
  for (int w : witnesses)
    if (w != s && w != t) order.push_back(w);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return base(s, a) < base(s, b) || (base(s, a) == base(s, b) && a < b); });
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    ensure(base(s, order[i]) < base(s, order[i + 1]), "witnesses are not totally ordered by distance");
  std::vector<int> stops{s};
  stops.insert(stops.end(), order.begin(), order.end());
  stops.push_back(t);
  Path out{s};
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    // Bellman-Ford on a tiny DAG; lexicographic tie-break on predecessor index.
    int from = stops[i], to = stops[i + 1];
    std::vector<std::optional<Rational>> d(n);
    std::vector<int> pred(n, -1);
    d[from] = Rational();
    for (int round = 0; round < n; ++round)
      for (int u = 0; u < n; ++u) {
        if (!d[u]) continue;
        for (int v = 0; v < n; ++v) {
          if (!arc[u][v]) continue;
          bool blocked = v != to && std::find(stops.begin(), stops.end(), v) != stops.end();
          if (blocked) continue;
          Rational cand = *d[u] + reg(u, v);
          if (!d[v] || cand < *d[v] || (cand == *d[v] && u < pred[v])) {
            d[v] = cand;
            pred[v] = u;
          }
        }
      }
    ensure(d[to].has_value(), "shortcut union has no path through the witnesses");
    Path seg;
    for (int v = to; v != from; v = pred[v]) seg.push_back(v);
    out.insert(out.end(), seg.rbegin(), seg.rend());
  }
  return out;
}

/// Splices every cycle into P at its witness and shortcuts to a Hamiltonian s-t path.
inline Path graft(const Path& p, const WitnessStructure& ws, int n, int t) {
  std::vector<int> walk;
  for (int v : p) {
    walk.push_back(v);
    for (std::size_t j = 0; j < ws.witness.size(); ++j)
      if (ws.witness[j] == v) {
        const Path& c = ws.cycles[j];
        walk.insert(walk.end(), c.begin() + 1, c.end());
        if (c.size() > 1) walk.push_back(v);
      }
  }
  return shortcut(walk, n, t);
}

/// Minimiser (2 rho + sqrt 6)/(2 + 2 sqrt 6) of 6/(rho - d) + 2/(2d - 1), rounded down to
/// a multiple of 1/denominator.
inline Rational delta_opt(const Rational& rho, std::int64_t denominator = 1000000) {
  require(rho > Rational(1, 2) && rho <= Rational(1), "delta_opt needs 1/2 < rho <= 1");
  require(denominator >= 1, "denominator must be positive");
  const Rational d(denominator);
  // p/D <= delta  <=>  a sqrt6 >= b with a = 1 - 2p/D, b = 2p/D - 2 rho.
  auto below = [&](std::int64_t p) {
    Rational q = Rational(p) / d;
    Rational a = Rational(1) - Rational(2) * q, b = Rational(2) * q - Rational(2) * rho;
    if (a.sign() >= 0 && b.sign() <= 0) return true;
    if (a.sign() <= 0 && b.sign() > 0) return false;
    if (a.sign() > 0) return Rational(6) * a * a >= b * b;  // both positive
    return Rational(6) * a * a <= b * b;                     // both non-positive
  };
  std::int64_t lo = 0, hi = denominator;  // below(lo) holds, below(hi) fails
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    (below(mid) ? lo : hi) = mid;
  }
  return Rational(lo) / d;
}

inline Rational regret_gap_bound(const Rational& rho, const Rational& delta) {
  return Rational(6) / (rho - delta) + Rational(2) / (Rational(2) * delta - Rational(1));
}

struct RegretCertificate {
  Rational rho;
  Rational delta;
  Rational opt_lp;
  int branching_q = 0;
  std::string branching_contract;  // empty when satisfied
  Rational paths_cost;             // sum gamma_i c^reg(P_i)
  std::optional<Rational> red_ratio_max;  // max red c-cost / c^reg(P_i)
  bool red_bound = true;
  bool stitch_bound = true;        // c(P_i) <= 2 c(B_i) - c_st
  Rational forest_cost;
  Rational cycle_cost;
  Rational shortcut_cost;          // sum gamma_i c^reg(P'_i)
  bool shortcut_order = true;
  bool acyclic = true;
  Rational min_witness_cover;
  Rational witness_path_cost;
  Rational final_cost;
  Rational bound;
  Path path;
  std::vector<DecoratedPath> paths;
  WitnessStructure witnesses;
  std::vector<Path> shortcuts;
  WeightedBranchingSet branchings;
  Path z_path;
};

inline bool is_acyclic_union(const std::vector<Path>& paths, int n) {
  Adjacency g(n);
  for (const auto& p : paths)
    for (std::size_t k = 0; k + 1 < p.size(); ++k) g[p[k]].push_back(p[k + 1]);
  for (const auto& c : strongly_connected_components(g))
    if (c.size() > 1) return false;
  for (int u = 0; u < n; ++u)
    for (int v : g[u])
      if (u == v) return false;
  return true;
}

/// Rounds an optimal LP solution over the regret metric of `base` (root s) into a
/// Hamiltonian s-t path; every intermediate bound is recorded and the hard ones asserted.
inline RegretCertificate round_regret(const Metric& base, const AtsppLpState& st, const Rational& delta) {
  const int n = st.n();
  const int s = st.s, t = st.t;
  const Metric& reg = st.metric;
  require(base.n() == n, "base metric size mismatch");
  require(delta > Rational(1, 2) && delta < st.rho, "delta must lie in (1/2, rho)");
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      require(reg(u, v) == base(s, u) + base(u, v) - base(s, v), "LP metric is not the regret metric of base at s");
  RegretCertificate cert;
  cert.rho = st.rho;
  cert.delta = delta;
  cert.opt_lp = st.opt_lp;

  // Step 2: branchings, then s-t paths.
  cert.branchings = branching_decomposition(st.x, s, Rational(1));
  cert.branching_q = static_cast<int>(cert.branchings.branchings.size());
  cert.branching_contract = check_branching_contract(st.x, s, Rational(1), cert.branchings);
  ensure(cert.branching_contract.empty(), "branching contract: " + cert.branching_contract);
  for (std::size_t i = 0; i < cert.branchings.branchings.size(); ++i) {
    const Branching& b = cert.branchings.branchings[i];
    DecoratedPath dp;
    dp.path = branching_to_path(b, t);
    dp.gamma = cert.branchings.gamma[i];
    dp.red = red_edges(dp.path, base);
    Rational bc;
    for (auto [u, v] : b.arcs()) bc += base(u, v);
    if (path_cost(dp.path, base) > Rational(2) * bc - base(s, t)) cert.stitch_bound = false;
    Rational rc = red_cost(dp.path, dp.red, base), pr = path_cost(dp.path, reg);
    if (Rational(2) * rc > Rational(3) * pr) cert.red_bound = false;
    if (pr.sign() > 0 && (!cert.red_ratio_max || rc / pr > *cert.red_ratio_max)) cert.red_ratio_max = rc / pr;
    cert.paths_cost += dp.gamma * pr;
    cert.paths.push_back(std::move(dp));
  }
  ensure(cert.stitch_bound, "branching path exceeds 2 c(B) - c_st");
  ensure(cert.red_bound, "red edges exceed 3/2 of the regret cost");
  ensure(cert.paths_cost <= Rational(2) * st.opt_lp, "branching paths exceed 2 OPT_LP");

  // Step 3: forest for the cut requirement and witness cycles.
  auto f = [&](NodeSet set) { return cut_requirement(cert.paths, delta, set); };
  auto forest = pd_forest(n, f, base);
  cert.forest_cost = forest_cost(forest, base);
  cert.witnesses = witness_structure(n, forest, cert.paths, delta);
  for (const auto& c : cert.witnesses.cycles) cert.cycle_cost += cycle_cost(c, reg);
  ensure(cert.cycle_cost * (st.rho - delta) <= Rational(6) * st.opt_lp, "witness cycles exceed 6/(rho - delta) OPT_LP");

  // Step 4: shortcut each path to its witnesses.
  std::vector<int> distinct_witness = cert.witnesses.witness;
  for (const auto& dp : cert.paths) {
    Path pp = shortcut_to_witnesses(dp, cert.witnesses, s, t);
    for (std::size_t k = 2; k + 1 < pp.size(); ++k)
      if (base(s, pp[k - 1]) >= base(s, pp[k])) cert.shortcut_order = false;
    cert.shortcut_cost += dp.gamma * path_cost(pp, reg);
    cert.shortcuts.push_back(std::move(pp));
  }
  cert.acyclic = is_acyclic_union(cert.shortcuts, n);
  ensure(cert.shortcut_order, "shortcut path internal nodes are not distance-increasing");
  ensure(cert.acyclic, "union of shortcut paths has a cycle");
  ensure(cert.shortcut_cost <= Rational(2) * st.opt_lp, "shortcut paths exceed 2 OPT_LP");
  std::optional<Rational> cover_min;
  for (int w : cert.witnesses.witness) {
    Rational cover;
    for (std::size_t i = 0; i < cert.shortcuts.size(); ++i)
      if (std::find(cert.shortcuts[i].begin(), cert.shortcuts[i].end(), w) != cert.shortcuts[i].end())
        cover += cert.paths[i].gamma;
    if (!cover_min || cover < *cover_min) cover_min = cover;
  }
  cert.min_witness_cover = cover_min.value_or(Rational(1));
  ensure(cert.min_witness_cover >= delta, "a witness lies on less than a delta fraction of shortcut paths");

  // Step 5: one path through all witnesses inside the shortcut union.
  cert.z_path = witness_path(cert.shortcuts, cert.witnesses.witness, reg, base, s, t);
  cert.witness_path_cost = path_cost(cert.z_path, reg);
  ensure(cert.witness_path_cost * (Rational(2) * delta - Rational(1)) <= Rational(2) * st.opt_lp,
         "witness path exceeds 2/(2 delta - 1) OPT_LP");

  // Step 6: graft cycles.
  cert.path = graft(cert.z_path, cert.witnesses, n, t);
  ensure(is_hamiltonian_path(cert.path, all_nodes(n), s, t), "grafted path is not Hamiltonian s-t");
  cert.final_cost = path_cost(cert.path, reg);
  cert.bound = regret_gap_bound(st.rho, delta) * st.opt_lp;
  ensure(cert.final_cost <= cert.bound, "final regret cost exceeds the gap bound");
  return cert;
}

}  // namespace dirlat

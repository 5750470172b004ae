#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dirlat/errors.hpp"
#include "dirlat/graph.hpp"
#include "dirlat/lp.hpp"
#include "dirlat/max_flow.hpp"
#include "dirlat/path.hpp"

namespace dirlat {

/// Node subsets as bitmasks; instances stay far below 32 nodes.
using NodeSet = std::uint32_t;

inline bool contains(NodeSet u, int v) { return (u >> v) & 1u; }
inline bool crosses(NodeSet u, int a, int b) { return contains(u, a) != contains(u, b); }
inline NodeSet node_set(const std::vector<int>& nodes) {
  NodeSet m = 0;
  for (int v : nodes) m |= NodeSet(1) << v;
  return m;
}
inline std::vector<int> members(NodeSet u) {
  std::vector<int> out;
  for (int v = 0; u >> v; ++v)
    if (contains(u, v)) out.push_back(v);
  return out;
}

inline void check_rho(const Rational& rho) {
  require(rho > Rational(1, 2) && rho <= Rational(1), "rho must lie in (1/2, 1]");
}

struct AtsppLpState {
  Metric metric;
  int s = 0;
  int t = 1;
  Rational rho;
  Matrix x;
  Rational opt_lp;
  std::vector<NodeSet> cuts;  // cut rows in row order after the degree rows
  LpProblem problem;
  LpSolution solution;
  std::vector<std::vector<int>> var;  // var[u][v], -1 on the diagonal

  [[nodiscard]] int n() const { return metric.n(); }
  [[nodiscard]] bool supported(int u, int v) const { return u != v && x[u][v].sign() > 0; }
  [[nodiscard]] Adjacency support() const {
    return adjacency_from(n(), [&](int u, int v) { return supported(u, v); });
  }
  [[nodiscard]] NodeSet interior() const {
    NodeSet all = (NodeSet(1) << n()) - 1;
    return all & ~(NodeSet(1) << s) & ~(NodeSet(1) << t);
  }
};

/// x(delta(U)) over both directions.
inline Rational cut_mass(const Matrix& x, NodeSet u) {
  Rational m;
  const int n = static_cast<int>(x.size());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && crosses(u, a, b)) m += x[a][b];
  return m;
}

namespace detail {

inline LpRow cut_row(const AtsppLpState& st, NodeSet u) {
  LpRow row;
  for (int a = 0; a < st.n(); ++a)
    for (int b = 0; b < st.n(); ++b)
      if (a != b && crosses(u, a, b)) row.coeffs.emplace_back(st.var[a][b], Rational(1));
  row.rel = Relation::GreaterEq;
  row.rhs = Rational(2) * st.rho;
  row.name = "cut_" + std::to_string(u);
  return row;
}

class AtsppCutOracle : public SeparationOracle {
 public:
  explicit AtsppCutOracle(AtsppLpState& st) : st_(st) {}

  std::vector<LpRow> separate(const std::vector<Rational>& xv, bool all) override {
    const int n = st_.n();
    Matrix cap(n, std::vector<Rational>(n));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) cap[a][b] = xv[st_.var[a][b]] + xv[st_.var[b][a]];
    std::vector<LpRow> out;
    std::vector<NodeSet> seen;
    for (int v = 0; v < n; ++v) {
      if (v == st_.s || v == st_.t) continue;
      auto f = max_flow_min_cut(cap, std::vector<int>{v}, std::vector<int>{st_.s, st_.t});
      if (f.value >= Rational(2) * st_.rho) continue;
      NodeSet u = 0;
      for (int a = 0; a < n; ++a)
        if (f.source_side[a]) u |= NodeSet(1) << a;
      if (std::find(seen.begin(), seen.end(), u) != seen.end()) continue;
      seen.push_back(u);
      out.push_back(cut_row(st_, u));
      pending.push_back(u);
      if (!all) break;
    }
    return out;
  }

  std::vector<NodeSet> pending;

 private:
  AtsppLpState& st_;
};

}  // namespace detail

struct AtsppLpOptions {
  bool explicit_cuts = false;  // enumerate every U up front instead of separating
  bool add_all = false;
};

/// Optimal basic solution of the relaxed-cut ATSP-path LP.
/// Degree rows read x(in(v)) - x(out(v)) = -1, +1, 0 for v = s, t, other, so their
/// duals are the node potentials z of the dual program.
inline AtsppLpState solve_atspp_lp(const Metric& m, int s, int t, const Rational& rho, AtsppLpOptions opt = {}) {
  require(m.n() >= 2, "ATSP path LP needs at least 2 nodes");
  require(m.n() <= 30, "ATSP path LP supports at most 30 nodes");
  require(s != t && s >= 0 && t >= 0 && s < m.n() && t < m.n(), "invalid endpoints");
  check_rho(rho);
  AtsppLpState st;
  st.metric = m;
  st.s = s;
  st.t = t;
  st.rho = rho;
  const int n = m.n();
  st.var.assign(n, std::vector<int>(n, -1));
  LpProblem p;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) st.var[u][v] = p.add_variable("x_" + std::to_string(u) + "_" + std::to_string(v), m(u, v));
  for (int v = 0; v < n; ++v) {
    LpRow row;
    for (int u = 0; u < n; ++u) {
      if (u == v) continue;
      row.coeffs.emplace_back(st.var[u][v], Rational(1));
      row.coeffs.emplace_back(st.var[v][u], Rational(-1));
    }
    row.rel = Relation::Equal;
    row.rhs = v == s ? Rational(-1) : (v == t ? Rational(1) : Rational(0));
    row.name = "deg_" + std::to_string(v);
    p.add_row(std::move(row));
  }
  if (opt.explicit_cuts) {
    for (NodeSet u = 1; u <= st.interior(); ++u) {
      if ((u & ~st.interior()) != 0) continue;
      p.add_row(detail::cut_row(st, u));
      st.cuts.push_back(u);
    }
    st.solution = solve(p);
    st.problem = std::move(p);
  } else {
    detail::AtsppCutOracle oracle(st);
    CuttingPlaneOptions cpo;
    cpo.add_all = opt.add_all;
    auto res = cutting_plane(p, {&oracle}, cpo);
    st.cuts = oracle.pending;
    st.solution = std::move(res.solution);
    st.problem = std::move(res.problem);
  }
  ensure(st.solution.status == LpStatus::Optimal, "ATSP path LP must be feasible and bounded");
  st.x.assign(n, std::vector<Rational>(n));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) st.x[u][v] = st.solution.x[st.var[u][v]];
  st.opt_lp = st.solution.objective;
  return st;
}

struct DualState {
  std::vector<Rational> z;
  std::map<NodeSet, Rational> y;  // positive entries only
  bool laminar = false;

  [[nodiscard]] Rational y_sum() const {
    Rational s;
    for (const auto& [u, w] : y) s += w;
    return s;
  }
};

inline Rational dual_objective(const AtsppLpState& st, const DualState& d) {
  return d.z[st.t] - d.z[st.s] + Rational(2) * st.rho * d.y_sum();
}

/// c^y_{uv}: total y over sets crossed by uv.
inline Rational crossing_weight(const DualState& d, int u, int v) {
  Rational w;
  for (const auto& [set, val] : d.y)
    if (crosses(set, u, v)) w += val;
  return w;
}

/// Dual rows violated by (y, z); restricted to supported arcs when requested.
inline std::vector<std::pair<int, int>> dual_violations(const AtsppLpState& st, const DualState& d, bool support_only) {
  std::vector<std::pair<int, int>> bad;
  for (int u = 0; u < st.n(); ++u)
    for (int v = 0; v < st.n(); ++v) {
      if (u == v || (support_only && !st.supported(u, v))) continue;
      if (d.z[v] - d.z[u] + crossing_weight(d, u, v) > st.metric(u, v)) bad.emplace_back(u, v);
    }
  return bad;
}

/// Dual of the ATSP path LP read off the simplex multipliers.
inline DualState lp_dual(const AtsppLpState& st) {
  DualState d;
  d.z.assign(st.n(), Rational());
  for (int v = 0; v < st.n(); ++v) d.z[v] = st.solution.dual[v];
  for (std::size_t i = 0; i < st.cuts.size(); ++i) {
    const Rational& w = st.solution.dual[st.n() + static_cast<int>(i)];
    if (w.sign() > 0) d.y[st.cuts[i]] += w;
  }
  return d;
}

inline bool is_laminar(const std::vector<NodeSet>& family) {
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      NodeSet a = family[i], b = family[j], c = a & b;
      if (c != 0 && c != a && c != b) return false;
    }
  return true;
}

inline std::vector<NodeSet> support_family(const DualState& d) {
  std::vector<NodeSet> f;
  for (const auto& [u, w] : d.y) f.push_back(u);
  return f;
}

/// Optimal dual minimising z_s - z_t among optimal duals, with arc rows limited to supp(x).
inline DualState solve_zmin_dual(const AtsppLpState& st) {
  const int n = st.n();
  LpProblem p;
  p.sense = Sense::Maximize;
  std::vector<int> zp(n, -1), zm(n, -1);
  for (int v = 0; v < n; ++v) {
    if (v == st.s) continue;  // potentials are shift invariant; pin z_s = 0
    zp[v] = p.add_variable("zp_" + std::to_string(v), v == st.t ? Rational(1) : Rational());
    zm[v] = p.add_variable("zm_" + std::to_string(v), v == st.t ? Rational(-1) : Rational());
  }
  std::vector<NodeSet> sets;
  std::vector<int> yv;
  const NodeSet inner = st.interior();
  for (NodeSet u = 1; u <= inner; ++u) {
    if ((u & ~inner) != 0) continue;
    sets.push_back(u);
    yv.push_back(p.add_variable("y_" + std::to_string(u)));
  }
  LpRow value;
  value.coeffs.emplace_back(zp[st.t], Rational(1));
  value.coeffs.emplace_back(zm[st.t], Rational(-1));
  for (int y : yv) value.coeffs.emplace_back(y, Rational(2) * st.rho);
  value.rel = Relation::GreaterEq;
  value.rhs = st.opt_lp;
  value.name = "dual_value";
  p.add_row(std::move(value));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (!st.supported(u, v)) continue;
      LpRow row;
      if (v != st.s) {
        row.coeffs.emplace_back(zp[v], Rational(1));
        row.coeffs.emplace_back(zm[v], Rational(-1));
      }
      if (u != st.s) {
        row.coeffs.emplace_back(zp[u], Rational(-1));
        row.coeffs.emplace_back(zm[u], Rational(1));
      }
      for (std::size_t k = 0; k < sets.size(); ++k)
        if (crosses(sets[k], u, v)) row.coeffs.emplace_back(yv[k], Rational(1));
      row.rel = Relation::LessEq;
      row.rhs = st.metric(u, v);
      row.name = "arc_" + std::to_string(u) + "_" + std::to_string(v);
      p.add_row(std::move(row));
    }
  auto sol = solve(p);
  ensure(sol.status == LpStatus::Optimal, "z-minimising dual must be feasible and bounded");
  DualState d;
  d.z.assign(n, Rational());
  for (int v = 0; v < n; ++v)
    if (v != st.s) d.z[v] = sol.x[zp[v]] - sol.x[zm[v]];
  for (std::size_t k = 0; k < sets.size(); ++k)
    if (sol.x[yv[k]].sign() > 0) d.y[sets[k]] = sol.x[yv[k]];
  d.laminar = is_laminar(support_family(d));
  ensure(dual_objective(st, d) == st.opt_lp, "dual value row must be tight at the optimum");
  ensure(dual_violations(st, d, true).empty(), "z-minimising dual violates a supported arc row");
  return d;
}

/// Uncrossing: while two support sets A, B cross, move min(y_A, y_B) onto A∩B and A∪B.
/// Both stay inside V - {s, t}; every arc crosses the new pair at most as often as the old one.
inline DualState uncross(const AtsppLpState& st, DualState d, int max_steps = 1000000) {
  const Rational before = dual_objective(st, d);
  for (int step = 0;; ++step) {
    ensure(step < max_steps, "uncrossing did not terminate");
    std::optional<std::pair<NodeSet, NodeSet>> pair;
    for (auto a = d.y.begin(); a != d.y.end() && !pair; ++a)
      for (auto b = std::next(a); b != d.y.end(); ++b) {
        NodeSet c = a->first & b->first;
        if (c != 0 && c != a->first && c != b->first) {
          pair = std::make_pair(a->first, b->first);
          break;
        }
      }
    if (!pair) break;
    auto [a, b] = *pair;
    Rational w = min(d.y[a], d.y[b]);
    for (NodeSet u : {a, b}) {
      d.y[u] -= w;
      if (d.y[u].is_zero()) d.y.erase(u);
    }
    d.y[a & b] += w;
    d.y[a | b] += w;
  }
  d.laminar = true;
  ensure(is_laminar(support_family(d)), "uncrossed support is not laminar");
  ensure(dual_objective(st, d) == before, "uncrossing changed the dual objective");
  return d;
}

/// Sets U with y_U > 0 whose removal disconnects t from s in the support graph.
inline std::vector<NodeSet> contractibility_check(const AtsppLpState& st, const DualState& d) {
  Adjacency g = st.support();
  std::vector<NodeSet> bad;
  for (const auto& [u, w] : d.y) {
    std::vector<char> allowed(st.n(), 1);
    for (int v : members(u)) allowed[v] = 0;
    if (!reachable_from(g, st.s, allowed)[st.t]) bad.push_back(u);
  }
  return bad;
}

struct SccChain {
  std::vector<std::vector<int>> comps;
  std::vector<int> comp_of;
};

inline SccChain scc_chain(const AtsppLpState& st) {
  Adjacency g = st.support();
  SccChain ch;
  ch.comps = strongly_connected_components(g);
  ch.comp_of.assign(st.n(), -1);
  for (std::size_t i = 0; i < ch.comps.size(); ++i)
    for (int v : ch.comps[i]) ch.comp_of[v] = static_cast<int>(i);
  for (int u = 0; u < st.n(); ++u)
    for (int v : g[u]) ensure(ch.comp_of[u] <= ch.comp_of[v], "supported arc goes backwards in the component order");
  ensure(ch.comp_of[st.s] == 0, "s must lie in the first component");
  ensure(ch.comp_of[st.t] == static_cast<int>(ch.comps.size()) - 1, "t must lie in the last component");
  return ch;
}

using ArcSet = std::vector<std::pair<int, int>>;

inline ArcSet arcs_between(const AtsppLpState& st, NodeSet from, NodeSet to) {
  ArcSet out;
  for (int u = 0; u < st.n(); ++u)
    for (int v = 0; v < st.n(); ++v)
      if (st.supported(u, v) && contains(from, u) && contains(to, v) && !contains(from, v) && !contains(to, u))
        out.emplace_back(u, v);
  return out;
}
inline ArcSet arcs_in(const AtsppLpState& st, NodeSet u) {
  NodeSet all = (NodeSet(1) << st.n()) - 1;
  return arcs_between(st, all & ~u, u);
}
inline ArcSet arcs_out(const AtsppLpState& st, NodeSet u) {
  NodeSet all = (NodeSet(1) << st.n()) - 1;
  return arcs_between(st, u, all & ~u);
}
inline Rational arc_mass(const AtsppLpState& st, const ArcSet& arcs) {
  Rational m;
  for (auto [u, v] : arcs) m += st.x[u][v];
  return m;
}

struct TightSetReport {
  NodeSet set = 0;
  bool tight = false;          // x(delta(U)) == 2 rho
  bool first_in = false;       // delta_in(U_1) == delta_in(U)
  bool last_out = false;       // delta_out(U_l) == delta_out(U)
  bool chain_sets = false;     // delta_out(U_i) == delta_in(U_{i+1}) as arc sets
  bool chain_mass = false;     // all those masses equal rho
  int components = 0;

  [[nodiscard]] bool ok() const { return tight && first_in && last_out && chain_sets && chain_mass; }
};

/// Component structure of a tight set U inside the support graph.
inline TightSetReport tight_set_structure(const AtsppLpState& st, NodeSet u) {
  TightSetReport rep;
  rep.set = u;
  rep.tight = cut_mass(st.x, u) == Rational(2) * st.rho;
  std::vector<int> nodes = members(u);
  std::vector<int> local(st.n(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);
  Adjacency g(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (i != j && st.supported(nodes[i], nodes[j])) g[i].push_back(static_cast<int>(j));
  auto comps = strongly_connected_components(g);
  std::vector<NodeSet> parts;
  for (const auto& c : comps) {
    NodeSet p = 0;
    for (int i : c) p |= NodeSet(1) << nodes[i];
    parts.push_back(p);
  }
  rep.components = static_cast<int>(parts.size());
  rep.first_in = arcs_in(st, parts.front()) == arcs_in(st, u);
  rep.last_out = arcs_out(st, parts.back()) == arcs_out(st, u);
  rep.chain_sets = true;
  rep.chain_mass = arc_mass(st, arcs_in(st, u)) == st.rho;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    ArcSet out = arcs_out(st, parts[i]), in = arcs_in(st, parts[i + 1]);
    if (out != in) rep.chain_sets = false;
    if (arc_mass(st, out) != st.rho || arc_mass(st, in) != st.rho) rep.chain_mass = false;
  }
  return rep;
}

struct StitchEdge {
  int u = -1;
  int v = -1;
  Rational cost;
  Rational mass;           // x(delta_out(U_i) ∩ delta_in(U_{i+1}))
  Rational weighted_cost;  // sum of c * x over that arc set
};

/// Cheapest supported arc from component i to component i+1 (0-based), lexicographic ties.
inline StitchEdge stitch_edge(const AtsppLpState& st, const SccChain& ch, int i) {
  require(i >= 0 && i + 1 < static_cast<int>(ch.comps.size()), "stitch index out of range");
  StitchEdge e;
  for (int u : ch.comps[i])
    for (int v : ch.comps[i + 1]) {
      if (!st.supported(u, v)) continue;
      e.mass += st.x[u][v];
      e.weighted_cost += st.metric(u, v) * st.x[u][v];
      if (e.u < 0 || st.metric(u, v) < e.cost) {
        e.u = u;
        e.v = v;
        e.cost = st.metric(u, v);
      }
    }
  ensure(e.u >= 0, "consecutive support components have no connecting arc");
  return e;
}

inline int crossing_count(const Path& p, NodeSet u) {
  int c = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) c += crosses(u, p[i], p[i + 1]);
  return c;
}

namespace detail {

inline Path low_crossing_rec(const Adjacency& g, const std::vector<NodeSet>& family, NodeSet scope, int u, int w,
                             int depth) {
  ensure(depth < 64, "low-crossing recursion too deep");
  if (u == w) return {u};
  std::vector<char> allowed(g.size(), 0);
  for (int v : members(scope)) allowed[v] = 1;
  auto start = bfs_path(g, u, w, allowed);
  require(start.has_value(), "low_crossing_path: target unreachable inside the scope");
  Path p = *start;
  // Maximal family members strictly inside the scope; laminarity makes them disjoint.
  std::vector<NodeSet> children;
  for (NodeSet c : family) {
    if (c == scope || (c & ~scope) != 0) continue;
    bool maximal = true;
    for (NodeSet d : family)
      if (d != c && d != scope && (d & ~scope) == 0 && (c & ~d) == 0) maximal = false;
    if (maximal) children.push_back(c);
  }
  for (NodeSet child : children) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < p.size(); ++k)
      if (contains(child, p[k])) idx.push_back(k);
    if (idx.empty()) continue;
    std::size_t a = idx.front(), b = idx.back();
    std::vector<char> in_child(g.size(), 0);
    for (int v : members(child)) in_child[v] = 1;
    Path fixed(p.begin(), p.begin() + static_cast<long>(a));
    if (reachable_from(g, p[a], in_child)[p[b]]) {
      Path inner = low_crossing_rec(g, family, child, p[a], p[b], depth + 1);
      fixed.insert(fixed.end(), inner.begin(), inner.end());
    } else {
      // Leave once and come back once: keep the first block and the next re-entry.
      std::size_t x = a;
      while (x + 1 < p.size() && contains(child, p[x + 1])) ++x;
      std::size_t y = x + 1;
      while (!contains(child, p[y])) ++y;
      Path first = low_crossing_rec(g, family, child, p[a], p[x], depth + 1);
      fixed.insert(fixed.end(), first.begin(), first.end());
      fixed.insert(fixed.end(), p.begin() + static_cast<long>(x + 1), p.begin() + static_cast<long>(y));
      Path second = low_crossing_rec(g, family, child, p[y], p[b], depth + 1);
      fixed.insert(fixed.end(), second.begin(), second.end());
    }
    fixed.insert(fixed.end(), p.begin() + static_cast<long>(b + 1), p.end());
    p = std::move(fixed);
  }
  return p;
}

}  // namespace detail

/// Path from u to w inside G[scope] that crosses every family member strictly inside the
/// scope at most twice (checked by the caller via crossing_count).
inline Path low_crossing_path(const Adjacency& g, const std::vector<NodeSet>& family, NodeSet scope, int u, int w) {
  require(contains(scope, u) && contains(scope, w), "endpoints must lie in the scope");
  return detail::low_crossing_rec(g, family, scope, u, w, 0);
}

/// ATSP circuit instance: the support graph plus an extra node vbar with arcs (t, vbar)
/// costing OPT_LP and (vbar, s) costing 0. Missing arcs are simply absent.
struct CircuitInstance {
  int nodes = 0;
  int vbar = 0;
  int s = 0;
  int t = 0;
  std::vector<std::vector<std::optional<Rational>>> arc;  // arc[u][v] = cost if present
};

/// Returns a closed walk as a node sequence; consecutive entries (and last -> first) are arcs.
using CircuitSolver = std::function<std::vector<int>(const CircuitInstance&)>;

inline CircuitInstance build_circuit_instance(const AtsppLpState& st) {
  CircuitInstance h;
  h.nodes = st.n() + 1;
  h.vbar = st.n();
  h.s = st.s;
  h.t = st.t;
  h.arc.assign(h.nodes, std::vector<std::optional<Rational>>(h.nodes));
  for (int u = 0; u < st.n(); ++u)
    for (int v = 0; v < st.n(); ++v)
      if (st.supported(u, v)) h.arc[u][v] = st.metric(u, v);
  h.arc[st.t][h.vbar] = st.opt_lp;
  h.arc[h.vbar][st.s] = Rational();
  return h;
}

inline Rational circuit_cost(const CircuitInstance& h, const std::vector<int>& walk) {
  Rational c;
  for (std::size_t i = 0; i < walk.size(); ++i) {
    int a = walk[i], b = walk[(i + 1) % walk.size()];
    if (walk.size() == 1) break;
    ensure(h.arc[a][b].has_value(), "circuit uses an arc outside H");
    c += *h.arc[a][b];
  }
  return c;
}

/// Optimal circuit: Held-Karp DP over the shortest-path completion of H, expanded back to arcs.
inline std::vector<int> exact_circuit(const CircuitInstance& h, int cap = 14) {
  const int n = h.nodes;
  if (n > cap) throw CapacityError("circuit DP: " + std::to_string(n) + " nodes exceed cap " + std::to_string(cap));
  using Dist = std::optional<Rational>;
  std::vector<std::vector<Dist>> d(n, std::vector<Dist>(n));
  std::vector<std::vector<int>> next(n, std::vector<int>(n, -1));
  for (int u = 0; u < n; ++u) {
    d[u][u] = Rational();
    next[u][u] = u;
    for (int v = 0; v < n; ++v)
      if (u != v && h.arc[u][v]) {
        d[u][v] = h.arc[u][v];
        next[u][v] = v;
      }
  }
  for (int k = 0; k < n; ++k)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (!d[u][k] || !d[k][v]) continue;
        Rational via = *d[u][k] + *d[k][v];
        if (!d[u][v] || via < *d[u][v]) {
          d[u][v] = via;
          next[u][v] = next[u][k];
        }
      }
  // Tour over all nodes starting and ending at vbar.
  std::vector<int> others;
  for (int v = 0; v < n; ++v)
    if (v != h.vbar) others.push_back(v);
  const int k = static_cast<int>(others.size());
  const std::uint32_t full = (1u << k) - 1;
  std::vector<std::vector<Dist>> dp(std::size_t(1) << k, std::vector<Dist>(k));
  std::vector<std::vector<int>> par(std::size_t(1) << k, std::vector<int>(k, -1));
  for (int i = 0; i < k; ++i) dp[1u << i][i] = d[h.vbar][others[i]];
  for (std::uint32_t mask = 1; mask <= full; ++mask)
    for (int i = 0; i < k; ++i) {
      if (!dp[mask][i]) continue;
      for (int j = 0; j < k; ++j) {
        if ((mask >> j) & 1u || !d[others[i]][others[j]]) continue;
        Rational cand = *dp[mask][i] + *d[others[i]][others[j]];
        auto& slot = dp[mask | (1u << j)][j];
        if (!slot || cand < *slot) {
          slot = cand;
          par[mask | (1u << j)][j] = i;
        }
      }
    }
  int best = -1;
  Rational best_val;
  for (int i = 0; i < k; ++i) {
    if (!dp[full][i] || !d[others[i]][h.vbar]) continue;
    Rational v = *dp[full][i] + *d[others[i]][h.vbar];
    if (best < 0 || v < best_val) {
      best = i;
      best_val = v;
    }
  }
  ensure(best >= 0, "H admits no spanning circuit");
  std::vector<int> tour;
  std::uint32_t mask = full;
  for (int i = best; i >= 0;) {
    tour.push_back(others[i]);
    int p = par[mask][i];
    mask &= ~(1u << i);
    i = p;
  }
  tour.push_back(h.vbar);
  std::reverse(tour.begin(), tour.end());
  std::vector<int> walk;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    int a = tour[i], b = tour[(i + 1) % tour.size()];
    for (int v = a; v != b; v = next[v][b]) walk.push_back(v);
  }
  return walk;
}

/// Test double: the optimal circuit repeated `laps` times.
inline CircuitSolver multi_lap_circuit(int laps) {
  return [laps](const CircuitInstance& h) {
    std::vector<int> one = exact_circuit(h), out;
    for (int i = 0; i < laps; ++i) out.insert(out.end(), one.begin(), one.end());
    return out;
  };
}

struct RoundingCertificate {
  Rational opt_lp;
  Path path;
  Rational path_cost;
  std::optional<Rational> ratio;  // path_cost / opt_lp, absent when opt_lp == 0
  Rational z_gap;                 // z_s - z_t
  Rational rho;
  int k = 0;
  int ell = 0;
  Rational circuit_cost;
  std::optional<Rational> alpha_hat;  // circuit_cost / ((2 / rho) * opt_lp)
  Rational walks_cost;
  Rational cycles_cost;
  Rational stitch_cost;
  Rational y_sum;
  int max_crossings = 0;
  std::vector<StitchEdge> stitches;
};

/// Circuit-based rounding of an optimal LP-ATSPP solution into a Hamiltonian s-t path.
inline RoundingCertificate round_path(const AtsppLpState& st, const DualState& dual,
                                      const CircuitSolver& solver = [](const CircuitInstance& h) { return exact_circuit(h); }) {
  ensure(dual.laminar && is_laminar(support_family(dual)), "round_path needs a laminar dual");
  RoundingCertificate cert;
  cert.opt_lp = st.opt_lp;
  cert.rho = st.rho;
  cert.z_gap = dual.z[st.s] - dual.z[st.t];
  cert.y_sum = dual.y_sum();
  const int n = st.n();
  const Adjacency g = st.support();
  const std::vector<NodeSet> family = support_family(dual);

  // Step 1: circuit on H, cut at vbar into s-t walks.
  CircuitInstance h = build_circuit_instance(st);
  std::vector<int> circuit = solver(h);
  cert.circuit_cost = circuit_cost(h, circuit);
  {
    std::vector<int> seen(h.nodes, 0);
    for (int v : circuit) seen[v] = 1;
    ensure(std::all_of(seen.begin(), seen.end(), [](int b) { return b; }), "circuit does not span H");
  }
  auto first_bar = std::find(circuit.begin(), circuit.end(), h.vbar);
  std::rotate(circuit.begin(), first_bar, circuit.end());
  std::vector<Path> walks;
  for (int v : circuit) {
    if (v == h.vbar) {
      walks.emplace_back();
      continue;
    }
    walks.back().push_back(v);
  }
  for (const auto& w : walks) {
    ensure(!w.empty() && w.front() == st.s && w.back() == st.t, "walk between vbar visits must run from s to t");
    cert.walks_cost += path_cost(w, st.metric);
  }
  cert.k = static_cast<int>(walks.size());
  ensure(cert.walks_cost + Rational(cert.k) * st.opt_lp == cert.circuit_cost, "walk costs must add up to the circuit");
  if (st.opt_lp.sign() > 0) cert.alpha_hat = cert.circuit_cost / (Rational(2) / st.rho * st.opt_lp);

  // Step 2: component circuits C_i from walk restrictions joined by low-crossing paths.
  SccChain ch = scc_chain(st);
  const int ell = static_cast<int>(ch.comps.size());
  cert.ell = ell;
  std::vector<Path> cycles(ell);
  for (int i = 0; i < ell; ++i) {
    NodeSet comp = node_set(ch.comps[i]);
    std::vector<Path> pieces;
    for (const auto& w : walks) {
      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < w.size(); ++k)
        if (contains(comp, w[k])) idx.push_back(k);
      if (idx.empty()) continue;
      ensure(idx.back() - idx.front() + 1 == idx.size(), "a walk re-entered a strongly connected component");
      pieces.emplace_back(w.begin() + static_cast<long>(idx.front()), w.begin() + static_cast<long>(idx.back() + 1));
    }
    ensure(!pieces.empty(), "component not visited by any walk");
    Path cyc;
    for (std::size_t m = 0; m < pieces.size(); ++m) {
      const Path& r = pieces[m];
      const Path& nxt = pieces[(m + 1) % pieces.size()];
      cyc.insert(cyc.end(), r.begin(), r.end());
      Path link = low_crossing_path(g, family, comp, r.back(), nxt.front());
      for (NodeSet u : family)
        if ((u & ~comp) == 0 && u != comp) cert.max_crossings = std::max(cert.max_crossings, crossing_count(link, u));
        else ensure(crossing_count(link, u) == 0, "link path crosses a set outside its component");
      // Interior of the link; its endpoints already sit on the neighbouring pieces.
      if (link.size() > 2) cyc.insert(cyc.end(), link.begin() + 1, link.end() - 1);
    }
    cycles[i] = std::move(cyc);
    Rational c;
    for (std::size_t k = 0; k < cycles[i].size() && cycles[i].size() > 1; ++k)
      c += st.metric(cycles[i][k], cycles[i][(k + 1) % cycles[i].size()]);
    cert.cycles_cost += c;
  }

  // Step 3: stitch consecutive components and traverse each cycle twice.
  std::vector<int> enter(ell), leave(ell);
  enter[0] = st.s;
  leave[ell - 1] = st.t;
  for (int i = 0; i + 1 < ell; ++i) {
    StitchEdge e = stitch_edge(st, ch, i);
    ensure(e.mass >= Rational(2) * st.rho - Rational(1), "stitch mass below 2 rho - 1");
    if (i == 0 || i + 2 == ell) ensure(e.mass >= st.rho, "end stitch mass below rho");
    ensure((Rational(2) * st.rho - Rational(1)) * e.cost <= e.weighted_cost, "stitch edge too expensive");
    leave[i] = e.u;
    enter[i + 1] = e.v;
    cert.stitch_cost += e.cost;
    cert.stitches.push_back(e);
  }
  std::vector<int> walk;
  for (int i = 0; i < ell; ++i) {
    const Path& c = cycles[i];
    const std::size_t len = c.size();
    std::size_t a = static_cast<std::size_t>(std::find(c.begin(), c.end(), enter[i]) - c.begin());
    ensure(a < len, "entry node missing from its component cycle");
    for (std::size_t k = 0; k <= len; ++k) walk.push_back(c[(a + k) % len]);
    if (len > 1)
      for (std::size_t k = 1; c[(a + k - 1) % len] != leave[i]; ++k) walk.push_back(c[(a + k) % len]);
  }
  cert.path = shortcut(walk, n, st.t);
  cert.path_cost = path_cost(cert.path, st.metric);
  if (st.opt_lp.sign() > 0) cert.ratio = cert.path_cost / st.opt_lp;

  ensure(is_hamiltonian_path(cert.path, all_nodes(n), st.s, st.t), "rounded path is not Hamiltonian s-t");
  ensure(cert.stitch_cost * (Rational(2) * st.rho - Rational(1)) <= st.opt_lp, "stitch total exceeds OPT_LP/(2 rho - 1)");
  ensure(cert.path_cost <= cert.stitch_cost + Rational(2) * cert.cycles_cost, "path exceeds stitches plus doubled cycles");
  return cert;
}

/// Checks  sum_i c(C_i) <= sum_j c(W_j) + 2 k sum_U y_U  and the resulting bound on c(P).
inline bool cycle_bound_holds(const RoundingCertificate& c) {
  return c.cycles_cost <= c.walks_cost + Rational(2 * c.k) * c.y_sum;
}
inline bool path_bound_holds(const RoundingCertificate& c) {
  Rational bound = c.opt_lp / (Rational(2) * c.rho - Rational(1)) + Rational(2) * c.walks_cost + Rational(2 * c.k) * c.y_sum;
  return c.path_cost <= bound;
}

}  // namespace dirlat

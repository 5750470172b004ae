#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dirlat/atspp.hpp"
#include "dirlat/errors.hpp"
#include "dirlat/lp.hpp"
#include "dirlat/max_flow.hpp"
#include "dirlat/metric.hpp"
#include "dirlat/path.hpp"

namespace dirlat {

/// Bucket i covers times [2^i, 2^{i+1}); slot i holds (v*_i, l*_i) or nothing.
struct GuessProfile {
  std::vector<std::optional<std::pair<int, int>>> slots;

  [[nodiscard]] std::vector<int> admissible() const {
    std::vector<int> a;
    for (int i = 0; i < static_cast<int>(slots.size()); ++i)
      if (slots[i]) a.push_back(i);
    return a;
  }
  [[nodiscard]] bool forbidden(int t) const {
    for (int i = 0; i < static_cast<int>(slots.size()); ++i) {
      const int lo = 1 << i, hi = 1 << (i + 1);
      if (t < lo || t >= hi) continue;
      return !slots[i] || t > slots[i]->second;
    }
    return false;
  }
  [[nodiscard]] std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (i) s += ' ';
      s += slots[i] ? std::to_string(slots[i]->first) + "@" + std::to_string(slots[i]->second) : "-";
    }
    return s;
  }
  auto operator<=>(const GuessProfile&) const = default;
};

/// Number of buckets for horizon T: indices 0 .. floor(log2 T).
inline int bucket_count(int horizon) {
  int k = 0;
  while ((1 << k) <= horizon) ++k;
  return k;
}

inline int bucket_of(int t) {
  int i = 0;
  while ((2 << i) <= t) ++i;
  return i;
}

/// Time horizon: clients times the largest distance.
inline int default_horizon(const Metric& m) {
  require(m.is_positive_integer(), "horizon needs positive integer distances");
  return (m.n() - 1) * static_cast<int>(m.max_distance().numerator().get_si());
}

/// Throws PreconditionError unless slots fit the horizon, times lie in their bucket,
/// times increase and guessed nodes are distinct clients.
inline void validate_guess(const GuessProfile& g, const Metric& m, int horizon) {
  require(static_cast<int>(g.slots.size()) == bucket_count(horizon), "guess has the wrong number of buckets");
  int last = 0;
  std::vector<char> used(m.n(), 0);
  for (int i = 0; i < static_cast<int>(g.slots.size()); ++i) {
    if (!g.slots[i]) continue;
    auto [v, l] = *g.slots[i];
    require(v >= 0 && v < m.n() && v != m.depot, "guessed node must be a client");
    require(!used[v], "guessed nodes must be distinct");
    used[v] = 1;
    require(l >= (1 << i) && l < (2 << i) && l <= horizon, "guessed time outside its bucket");
    require(l > last, "guessed times must increase");
    last = l;
  }
}

/// Arc of the time-expanded graph: (u, t - c_uv) -> (v, t).
struct TimedArc {
  int u = 0;
  int v = 0;
  int t = 0;
};

struct LatencyLpModel {
  Metric metric;
  int horizon = 0;
  std::optional<GuessProfile> guess;
  std::vector<TimedArc> arcs;  // arc j is LP variable j
  LpProblem problem;
  bool trivially_infeasible = false;
  std::vector<std::vector<std::vector<int>>> into;  // into[v][t]: arcs arriving at (v, t)
};

/// Time-indexed relaxation over the nodes of G_T reachable from (r, 0) through allowed times.
/// x_{v,t} is the z-inflow at (v, t); rows: each client visited once in total, at most one
/// unit leaves the depot, inflow >= outflow at every (v, t), plus the guess equalities.
inline LatencyLpModel build_latency_lp(const Metric& m, int horizon, const std::optional<GuessProfile>& guess = std::nullopt) {
  require(m.is_positive_integer(), "latency LP needs positive integer distances");
  require(horizon >= 1, "horizon must be positive");
  const int n = m.n();
  const int r = m.depot;
  LatencyLpModel model;
  model.metric = m;
  model.horizon = horizon;
  model.guess = guess;
  std::vector<std::vector<char>> reach(n, std::vector<char>(horizon + 1, 0));
  reach[r][0] = 1;
  model.into.assign(n, std::vector<std::vector<int>>(horizon + 1));
  for (int t = 1; t <= horizon; ++t)
    for (int v = 0; v < n; ++v) {
      if (v == r || (guess && guess->forbidden(t))) continue;
      for (int u = 0; u < n; ++u) {
        if (u == v) continue;
        const auto d = m(u, v).numerator().get_si();
        if (d > t || !reach[u][t - d]) continue;
        model.into[v][t].push_back(static_cast<int>(model.arcs.size()));
        model.arcs.push_back({u, v, static_cast<int>(t)});
        reach[v][t] = 1;
      }
    }
  if (guess) validate_guess(*guess, m, horizon);
  LpProblem& p = model.problem;
  for (const auto& a : model.arcs)
    p.add_variable("z_" + std::to_string(a.u) + "_" + std::to_string(a.v) + "_" + std::to_string(a.t), Rational(a.t) * Rational(a.v != r));
  // Objective sum_t t * x_{v,t} equals sum over arcs of arrival time.
  std::vector<std::vector<std::vector<int>>> out_of(n, std::vector<std::vector<int>>(horizon + 1));
  for (int j = 0; j < static_cast<int>(model.arcs.size()); ++j) {
    const auto& a = model.arcs[j];
    out_of[a.u][a.t - static_cast<int>(m(a.u, a.v).numerator().get_si())].push_back(j);
  }
  for (int v = 0; v < n; ++v) {
    if (v == r) continue;
    LpRow row;
    for (int t = 0; t <= horizon; ++t)
      for (int j : model.into[v][t]) row.coeffs.emplace_back(j, Rational(1));
    if (row.coeffs.empty()) model.trivially_infeasible = true;
    row.rel = Relation::Equal;
    row.rhs = Rational(1);
    row.name = "visit_" + std::to_string(v);
    p.add_row(std::move(row));
  }
  {
    LpRow row;
    for (int j : out_of[r][0]) row.coeffs.emplace_back(j, Rational(1));
    row.rel = Relation::LessEq;
    row.rhs = Rational(1);
    row.name = "depot";
    p.add_row(std::move(row));
  }
  for (int v = 0; v < n; ++v)
    for (int t = 1; t <= horizon; ++t) {
      if (v == r || out_of[v][t].empty()) continue;
      LpRow row;
      for (int j : model.into[v][t]) row.coeffs.emplace_back(j, Rational(1));
      for (int j : out_of[v][t]) row.coeffs.emplace_back(j, Rational(-1));
      row.rel = Relation::GreaterEq;
      row.rhs = Rational();
      row.name = "flow_" + std::to_string(v) + "_" + std::to_string(t);
      p.add_row(std::move(row));
    }
  if (guess) {
    for (int i : guess->admissible()) {
      auto [v, l] = *guess->slots[i];
      require(v != r && v >= 0 && v < n, "guess names an invalid node");
      if (l > horizon || model.into[v][l].empty()) {
        model.trivially_infeasible = true;
        continue;
      }
      LpRow row;
      for (int j : model.into[v][l]) row.coeffs.emplace_back(j, Rational(1));
      row.rel = Relation::Equal;
      row.rhs = Rational(1);
      row.name = "guess_" + std::to_string(i);
      p.add_row(std::move(row));
    }
  }
  return model;
}

/// The guess constraints: x_{v*_i, l*_i} = 1 as rows, x_{v,t} = 0 on forbidden times by
/// never creating the arcs that land there.
inline LatencyLpModel strengthen_with_guess(const LatencyLpModel& core, const GuessProfile& guess) {
  return build_latency_lp(core.metric, core.horizon, guess);
}

struct TimeIndexedSolution {
  int horizon = 0;
  std::vector<std::vector<Rational>> x;  // x[v][t]
  std::vector<Rational> z;               // per model arc
  Rational objective;
  int cuts = 0;
};

inline std::vector<std::vector<Rational>> visits_from_flow(const LatencyLpModel& model, const std::vector<Rational>& z) {
  const int n = model.metric.n();
  std::vector<std::vector<Rational>> x(n, std::vector<Rational>(model.horizon + 1));
  for (int j = 0; j < static_cast<int>(model.arcs.size()); ++j) x[model.arcs[j].v][model.arcs[j].t] += z[j];
  return x;
}

/// Integral solution that follows p from the depot; nullopt when an arc of p is missing from the model.
inline std::optional<TimeIndexedSolution> solution_from_path(const LatencyLpModel& model, const Path& p) {
  require(!p.empty() && p.front() == model.metric.depot, "path must start at the depot");
  TimeIndexedSolution sol;
  sol.horizon = model.horizon;
  sol.z.assign(model.arcs.size(), Rational());
  auto prof = latency(p, model.metric);
  for (std::size_t k = 1; k < p.size(); ++k) {
    const Rational& a = prof.arrival[p[k]];
    if (a > Rational(model.horizon)) return std::nullopt;
    const int t = static_cast<int>(a.numerator().get_si());
    int found = -1;
    for (int j : model.into[p[k]][t])
      if (model.arcs[j].u == p[k - 1]) found = j;
    if (found < 0) return std::nullopt;
    sol.z[found] = Rational(1);
    sol.objective += a;
  }
  sol.x = visits_from_flow(model, sol.z);
  return sol;
}

struct LatencyCut {
  int v = 0;
  int t = 0;
  NodeSet sink_side = 0;
};

/// Cut row for (v, t, S): sum over arcs entering S by time t minus visits of v by time t >= 0.
inline LpRow latency_cut_row(const LatencyLpModel& model, const LatencyCut& c) {
  std::map<int, Rational> coef;
  for (int j = 0; j < static_cast<int>(model.arcs.size()); ++j) {
    const auto& a = model.arcs[j];
    if (a.t > c.t) continue;
    if (!contains(c.sink_side, a.u) && contains(c.sink_side, a.v)) coef[j] += Rational(1);
    if (a.v == c.v) coef[j] -= Rational(1);
  }
  LpRow row;
  for (auto& [j, w] : coef)
    if (!w.is_zero()) row.coeffs.emplace_back(j, w);
  row.rel = Relation::GreaterEq;
  row.rhs = Rational();
  row.name = "cut_" + std::to_string(c.v) + "_" + std::to_string(c.t) + "_" + std::to_string(c.sink_side);
  return row;
}

/// Violated cut constraints, scanning t upward and clients in index order at each t.
/// Only (v, t) with x_{v,t} > 0 can be the tightest time for v.
inline std::vector<LatencyCut> separate_latency(const LatencyLpModel& model, const TimeIndexedSolution& cand, bool all) {
  const int n = model.metric.n();
  const int r = model.metric.depot;
  require(static_cast<int>(cand.z.size()) == static_cast<int>(model.arcs.size()), "candidate has the wrong number of arcs");
  require(static_cast<int>(cand.x.size()) == n, "candidate has the wrong number of nodes");
  const auto& x = cand.x;
  const auto& z = cand.z;
  Matrix cap(n, std::vector<Rational>(n));
  std::vector<Rational> seen(n);
  std::vector<std::vector<int>> by_time(model.horizon + 1);
  for (int j = 0; j < static_cast<int>(model.arcs.size()); ++j) by_time[model.arcs[j].t].push_back(j);
  std::vector<LatencyCut> out;
  for (int t = 0; t <= model.horizon; ++t) {
    for (int j : by_time[t]) cap[model.arcs[j].u][model.arcs[j].v] += z[j];
    for (int v = 0; v < n; ++v) {
      if (v == r) continue;
      seen[v] += x[v][t];
      if (x[v][t].sign() <= 0) continue;
      auto f = max_flow_min_cut(cap, r, v);
      if (f.value >= seen[v]) continue;
      LatencyCut c;
      c.v = v;
      c.t = t;
      // Smallest sink side: nodes that still reach v in the residual graph.
      std::vector<int> stack{v};
      c.sink_side = NodeSet(1) << v;
      while (!stack.empty()) {
        const int w = stack.back();
        stack.pop_back();
        for (int a = 0; a < n; ++a)
          if (!contains(c.sink_side, a) && (cap[a][w] - f.flow[a][w] + f.flow[w][a]).sign() > 0) {
            c.sink_side |= NodeSet(1) << a;
            stack.push_back(a);
          }
      }
      out.push_back(c);
      if (!all) return out;
    }
  }
  return out;
}

namespace detail {

class LatencyCutOracle : public SeparationOracle {
 public:
  explicit LatencyCutOracle(const LatencyLpModel& m) : model_(m) {}
  std::vector<LpRow> separate(const std::vector<Rational>& z, bool all) override {
    std::vector<LpRow> rows;
    TimeIndexedSolution cand;
    cand.horizon = model_.horizon;
    cand.z = z;
    cand.x = visits_from_flow(model_, z);
    for (const auto& c : separate_latency(model_, cand, all)) {
      rows.push_back(latency_cut_row(model_, c));
      ++count;
    }
    return rows;
  }
  int count = 0;

 private:
  const LatencyLpModel& model_;
};

}  // namespace detail

/// Optimal solution, or nullopt when the (strengthened) relaxation is infeasible.
inline std::optional<TimeIndexedSolution> solve_latency_lp(const LatencyLpModel& model, bool add_all = true) {
  if (model.trivially_infeasible) return std::nullopt;
  detail::LatencyCutOracle oracle(model);
  CuttingPlaneOptions opt;
  opt.add_all = add_all;
  auto res = cutting_plane(model.problem, {&oracle}, opt);
  if (res.solution.status == LpStatus::Infeasible) return std::nullopt;
  ensure(res.solution.status == LpStatus::Optimal, "latency LP cannot be unbounded");
  TimeIndexedSolution sol;
  sol.horizon = model.horizon;
  sol.z = res.solution.x;
  sol.x = visits_from_flow(model, sol.z);
  sol.objective = res.solution.objective;
  sol.cuts = oracle.count;
  ensure(separate_latency(model, sol, false).empty(), "accepted latency LP solution violates a cut");
  return sol;
}

/// Empty string when z is one unit of flow from (r, 0) to the last guessed visit and no
/// supported arc skips over, leaves from, or lands on a guessed time at another node.
inline std::string time_expanded_flow_check(const LatencyLpModel& model, const TimeIndexedSolution& sol) {
  require(model.guess.has_value(), "flow check needs a guess");
  const Metric& m = model.metric;
  const int n = m.n();
  const int r = m.depot;
  auto adm = model.guess->admissible();
  if (adm.empty()) return "no admissible bucket";
  auto [vend, lend] = *model.guess->slots[adm.back()];
  std::vector<std::vector<Rational>> net(n, std::vector<Rational>(model.horizon + 1));
  for (int j = 0; j < static_cast<int>(model.arcs.size()); ++j) {
    const auto& a = model.arcs[j];
    if (sol.z[j].sign() == 0) continue;
    const int dep = a.t - static_cast<int>(m(a.u, a.v).numerator().get_si());
    net[a.v][a.t] += sol.z[j];
    net[a.u][dep] -= sol.z[j];
    for (int i : adm) {
      auto [vs, ls] = *model.guess->slots[i];
      std::string arc = std::to_string(a.u) + "@" + std::to_string(dep) + "->" + std::to_string(a.v) + "@" + std::to_string(a.t);
      if (dep < ls && ls < a.t) return "arc " + arc + " skips guessed time " + std::to_string(ls);
      if (dep == ls && a.u != vs) return "arc " + arc + " leaves at a guessed time from the wrong node";
      if (a.t == ls && a.v != vs) return "arc " + arc + " lands at a guessed time on the wrong node";
    }
  }
  for (int v = 0; v < n; ++v)
    for (int t = 0; t <= model.horizon; ++t) {
      Rational want;
      if (v == r && t == 0) want = Rational(-1);
      if (v == vend && t == lend) want = Rational(1);
      if (net[v][t] != want) return "flow imbalance at " + std::to_string(v) + "@" + std::to_string(t);
    }
  return "";
}

struct BucketPlan {
  Rational rho;
  std::vector<int> threshold;             // t(v); -1 for the depot
  std::map<int, std::vector<int>> buckets;  // i -> members in index order
};

inline BucketPlan compute_thresholds(const TimeIndexedSolution& sol, const Metric& m, const Rational& rho) {
  require(rho > Rational(1, 2) && rho <= Rational(1), "rho must lie in (1/2, 1]");
  BucketPlan plan;
  plan.rho = rho;
  const int n = m.n();
  plan.threshold.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (v == m.depot) continue;
    Rational acc;
    for (int t = 0; t <= sol.horizon && plan.threshold[v] < 0; ++t) {
      acc += sol.x[v][t];
      if (acc >= rho) plan.threshold[v] = t;
    }
    ensure(plan.threshold[v] >= 1, "client never reaches rho visiting mass");
    plan.buckets[bucket_of(plan.threshold[v])].push_back(v);
  }
  return plan;
}

/// x'_{uv} = sum of z over arcs arriving before 2^{i+1}.
inline Matrix bucket_atspp_input(const LatencyLpModel& model, const TimeIndexedSolution& sol, int i) {
  const int n = model.metric.n();
  Matrix x(n, std::vector<Rational>(n));
  for (int j = 0; j < static_cast<int>(model.arcs.size()); ++j)
    if (model.arcs[j].t < (2 << i)) x[model.arcs[j].u][model.arcs[j].v] += sol.z[j];
  return x;
}

/// Guess profile read off a path: the last node visited in each bucket and its arrival time.
inline GuessProfile guess_from_path(const Path& p, const Metric& m, int horizon) {
  GuessProfile g;
  g.slots.assign(bucket_count(horizon), std::nullopt);
  auto prof = latency(p, m);
  for (std::size_t k = 1; k < p.size(); ++k) {
    const Rational& a = prof.arrival[p[k]];
    ensure(a.is_integer() && a.sign() > 0, "visit times must be positive integers");
    int t = static_cast<int>(a.numerator().get_si());
    if (t > horizon) continue;
    g.slots[bucket_of(t)] = std::make_pair(p[k], t);
  }
  return g;
}

}  // namespace dirlat

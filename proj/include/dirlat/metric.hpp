#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dirlat/errors.hpp"
#include "dirlat/graph.hpp"
#include "dirlat/rational.hpp"

namespace dirlat {

using Matrix = std::vector<std::vector<Rational>>;

/// Complete directed distance matrix with depot and optional path endpoints.
struct Metric {
  Matrix dist;
  bool symmetric = false;
  int depot = 0;
  std::optional<int> s;
  std::optional<int> t;

  [[nodiscard]] int n() const { return static_cast<int>(dist.size()); }
  const Rational& operator()(int u, int v) const { return dist[u][v]; }

  [[nodiscard]] Rational max_distance() const {
    Rational m;
    for (const auto& row : dist)
      for (const auto& d : row) m = max(m, d);
    return m;
  }
  [[nodiscard]] bool is_positive_integer() const {
    for (int u = 0; u < n(); ++u)
      for (int v = 0; v < n(); ++v)
        if (u != v && (!dist[u][v].is_integer() || dist[u][v].sign() <= 0)) return false;
    return true;
  }
};

struct ValidationReport {
  std::vector<std::array<int, 3>> triangle;  // (u, v, w) with d[u][w] > d[u][v] + d[v][w]
  std::vector<int> diagonal;                 // u with d[u][u] != 0
  std::vector<std::array<int, 2>> asymmetric;

  [[nodiscard]] bool valid() const { return triangle.empty() && diagonal.empty() && asymmetric.empty(); }
};

inline void check_shape(const Matrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw StructuralError("distance matrix needs at least 2 nodes");
  for (const auto& row : d) {
    if (row.size() != n) throw StructuralError("distance matrix is not square");
    for (const auto& x : row)
      if (x.sign() < 0) throw StructuralError("negative distance " + x.str());
  }
}

inline ValidationReport validate_metric(const Metric& m) {
  check_shape(m.dist);
  ValidationReport rep;
  const int n = m.n();
  for (int u = 0; u < n; ++u)
    if (!m(u, u).is_zero()) rep.diagonal.push_back(u);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      for (int w = 0; w < n; ++w)
        if (m(u, w) > m(u, v) + m(v, w)) rep.triangle.push_back({u, v, w});
  if (m.symmetric)
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (m(u, v) != m(v, u)) rep.asymmetric.push_back({u, v});
  return rep;
}

/// All-pairs shortest paths of a non-negative matrix with zero diagonal.
inline Metric metric_closure(Matrix d, bool symmetric = false) {
  check_shape(d);
  const int n = static_cast<int>(d.size());
  for (int u = 0; u < n; ++u)
    if (!d[u][u].is_zero()) throw StructuralError("distance matrix has a nonzero diagonal entry");
  for (int k = 0; k < n; ++k)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        Rational via = d[u][k] + d[k][v];
        if (via < d[u][v]) d[u][v] = std::move(via);
      }
  Metric m;
  m.dist = std::move(d);
  m.symmetric = symmetric;
  return m;
}

/// c^reg(u,v) = c(r,u) + c(u,v) - c(r,v).
inline Metric regret_transform(const Metric& m, int root) {
  require(m.symmetric, "regret transform needs a symmetric metric");
  for (int u = 0; u < m.n(); ++u)
    for (int v = 0; v < m.n(); ++v) require(m(u, v) == m(v, u), "regret transform input is not symmetric");
  Metric out = m;
  out.symmetric = false;
  for (int u = 0; u < m.n(); ++u)
    for (int v = 0; v < m.n(); ++v) out.dist[u][v] = m(root, u) + m(u, v) - m(root, v);
  return out;
}

/// True iff a single walk from the depot can cover every node using arcs with d <= bound.
inline bool chain_covers(const Metric& m, const Rational& bound) {
  Adjacency adj = adjacency_from(m.n(), [&](int u, int v) { return m(u, v) <= bound; });
  auto comps = strongly_connected_components(adj);
  if (std::find(comps[0].begin(), comps[0].end(), m.depot) == comps[0].end()) return false;
  std::vector<int> comp_of(m.n());
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (int v : comps[i]) comp_of[v] = static_cast<int>(i);
  for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
    bool linked = false;
    for (int u : comps[i])
      for (int v : adj[u])
        if (comp_of[v] == static_cast<int>(i + 1)) linked = true;
    if (!linked) return false;
  }
  return true;
}

/// Smallest distance value nu whose threshold graph admits a covering walk from the depot.
inline Rational compute_nu(const Metric& m) {
  std::set<Rational> values;
  for (const auto& row : m.dist)
    for (const auto& d : row) values.insert(d);
  std::vector<Rational> sorted(values.begin(), values.end());
  std::size_t lo = 0, hi = sorted.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (chain_covers(m, sorted[mid])) hi = mid;
    else lo = mid + 1;
  }
  return sorted[lo];
}

/// nu_cap = clients * N(N-1) * nu bounds the optimum latency from above.
inline Rational nu_upper(const Metric& m, const Rational& nu) {
  const std::int64_t big_n = m.n();
  return Rational(big_n - 1) * Rational(big_n * (big_n - 1)) * nu;
}

struct ScaledInstance {
  Metric scaled;
  Rational scale_factor;  // n^4 / (nu * eps)
  Rational nu;
  Rational nu_cap;
  Rational epsilon;
  Rational alpha;
  Rational horizon;  // clients * max scaled distance
};

struct ScaleOutcome {
  bool zero_optimum = false;
  std::optional<ScaledInstance> instance;
};

/// Reduction to positive, polynomially bounded integer distances.
inline ScaleOutcome scale_instance(const Metric& m, const Rational& eps, const Rational& alpha) {
  require(eps.sign() > 0, "epsilon must be positive");
  require(alpha.sign() >= 0, "alpha must be non-negative");
  auto rep = validate_metric(m);
  require(rep.valid(), "scale_instance needs a valid metric");
  ScaleOutcome out;
  Rational nu = compute_nu(m);
  if (nu.is_zero()) {
    out.zero_optimum = true;
    return out;
  }
  const int n_nodes = m.n();
  const Rational clients(n_nodes - 1);
  const Rational n3 = clients * clients * clients;
  const Rational n4 = n3 * clients;
  const Rational floor_value = eps * nu / n3;
  const Rational cap_value = (alpha + Rational(2) * eps) * nu_upper(m, nu);
  const Rational factor = n4 / (nu * eps);
  Matrix d2(n_nodes, std::vector<Rational>(n_nodes));
  for (int u = 0; u < n_nodes; ++u)
    for (int v = 0; v < n_nodes; ++v) {
      if (u == v) continue;
      Rational c = max(m(u, v), floor_value);
      c = min(c, cap_value);
      d2[u][v] = (c * factor).floor();
    }
  ScaledInstance si;
  si.scaled = metric_closure(std::move(d2), m.symmetric);
  si.scaled.depot = m.depot;
  si.scaled.s = m.s;
  si.scaled.t = m.t;
  si.scale_factor = factor;
  si.nu = nu;
  si.nu_cap = nu_upper(m, nu);
  si.epsilon = eps;
  si.alpha = alpha;
  si.horizon = clients * si.scaled.max_distance();
  ensure(si.scaled.is_positive_integer(), "scaled distances must be positive integers");
  out.instance = std::move(si);
  return out;
}

/// Deterministic random metric: closure of a uniform integer matrix in [1, max_dist].
inline Metric generate_random(int n, int max_dist, std::uint64_t seed, bool symmetric) {
  require(n >= 2, "generate_random needs n >= 2");
  require(max_dist >= 1, "generate_random needs max_dist >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, max_dist);
  Matrix d(n, std::vector<Rational>(n));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) d[u][v] = Rational(pick(rng));
  if (symmetric)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < u; ++v) d[u][v] = d[v][u];
  return metric_closure(std::move(d), symmetric);
}

}  // namespace dirlat

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dirlat/errors.hpp"
#include "dirlat/path.hpp"

namespace dirlat {

enum class ExactMethod { DP, Permutation };

struct ExactResult {
  Rational value;
  Path path;
  int nodes = 0;
  ExactMethod method = ExactMethod::DP;
};

inline constexpr int kDefaultExactCap = 14;

/// Minimum-latency Hamiltonian path from the depot. Each arc into the k-th visited
/// client is charged (clients - k + 1) times, so states do not depend on elapsed time.
inline ExactResult exact_dirlat(const Metric& m, int cap = kDefaultExactCap) {
  const int n_nodes = m.n();
  const int clients = n_nodes - 1;
  if (clients > cap) throw CapacityError("exact_dirlat: " + std::to_string(clients) + " clients exceed cap " + std::to_string(cap));
  std::vector<int> ids;
  for (int v = 0; v < n_nodes; ++v)
    if (v != m.depot) ids.push_back(v);
  const std::uint32_t full = (1u << clients) - 1;
  std::vector<std::vector<std::optional<Rational>>> dp(std::size_t(1) << clients, std::vector<std::optional<Rational>>(clients));
  std::vector<std::vector<int>> parent(std::size_t(1) << clients, std::vector<int>(clients, -1));
  for (int i = 0; i < clients; ++i) dp[1u << i][i] = Rational(clients) * m(m.depot, ids[i]);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int k = __builtin_popcount(mask);
    const Rational weight(clients - k);
    for (int i = 0; i < clients; ++i) {
      if (!dp[mask][i]) continue;
      for (int j = 0; j < clients; ++j) {
        if (mask & (1u << j)) continue;
        Rational cand = *dp[mask][i] + weight * m(ids[i], ids[j]);
        auto& slot = dp[mask | (1u << j)][j];
        if (!slot || cand < *slot) {
          slot = std::move(cand);
          parent[mask | (1u << j)][j] = i;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < clients; ++i)
    if (*dp[full][i] < *dp[full][best]) best = i;
  ExactResult res;
  res.value = clients == 0 ? Rational() : *dp[full][best];
  res.nodes = n_nodes;
  std::uint32_t mask = full;
  for (int i = best; i >= 0 && clients > 0;) {
    res.path.push_back(ids[i]);
    int p = parent[mask][i];
    mask &= ~(1u << i);
    i = p;
  }
  res.path.push_back(m.depot);
  std::reverse(res.path.begin(), res.path.end());
  ensure(latency(res.path, m).total == res.value, "exact_dirlat path does not reproduce its value");
  return res;
}

/// Cheapest Hamiltonian s-t path by bitmask DP over the interior nodes.
inline ExactResult exact_atspp(const Metric& m, int s, int t, int cap = kDefaultExactCap) {
  const int n_nodes = m.n();
  require(s != t, "exact_atspp needs distinct endpoints");
  if (n_nodes > cap) throw CapacityError("exact_atspp: " + std::to_string(n_nodes) + " nodes exceed cap " + std::to_string(cap));
  std::vector<int> ids;
  for (int v = 0; v < n_nodes; ++v)
    if (v != s && v != t) ids.push_back(v);
  const int k = static_cast<int>(ids.size());
  ExactResult res;
  res.nodes = n_nodes;
  if (k == 0) {
    res.value = m(s, t);
    res.path = {s, t};
    return res;
  }
  const std::uint32_t full = (1u << k) - 1;
  std::vector<std::vector<std::optional<Rational>>> dp(std::size_t(1) << k, std::vector<std::optional<Rational>>(k));
  std::vector<std::vector<int>> parent(std::size_t(1) << k, std::vector<int>(k, -1));
  for (int i = 0; i < k; ++i) dp[1u << i][i] = m(s, ids[i]);
  for (std::uint32_t mask = 1; mask <= full; ++mask)
    for (int i = 0; i < k; ++i) {
      if (!dp[mask][i]) continue;
      for (int j = 0; j < k; ++j) {
        if (mask & (1u << j)) continue;
        Rational cand = *dp[mask][i] + m(ids[i], ids[j]);
        auto& slot = dp[mask | (1u << j)][j];
        if (!slot || cand < *slot) {
          slot = std::move(cand);
          parent[mask | (1u << j)][j] = i;
        }
      }
    }
  int best = -1;
  Rational best_val;
  for (int i = 0; i < k; ++i) {
    Rational v = *dp[full][i] + m(ids[i], t);
    if (best < 0 || v < best_val) {
      best = i;
      best_val = std::move(v);
    }
  }
  res.value = best_val;
  res.path.push_back(t);
  std::uint32_t mask = full;
  for (int i = best; i >= 0;) {
    res.path.push_back(ids[i]);
    int p = parent[mask][i];
    mask &= ~(1u << i);
    i = p;
  }
  res.path.push_back(s);
  std::reverse(res.path.begin(), res.path.end());
  ensure(path_cost(res.path, m) == res.value, "exact_atspp path does not reproduce its value");
  return res;
}

/// Reference latency optimum by enumerating client orders.
inline ExactResult permutation_dirlat(const Metric& m) {
  std::vector<int> order;
  for (int v = 0; v < m.n(); ++v)
    if (v != m.depot) order.push_back(v);
  ExactResult res;
  res.method = ExactMethod::Permutation;
  res.nodes = m.n();
  bool first = true;
  do {
    Path p{m.depot};
    p.insert(p.end(), order.begin(), order.end());
    Rational v = latency(p, m).total;
    if (first || v < res.value) {
      res.value = v;
      res.path = p;
      first = false;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return res;
}

/// Reference ATSP-path optimum by enumerating interior orders.
inline ExactResult permutation_atspp(const Metric& m, int s, int t) {
  std::vector<int> order;
  for (int v = 0; v < m.n(); ++v)
    if (v != s && v != t) order.push_back(v);
  ExactResult res;
  res.method = ExactMethod::Permutation;
  res.nodes = m.n();
  bool first = true;
  do {
    Path p{s};
    p.insert(p.end(), order.begin(), order.end());
    p.push_back(t);
    Rational v = path_cost(p, m);
    if (first || v < res.value) {
      res.value = v;
      res.path = p;
      first = false;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return res;
}

}  // namespace dirlat

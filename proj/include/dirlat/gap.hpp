#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dirlat/atspp.hpp"
#include "dirlat/errors.hpp"
#include "dirlat/exact.hpp"
#include "dirlat/max_flow.hpp"
#include "dirlat/metric.hpp"

namespace dirlat {

struct GapMeasure {
  Rational integral;
  Rational lp;
  std::optional<Rational> ratio;  // nullopt: LP value 0 with a positive integral optimum
};

/// Exact ATSP-path optimum over the relaxed-cut LP optimum.
inline GapMeasure measure_gap(const Metric& m, int s, int t, const Rational& rho) {
  GapMeasure g;
  g.integral = exact_atspp(m, s, t).value;
  g.lp = solve_atspp_lp(m, s, t, rho).opt_lp;
  ensure(g.lp <= g.integral, "LP value exceeds the integral optimum");
  if (g.lp.sign() > 0)
    g.ratio = g.integral / g.lp;
  else if (g.integral.is_zero())
    g.ratio = Rational(1);
  return g;
}

struct GapVerdict {
  bool certificate = false;
  std::string reason;  // why x is not a certificate
  std::optional<NodeSet> violated_cut;
  Rational cost;
  Rational integral;
  std::optional<Rational> ratio;
  std::optional<bool> claim_holds;  // ratio >= 1/(2 rho - 1) when a claim is checked
};

/// Checks that x is feasible for the relaxed-cut LP (plus unit in-degree when strengthened)
/// and compares its cost with the exact integral optimum.
inline GapVerdict verify_gap_certificate(const Metric& m, int s, int t, const Matrix& x, const Rational& rho,
                                         bool strengthened, bool claim = false) {
  check_rho(rho);
  const int n = m.n();
  require(static_cast<int>(x.size()) == n, "x has the wrong number of rows");
  require(s != t && s >= 0 && t >= 0 && s < n && t < n, "invalid endpoints");
  GapVerdict out;
  for (int a = 0; a < n; ++a) {
    require(static_cast<int>(x[a].size()) == n, "x is not square");
    for (int b = 0; b < n; ++b) {
      if (x[a][b].sign() < 0) {
        out.reason = "negative entry at " + std::to_string(a) + "," + std::to_string(b);
        return out;
      }
      if (a == b && !x[a][b].is_zero()) {
        out.reason = "nonzero diagonal at " + std::to_string(a);
        return out;
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    Rational in, outm;
    for (int u = 0; u < n; ++u) {
      in += x[u][v];
      outm += x[v][u];
    }
    Rational want = v == s ? Rational(-1) : v == t ? Rational(1) : Rational();
    if (in - outm != want) {
      out.reason = "degree balance fails at " + std::to_string(v);
      return out;
    }
    if (strengthened && v != s && in != Rational(1)) {
      out.reason = "in-degree of " + std::to_string(v) + " is not 1";
      return out;
    }
  }
  Matrix cap(n, std::vector<Rational>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) cap[a][b] = x[a][b] + x[b][a];
  for (int v = 0; v < n; ++v) {
    if (v == s || v == t) continue;
    auto f = max_flow_min_cut(cap, std::vector<int>{v}, std::vector<int>{s, t});
    if (f.value >= Rational(2) * rho) continue;
    NodeSet u = 0;
    for (int a = 0; a < n; ++a)
      if (f.source_side[a]) u |= NodeSet(1) << a;
    out.violated_cut = u;
    out.reason = "cut " + std::to_string(u) + " carries " + cut_mass(x, u).str() + " < 2 rho";
    return out;
  }
  out.certificate = true;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out.cost += x[a][b] * m(a, b);
  out.integral = exact_atspp(m, s, t).value;
  if (out.cost.sign() > 0)
    out.ratio = out.integral / out.cost;
  else if (out.integral.is_zero())
    out.ratio = Rational(1);
  if (claim) out.claim_holds = !out.ratio || *out.ratio * (Rational(2) * rho - Rational(1)) >= Rational(1);
  return out;
}

struct GapRecord {
  Metric metric;
  int s = 0;
  int t = 1;
  Rational rho;
  std::optional<Rational> ratio;
};

struct GapSearchOptions {
  int nodes = 6;
  int max_dist = 4;
  int iterations = 200;
  double start_temperature = 0.3;
  std::uint64_t seed = 1;
};

/// Simulated annealing over integer distance matrices (entries 0..max_dist), repaired by
/// metric closure, maximising exact ATSP-path optimum over LP optimum with s = 0, t = n-1.
inline GapRecord gap_search(const Rational& rho, const GapSearchOptions& opt) {
  check_rho(rho);
  require(opt.nodes >= 3 && opt.nodes <= 10, "gap search supports 3..10 nodes");
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<int> value(0, opt.max_dist);
  std::uniform_int_distribution<int> node(0, opt.nodes - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = opt.nodes;
  Matrix raw(n, std::vector<Rational>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) raw[a][b] = Rational(1 + value(rng) % opt.max_dist);
  auto score = [&](const GapMeasure& g) { return g.ratio ? g.ratio->to_double() : 1e9; };
  Metric cur_m = metric_closure(raw);
  GapMeasure cur = measure_gap(cur_m, 0, n - 1, rho);
  GapRecord best{cur_m, 0, n - 1, rho, cur.ratio};
  double best_score = score(cur);
  for (int it = 0; it < opt.iterations; ++it) {
    const double temp = opt.start_temperature * (1.0 - static_cast<double>(it) / opt.iterations) + 1e-9;
    Matrix next = raw;
    int a = node(rng), b = node(rng);
    if (a == b) continue;
    next[a][b] = Rational(value(rng));
    Metric m = metric_closure(next);
    GapMeasure g = measure_gap(m, 0, n - 1, rho);
    const double delta = score(g) - score(cur);
    if (delta >= 0 || unit(rng) < std::exp(delta / temp)) {
      raw = std::move(next);
      cur = g;
      if (score(g) > best_score) {
        best_score = score(g);
        best = GapRecord{m, 0, n - 1, rho, g.ratio};
      }
    }
  }
  return best;
}

}  // namespace dirlat

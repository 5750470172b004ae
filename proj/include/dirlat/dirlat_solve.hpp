#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dirlat/atspp.hpp"
#include "dirlat/errors.hpp"
#include "dirlat/exact.hpp"
#include "dirlat/latency_lp.hpp"
#include "dirlat/path.hpp"
#include "dirlat/regret.hpp"

namespace dirlat {

enum class GuessMode { Guided, Exhaustive };
enum class BucketBackend { Exact, LpRound, Regret };

inline const char* to_string(GuessMode m) { return m == GuessMode::Guided ? "guided" : "exhaustive"; }
inline const char* to_string(BucketBackend b) {
  switch (b) {
    case BucketBackend::Exact: return "exact";
    case BucketBackend::LpRound: return "lp-round";
    case BucketBackend::Regret: return "regret";
  }
  return "?";
}

struct SolveOptions {
  Rational rho{2, 3};
  GuessMode mode = GuessMode::Guided;
  BucketBackend backend = BucketBackend::Exact;
  std::optional<Rational> delta;  // regret backend; delta_opt(rho) when unset
  long long guess_cap = 10000000;
  int exact_cap = kDefaultExactCap;
  int threads = 0;  // 0: DIRLAT_THREADS, else hardware concurrency
  std::optional<int> horizon;
};

struct BucketReport {
  int index = 0;
  int vstar = 0;
  int lstar = 0;
  std::vector<int> members;  // B_i in index order
  Rational bound;            // 2^{i+1}
  Rational flow_cost;        // cost of the truncated flow x'
  Rational induced_lp;
  Path path;
  Rational cost;
  Rational alpha_hat;
};

struct StitchReport {
  int from = 0;
  int to = 0;
  int next_bucket = 0;
  Rational cost;
  Rational bound;
};

struct LatencyCertificate {
  GuessProfile guess;
  Rational rho;
  int horizon = 0;
  BucketBackend backend = BucketBackend::Exact;
  Rational lp_objective;
  std::string flow_check;
  std::vector<int> threshold;
  std::vector<BucketReport> buckets;
  std::vector<StitchReport> stitches;
  Path path;
  std::vector<Rational> arrival;
  Rational alpha_hat;
  Rational latency;
  Rational threshold_sum;
  Rational local_bound;  // 4(alpha+1)/(1-rho) * LP objective
  std::optional<Rational> opt;
  std::optional<Rational> opt_bound;  // 4(alpha+1)/(1-rho) * OPT

  [[nodiscard]] bool opt_consistent() const { return opt && lp_objective <= *opt; }

  /// Failed inequalities, empty when every one holds.
  [[nodiscard]] std::vector<std::string> failures(bool require_opt_consistent) const {
    std::vector<std::string> f;
    const Rational factor = Rational(4) * (alpha_hat + Rational(1));
    if (!flow_check.empty()) f.push_back("time-expanded flow: " + flow_check);
    for (const auto& b : buckets) {
      const std::string tag = "bucket " + std::to_string(b.index);
      if (b.flow_cost != Rational(b.lstar)) f.push_back(tag + ": truncated flow cost differs from l*");
      if (b.induced_lp > b.bound) f.push_back(tag + ": induced LP exceeds 2^{i+1}");
    }
    for (const auto& s : stitches)
      if (s.cost > s.bound) f.push_back("stitch into bucket " + std::to_string(s.next_bucket) + " exceeds 2^{i'+1}");
    for (std::size_t v = 0; v < threshold.size(); ++v)
      if (threshold[v] >= 0 && arrival[v] > factor * Rational(threshold[v]))
        f.push_back("node " + std::to_string(v) + " arrives after 4(alpha+1)t(v)");
    if (threshold_sum * (Rational(1) - rho) > lp_objective) f.push_back("threshold sum exceeds objective/(1-rho)");
    if (latency > local_bound) f.push_back("latency exceeds 4(alpha+1)/(1-rho) times the LP objective");
    if (require_opt_consistent && !opt_consistent()) f.push_back("guess is not OPT-consistent");
    if (opt_consistent() && latency > *opt_bound) f.push_back("latency exceeds 4(alpha+1)/(1-rho) times OPT");
    return f;
  }
};

/// Profiles obeying the pruning rules, in lexicographic order, or CapacityError above cap.
inline std::vector<GuessProfile> enumerate_guesses(const Metric& m, int horizon, long long cap) {
  const int k = bucket_count(horizon);
  std::vector<GuessProfile> out;
  GuessProfile cur;
  cur.slots.assign(k, std::nullopt);
  std::vector<char> used(m.n(), 0);
  std::function<void(int, int, int)> rec = [&](int i, int last, int adm) {
    if (i == k) {
      if (static_cast<long long>(out.size()) >= cap)
        throw CapacityError("guess enumeration exceeds cap " + std::to_string(cap));
      out.push_back(cur);
      return;
    }
    cur.slots[i] = std::nullopt;
    rec(i + 1, last, adm);
    const int lo = std::max({1 << i, last + 1, adm + 1});
    const int hi = std::min((2 << i) - 1, horizon);
    for (int v = 0; v < m.n(); ++v) {
      if (v == m.depot || used[v]) continue;
      used[v] = 1;
      for (int l = lo; l <= hi; ++l) {
        cur.slots[i] = std::make_pair(v, l);
        rec(i + 1, l, adm + 1);
      }
      used[v] = 0;
    }
    cur.slots[i] = std::nullopt;
  };
  rec(0, 0, 0);
  return out;
}

struct BucketSolve {
  Path path;  // in instance node ids, from the depot to v*
  Rational cost;
  Rational induced_lp;
};

/// Hamiltonian depot -> v* path over {r} u B_i by the chosen backend.
inline BucketSolve solve_bucket(const Metric& m, const std::vector<int>& bucket, int vstar, const Rational& rho,
                                BucketBackend backend, const SolveOptions& opt = {}) {
  std::vector<int> ids{m.depot};
  for (int v : bucket)
    if (v != vstar) ids.push_back(v);
  ids.push_back(vstar);
  const int k = static_cast<int>(ids.size());
  Metric sub;
  sub.symmetric = m.symmetric;
  sub.dist.assign(k, std::vector<Rational>(k));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) sub.dist[a][b] = m(ids[a], ids[b]);
  sub.depot = 0;
  sub.s = 0;
  sub.t = k - 1;
  BucketSolve res;
  AtsppLpState st = solve_atspp_lp(sub, 0, k - 1, rho);
  res.induced_lp = st.opt_lp;
  Path local;
  if (k == 2) {
    local = {0, 1};
  } else {
    switch (backend) {
      case BucketBackend::Exact:
        local = exact_atspp(sub, 0, k - 1, opt.exact_cap).path;
        break;
      case BucketBackend::LpRound:
        local = round_path(st, uncross(st, solve_zmin_dual(st))).path;
        break;
      case BucketBackend::Regret: {
        require(m.symmetric, "regret backend needs a symmetric instance");
        Rational delta = opt.delta ? *opt.delta : delta_opt(rho);
        AtsppLpState rst = solve_atspp_lp(regret_transform(sub, 0), 0, k - 1, rho);
        local = round_regret(sub, rst, delta).path;
        break;
      }
    }
  }
  ensure(is_hamiltonian_path(local, all_nodes(k), 0, k - 1), "bucket path is not Hamiltonian");
  for (int a : local) res.path.push_back(ids[a]);
  res.cost = path_cost(res.path, m);
  return res;
}

/// Runs one guess through Algorithm 1; nullopt when the strengthened LP is infeasible.
inline std::optional<LatencyCertificate> run_guess(const Metric& m, int horizon, const GuessProfile& guess,
                                                   const SolveOptions& opt) {
  auto model = build_latency_lp(m, horizon, guess);
  auto sol = solve_latency_lp(model);
  if (!sol) return std::nullopt;
  LatencyCertificate cert;
  cert.guess = guess;
  cert.rho = opt.rho;
  cert.horizon = horizon;
  cert.backend = opt.backend;
  cert.lp_objective = sol->objective;
  cert.flow_check = time_expanded_flow_check(model, *sol);
  auto plan = compute_thresholds(*sol, m, opt.rho);
  cert.threshold = plan.threshold;
  for (int t : plan.threshold)
    if (t >= 0) cert.threshold_sum += Rational(t);
  for (const auto& [i, b] : plan.buckets)
    ensure(guess.slots[i].has_value(), "threshold falls into an inadmissible bucket");

  cert.path = {m.depot};
  for (int i : guess.admissible()) {
    BucketReport br;
    br.index = i;
    br.vstar = guess.slots[i]->first;
    br.lstar = guess.slots[i]->second;
    br.bound = Rational(2 << i);
    if (auto it = plan.buckets.find(i); it != plan.buckets.end()) br.members = it->second;
    Matrix x = bucket_atspp_input(model, *sol, i);
    for (int a = 0; a < m.n(); ++a)
      for (int b = 0; b < m.n(); ++b) br.flow_cost += x[a][b] * m(a, b);
    auto bs = solve_bucket(m, br.members, br.vstar, opt.rho, opt.backend, opt);
    br.induced_lp = bs.induced_lp;
    br.path = bs.path;
    br.cost = bs.cost;
    br.alpha_hat = bs.cost / br.bound;
    if (br.alpha_hat > cert.alpha_hat) cert.alpha_hat = br.alpha_hat;
    if (cert.path.size() > 1) {
      StitchReport sr;
      sr.from = cert.path.back();
      sr.to = bs.path[1];
      sr.next_bucket = i;
      sr.cost = m(sr.from, sr.to);
      sr.bound = br.bound;
      cert.stitches.push_back(sr);
    }
    cert.path.insert(cert.path.end(), bs.path.begin() + 1, bs.path.end());
    cert.buckets.push_back(std::move(br));
  }
  ensure(cert.path.size() == static_cast<std::size_t>(m.n()), "bucket paths do not cover every client once");
  {
    std::vector<char> seen(m.n(), 0);
    for (int v : cert.path) {
      ensure(!seen[v], "bucket paths repeat a node");
      seen[v] = 1;
    }
  }
  auto prof = latency(cert.path, m);
  cert.arrival = prof.arrival;
  cert.latency = prof.total;
  const Rational factor = Rational(4) * (cert.alpha_hat + Rational(1)) / (Rational(1) - opt.rho);
  cert.local_bound = factor * cert.lp_objective;
  return cert;
}

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DIRLAT_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct SolveResult {
  std::optional<LatencyCertificate> best;
  long long guesses = 0;
  long long feasible = 0;
};

/// Best path over the guesses of the chosen mode; ties go to the lexicographically smallest guess.
inline SolveResult solve_dirlat(const Metric& m, const SolveOptions& opt) {
  require(opt.rho > Rational(1, 2) && opt.rho < Rational(1), "rho must lie in (1/2, 1)");
  require(m.is_positive_integer(), "instance needs positive integer distances");
  require(opt.backend != BucketBackend::Regret || m.symmetric, "regret backend needs a symmetric instance");
  const int horizon = opt.horizon ? *opt.horizon : default_horizon(m);
  std::optional<ExactResult> exact;
  if (m.n() - 1 <= opt.exact_cap) exact = exact_dirlat(m, opt.exact_cap);
  std::vector<GuessProfile> guesses;
  if (opt.mode == GuessMode::Guided) {
    require(exact.has_value(), "guided mode needs the exact optimum");
    guesses.push_back(guess_from_path(exact->path, m, horizon));
  } else {
    guesses = enumerate_guesses(m, horizon, opt.guess_cap);
  }
  std::vector<std::optional<LatencyCertificate>> results(guesses.size());
  std::vector<std::exception_ptr> errors(guesses.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t g; (g = next.fetch_add(1)) < guesses.size();) {
      try {
        results[g] = run_guess(m, horizon, guesses[g], opt);
      } catch (...) {
        errors[g] = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(worker_count(opt.threads), static_cast<int>(guesses.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  SolveResult out;
  out.guesses = static_cast<long long>(guesses.size());
  for (std::size_t g = 0; g < guesses.size(); ++g) {
    if (!results[g]) continue;
    ++out.feasible;
    auto& c = *results[g];
    if (!out.best || c.latency < out.best->latency || (c.latency == out.best->latency && c.guess < out.best->guess))
      out.best = std::move(c);
  }
  if (opt.mode == GuessMode::Guided) ensure(out.best.has_value(), "the guided guess must be feasible");
  if (out.best && exact) {
    out.best->opt = exact->value;
    out.best->opt_bound = Rational(4) * (out.best->alpha_hat + Rational(1)) / (Rational(1) - opt.rho) * exact->value;
  }
  return out;
}

}  // namespace dirlat

#include <gtest/gtest.h>

#include <random>

#include "dirlat/lp.hpp"
#include "dirlat/max_flow.hpp"

using namespace dirlat;

namespace {

LpRow row(std::vector<std::pair<int, Rational>> c, Relation rel, Rational rhs) {
  LpRow r;
  r.coeffs = std::move(c);
  r.rel = rel;
  r.rhs = std::move(rhs);
  return r;
}

// Solves A x = b by Gaussian elimination; nullopt when singular.
std::optional<std::vector<Rational>> gauss(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int p = -1;
    for (int r = c; r < n; ++r)
      if (!a[r][c].is_zero()) {
        p = r;
        break;
      }
    if (p < 0) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c || a[r][c].is_zero()) continue;
      Rational f = a[r][c] / a[c][c];
      for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<Rational> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Brute force over all vertices of {x >= 0 : rows}: every choice of n tight constraints
// among rows and x_j >= 0. Returns the best objective, or nullopt when no vertex exists.
std::optional<Rational> vertex_oracle(const LpProblem& p) {
  const int n = p.num_vars();
  std::vector<std::pair<std::vector<Rational>, Rational>> cons;  // a x = b candidates
  for (const auto& r : p.rows) {
    std::vector<Rational> a(n);
    for (const auto& [j, c] : r.coeffs) a[j] = c;
    cons.emplace_back(a, r.rhs);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Rational> a(n);
    a[j] = Rational(1);
    cons.emplace_back(a, Rational());
  }
  const int k = static_cast<int>(cons.size());
  std::optional<Rational> best;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      std::vector<std::vector<Rational>> a;
      std::vector<Rational> b;
      for (int i : pick) {
        a.push_back(cons[i].first);
        b.push_back(cons[i].second);
      }
      auto x = gauss(a, b);
      if (!x) return;
      for (const auto& v : *x)
        if (v.sign() < 0) return;
      for (const auto& r : p.rows)
        if (row_violation(r, *x).sign() > 0) return;
      Rational obj;
      for (int j = 0; j < n; ++j) obj += p.objective[j] * (*x)[j];
      if (!best || (p.sense == Sense::Minimize ? obj < *best : obj > *best)) best = obj;
      return;
    }
    for (int i = start; i < k; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST(LpEngine, MaximiseSingleBound) {
  LpProblem p;
  p.sense = Sense::Maximize;
  int x = p.add_variable("x", Rational(1));
  p.add_row(row({{x, Rational(1)}}, Relation::LessEq, Rational(3)));
  auto s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.x[0], Rational(3));
  EXPECT_EQ(s.dual[0], Rational(1));
  EXPECT_EQ(s.objective, Rational(3));
}

TEST(LpEngine, InfeasibleWithCertificate) {
  LpProblem p;
  int x = p.add_variable("x");
  p.add_row(row({{x, Rational(1)}}, Relation::LessEq, Rational(-1)));
  auto s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Infeasible);
  EXPECT_TRUE(check_farkas(p, s));
}

TEST(LpEngine, UnboundedWithRay) {
  LpProblem p;
  int x = p.add_variable("x", Rational(-1));
  int y = p.add_variable("y", Rational(0));
  p.add_row(row({{x, Rational(1)}, {y, Rational(-1)}}, Relation::LessEq, Rational(2)));
  auto s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Unbounded);
  EXPECT_TRUE(check_ray(p, s));
}

TEST(LpEngine, UpperBoundsAndEqualities) {
  LpProblem p;
  int a = p.add_variable("a", Rational(-2), Rational(1, 2));
  int b = p.add_variable("b", Rational(-1));
  p.add_row(row({{a, Rational(1)}, {b, Rational(1)}}, Relation::Equal, Rational(1)));
  auto s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.x[a], Rational(1, 2));
  EXPECT_EQ(s.x[b], Rational(1, 2));
  EXPECT_EQ(s.objective, Rational(-3, 2));
  EXPECT_EQ(check_optimality(p, s), "");
}

TEST(LpEngine, RedundantEqualityRowsAreHandled) {
  LpProblem p;
  int a = p.add_variable("a", Rational(1));
  int b = p.add_variable("b", Rational(2));
  p.add_row(row({{a, Rational(1)}, {b, Rational(1)}}, Relation::Equal, Rational(2)));
  p.add_row(row({{a, Rational(2)}, {b, Rational(2)}}, Relation::Equal, Rational(4)));
  p.add_row(row({{b, Rational(1)}}, Relation::GreaterEq, Rational(1, 3)));
  auto s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.objective, Rational(7, 3));
}

TEST(LpEngine, DegenerateCyclingExample) {
  // Beale's example cycles under textbook Dantzig pricing without an anti-cycling rule.
  LpProblem p;
  int x1 = p.add_variable("x1", Rational(-3, 4));
  int x2 = p.add_variable("x2", Rational(150));
  int x3 = p.add_variable("x3", Rational(-1, 50));
  int x4 = p.add_variable("x4", Rational(6));
  p.add_row(row({{x1, Rational(1, 4)}, {x2, Rational(-60)}, {x3, Rational(-1, 25)}, {x4, Rational(9)}},
                Relation::LessEq, Rational(0)));
  p.add_row(row({{x1, Rational(1, 2)}, {x2, Rational(-90)}, {x3, Rational(-1, 50)}, {x4, Rational(3)}},
                Relation::LessEq, Rational(0)));
  p.add_row(row({{x3, Rational(1)}}, Relation::LessEq, Rational(1)));
  for (int sw : {0, 1, 50}) {
    SimplexOptions opt;
    opt.degenerate_switch = sw;
    auto s = solve(p, opt);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_EQ(s.objective, Rational(-1, 20));
  }
}

TEST(LpEngine, RandomProblemsMatchVertexEnumeration) {
  std::mt19937_64 rng(2024);
  int optimal = 0, infeasible = 0;
  for (int iter = 0; iter < 300; ++iter) {
    LpProblem p;
    p.sense = (rng() & 1) ? Sense::Minimize : Sense::Maximize;
    int n = 2 + static_cast<int>(rng() % 3), m = 1 + static_cast<int>(rng() % 4);
    for (int j = 0; j < n; ++j) p.add_variable("v" + std::to_string(j), Rational(static_cast<int>(rng() % 9) - 4));
    for (int i = 0; i < m; ++i) {
      LpRow r;
      for (int j = 0; j < n; ++j) {
        int c = static_cast<int>(rng() % 7) - 3;
        if (c != 0) r.coeffs.emplace_back(j, Rational(c, 1 + static_cast<int>(rng() % 2)));
      }
      r.rel = static_cast<Relation>(rng() % 3);
      r.rhs = Rational(static_cast<int>(rng() % 11) - 3);
      p.add_row(r);
    }
    // Keep the region bounded so the vertex oracle is exact.
    LpRow box;
    for (int j = 0; j < n; ++j) box.coeffs.emplace_back(j, Rational(1));
    box.rel = Relation::LessEq;
    box.rhs = Rational(10);
    p.add_row(box);
    auto s = solve(p);
    auto best = vertex_oracle(p);
    if (!best) {
      ASSERT_EQ(s.status, LpStatus::Infeasible) << to_lp_format(p);
      EXPECT_TRUE(check_farkas(p, s));
      ++infeasible;
    } else {
      ASSERT_EQ(s.status, LpStatus::Optimal) << to_lp_format(p);
      EXPECT_EQ(s.objective, *best) << to_lp_format(p);
      EXPECT_EQ(check_optimality(p, s), "");
      // Basic-solution property: positives <= number of tight rows.
      int positive = 0, tight = 0;
      for (const auto& v : s.x) positive += v.sign() > 0;
      for (const auto& r : p.rows) tight += row_activity(r, s.x) == r.rhs;
      EXPECT_LE(positive, tight);
      ++optimal;
    }
  }
  EXPECT_GT(optimal, 50);
  EXPECT_GT(infeasible, 5);
}

namespace {

// Explicit constraint family x_i + x_j >= 1 for every pair, served lazily.
class PairOracle : public SeparationOracle {
 public:
  explicit PairOracle(int n) : n_(n) {}
  std::vector<LpRow> separate(const std::vector<Rational>& x, bool all) override {
    std::vector<LpRow> out;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (x[i] + x[j] < Rational(1)) {
          out.push_back(row({{i, Rational(1)}, {j, Rational(1)}}, Relation::GreaterEq, Rational(1)));
          if (!all) return out;
        }
    return out;
  }

 private:
  int n_;
};

class NeverOracle : public SeparationOracle {
 public:
  std::vector<LpRow> separate(const std::vector<Rational>&, bool) override { return {}; }
};

}  // namespace

TEST(CuttingPlane, NeverSeparatingOracleReturnsCoreSolution) {
  LpProblem p;
  int x = p.add_variable("x", Rational(1));
  p.add_row(row({{x, Rational(1)}}, Relation::GreaterEq, Rational(2)));
  NeverOracle o;
  auto res = cutting_plane(p, {&o});
  EXPECT_EQ(res.rounds, 0);
  EXPECT_EQ(res.solution.objective, solve(p).objective);
}

TEST(CuttingPlane, LazyRowsMatchExplicitFamily) {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 30; ++iter) {
    const int n = 5;
    LpProblem core, full;
    for (int j = 0; j < n; ++j) {
      Rational c(1 + static_cast<int>(rng() % 5));
      core.add_variable("x" + std::to_string(j), c);
      full.add_variable("x" + std::to_string(j), c);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        full.add_row(row({{i, Rational(1)}, {j, Rational(1)}}, Relation::GreaterEq, Rational(1)));
    for (bool all : {false, true}) {
      PairOracle o(n);
      CuttingPlaneOptions opt;
      opt.add_all = all;
      auto res = cutting_plane(core, {&o}, opt);
      ASSERT_EQ(res.solution.status, LpStatus::Optimal);
      EXPECT_EQ(res.solution.objective, solve(full).objective);
      EXPECT_EQ(check_optimality(res.problem, res.solution), "");
    }
  }
}

TEST(CuttingPlane, WarmStartDetectsInfeasibility) {
  LpProblem p;
  int x = p.add_variable("x", Rational(1), Rational(1));
  p.add_row(row({{x, Rational(1)}}, Relation::GreaterEq, Rational(0)));
  SimplexSolver s(p);
  auto first = s.solve();
  ASSERT_EQ(first.status, LpStatus::Optimal);
  auto second = s.add_rows({row({{x, Rational(1)}}, Relation::GreaterEq, Rational(2))});
  ASSERT_EQ(second.status, LpStatus::Infeasible);
  EXPECT_TRUE(check_farkas(s.problem(), second));
}

TEST(LpFormat, DumpsReadableText) {
  LpProblem p;
  int x = p.add_variable("x", Rational(2));
  int y = p.add_variable("y", Rational(-1, 2), Rational(4));
  p.add_row(row({{x, Rational(1)}, {y, Rational(-3)}}, Relation::GreaterEq, Rational(1)));
  std::string text = to_lp_format(p);
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("2 x - 1/2 y"), std::string::npos);
  EXPECT_NE(text.find("x - 3 y >= 1"), std::string::npos);
  EXPECT_NE(text.find("0 <= y <= 4"), std::string::npos);
}

TEST(MaxFlow, SingleEdge) {
  Matrix cap(2, std::vector<Rational>(2));
  cap[0][1] = Rational(5);
  auto r = max_flow_min_cut(cap, 0, 1);
  EXPECT_EQ(r.value, Rational(5));
  EXPECT_TRUE(r.source_side[0]);
  EXPECT_FALSE(r.source_side[1]);
}

TEST(MaxFlow, TwoDisjointPaths) {
  Matrix cap(4, std::vector<Rational>(4));
  cap[0][1] = Rational(1);
  cap[1][3] = Rational(1);
  cap[0][2] = Rational(2);
  cap[2][3] = Rational(2);
  EXPECT_EQ(max_flow_min_cut(cap, 0, 3).value, Rational(3));
}

TEST(MaxFlow, SourceEqualsSinkRejected) {
  Matrix cap(2, std::vector<Rational>(2));
  EXPECT_THROW(max_flow_min_cut(cap, 1, 1), PreconditionError);
}

TEST(MaxFlow, RandomGraphsMatchCutEnumeration) {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 60; ++iter) {
    const int n = 8;
    Matrix cap(n, std::vector<Rational>(n));
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (u != v && rng() % 3 == 0) cap[u][v] = Rational(static_cast<int>(rng() % 7), 1 + static_cast<int>(rng() % 3));
    auto r = max_flow_min_cut(cap, 0, n - 1);
    std::optional<Rational> best;
    for (int mask = 0; mask < (1 << (n - 2)); ++mask) {
      std::vector<char> side(n, 0);
      side[0] = 1;
      for (int b = 0; b < n - 2; ++b) side[b + 1] = (mask >> b) & 1;
      Rational c = cut_capacity(cap, side);
      if (!best || c < *best) best = c;
    }
    EXPECT_EQ(r.value, *best);
    EXPECT_EQ(cut_capacity(cap, r.source_side), r.value);
    for (int v = 1; v < n - 1; ++v) {
      Rational net;
      for (int u = 0; u < n; ++u) net += r.flow[u][v] - r.flow[v][u];
      EXPECT_TRUE(net.is_zero());
    }
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) EXPECT_LE(r.flow[u][v], cap[u][v]);
  }
}

#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dirlat/errors.hpp"
#include "dirlat/rational.hpp"

namespace dirlat {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEq, GreaterEq, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpVariable {
  std::string name;
  std::optional<Rational> upper;  // lower bound is always 0
};

struct LpRow {
  std::vector<std::pair<int, Rational>> coeffs;  // (variable, coefficient), no duplicates
  Relation rel = Relation::GreaterEq;
  Rational rhs;
  std::string name;
};

struct LpProblem {
  Sense sense = Sense::Minimize;
  std::vector<LpVariable> vars;
  std::vector<Rational> objective;
  std::vector<LpRow> rows;

  int add_variable(std::string name, Rational cost = Rational(), std::optional<Rational> upper = std::nullopt) {
    vars.push_back({std::move(name), std::move(upper)});
    objective.push_back(std::move(cost));
    return static_cast<int>(vars.size()) - 1;
  }
  int add_row(LpRow row) {
    rows.push_back(std::move(row));
    return static_cast<int>(rows.size()) - 1;
  }
  [[nodiscard]] int num_vars() const { return static_cast<int>(vars.size()); }
  [[nodiscard]] int num_rows() const { return static_cast<int>(rows.size()); }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Rational> x;
  std::vector<Rational> dual;        // one per row; objective == sum dual[i] * rhs[i] (+ bound terms)
  std::vector<Rational> bound_dual;  // one per variable, nonzero only for active upper bounds
  Rational objective;
  std::vector<int> basis;           // basic columns: j < num_vars structural, num_vars + i slack of row i
  std::vector<Rational> farkas;     // infeasible: row multipliers proving emptiness
  std::vector<Rational> farkas_bound;
  std::vector<Rational> ray;        // unbounded: improving direction over structural variables
  long iterations = 0;
};

struct SimplexOptions {
  // Dantzig pricing with a switch to Bland's rule after this many consecutive degenerate pivots.
  // Zero means Bland's rule throughout.
  int degenerate_switch = 50;
  int refactor_every = 100;
  bool verify = true;
};

inline Rational row_activity(const LpRow& row, const std::vector<Rational>& x) {
  Rational s;
  for (const auto& [j, a] : row.coeffs) s += a * x[j];
  return s;
}

/// Signed violation (> 0 iff x violates the row).
inline Rational row_violation(const LpRow& row, const std::vector<Rational>& x) {
  Rational act = row_activity(row, x);
  switch (row.rel) {
    case Relation::LessEq: return act - row.rhs;
    case Relation::GreaterEq: return row.rhs - act;
    case Relation::Equal: return abs(act - row.rhs);
  }
  return Rational();
}

/// Exact check of primal/dual feasibility, strong duality and complementary slackness.
/// Returns an empty string when everything holds.
inline std::string check_optimality(const LpProblem& p, const LpSolution& s) {
  const int n = p.num_vars();
  std::ostringstream err;
  if (static_cast<int>(s.x.size()) != n || static_cast<int>(s.dual.size()) != p.num_rows()) return "shape mismatch";
  for (int j = 0; j < n; ++j) {
    if (s.x[j].sign() < 0) err << "x[" << j << "] negative; ";
    if (p.vars[j].upper && s.x[j] > *p.vars[j].upper) err << "x[" << j << "] above bound; ";
  }
  const bool minimize = p.sense == Sense::Minimize;
  std::vector<Rational> reduced = p.objective;
  Rational dual_obj;
  for (int i = 0; i < p.num_rows(); ++i) {
    const auto& row = p.rows[i];
    const Rational& y = s.dual[i];
    if (row_violation(row, s.x).sign() > 0) err << "row " << i << " violated; ";
    // Dual sign: for minimisation, >= rows carry y >= 0 and <= rows y <= 0; reversed for maximisation.
    if (row.rel == Relation::GreaterEq && (minimize ? y.sign() < 0 : y.sign() > 0)) err << "dual " << i << " sign; ";
    if (row.rel == Relation::LessEq && (minimize ? y.sign() > 0 : y.sign() < 0)) err << "dual " << i << " sign; ";
    if (!y.is_zero()) {
      if (row_activity(row, s.x) != row.rhs) err << "row " << i << " slack with nonzero dual; ";
      for (const auto& [j, a] : row.coeffs) reduced[j] -= y * a;
      dual_obj += y * row.rhs;
    }
  }
  for (int j = 0; j < n; ++j) {
    const Rational& yb = s.bound_dual[j];
    if (yb.is_zero()) continue;
    if (!p.vars[j].upper) err << "bound dual on unbounded var " << j << "; ";
    if (minimize ? yb.sign() > 0 : yb.sign() < 0) err << "bound dual " << j << " sign; ";
    if (p.vars[j].upper && s.x[j] != *p.vars[j].upper) err << "bound " << j << " slack with nonzero dual; ";
    reduced[j] -= yb;
    if (p.vars[j].upper) dual_obj += yb * *p.vars[j].upper;
  }
  Rational primal_obj;
  for (int j = 0; j < n; ++j) {
    primal_obj += p.objective[j] * s.x[j];
    if (minimize ? reduced[j].sign() < 0 : reduced[j].sign() > 0) err << "reduced cost " << j << " sign; ";
    if (!s.x[j].is_zero() && !reduced[j].is_zero()) err << "x[" << j << "] positive with nonzero reduced cost; ";
  }
  if (primal_obj != s.objective) err << "objective mismatch; ";
  if (dual_obj != s.objective) err << "strong duality fails (" << dual_obj << " vs " << s.objective << "); ";
  return err.str();
}

/// Checks a Farkas certificate: lambda^T A <= 0 on every column, lambda^T b > 0, with the
/// row signs that make lambda^T A x >= lambda^T b for every feasible x.
inline bool check_farkas(const LpProblem& p, const LpSolution& s) {
  const int n = p.num_vars();
  if (static_cast<int>(s.farkas.size()) != p.num_rows()) return false;
  std::vector<Rational> combo(n);
  Rational rhs;
  for (int i = 0; i < p.num_rows(); ++i) {
    const Rational& l = s.farkas[i];
    if (l.is_zero()) continue;
    if (p.rows[i].rel == Relation::GreaterEq && l.sign() < 0) return false;
    if (p.rows[i].rel == Relation::LessEq && l.sign() > 0) return false;
    for (const auto& [j, a] : p.rows[i].coeffs) combo[j] += l * a;
    rhs += l * p.rows[i].rhs;
  }
  for (int j = 0; j < n; ++j) {
    const Rational& l = s.farkas_bound.empty() ? Rational() : s.farkas_bound[j];
    if (l.is_zero()) continue;
    if (!p.vars[j].upper || l.sign() > 0) return false;  // bound rows are <= rows
    combo[j] += l;
    rhs += l * *p.vars[j].upper;
  }
  for (int j = 0; j < n; ++j)
    if (combo[j].sign() > 0) return false;
  return rhs.sign() > 0;
}

/// Checks an unbounded ray: feasible direction that strictly improves the objective.
inline bool check_ray(const LpProblem& p, const LpSolution& s) {
  const int n = p.num_vars();
  if (static_cast<int>(s.ray.size()) != n) return false;
  Rational gain;
  for (int j = 0; j < n; ++j) {
    if (s.ray[j].sign() < 0) return false;
    if (p.vars[j].upper && s.ray[j].sign() != 0) return false;
    gain += p.objective[j] * s.ray[j];
  }
  for (const auto& row : p.rows) {
    Rational a = row_activity(row, s.ray);
    if (row.rel == Relation::Equal && !a.is_zero()) return false;
    if (row.rel == Relation::LessEq && a.sign() > 0) return false;
    if (row.rel == Relation::GreaterEq && a.sign() < 0) return false;
  }
  return p.sense == Sense::Minimize ? gain.sign() < 0 : gain.sign() > 0;
}

namespace detail {

struct SparseVec {
  std::vector<int> idx;
  std::vector<Rational> val;
};

}  // namespace detail

/// Revised simplex over exact rationals with the basis inverse kept in product form.
///
/// Internally every row is stored as  o * (user row) + sigma * slack (+ artificial) = o * rhs
/// with o = +-1 and sigma = +-1, and the problem is always a minimisation.
class SimplexSolver {
 public:
  explicit SimplexSolver(LpProblem problem, SimplexOptions opt = {}) : p_(std::move(problem)), opt_(opt) {
    ns_ = p_.num_vars();
    for (int j = 0; j < ns_; ++j)
      if (p_.vars[j].upper) internal_rows_for_bounds_.push_back(j);
  }

  const LpProblem& problem() const { return p_; }

  LpSolution solve() {
    build();
    LpSolution out;
    if (!artificials_.empty()) {
      set_cost_phase1();
      auto st = primal_loop(out.iterations, true);
      ensure(st == LpStatus::Optimal, "phase 1 cannot be unbounded");
      if (objective_value().sign() > 0) return infeasible_from_prices(std::move(out), prices());
      drive_out_artificials();
    }
    set_cost_phase2();
    auto st = primal_loop(out.iterations, false);
    solved_ = true;
    if (st == LpStatus::Unbounded) {
      out.status = LpStatus::Unbounded;
      out.ray = last_ray_;
      solved_ = false;
      return out;
    }
    return finish(std::move(out));
  }

  /// Adds inequality rows to a previously optimal model and re-optimises with the dual simplex.
  LpSolution add_rows(const std::vector<LpRow>& rows) {
    ensure(solved_, "add_rows needs an optimal model");
    for (const auto& row : rows) {
      require(row.rel != Relation::Equal, "warm-started rows must be inequalities");
      p_.rows.push_back(row);
      Rational o(row.rel == Relation::LessEq ? 1 : -1);
      append_internal_row(row.coeffs, row.rhs, o, Rational(1), static_cast<int>(p_.rows.size()) - 1);
      int slack = static_cast<int>(cols_.size()) - 1;
      basis_.push_back(slack);
    }
    refactor();
    set_cost_phase2();
    LpSolution out;
    auto st = dual_loop(out.iterations);
    if (st == LpStatus::Infeasible) {
      solved_ = false;
      return infeasible_from_prices(std::move(out), dual_ray_);
    }
    return finish(std::move(out));
  }

 private:
  enum class Kind { Structural, Slack, Artificial };

  struct Eta {
    int r;
    Rational pivot;  // multiplier applied to component r
    std::vector<int> idx;
    std::vector<Rational> val;
  };

  LpProblem p_;
  SimplexOptions opt_;
  int ns_ = 0;
  std::vector<int> internal_rows_for_bounds_;

  // Internal model.
  std::vector<detail::SparseVec> cols_;
  std::vector<Kind> kind_;
  std::vector<int> owner_;  // slack/artificial: internal row
  std::vector<Rational> b_;
  std::vector<Rational> orient_;   // o per internal row
  std::vector<int> user_row_;      // user row index, or -(var+1) for bound rows
  std::vector<int> slack_of_row_;  // column index or -1
  std::vector<char> row_active_;   // false once dropped as redundant
  std::vector<int> artificials_;

  std::vector<Rational> cost_;
  std::vector<int> basis_;  // basis_[r] = column basic in row r (over active rows only, see act_)
  std::vector<int> pos_;    // column -> basis position or -1
  std::vector<int> act_;    // active internal rows in order; basis position k lives in row act_[k]
  std::vector<Eta> etas_;
  std::vector<Rational> xb_;
  std::vector<char> enterable_;
  bool solved_ = false;
  std::vector<Rational> last_ray_;
  std::vector<Rational> dual_ray_;

  int m() const { return static_cast<int>(act_.size()); }

  void append_internal_row(const std::vector<std::pair<int, Rational>>& coeffs, const Rational& rhs, Rational o,
                           Rational sigma, int user) {
    int r = static_cast<int>(b_.size());
    for (const auto& [j, a] : coeffs) {
      require(j >= 0 && j < ns_, "row references an undeclared variable");
      if (a.is_zero()) continue;
      cols_[j].idx.push_back(r);
      cols_[j].val.push_back(o * a);
    }
    b_.push_back(o * rhs);
    orient_.push_back(o);
    user_row_.push_back(user);
    row_active_.push_back(1);
    act_.push_back(r);
    if (sigma.is_zero()) {
      slack_of_row_.push_back(-1);
    } else {
      detail::SparseVec sv;
      sv.idx.push_back(r);
      sv.val.push_back(sigma);
      cols_.push_back(std::move(sv));
      kind_.push_back(Kind::Slack);
      owner_.push_back(r);
      slack_of_row_.push_back(static_cast<int>(cols_.size()) - 1);
      enterable_.push_back(1);
      pos_.push_back(-1);
    }
  }

  void build() {
    require(static_cast<int>(p_.objective.size()) == ns_, "objective dimension mismatch");
    cols_.assign(ns_, {});
    kind_.assign(ns_, Kind::Structural);
    owner_.assign(ns_, -1);
    enterable_.assign(ns_, 1);
    pos_.assign(ns_, -1);
    b_.clear();
    orient_.clear();
    user_row_.clear();
    slack_of_row_.clear();
    row_active_.clear();
    act_.clear();
    artificials_.clear();
    basis_.clear();
    std::vector<int> need_artificial;
    auto add = [&](const std::vector<std::pair<int, Rational>>& coeffs, Relation rel, const Rational& rhs, int user) {
      Rational o(rel == Relation::GreaterEq ? -1 : 1);
      Rational sigma(rel == Relation::Equal ? 0 : 1);
      bool art = rel == Relation::Equal;
      if ((o * rhs).sign() < 0) {
        o = -o;
        sigma = -sigma;
        art = true;
      }
      append_internal_row(coeffs, rhs, o, sigma, user);
      int r = static_cast<int>(b_.size()) - 1;
      if (art) need_artificial.push_back(r);
      else basis_.push_back(slack_of_row_[r]);
      if (art) basis_.push_back(-1);
    };
    for (int i = 0; i < p_.num_rows(); ++i) add(p_.rows[i].coeffs, p_.rows[i].rel, p_.rows[i].rhs, i);
    for (int j : internal_rows_for_bounds_)
      add({{j, Rational(1)}}, Relation::LessEq, *p_.vars[j].upper, -(j + 1));
    for (int r : need_artificial) {
      detail::SparseVec sv;
      sv.idx.push_back(r);
      sv.val.push_back(Rational(1));
      cols_.push_back(std::move(sv));
      kind_.push_back(Kind::Artificial);
      owner_.push_back(r);
      enterable_.push_back(1);
      pos_.push_back(-1);
      artificials_.push_back(static_cast<int>(cols_.size()) - 1);
      basis_[r] = static_cast<int>(cols_.size()) - 1;
    }
    refactor();
  }

  // Dense vector over basis positions / active rows.
  using Dense = std::vector<Rational>;

  Dense column_dense(int j) const {
    Dense v(m());
    const auto& c = cols_[j];
    for (std::size_t k = 0; k < c.idx.size(); ++k) {
      int pos = row_pos_[c.idx[k]];
      if (pos >= 0) v[pos] = c.val[k];
    }
    return v;
  }

  std::vector<int> row_pos_;  // internal row -> position in act_, or -1 when dropped

  void ftran(Dense& v) const {
    for (const auto& e : etas_) {
      if (v[e.r].is_zero()) continue;
      Rational vr = v[e.r];
      v[e.r] = e.pivot * vr;
      for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] += e.val[k] * vr;
    }
  }

  void btran(Dense& y) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const auto& e = *it;
      Rational s = y[e.r] * e.pivot;
      for (std::size_t k = 0; k < e.idx.size(); ++k)
        if (!y[e.idx[k]].is_zero()) s += y[e.idx[k]] * e.val[k];
      y[e.r] = std::move(s);
    }
  }

  void push_eta(int r, const Dense& d) {
    Eta e;
    e.r = r;
    e.pivot = Rational(1) / d[r];
    for (int i = 0; i < m(); ++i) {
      if (i == r || d[i].is_zero()) continue;
      e.idx.push_back(i);
      e.val.push_back(-d[i] * e.pivot);
    }
    etas_.push_back(std::move(e));
  }

  // Rebuilds the product-form inverse for the current basis (positions follow act_).
  void refactor() {
    row_pos_.assign(b_.size(), -1);
    for (int k = 0; k < m(); ++k) row_pos_[act_[k]] = k;
    etas_.clear();
    std::vector<int> old = basis_;
    std::fill(pos_.begin(), pos_.end(), -1);
    basis_.assign(m(), -1);
    std::vector<int> pending;
    // Unit columns (slacks/artificials with coefficient +1) sit on their own row without an eta.
    for (int j : old) {
      if (j < 0) continue;
      if (kind_[j] != Kind::Structural && cols_[j].val[0] == Rational(1) && basis_[row_pos_[owner_[j]]] == -1) {
        basis_[row_pos_[owner_[j]]] = j;
        pos_[j] = row_pos_[owner_[j]];
      } else {
        pending.push_back(j);
      }
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [&](int a, int c) { return cols_[a].idx.size() < cols_[c].idx.size(); });
    for (int j : pending) {
      Dense d = column_dense(j);
      ftran(d);
      int best = -1;
      for (int i = 0; i < m(); ++i) {
        if (basis_[i] != -1 || d[i].is_zero()) continue;
        if (best < 0 || (d[i].is_small() && !d[best].is_small())) best = i;
        if (d[best].is_small() && (d[best] == Rational(1) || d[best] == Rational(-1))) break;
      }
      ensure(best >= 0, "basis matrix is singular");
      push_eta(best, d);
      basis_[best] = j;
      pos_[j] = best;
    }
    ensure(std::find(basis_.begin(), basis_.end(), -1) == basis_.end(), "basis is incomplete");
    xb_.assign(m(), Rational());
    for (int k = 0; k < m(); ++k) xb_[k] = b_[act_[k]];
    ftran(xb_);
  }

  void set_cost_phase1() {
    cost_.assign(cols_.size(), Rational());
    for (int a : artificials_) cost_[a] = Rational(1);
  }

  void set_cost_phase2() {
    cost_.assign(cols_.size(), Rational());
    for (int j = 0; j < ns_; ++j) cost_[j] = p_.sense == Sense::Minimize ? p_.objective[j] : -p_.objective[j];
  }

  Rational objective_value() const {
    Rational v;
    for (int k = 0; k < m(); ++k)
      if (!cost_[basis_[k]].is_zero()) v += cost_[basis_[k]] * xb_[k];
    return v;
  }

  Dense prices() const {
    Dense y(m());
    for (int k = 0; k < m(); ++k) y[k] = cost_[basis_[k]];
    btran(y);
    return y;
  }

  Rational dot_column(const Dense& y, int j) const {
    Rational s;
    const auto& c = cols_[j];
    for (std::size_t k = 0; k < c.idx.size(); ++k) {
      int pos = row_pos_[c.idx[k]];
      if (pos >= 0 && !y[pos].is_zero()) s += y[pos] * c.val[k];
    }
    return s;
  }

  void pivot(int r, int entering, const Dense& d) {
    Rational theta = xb_[r] / d[r];
    if (!theta.is_zero())
      for (int i = 0; i < m(); ++i)
        if (i != r && !d[i].is_zero()) xb_[i] -= theta * d[i];
    xb_[r] = theta;
    pos_[basis_[r]] = -1;
    basis_[r] = entering;
    pos_[entering] = r;
    push_eta(r, d);
    if (static_cast<int>(etas_.size()) > m() + opt_.refactor_every) refactor();
  }

  LpStatus primal_loop(long& iterations, bool phase1) {
    int degenerate_run = 0;
    for (;;) {
      bool bland = opt_.degenerate_switch == 0 || degenerate_run >= opt_.degenerate_switch;
      Dense y = prices();
      int entering = -1;
      Rational best;
      for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
        if (pos_[j] >= 0 || !enterable_[j]) continue;
        if (!phase1 && kind_[j] == Kind::Artificial) continue;
        Rational dj = cost_[j] - dot_column(y, j);
        if (dj.sign() >= 0) continue;
        if (bland) {
          entering = j;
          break;
        }
        if (entering < 0 || dj < best) {
          entering = j;
          best = std::move(dj);
        }
      }
      if (entering < 0) return LpStatus::Optimal;
      Dense d = column_dense(entering);
      ftran(d);
      int leave = -1;
      Rational ratio;
      for (int i = 0; i < m(); ++i) {
        if (d[i].sign() <= 0) continue;
        Rational q = xb_[i] / d[i];
        if (leave < 0 || q < ratio || (q == ratio && basis_[i] < basis_[leave])) {
          leave = i;
          ratio = std::move(q);
        }
      }
      if (leave < 0) {
        last_ray_.assign(ns_, Rational());
        if (entering < ns_) last_ray_[entering] = Rational(1);
        for (int i = 0; i < m(); ++i)
          if (basis_[i] < ns_) last_ray_[basis_[i]] = -d[i];
        return LpStatus::Unbounded;
      }
      degenerate_run = ratio.is_zero() ? degenerate_run + 1 : 0;
      pivot(leave, entering, d);
      ++iterations;
    }
  }

  LpStatus dual_loop(long& iterations) {
    int stall = 0;
    for (;;) {
      bool bland = opt_.degenerate_switch == 0 || stall >= opt_.degenerate_switch;
      int leave = -1;
      for (int i = 0; i < m(); ++i) {
        if (xb_[i].sign() >= 0) continue;
        if (leave < 0 || (bland ? basis_[i] < basis_[leave] : xb_[i] < xb_[leave])) leave = i;
      }
      if (leave < 0) return LpStatus::Optimal;
      Dense rho(m());
      rho[leave] = Rational(1);
      btran(rho);
      Dense y = prices();
      int entering = -1;
      Rational ratio;
      for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
        if (pos_[j] >= 0 || !enterable_[j] || kind_[j] == Kind::Artificial) continue;
        Rational alpha = dot_column(rho, j);
        if (alpha.sign() >= 0) continue;
        Rational dj = cost_[j] - dot_column(y, j);
        Rational q = dj / (-alpha);
        if (entering < 0 || q < ratio) {
          entering = j;
          ratio = std::move(q);
        }
      }
      if (entering < 0) {
        dual_ray_ = rho;
        for (auto& v : dual_ray_) v = -v;
        return LpStatus::Infeasible;
      }
      stall = ratio.is_zero() ? stall + 1 : 0;
      Dense d = column_dense(entering);
      ftran(d);
      pivot(leave, entering, d);
      ++iterations;
    }
  }

  // After phase 1: pivot basic artificials out, dropping rows that turn out to be redundant.
  void drive_out_artificials() {
    bool dropped = false;
    for (int k = 0; k < m(); ++k) {
      int a = basis_[k];
      if (kind_[a] != Kind::Artificial) continue;
      ensure(xb_[k].is_zero(), "artificial left positive after feasible phase 1");
      Dense rho(m());
      rho[k] = Rational(1);
      btran(rho);
      int entering = -1;
      for (int j = 0; j < static_cast<int>(cols_.size()) && entering < 0; ++j) {
        if (pos_[j] >= 0 || kind_[j] == Kind::Artificial) continue;
        if (!dot_column(rho, j).is_zero()) entering = j;
      }
      if (entering >= 0) {
        Dense d = column_dense(entering);
        ftran(d);
        pivot(k, entering, d);
      } else {
        row_active_[act_[k]] = 0;
        dropped = true;
      }
    }
    for (int a : artificials_) enterable_[a] = 0;
    if (dropped) {
      std::vector<int> keep_rows, keep_basis;
      for (int k = 0; k < m(); ++k) {
        if (!row_active_[act_[k]]) continue;
        keep_rows.push_back(act_[k]);
        keep_basis.push_back(basis_[k]);
      }
      act_ = keep_rows;
      basis_ = keep_basis;
      refactor();
    }
  }

  // Maps internal multipliers (by basis position) to user-row multipliers.
  void to_user(const Dense& y, std::vector<Rational>& rows, std::vector<Rational>& bounds, bool negate) const {
    rows.assign(p_.num_rows(), Rational());
    bounds.assign(ns_, Rational());
    for (int k = 0; k < m(); ++k) {
      if (y[k].is_zero()) continue;
      int r = act_[k];
      Rational v = orient_[r] * y[k];
      if (negate) v = -v;
      int u = user_row_[r];
      if (u >= 0) rows[u] = std::move(v);
      else bounds[-u - 1] = std::move(v);
    }
  }

  LpSolution infeasible_from_prices(LpSolution out, const Dense& y) {
    out.status = LpStatus::Infeasible;
    to_user(y, out.farkas, out.farkas_bound, false);
    if (opt_.verify) ensure(check_farkas(p_, out), "Farkas certificate failed verification");
    return out;
  }

  LpSolution finish(LpSolution out) {
    out.status = LpStatus::Optimal;
    out.x.assign(ns_, Rational());
    for (int k = 0; k < m(); ++k)
      if (basis_[k] < ns_) out.x[basis_[k]] = xb_[k];
    Dense y = prices();
    to_user(y, out.dual, out.bound_dual, p_.sense == Sense::Maximize);
    out.objective = Rational();
    for (int j = 0; j < ns_; ++j)
      if (!out.x[j].is_zero()) out.objective += p_.objective[j] * out.x[j];
    for (int k = 0; k < m(); ++k) {
      int j = basis_[k];
      if (kind_[j] == Kind::Structural) out.basis.push_back(j);
      else if (kind_[j] == Kind::Slack && user_row_[owner_[j]] >= 0) out.basis.push_back(ns_ + user_row_[owner_[j]]);
    }
    std::sort(out.basis.begin(), out.basis.end());
    if (opt_.verify) {
      std::string err = check_optimality(p_, out);
      ensure(err.empty(), "LP optimality certificate failed: " + err);
    }
    return out;
  }
};

inline LpSolution solve(const LpProblem& problem, SimplexOptions opt = {}) {
  SimplexSolver s(problem, opt);
  return s.solve();
}

/// A family of implicit constraints. Returned rows must be violated by the queried point.
class SeparationOracle {
 public:
  virtual ~SeparationOracle() = default;
  /// Returns violated rows: the first one found, or every one found when `all` is set.
  virtual std::vector<LpRow> separate(const std::vector<Rational>& x, bool all) = 0;
};

struct CuttingPlaneOptions {
  bool add_all = false;
  int max_rounds = 100000;
  SimplexOptions simplex;
};

struct CuttingPlaneResult {
  LpSolution solution;
  LpProblem problem;  // core plus generated rows, aligned with solution.dual
  std::vector<LpRow> generated;
  int rounds = 0;
};

inline CuttingPlaneResult cutting_plane(const LpProblem& core, const std::vector<SeparationOracle*>& oracles,
                                        CuttingPlaneOptions opt = {}) {
  SimplexSolver solver(core, opt.simplex);
  CuttingPlaneResult res;
  LpSolution sol = solver.solve();
  for (;;) {
    if (sol.status != LpStatus::Optimal) break;
    std::vector<LpRow> cuts;
    for (auto* o : oracles) {
      auto found = o->separate(sol.x, opt.add_all);
      for (auto& row : found) {
        ensure(row_violation(row, sol.x).sign() > 0, "separation oracle returned a non-violated row");
        cuts.push_back(std::move(row));
      }
    }
    if (cuts.empty()) break;
    ensure(++res.rounds <= opt.max_rounds, "cutting plane round limit reached");
    res.generated.insert(res.generated.end(), cuts.begin(), cuts.end());
    sol = solver.add_rows(cuts);
  }
  if (sol.status == LpStatus::Optimal) {
    for (auto* o : oracles) ensure(o->separate(sol.x, true).empty(), "final separation sweep found a violated row");
  }
  res.solution = std::move(sol);
  res.problem = solver.problem();
  return res;
}

/// Plain-text dump in CPLEX LP style.
inline std::string to_lp_format(const LpProblem& p) {
  std::ostringstream os;
  auto name = [&](int j) { return p.vars[j].name.empty() ? "x" + std::to_string(j) : p.vars[j].name; };
  auto term = [&](const Rational& a, int j, bool first) {
    std::string out;
    if (a.sign() < 0) out += first ? "- " : " - ";
    else if (!first) out += " + ";
    Rational m = abs(a);
    if (m != Rational(1)) out += m.str() + " ";
    return out + name(j);
  };
  os << (p.sense == Sense::Minimize ? "Minimize" : "Maximize") << "\n obj: ";
  bool first = true;
  for (int j = 0; j < p.num_vars(); ++j) {
    if (p.objective[j].is_zero()) continue;
    os << term(p.objective[j], j, first);
    first = false;
  }
  if (first) os << "0";
  os << "\nSubject To\n";
  for (int i = 0; i < p.num_rows(); ++i) {
    const auto& row = p.rows[i];
    os << " " << (row.name.empty() ? "c" + std::to_string(i) : row.name) << ": ";
    first = true;
    for (const auto& [j, a] : row.coeffs) {
      os << term(a, j, first);
      first = false;
    }
    if (first) os << "0 " << name(0);
    os << (row.rel == Relation::LessEq ? " <= " : row.rel == Relation::GreaterEq ? " >= " : " = ") << row.rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < p.num_vars(); ++j)
    if (p.vars[j].upper) os << " 0 <= " << name(j) << " <= " << *p.vars[j].upper << "\n";
  os << "End\n";
  return os.str();
}

}  // namespace dirlat

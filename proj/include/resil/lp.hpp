#pragma once

#include "resil/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace resil {

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Maximize, Minimize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

using VarId = std::size_t;

struct Term {
  VarId var;
  Rational coef;
};
using LinearExpr = std::vector<Term>;

struct Objective {
  Sense sense = Sense::Maximize;
  LinearExpr terms;
};

struct Constraint {
  LinearExpr terms;
  Relation relation = Relation::LessEqual;
  Rational rhs;
  std::string name;
};

struct Variable {
  std::string name;
  bool nonnegative = true;
};

class LinearProgram {
 public:
  VarId add_variable(std::string name, bool nonnegative = true) {
    vars_.push_back({std::move(name), nonnegative});
    return vars_.size() - 1;
  }

  void add_constraint(LinearExpr terms, Relation rel, Rational rhs, std::string name = {}) {
    constraints_.push_back({std::move(terms), rel, std::move(rhs), std::move(name)});
  }

  void set_objective(Objective obj) { objective_ = std::move(obj); }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Objective& objective() const { return objective_; }

  /// Throws std::invalid_argument if any term names an undeclared variable.
  void check() const {
    auto check_expr = [&](const LinearExpr& e, const std::string& where) {
      for (const auto& t : e)
        if (t.var >= vars_.size())
          throw std::invalid_argument("linear program: " + where + " references undeclared variable " +
                                      std::to_string(t.var));
    };
    check_expr(objective_.terms, "objective");
    for (std::size_t i = 0; i < constraints_.size(); ++i)
      check_expr(constraints_[i].terms, "constraint " + std::to_string(i));
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> constraints_;
  Objective objective_;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Rational> values;  // one per variable, present iff Optimal
  Rational objective_value;

  bool optimal() const { return status == LpStatus::Optimal; }
  const Rational& operator[](VarId v) const { return values.at(v); }
};

inline Rational evaluate(const LinearExpr& e, const std::vector<Rational>& x) {
  Rational sum = 0;
  for (const auto& t : e) sum += t.coef * x[t.var];
  return sum;
}

inline bool satisfies(const LinearProgram& lp, const std::vector<Rational>& x) {
  if (x.size() != lp.variables().size()) return false;
  for (std::size_t v = 0; v < x.size(); ++v)
    if (lp.variables()[v].nonnegative && x[v] < 0) return false;
  for (const auto& c : lp.constraints()) {
    Rational lhs = evaluate(c.terms, x);
    switch (c.relation) {
      case Relation::LessEqual:
        if (lhs > c.rhs) return false;
        break;
      case Relation::Equal:
        if (lhs != c.rhs) return false;
        break;
      case Relation::GreaterEqual:
        if (lhs < c.rhs) return false;
        break;
    }
  }
  return true;
}

namespace detail {

/// Dense tableau for max c·x, A x = b, x >= 0 with b >= 0. Column indices are
/// the anti-cycling order for Bland's rule.
class Tableau {
 public:
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  std::vector<std::size_t> basis;
  std::vector<Rational> reduced;  // c_j - c_B B^{-1} A_j
  Rational value;                 // c_B B^{-1} b
  std::vector<char> blocked;      // columns never allowed to enter

  std::size_t columns() const { return reduced.size(); }

  void price(const std::vector<Rational>& cost) {
    reduced = cost;
    value = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Rational& cb = cost[basis[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < columns(); ++j)
        if (rows[i][j] != 0) reduced[j] -= cb * rows[i][j];
      value += cb * rhs[i];
    }
  }

  void pivot(std::size_t r, std::size_t col) {
    const Rational inv = 1 / rows[r][col];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < columns(); ++j)
      if (rows[r][j] != 0) {
        rows[r][j] *= inv;
        nz.push_back(j);
      }
    rhs[r] *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][col] == 0) continue;
      const Rational f = rows[i][col];
      for (auto j : nz) rows[i][j] -= f * rows[r][j];
      rhs[i] -= f * rhs[r];
    }
    if (reduced[col] != 0) {
      const Rational f = reduced[col];
      for (auto j : nz) reduced[j] -= f * rows[r][j];
      value += f * rhs[r];
    }
    basis[r] = col;
  }

  /// Bland's rule primal simplex. Returns false if unbounded.
  bool optimize() {
    for (;;) {
      std::size_t enter = columns();
      for (std::size_t j = 0; j < columns(); ++j)
        if (!blocked[j] && reduced[j] > 0) {
          enter = j;
          break;
        }
      if (enter == columns()) return true;

      std::size_t leave = rows.size();
      Rational best;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][enter] <= 0) continue;
        Rational ratio = rhs[i] / rows[i][enter];
        if (leave == rows.size() || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (leave == rows.size()) return false;
      pivot(leave, enter);
    }
  }

  void drop_row(std::size_t r) {
    rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(r));
    rhs.erase(rhs.begin() + static_cast<std::ptrdiff_t>(r));
    basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
  }
};

}  // namespace detail

/// Exact two-phase simplex over rationals with Bland's anti-cycling rule.
/// Optimal assignments are re-checked against every constraint before return.
inline LpSolution solve(const LinearProgram& lp) {
  lp.check();
  const auto& vars = lp.variables();
  const auto& cons = lp.constraints();

  // Structural columns: one per nonnegative variable, two (x+ and x-) per free one.
  std::vector<std::size_t> pos_col(vars.size()), neg_col(vars.size(), static_cast<std::size_t>(-1));
  std::size_t ncols = 0;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    pos_col[v] = ncols++;
    if (!vars[v].nonnegative) neg_col[v] = ncols++;
  }
  const std::size_t structural = ncols;

  // Normalize every row to a nonnegative right-hand side.
  struct Row {
    std::map<std::size_t, Rational> coef;
    Relation rel;
    Rational rhs;
  };
  std::vector<Row> normalized;
  for (const auto& c : cons) {
    Row row{{}, c.relation, c.rhs};
    for (const auto& t : c.terms) {
      row.coef[pos_col[t.var]] += t.coef;
      if (neg_col[t.var] != static_cast<std::size_t>(-1)) row.coef[neg_col[t.var]] -= t.coef;
    }
    if (row.rhs < 0) {
      row.rhs = -row.rhs;
      for (auto& [k, a] : row.coef) a = -a;
      if (row.rel == Relation::LessEqual) row.rel = Relation::GreaterEqual;
      else if (row.rel == Relation::GreaterEqual) row.rel = Relation::LessEqual;
    }
    normalized.push_back(std::move(row));
  }

  const std::size_t m = normalized.size();
  std::vector<std::size_t> slack_col(m, static_cast<std::size_t>(-1)), art_col(m, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < m; ++i)
    if (normalized[i].rel != Relation::Equal) slack_col[i] = ncols++;
  const std::size_t first_artificial = ncols;
  for (std::size_t i = 0; i < m; ++i)
    if (normalized[i].rel != Relation::LessEqual) art_col[i] = ncols++;

  detail::Tableau t;
  t.rows.assign(m, std::vector<Rational>(ncols));
  t.rhs.resize(m);
  t.basis.resize(m);
  t.blocked.assign(ncols, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& [k, a] : normalized[i].coef) t.rows[i][k] = a;
    t.rhs[i] = normalized[i].rhs;
    if (slack_col[i] != static_cast<std::size_t>(-1))
      t.rows[i][slack_col[i]] = normalized[i].rel == Relation::LessEqual ? 1 : -1;
    if (art_col[i] != static_cast<std::size_t>(-1)) {
      t.rows[i][art_col[i]] = 1;
      t.basis[i] = art_col[i];
    } else {
      t.basis[i] = slack_col[i];
    }
  }

  LpSolution result;

  // Phase 1: maximize -(sum of artificials).
  if (first_artificial < ncols) {
    std::vector<Rational> phase1(ncols);
    for (std::size_t j = first_artificial; j < ncols; ++j) phase1[j] = -1;
    t.price(phase1);
    t.optimize();
    if (t.value < 0) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    for (std::size_t i = 0; i < t.rows.size();) {
      if (t.basis[i] < first_artificial) {
        ++i;
        continue;
      }
      std::size_t col = first_artificial;
      for (std::size_t j = 0; j < first_artificial; ++j)
        if (t.rows[i][j] != 0) {
          col = j;
          break;
        }
      if (col == first_artificial) {
        t.drop_row(i);
      } else {
        t.pivot(i, col);
        ++i;
      }
    }
    for (std::size_t j = first_artificial; j < ncols; ++j) t.blocked[j] = 1;
  }

  // Phase 2.
  const bool minimize = lp.objective().sense == Sense::Minimize;
  std::vector<Rational> cost(ncols);
  for (const auto& term : lp.objective().terms) {
    Rational c = minimize ? Rational(-term.coef) : term.coef;
    cost[pos_col[term.var]] += c;
    if (neg_col[term.var] != static_cast<std::size_t>(-1)) cost[neg_col[term.var]] -= c;
  }
  t.price(cost);
  if (!t.optimize()) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  std::vector<Rational> column_value(ncols);
  for (std::size_t i = 0; i < t.rows.size(); ++i) column_value[t.basis[i]] = t.rhs[i];
  result.values.resize(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    result.values[v] = column_value[pos_col[v]];
    if (neg_col[v] != static_cast<std::size_t>(-1)) result.values[v] -= column_value[neg_col[v]];
  }
  (void)structural;
  result.status = LpStatus::Optimal;
  result.objective_value = evaluate(lp.objective().terms, result.values);
  if (!satisfies(lp, result.values))
    throw std::logic_error("simplex returned an assignment violating the program");
  return result;
}

/// Optimizes `secondary` over the optimal face of `lp` (primary objective pinned
/// to its optimum by an equality constraint).
inline LpSolution solve_lexicographic(const LinearProgram& lp, const Objective& secondary) {
  LpSolution primary = solve(lp);
  if (!primary.optimal()) return primary;
  LinearProgram second = lp;
  second.add_constraint(lp.objective().terms, Relation::Equal, primary.objective_value, "primary_optimum");
  second.set_objective(secondary);
  LpSolution out = solve(second);
  if (out.optimal() && evaluate(lp.objective().terms, out.values) != primary.objective_value)
    throw std::logic_error("lexicographic phase moved the primary objective");
  return out;
}

/// Human-readable dump in CPLEX-LP-like layout with exact fraction coefficients.
inline std::string to_lp_text(const LinearProgram& lp, const std::string& title = {}) {
  std::ostringstream out;
  const auto& vars = lp.variables();
  auto expr = [&](const LinearExpr& e) {
    std::ostringstream s;
    bool first = true;
    for (const auto& t : e) {
      if (t.coef == 0) continue;
      Rational c = t.coef;
      if (c < 0) {
        s << (first ? "- " : " - ");
        c = -c;
      } else if (!first) {
        s << " + ";
      }
      if (c != 1) s << to_string(c) << " ";
      s << vars[t.var].name;
      first = false;
    }
    if (first) s << "0";
    return s.str();
  };
  if (!title.empty()) out << "\\ " << title << "\n";
  out << (lp.objective().sense == Sense::Maximize ? "Maximize" : "Minimize") << "\n";
  out << " obj: " << expr(lp.objective().terms) << "\n";
  out << "Subject To\n";
  for (std::size_t i = 0; i < lp.constraints().size(); ++i) {
    const auto& c = lp.constraints()[i];
    const char* rel = c.relation == Relation::LessEqual ? "<=" : c.relation == Relation::Equal ? "=" : ">=";
    out << " " << (c.name.empty() ? "c" + std::to_string(i) : c.name) << ": " << expr(c.terms) << " " << rel
        << " " << to_string(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : vars) out << " " << v.name << (v.nonnegative ? " >= 0" : " free") << "\n";
  out << "End\n";
  return out.str();
}

}  // namespace resil

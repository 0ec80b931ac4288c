#include "resil/lp.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <optional>
#include <random>

namespace resil {
namespace {

TEST(Lp, BoundedMaximum) {
  LinearProgram lp;
  auto x = lp.add_variable("x");
  lp.add_constraint({{x, 1}}, Relation::LessEqual, 3);
  lp.set_objective({Sense::Maximize, {{x, 1}}});
  auto s = solve(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s[x], 3);
  EXPECT_EQ(s.objective_value, 3);
}

TEST(Lp, ContradictoryBoundsAreInfeasible) {
  LinearProgram lp;
  auto x = lp.add_variable("x");
  lp.add_constraint({{x, 1}}, Relation::GreaterEqual, 1);
  lp.add_constraint({{x, 1}}, Relation::LessEqual, 0);
  EXPECT_EQ(solve(lp).status, LpStatus::Infeasible);
}

TEST(Lp, MissingUpperBoundIsUnbounded) {
  LinearProgram lp;
  auto y = lp.add_variable("y");
  lp.set_objective({Sense::Maximize, {{y, 1}}});
  EXPECT_EQ(solve(lp).status, LpStatus::Unbounded);
}

TEST(Lp, UndeclaredVariableIsRejected) {
  LinearProgram lp;
  lp.add_variable("x");
  lp.add_constraint({{7, 1}}, Relation::LessEqual, 1);
  EXPECT_THROW(solve(lp), std::invalid_argument);
}

TEST(Lp, FreeVariablesAndMinimization) {
  LinearProgram lp;
  auto x = lp.add_variable("x", false);
  lp.add_constraint({{x, 1}}, Relation::GreaterEqual, make_rational(-5, 2));
  lp.set_objective({Sense::Minimize, {{x, 1}}});
  auto s = solve(lp);
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s[x], make_rational(-5, 2));
}

TEST(Lp, RedundantEqualitiesAreHandled) {
  LinearProgram lp;
  auto x = lp.add_variable("x");
  auto y = lp.add_variable("y");
  lp.add_constraint({{x, 1}, {y, 1}}, Relation::Equal, 1);
  lp.add_constraint({{x, 2}, {y, 2}}, Relation::Equal, 2);
  lp.set_objective({Sense::Maximize, {{x, 2}, {y, 1}}});
  auto s = solve(lp);
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s[x], 1);
  EXPECT_EQ(s[y], 0);
}

TEST(Lp, LexicographicKeepsPrimaryOptimum) {
  // On the optimal face of max x+y over the unit box only (1,1) remains.
  LinearProgram lp;
  auto x = lp.add_variable("x");
  auto y = lp.add_variable("y");
  lp.add_constraint({{x, 1}}, Relation::LessEqual, 1);
  lp.add_constraint({{y, 1}}, Relation::LessEqual, 1);
  lp.set_objective({Sense::Maximize, {{x, 1}, {y, 1}}});
  auto s = solve_lexicographic(lp, {Sense::Minimize, {{y, 1}}});
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s[x], 1);
  EXPECT_EQ(s[y], 1);
}

TEST(Lp, LexicographicBreaksTiesOnOptimalFace) {
  LinearProgram lp;
  auto x = lp.add_variable("x");
  auto y = lp.add_variable("y");
  lp.add_constraint({{x, 1}, {y, 1}}, Relation::LessEqual, 1);
  lp.set_objective({Sense::Maximize, {{x, 1}, {y, 1}}});
  auto s = solve_lexicographic(lp, {Sense::Minimize, {{y, 1}}});
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s[x], 1);
  EXPECT_EQ(s[y], 0);
}

TEST(Lp, LexicographicPropagatesInfeasibility) {
  LinearProgram lp;
  auto x = lp.add_variable("x");
  lp.add_constraint({{x, 1}}, Relation::GreaterEqual, 2);
  lp.add_constraint({{x, 1}}, Relation::LessEqual, 1);
  EXPECT_EQ(solve_lexicographic(lp, {Sense::Minimize, {{x, 1}}}).status, LpStatus::Infeasible);
}

TEST(Lp, TextDumpListsRowsAndBounds) {
  LinearProgram lp;
  auto x = lp.add_variable("x");
  auto y = lp.add_variable("y", false);
  lp.add_constraint({{x, make_rational(1, 2)}, {y, -1}}, Relation::GreaterEqual, 0, "row");
  lp.set_objective({Sense::Maximize, {{x, 1}}});
  auto text = to_lp_text(lp);
  EXPECT_NE(text.find("row: 1/2 x - y >= 0"), std::string::npos);
  EXPECT_NE(text.find("y free"), std::string::npos);
}

// Independent oracle: enumerate basic solutions of {rows, x >= 0}.
struct Row {
  std::vector<Rational> a;
  Relation rel;
  Rational b;
};

std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = n;
    for (std::size_t r = c; r < n; ++r)
      if (a[r][c] != 0) {
        p = r;
        break;
      }
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

bool feasible(const std::vector<Row>& rows, const std::vector<Rational>& x) {
  for (const auto& v : x)
    if (v < 0) return false;
  for (const auto& r : rows) {
    Rational lhs = 0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += r.a[j] * x[j];
    if (r.rel == Relation::LessEqual && lhs > r.b) return false;
    if (r.rel == Relation::GreaterEqual && lhs < r.b) return false;
    if (r.rel == Relation::Equal && lhs != r.b) return false;
  }
  return true;
}

/// Best objective over the vertices of {rows, x >= 0}; nullopt if there are none.
std::optional<Rational> best_vertex(const std::vector<Row>& rows, const std::vector<Rational>& c, std::size_t n) {
  std::vector<Row> all = rows;
  for (std::size_t j = 0; j < n; ++j) {
    Row r{std::vector<Rational>(n), Relation::Equal, 0};
    r.a[j] = 1;
    all.push_back(r);
  }
  std::optional<Rational> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == n) {
      std::vector<std::vector<Rational>> a;
      std::vector<Rational> b;
      for (auto i : pick) {
        a.push_back(all[i].a);
        b.push_back(all[i].b);
      }
      auto x = solve_square(a, b);
      if (!x || !feasible(rows, *x)) return;
      Rational v = 0;
      for (std::size_t j = 0; j < n; ++j) v += c[j] * (*x)[j];
      if (!best || v > *best) best = v;
      return;
    }
    for (std::size_t i = start; i < all.size(); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

TEST(Lp, AgreesWithVertexEnumeration) {
  std::mt19937_64 rng(7);
  auto coef = [&](int lo, int hi) { return make_rational(lo + static_cast<int>(rng() % (hi - lo + 1)), 1 + rng() % 3); };
  int counts[3] = {0, 0, 0};
  for (int iter = 0; iter < 400; ++iter) {
    const std::size_t n = 1 + rng() % 4, m = 1 + rng() % 6;
    std::vector<Row> rows;
    LinearProgram lp;
    for (std::size_t j = 0; j < n; ++j) lp.add_variable("x" + std::to_string(j));
    for (std::size_t i = 0; i < m; ++i) {
      Row r{{}, static_cast<Relation>(rng() % 3), coef(-3, 6)};
      LinearExpr e;
      for (std::size_t j = 0; j < n; ++j) {
        r.a.push_back(rng() % 3 == 0 ? Rational(0) : coef(-3, 3));
        e.push_back({j, r.a.back()});
      }
      lp.add_constraint(e, r.rel, r.b);
      rows.push_back(r);
    }
    std::vector<Rational> c;
    LinearExpr obj;
    for (std::size_t j = 0; j < n; ++j) {
      c.push_back(coef(-2, 3));
      obj.push_back({j, c.back()});
    }
    lp.set_objective({Sense::Maximize, obj});
    auto s = solve(lp);
    counts[static_cast<int>(s.status)]++;

    auto vertex = best_vertex(rows, c, n);
    if (!vertex) {
      EXPECT_EQ(s.status, LpStatus::Infeasible) << "iteration " << iter;
      continue;
    }
    // Unbounded iff some normalized recession direction improves the objective.
    std::vector<Row> cone;
    for (const auto& r : rows) cone.push_back({r.a, r.rel, 0});
    cone.push_back({std::vector<Rational>(n, Rational(1)), Relation::Equal, 1});
    auto ray = best_vertex(cone, c, n);
    if (ray && *ray > 0) {
      EXPECT_EQ(s.status, LpStatus::Unbounded) << "iteration " << iter;
    } else {
      ASSERT_EQ(s.status, LpStatus::Optimal) << "iteration " << iter;
      EXPECT_EQ(s.objective_value, *vertex) << "iteration " << iter;
      EXPECT_TRUE(satisfies(lp, s.values));
    }
  }
  EXPECT_GT(counts[0], 0);
  EXPECT_GT(counts[1], 0);
  EXPECT_GT(counts[2], 0);
}

}  // namespace
}  // namespace resil

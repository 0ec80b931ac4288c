#include "support/models.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

namespace resil {
namespace {

using testing::repair_gamble;
using testing::state_of;

TEST(Transform, RunningExampleHasTwelveStates) {
  auto mt = transform(repair_gamble(), 2);
  std::set<std::string> ids;
  for (std::size_t s = 0; s < mt.size(); ++s) ids.insert(mt.id(s));
  std::set<std::string> expected{"s_init",        "error",         "rep",           "op1",
                                 "op2",           "error#rep#0",   "error#rep#1",   "error#rep#2",
                                 "error#op1#1",   "error#op1#2",   "error#op2#1",   "error#op2#2"};
  EXPECT_EQ(ids, expected);
  EXPECT_EQ(mt.id(mt.initial()), "s_init");
}

TEST(Transform, BudgetExhaustionFallsBackToBaseStates) {
  auto mt = transform(repair_gamble(), 2);
  auto r2 = state_of(mt, "error#rep#2");
  const auto& beta = mt.choices(r2)[1];
  ASSERT_EQ(beta.action, "beta");
  std::map<std::string, Rational> succ;
  for (const auto& b : beta.branches) succ[mt.id(b.target)] = b.prob;
  EXPECT_EQ(succ.at("rep"), make_rational(1, 2));
  EXPECT_EQ(succ.at("op2"), make_rational(1, 2));
  auto r1 = state_of(mt, "error#rep#1");
  succ.clear();
  for (const auto& b : mt.choices(r1)[1].branches) succ[mt.id(b.target)] = b.prob;
  EXPECT_EQ(succ.at("error#rep#2"), make_rational(1, 2));
  EXPECT_EQ(succ.at("error#op2#2"), make_rational(1, 2));
}

TEST(Transform, CopiesMirrorBaseStates) {
  auto m = repair_gamble();
  auto mt = transform(m, 3);
  for (std::size_t s = 0; s < mt.size(); ++s) {
    const auto base = mt.base_of(s);
    ASSERT_EQ(mt.choices(s).size(), m.choices(base).size());
    for (std::size_t c = 0; c < mt.choices(s).size(); ++c) EXPECT_EQ(mt.choices(s)[c].action, m.choices(base)[c].action);
    EXPECT_EQ(mt.cost(s), m.cost(base));
    EXPECT_EQ(mt.payoff(s), m.payoff(base));
    if (mt.is_repair_copy(s)) {
      EXPECT_FALSE(m.is_err(base));
      EXPECT_LE(mt.tag(s)->cost, 3);
    }
  }
}

TEST(Transform, NoErrorsMeansNoCopies) {
  MdpBuilder b;
  b.state("x", StateKind::Operational, 1).state("y", StateKind::Repair, 2);
  b.choice("x", "go", {{"x", make_rational(1, 3)}, {"y", make_rational(2, 3)}}).edge("y", "back", "x").initial("x");
  auto m = b.build();
  for (std::int64_t r : {0, 1, 5}) {
    auto mt = transform(m, r);
    ASSERT_EQ(mt.size(), m.size());
    for (std::size_t s = 0; s < mt.size(); ++s) {
      EXPECT_FALSE(mt.is_repair_copy(s));
      EXPECT_EQ(mt.id(s), m.id(mt.base_of(s)));
    }
  }
}

TEST(Transform, RejectsNegativeBound) { EXPECT_THROW(transform(repair_gamble(), -1), std::invalid_argument); }

TEST(Transform, SizeStaysWithinProductBound) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto m = testing::random_model(rng);
    std::int64_t r = static_cast<std::int64_t>(rng() % 4);
    auto mt = transform(m, r);
    EXPECT_LE(mt.size(), m.size() + m.errors().size() * m.size() * static_cast<std::size_t>(r + 1));
  }
}

TEST(Paths, ProjectionReplacesCopies) {
  auto mt = transform(repair_gamble(), 2);
  PathRecord p{{"s_init", "error", "error#rep#0", "error#op2#1"}, {"a", "a", "beta"}};
  ASSERT_TRUE(is_valid_path(mt, p));
  auto q = project_path(mt, p);
  EXPECT_EQ(q, (PathRecord{{"s_init", "error", "rep", "op2"}, {"a", "a", "beta"}}));
  EXPECT_EQ(path_cost(mt, p), 1);
  EXPECT_EQ(path_cost(mt.base(), q), 1);
}

TEST(Paths, LiftingAddsCopies) {
  auto mt = transform(repair_gamble(), 2);
  PathRecord p{{"s_init", "error", "rep", "op2"}, {"a", "a", "beta"}};
  EXPECT_EQ(lift_path(mt, p), (PathRecord{{"s_init", "error", "error#rep#0", "error#op2#1"}, {"a", "a", "beta"}}));
}

TEST(Paths, PathsWithoutErrorsAreUnchanged) {
  MdpBuilder b;
  b.state("x", StateKind::Operational, 1).state("y", StateKind::Repair, 1).state("e", StateKind::Error, 0);
  b.edge("x", "go", "y").edge("y", "go", "x").edge("x", "fail", "e").edge("e", "fix", "x").initial("x");
  auto mt = transform(b.build(), 1);
  PathRecord p{{"x", "y", "x", "y"}, {"go", "go", "go"}};
  EXPECT_EQ(lift_path(mt, p), p);
  EXPECT_EQ(project_path(mt, p), p);
}

TEST(Paths, InvalidPathsAreRejected) {
  auto mt = transform(repair_gamble(), 2);
  EXPECT_THROW(project_path(mt, PathRecord{{"s_init", "rep"}, {"a"}}), std::invalid_argument);
  EXPECT_THROW(lift_path(mt, PathRecord{{"error", "rep"}, {"a"}}), std::invalid_argument);
  EXPECT_THROW(lift_path(mt, PathRecord{{"s_init", "error"}, {"b"}}), std::invalid_argument);
  EXPECT_FALSE(is_valid_path(mt, PathRecord{{"s_init"}, {"a"}}));
}

TEST(Paths, RandomRoundTripsPreserveCostAndPayoff) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    auto m = i % 4 == 0 ? repair_gamble() : testing::random_model(rng);
    auto mt = transform(m, static_cast<std::int64_t>(rng() % 4));
    auto p = testing::random_path(m, rng, rng() % (i % 2 ? 51 : 21));
    auto lifted = lift_path(mt, p);
    ASSERT_TRUE(is_valid_path(mt, lifted));
    EXPECT_EQ(project_path(mt, lifted), p);
    EXPECT_EQ(path_cost(mt, lifted), path_cost(m, p));
    for (std::size_t n = 1; n <= lifted.states.size(); ++n) {
      PathRecord prefix{{lifted.states.begin(), lifted.states.begin() + n},
                        {lifted.actions.begin(), lifted.actions.begin() + (n - 1)}};
      EXPECT_EQ(path_payoff(mt, prefix), path_payoff(m, project_path(mt, prefix)));
    }
  }
}

}  // namespace
}  // namespace resil

#include "support/models.hpp"

#include <gtest/gtest.h>

#include <random>

namespace resil {
namespace {

using testing::repair_gamble;

bool has_rule(const ValidationReport& r, const std::string& rule) {
  for (const auto& v : r.violations)
    if (v.rule == rule) return true;
  return false;
}

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(*parse_rational("6/8"), make_rational(3, 4));
  EXPECT_EQ(to_string(*parse_rational("6/8")), "3/4");
  EXPECT_EQ(*parse_rational("0.25"), make_rational(1, 4));
  EXPECT_EQ(*parse_rational("0.050"), make_rational(1, 20));
  EXPECT_EQ(*parse_rational("010/012"), make_rational(5, 6));
  EXPECT_EQ(*parse_rational("00"), 0);
  EXPECT_EQ(*parse_rational("-1.5"), make_rational(-3, 2));
  EXPECT_EQ(*parse_rational("2"), Rational(2));
  EXPECT_FALSE(parse_rational("1/0"));
  EXPECT_FALSE(parse_rational("abc"));
  EXPECT_FALSE(parse_rational("1/-2"));
  EXPECT_FALSE(parse_rational(""));
  EXPECT_EQ(to_decimal(make_rational(9, 10)), "0.900000");
  EXPECT_EQ(to_decimal(make_rational(2, 3), 3), "0.667");
}

TEST(Validate, RunningExampleIsValid) {
  auto m = repair_gamble();
  EXPECT_TRUE(validate_structure(m).ok());
  EXPECT_TRUE(validate_repair_assumption(m).ok());
}

TEST(Validate, ReportsBadDistributionSum) {
  auto m = repair_gamble();
  auto& beta = m.states[*m.find("rep")].choices[1];
  beta.branches[0].prob = make_rational(1, 2);
  beta.branches[1].prob = make_rational(1, 3);
  auto r = validate_structure(m);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].message, "distribution sums to 5/6");
  EXPECT_EQ(r.violations[0].where, (std::vector<std::string>{"rep", "beta"}));
}

TEST(Validate, ReportsTrapState) {
  MdpBuilder b;
  b.state("a", StateKind::Operational).state("b", StateKind::Operational).edge("a", "go", "b").initial("a");
  auto r = validate_structure(b.build());
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, "trap-state"));
  EXPECT_EQ(r.violations[0].message, "trap state: no enabled action");
}

TEST(Validate, ReportsNegativeRewardDanglingAndDuplicates) {
  MdpBuilder b;
  b.state("a", StateKind::Operational, -1).state("a", StateKind::Operational);
  b.edge("a", "go", "nowhere").edge("ghost", "go", "a").initial("missing");
  auto r = validate_structure(b.build());
  EXPECT_TRUE(has_rule(r, "negative-reward"));
  EXPECT_TRUE(has_rule(r, "dangling-reference"));
  EXPECT_TRUE(has_rule(r, "duplicate-state"));
}

TEST(Validate, ReportsNonPositiveProbabilityAndDuplicateAction) {
  MdpBuilder b;
  b.state("a", StateKind::Operational);
  b.choice("a", "go", {{"a", Rational(0)}, {"a", Rational(1)}}).edge("a", "go", "a").initial("a");
  auto r = validate_structure(b.build());
  EXPECT_TRUE(has_rule(r, "nonpositive-probability"));
  EXPECT_TRUE(has_rule(r, "duplicate-action"));
}

TEST(Validate, RepairLeadingBackToErrorViolatesAssumption) {
  auto m = repair_gamble();
  auto rep = *m.find("rep");
  m.states[rep].choices.push_back({"gamma", {{*m.find("error"), make_rational(1, 2)}, {rep, make_rational(1, 2)}}});
  ASSERT_TRUE(validate_structure(m).ok());
  auto r = validate_repair_assumption(m);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].where, (std::vector<std::string>{"error", "a", "rep"}));
}

TEST(Validate, ErrorsLeadingStraightToOperationalStatesAreFine) {
  MdpBuilder b;
  b.state("up", StateKind::Operational, 2).state("down", StateKind::Error, 1);
  b.choice("up", "run", {{"up", make_rational(9, 10)}, {"down", make_rational(1, 10)}});
  b.edge("down", "fix", "up").initial("up");
  auto m = b.build();
  EXPECT_TRUE(validate(m).ok());
}

TEST(Validate, KindPartitionIsExclusive) {
  auto m = repair_gamble();
  for (std::size_t s = 0; s < m.size(); ++s) {
    int count = (m.states[s].kind == StateKind::Operational) + (m.states[s].kind == StateKind::Error) +
                (m.states[s].kind == StateKind::Repair);
    EXPECT_EQ(count, 1);
    EXPECT_EQ(m.is_op(s), m.states[s].kind == StateKind::Operational);
  }
  EXPECT_EQ(m.payoff(*m.find("rep")), 0);
  EXPECT_EQ(m.cost(*m.find("rep")), 1);
  EXPECT_EQ(m.payoff(*m.find("op2")), 1);
  EXPECT_EQ(m.cost(*m.find("op2")), 0);
}

// Oracle: explore every path of length <= |S| from each error successor and
// look at the first error-or-operational state.
bool assumption_by_paths(const MdpWithRepair& m) {
  std::function<bool(std::size_t, std::size_t)> safe = [&](std::size_t s, std::size_t depth) {
    if (m.is_op(s)) return true;
    if (m.is_err(s)) return false;
    if (depth == 0) return true;
    for (const auto& c : m.choices(s))
      for (const auto& b : c.branches)
        if (!safe(b.target, depth - 1)) return false;
    return true;
  };
  for (std::size_t e = 0; e < m.size(); ++e) {
    if (!m.is_err(e)) continue;
    for (const auto& c : m.choices(e))
      for (const auto& b : c.branches)
        if (!safe(b.target, m.size())) return false;
  }
  return true;
}

TEST(Validate, AssumptionMatchesPathEnumeration) {
  std::mt19937_64 rng(11);
  int accepted = 0, rejected = 0;
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t n = 2 + rng() % 7;
    MdpBuilder b;
    for (std::size_t s = 0; s < n; ++s)
      b.state("s" + std::to_string(s), static_cast<StateKind>(rng() % 3), 0);
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t actions = 1 + rng() % 2;
      for (std::size_t a = 0; a < actions; ++a) {
        auto t1 = rng() % n, t2 = rng() % n;
        std::string from = "s" + std::to_string(s), act = "a" + std::to_string(a);
        if (t1 == t2) b.edge(from, act, "s" + std::to_string(t1));
        else b.choice(from, act, {{"s" + std::to_string(t1), make_rational(1, 2)}, {"s" + std::to_string(t2), make_rational(1, 2)}});
      }
    }
    b.initial("s0");
    auto m = b.build();
    ASSERT_TRUE(validate_structure(m).ok());
    bool ok = validate_repair_assumption(m).ok();
    EXPECT_EQ(ok, assumption_by_paths(m)) << "iteration " << iter;
    (ok ? accepted : rejected)++;
  }
  EXPECT_GT(accepted, 0);
  EXPECT_GT(rejected, 0);
}

TEST(Validate, DistributionsOfValidModelsSumToOneExactly) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto m = testing::random_model(rng);
    for (std::size_t s = 0; s < m.size(); ++s)
      for (const auto& c : m.choices(s)) {
        Rational sum = 0;
        for (const auto& b : c.branches) sum += b.prob;
        EXPECT_EQ(sum, 1);
      }
  }
}

}  // namespace
}  // namespace resil

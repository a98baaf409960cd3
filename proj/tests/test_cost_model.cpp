#include <gtest/gtest.h>

#include <random>

#include "hetjoin/cost_model.hpp"
#include "oracles.hpp"

using namespace hetjoin;

namespace {

std::uint64_t scan_pseudo_inverse(const CostFunction& f, double load, std::uint64_t limit) {
  std::uint64_t best = 0;
  for (std::uint64_t x = 0; x <= limit; ++x) {
    if (f.evaluate(x) <= load) best = x;
  }
  return best;
}

}  // namespace

TEST(Cost, Evaluate) {
  EXPECT_EQ(evaluate_cost(CostFunction::linear(4), 0), 0.0);
  EXPECT_EQ(evaluate_cost(CostFunction::linear(4), 100), 25.0);
  EXPECT_EQ(evaluate_cost(CostFunction::polynomial(2, 2), 10), 50.0);
}

TEST(Cost, PseudoInverseExamples) {
  EXPECT_EQ(pseudo_inverse(CostFunction::linear(3), 5), 15u);
  EXPECT_EQ(pseudo_inverse(CostFunction::polynomial(2, 1), 10), 3u);
  EXPECT_EQ(scan_pseudo_inverse(CostFunction::polynomial(2, 1), 10, 10), 3u);
  EXPECT_EQ(pseudo_inverse(CostFunction::linear(3), 0), 0u);
  EXPECT_EQ(pseudo_inverse(CostFunction::polynomial(1.5, 2), 0), 0u);
  EXPECT_THROW(pseudo_inverse(CostFunction::linear(3), -1), std::invalid_argument);
}

TEST(Cost, TableInterpolatesAndExtrapolates) {
  const auto t = CostFunction::table({{0, 0}, {10, 5}, {20, 20}}, 2.0);
  EXPECT_DOUBLE_EQ(t.evaluate(5), 2.5);
  EXPECT_DOUBLE_EQ(t.evaluate(15), 12.5);
  EXPECT_DOUBLE_EQ(t.evaluate(30), 35);
  EXPECT_EQ(t.pseudo_inverse(12.5), 15u);
  EXPECT_EQ(t.pseudo_inverse(12.4), 14u);
}

TEST(Cost, TableValidation) {
  EXPECT_THROW(CostFunction::table({{1, 0}, {2, 1}}, 2), std::invalid_argument);
  EXPECT_THROW(CostFunction::table({{0, 0}, {2, 1}, {2, 3}}, 2), std::invalid_argument);
  EXPECT_THROW(CostFunction::table({{0, 0}, {2, 1}, {4, 0.5}}, 2), std::invalid_argument);
  EXPECT_THROW(CostFunction::table({{0, 0}}, 2), std::invalid_argument);
  // Jump from slope 1 to slope 100 breaks the growth cap with a = 2.
  EXPECT_THROW(CostFunction::table({{0, 0}, {10, 10}, {11, 110}}, 2), std::invalid_argument);
  EXPECT_NO_THROW(CostFunction::table({{0, 0}, {10, 10}, {20, 30}}, 2));
  EXPECT_THROW(CostFunction::linear(0), std::invalid_argument);
  EXPECT_THROW(CostFunction::polynomial(0, 1), std::invalid_argument);
}

TEST(Cost, GaloisProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> load_dist(0, 500);
  const std::vector<CostFunction> fs{CostFunction::linear(1), CostFunction::linear(7), CostFunction::polynomial(2, 3),
                                     CostFunction::polynomial(1.5, 0.5), CostFunction::polynomial(3, 100),
                                     CostFunction::table({{0, 0}, {8, 4}, {16, 12}, {64, 100}}, 2)};
  for (const auto& f : fs) {
    double prev_load = -1;
    std::uint64_t prev = 0;
    std::vector<double> loads;
    for (int i = 0; i < 200; ++i) loads.push_back(load_dist(rng));
    std::sort(loads.begin(), loads.end());
    for (double load : loads) {
      const auto x = f.pseudo_inverse(load);
      EXPECT_LE(f.evaluate(x), load) << f.describe();
      EXPECT_GT(f.evaluate(x + 1), load) << f.describe();
      if (prev_load >= 0) {
        EXPECT_GE(x, prev);
      }
      prev_load = load;
      prev = x;
    }
  }
}

TEST(Cost, LinearPseudoInverseIsFloor) {
  for (std::int64_t w : {1, 2, 3, 7, 11}) {
    const auto f = CostFunction::linear(w);
    for (double load : {0.0, 0.3, 1.0, 2.5, 7.75, 1000.1}) {
      EXPECT_EQ(f.pseudo_inverse(load), static_cast<std::uint64_t>(std::floor(load * static_cast<double>(w))));
    }
  }
}

TEST(Fleet, Validation) {
  EXPECT_THROW(MachineFleet(std::vector<Machine>{}), std::invalid_argument);
  EXPECT_THROW(MachineFleet({{2, CostFunction::linear(1)}}), std::invalid_argument);
  const auto mixed = MachineFleet({{1, CostFunction::linear(1)}, {2, CostFunction::polynomial(2, 1)}});
  EXPECT_FALSE(mixed.all_linear());
  EXPECT_THROW(mixed.linear_weights(), std::invalid_argument);
  EXPECT_THROW(lp_norm(mixed, 2.0), std::invalid_argument);
}

TEST(Norm, WeightClassFleet) {
  std::vector<std::int64_t> w{4, 4, 3, 2, 2, 2};
  for (int i = 0; i < 11; ++i) w.push_back(1);
  const auto fleet = MachineFleet::linear(w);
  EXPECT_EQ(*exact_lp_norm(fleet, Rational(2)), Rational(8));
  EXPECT_NEAR(lp_norm(fleet, 2.0), 8.0, 1e-12);
  EXPECT_NEAR(lp_norm(fleet, 2.0), oracle::norm(w, 2), 1e-12);
}

TEST(Norm, SmallCases) {
  EXPECT_DOUBLE_EQ(lp_norm(MachineFleet::linear({7}), 2.0), 7.0);
  EXPECT_DOUBLE_EQ(lp_norm(MachineFleet::linear({7}), 0.5), 7.0);
  EXPECT_FALSE(exact_lp_norm(MachineFleet::linear({7}), Rational(3, 2)).has_value());
  EXPECT_NEAR(lp_norm(MachineFleet::linear({7}), Rational(3, 2)), 7.0, 1e-12);
  EXPECT_EQ(*exact_lp_norm(MachineFleet::linear({4}), Rational(3, 2)), Rational(4));
  EXPECT_NEAR(lp_norm(MachineFleet::linear({1, 1}), 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_FALSE(exact_lp_norm(MachineFleet::linear({1, 1}), Rational(2)).has_value());
}

TEST(Norm, NonincreasingInExponent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> w;
    const int p = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < p; ++i) w.push_back(1 + static_cast<std::int64_t>(rng() % 20));
    const auto fleet = MachineFleet::linear(w);
    double prev = lp_norm(fleet, 0.5);
    for (double e : {1.0, 1.5, 2.0, 3.0, 5.0}) {
      const double cur = lp_norm(fleet, e);
      EXPECT_LE(cur, prev * (1 + 1e-12));
      EXPECT_NEAR(cur, oracle::norm(w, e), 1e-9 * cur);
      prev = cur;
    }
  }
}

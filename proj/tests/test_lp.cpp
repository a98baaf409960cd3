#include <gtest/gtest.h>

#include "hetjoin/lp.hpp"

using namespace hetjoin;

TEST(Lp, SolveSquare) {
  std::vector<RationalVector> a{{Rational(2), Rational(1)}, {Rational(1), Rational(3)}};
  RationalVector b{Rational(5), Rational(10)};
  RationalVector x;
  ASSERT_TRUE(solve_square(a, b, x));
  EXPECT_EQ(x[0], Rational(1));
  EXPECT_EQ(x[1], Rational(3));

  std::vector<RationalVector> singular{{Rational(1), Rational(2)}, {Rational(2), Rational(4)}};
  EXPECT_FALSE(solve_square(singular, b, x));
}

TEST(Lp, VerticesOfSimplex) {
  // x + y <= 1 with x, y >= 0
  std::vector<LinearConstraint> cons{{{Rational(1), Rational(1)}, LinearConstraint::Sense::LessEqual, Rational(1)}};
  const auto v = enumerate_vertices(2, cons);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], (RationalVector{Rational(0), Rational(0)}));
  EXPECT_EQ(v[1], (RationalVector{Rational(0), Rational(1)}));
  EXPECT_EQ(v[2], (RationalVector{Rational(1), Rational(0)}));
}

TEST(Lp, UnboundedPolyhedronVertices) {
  // x >= 1, y >= 1: a single vertex (1, 1).
  std::vector<LinearConstraint> cons{{{Rational(1), Rational(0)}, LinearConstraint::Sense::GreaterEqual, Rational(1)},
                                     {{Rational(0), Rational(1)}, LinearConstraint::Sense::GreaterEqual, Rational(1)}};
  const auto v = enumerate_vertices(2, cons);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (RationalVector{Rational(1), Rational(1)}));
}

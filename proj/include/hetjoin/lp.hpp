#pragma once

#include <cstddef>
#include <vector>

#include "hetjoin/rational.hpp"

namespace hetjoin {

using RationalVector = std::vector<Rational>;

struct LinearConstraint {
  enum class Sense { LessEqual, GreaterEqual };
  RationalVector coeffs;
  Sense sense = Sense::LessEqual;
  Rational rhs = 0;
};

bool satisfies(const LinearConstraint& c, const RationalVector& x);

// All vertices of the polyhedron { x in R^dim : x >= 0, constraints } computed
// exactly by enumerating every choice of `dim` linearly independent tight
// constraints. Result is deduplicated and sorted lexicographically. Meant for
// the tiny systems that arise from query hypergraphs (dim and rows <= ~10).
std::vector<RationalVector> enumerate_vertices(std::size_t dim,
                                               const std::vector<LinearConstraint>& constraints);

// Solves the square system A x = b. Returns false when A is singular.
bool solve_square(std::vector<RationalVector> a, RationalVector b, RationalVector& x);

}  // namespace hetjoin

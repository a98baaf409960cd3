#include "hetjoin/lp.hpp"

#include <algorithm>
#include <stdexcept>

namespace hetjoin {

bool satisfies(const LinearConstraint& c, const RationalVector& x) {
  Rational lhs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) lhs += c.coeffs[i] * x[i];
  return c.sense == LinearConstraint::Sense::LessEqual ? lhs <= c.rhs : lhs >= c.rhs;
}

bool solve_square(std::vector<RationalVector> a, RationalVector b, RationalVector& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  x.assign(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

namespace {

// Calls fn(indices) for every size-`choose` subset of [0, total).
template <typename Fn>
void for_each_subset(std::size_t total, std::size_t choose, Fn&& fn) {
  if (choose > total) return;
  std::vector<std::size_t> idx(choose);
  for (std::size_t i = 0; i < choose; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    std::size_t i = choose;
    while (i > 0 && idx[i - 1] == total - choose + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < choose; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::vector<RationalVector> enumerate_vertices(std::size_t dim,
                                               const std::vector<LinearConstraint>& constraints) {
  for (const auto& c : constraints) {
    if (c.coeffs.size() != dim) throw std::invalid_argument("enumerate_vertices: coefficient arity mismatch");
  }
  std::vector<RationalVector> vertices;
  // Tight set = (variables pinned to zero) + (constraints at equality); the two
  // sizes add up to dim.
  for (std::size_t zeros = 0; zeros <= dim; ++zeros) {
    const std::size_t rows = dim - zeros;
    if (rows > constraints.size()) continue;
    for_each_subset(dim, zeros, [&](const std::vector<std::size_t>& zero_vars) {
      std::vector<std::size_t> free_vars;
      for (std::size_t i = 0, z = 0; i < dim; ++i) {
        if (z < zero_vars.size() && zero_vars[z] == i) {
          ++z;
        } else {
          free_vars.push_back(i);
        }
      }
      for_each_subset(constraints.size(), rows, [&](const std::vector<std::size_t>& tight) {
        std::vector<RationalVector> a(rows, RationalVector(rows));
        RationalVector b(rows);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t f = 0; f < rows; ++f) a[r][f] = constraints[tight[r]].coeffs[free_vars[f]];
          b[r] = constraints[tight[r]].rhs;
        }
        RationalVector sol;
        if (!solve_square(std::move(a), std::move(b), sol)) return;
        RationalVector x(dim, Rational(0));
        for (std::size_t f = 0; f < rows; ++f) {
          if (sol[f] < 0) return;
          x[free_vars[f]] = sol[f];
        }
        for (const auto& c : constraints) {
          if (!satisfies(c, x)) return;
        }
        vertices.push_back(std::move(x));
      });
    });
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  return vertices;
}

}  // namespace hetjoin

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetjoin/partition.hpp"
#include "hetjoin/rational.hpp"

namespace hetjoin {

// Exponent of the smallest power of two >= side; side must be positive.
int round_side_exponent(double side);
// 2^round_side_exponent(side).
double round_side(double side);

// Rounds every side of every rect; rects with a nonpositive side come back
// with an empty exponent list (they will not be used).
std::vector<std::vector<int>> round_sides(const std::vector<Hyperrectangle>& rects);

// Node of the merge tree. Leaves are machines; an internal node tiles its
// children on a grid of grid[i] cells along dimension i, child q sitting at
// multi-index (q mod grid[0], (q / grid[0]) mod grid[1], ...).
struct MergeNode {
  std::vector<int> shape;  // side exponents, unscaled side = 2^shape[i]
  int machine = 0;         // > 0 for leaves
  std::vector<std::size_t> children;
  std::vector<int> grid;

  bool is_leaf() const { return machine > 0; }
};

struct MachinePlacement {
  int machine = 0;
  bool used = false;
  std::vector<int> rounded;  // side exponents after rounding; empty when never packed
  // Half-open box [lo, hi) after scaling; all zeros when unused. May extend past n.
  RationalVector lo;
  RationalVector hi;
  // Integer grid points covered: [grid_lo, grid_hi) clipped to [0, n).
  std::vector<std::int64_t> grid_lo;
  std::vector<std::int64_t> grid_hi;

  bool owns_grid_points() const;
  bool grid_contains(std::span<const std::int64_t> point) const;
  // Exact side lengths hi - lo.
  RationalVector sides() const;
};

class Placement {
 public:
  std::uint64_t n = 0;
  std::size_t k = 0;
  std::vector<MachinePlacement> machines;  // in input order
  RationalVector scale;                    // f_i >= 1
  std::vector<int> root_shape;             // exponents of R before scaling
  std::vector<MergeNode> nodes;
  std::size_t root = 0;
  std::vector<std::string> trace;

  // Machine id whose box holds the grid point, found by descending the merge
  // tree. Throws std::logic_error if the tree and the boxes disagree.
  int locate(std::span<const std::int64_t> point) const;

  Rational root_volume() const;  // unscaled volume of R
  Rational scale_product() const;
  const MachinePlacement& for_machine(int id) const;
  std::size_t used_count() const;
};

// Packs the boxes into a cover of [0, n)^k: power-of-two rounding, bucket
// merging from small to large, pairwise merging of the top bucket along its
// smallest side, and scaling of the final box to reach n on every side.
// Throws std::invalid_argument when two rounded shapes are not componentwise
// comparable.
Placement pack(const std::vector<Hyperrectangle>& rects, std::uint64_t n);

}  // namespace hetjoin

namespace hetjoin {

// Structural checks on a placement, returning one message per failure:
// box sides match the rounded-and-scaled shapes, the merge tree reproduces
// every box, clipped boxes are pairwise disjoint and cover [0, n)^k, and
// locate agrees with the boxes on a sample of points.
std::vector<std::string> check_placement(const Placement& placement);

}  // namespace hetjoin

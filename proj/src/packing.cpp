#include "hetjoin/packing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hetjoin {

namespace {

std::string shape_str(const std::vector<int>& exps) {
  std::ostringstream out;
  out << "2^(";
  for (std::size_t i = 0; i < exps.size(); ++i) out << (i ? "," : "") << exps[i];
  out << ")";
  return out.str();
}

std::string ids_str(const std::vector<int>& ids) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? " " : "") << ids[i];
  out << "]";
  return out.str();
}

int exp_sum(const std::vector<int>& e) { return std::accumulate(e.begin(), e.end(), 0); }

bool componentwise_le(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

struct Bucket {
  std::vector<int> shape;
  std::vector<std::size_t> items;  // node indices
};

void collect_machines(const std::vector<MergeNode>& nodes, std::size_t node, std::vector<int>& out) {
  if (nodes[node].is_leaf()) {
    out.push_back(nodes[node].machine);
    return;
  }
  for (auto c : nodes[node].children) collect_machines(nodes, c, out);
}

std::size_t merge_nodes(std::vector<MergeNode>& nodes, std::vector<std::size_t> children,
                        const std::vector<int>& child_shape, const std::vector<int>& target_shape) {
  MergeNode node;
  node.shape = target_shape;
  node.children = std::move(children);
  for (std::size_t i = 0; i < target_shape.size(); ++i) node.grid.push_back(1 << (target_shape[i] - child_shape[i]));
  nodes.push_back(std::move(node));
  return nodes.size() - 1;
}

// Assigns unscaled offsets to every leaf below `node`.
void layout(const std::vector<MergeNode>& nodes, std::size_t node, const RationalVector& origin,
            std::vector<RationalVector>& leaf_origin, const std::vector<std::size_t>& leaf_slot) {
  const auto& nd = nodes[node];
  if (nd.is_leaf()) {
    leaf_origin[leaf_slot[node]] = origin;
    return;
  }
  const std::size_t k = nd.shape.size();
  for (std::size_t q = 0; q < nd.children.size(); ++q) {
    const auto& child = nodes[nd.children[q]];
    RationalVector child_origin = origin;
    std::size_t rest = q;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t idx = rest % static_cast<std::size_t>(nd.grid[i]);
      rest /= static_cast<std::size_t>(nd.grid[i]);
      child_origin[i] += Rational(static_cast<long long>(idx)) * pow2(child.shape[i]);
    }
    layout(nodes, nd.children[q], child_origin, leaf_origin, leaf_slot);
  }
}

std::int64_t clip(long long v, std::uint64_t n) {
  return std::clamp<long long>(v, 0, static_cast<long long>(n));
}

}  // namespace

int round_side_exponent(double side) { return ceil_log2(side); }

double round_side(double side) { return std::ldexp(1.0, round_side_exponent(side)); }

std::vector<std::vector<int>> round_sides(const std::vector<Hyperrectangle>& rects) {
  std::vector<std::vector<int>> out;
  for (const auto& r : rects) {
    const bool usable = std::all_of(r.sides.begin(), r.sides.end(), [](double s) { return s > 0; });
    std::vector<int> exps;
    if (usable) {
      for (double s : r.sides) exps.push_back(round_side_exponent(s));
    }
    out.push_back(std::move(exps));
  }
  return out;
}

bool MachinePlacement::owns_grid_points() const {
  for (std::size_t i = 0; i < grid_lo.size(); ++i) {
    if (grid_lo[i] >= grid_hi[i]) return false;
  }
  return used && !grid_lo.empty();
}

bool MachinePlacement::grid_contains(std::span<const std::int64_t> point) const {
  if (!used) return false;
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (point[i] < grid_lo[i] || point[i] >= grid_hi[i]) return false;
  }
  return true;
}

RationalVector MachinePlacement::sides() const {
  RationalVector out;
  for (std::size_t i = 0; i < lo.size(); ++i) out.push_back(hi[i] - lo[i]);
  return out;
}

Rational Placement::root_volume() const { return pow2(exp_sum(root_shape)); }

Rational Placement::scale_product() const {
  Rational p = 1;
  for (const auto& f : scale) p *= f;
  return p;
}

const MachinePlacement& Placement::for_machine(int id) const {
  for (const auto& m : machines) {
    if (m.machine == id) return m;
  }
  throw std::out_of_range("no placement for machine " + std::to_string(id));
}

std::size_t Placement::used_count() const {
  return static_cast<std::size_t>(std::count_if(machines.begin(), machines.end(), [](const auto& m) { return m.used; }));
}

int Placement::locate(std::span<const std::int64_t> point) const {
  if (point.size() != k) throw std::invalid_argument("locate: point has wrong dimension");
  RationalVector unscaled(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (point[i] < 0 || static_cast<std::uint64_t>(point[i]) >= n) {
      throw std::invalid_argument("locate: point outside the grid");
    }
    unscaled[i] = Rational(point[i]) / scale[i];
  }
  RationalVector origin(k, Rational(0));
  std::size_t node = root;
  while (!nodes[node].is_leaf()) {
    const auto& nd = nodes[node];
    std::size_t q = 0;
    std::size_t stride = 1;
    RationalVector child_origin = origin;
    const auto& child_shape = nodes[nd.children.front()].shape;
    for (std::size_t i = 0; i < k; ++i) {
      const Rational side = pow2(child_shape[i]);
      const Rational cell = (unscaled[i] - origin[i]) / side;
      // floor of a nonnegative rational
      const BigInt idx = boost::multiprecision::numerator(cell) / boost::multiprecision::denominator(cell);
      if (cell < 0 || idx >= nd.grid[i]) throw std::logic_error("locate: point escaped its merge node");
      q += idx.convert_to<std::size_t>() * stride;
      stride *= static_cast<std::size_t>(nd.grid[i]);
      child_origin[i] += Rational(idx) * side;
    }
    origin = std::move(child_origin);
    node = nd.children[q];
  }
  const int id = nodes[node].machine;
  if (!for_machine(id).grid_contains(point)) {
    throw std::logic_error("locate: merge tree and machine boxes disagree");
  }
  return id;
}

Placement pack(const std::vector<Hyperrectangle>& rects, std::uint64_t n) {
  if (rects.empty()) throw std::invalid_argument("pack: no hyperrectangles");
  if (n < 1) throw std::invalid_argument("pack: n must be positive");
  Placement out;
  out.n = n;
  out.k = rects.front().sides.size();
  const std::size_t k = out.k;
  for (const auto& r : rects) {
    if (r.sides.size() != k) throw std::invalid_argument("pack: hyperrectangles of different dimension");
  }

  const auto rounded = round_sides(rects);
  std::vector<std::size_t> leaf_slot;  // node index -> position in rects
  std::vector<Bucket> buckets;
  for (std::size_t c = 0; c < rects.size(); ++c) {
    MachinePlacement mp;
    mp.machine = rects[c].machine;
    mp.rounded = rounded[c];
    mp.lo.assign(k, Rational(0));
    mp.hi.assign(k, Rational(0));
    mp.grid_lo.assign(k, 0);
    mp.grid_hi.assign(k, 0);
    out.machines.push_back(std::move(mp));
    if (rounded[c].empty()) {
      out.trace.push_back("unused: machine " + std::to_string(rects[c].machine) + " has a zero side");
      continue;
    }
    std::ostringstream line;
    line << "round: machine " << rects[c].machine << " (";
    for (std::size_t i = 0; i < k; ++i) line << (i ? "," : "") << rects[c].sides[i];
    line << ") -> " << shape_str(rounded[c]);
    out.trace.push_back(line.str());

    out.nodes.push_back(MergeNode{rounded[c], rects[c].machine, {}, {}});
    leaf_slot.resize(out.nodes.size());
    leaf_slot.back() = c;
    auto it = std::find_if(buckets.begin(), buckets.end(), [&](const Bucket& b) { return b.shape == rounded[c]; });
    if (it == buckets.end()) {
      buckets.push_back(Bucket{rounded[c], {}});
      it = buckets.end() - 1;
    }
    it->items.push_back(out.nodes.size() - 1);
  }
  if (buckets.empty()) throw std::invalid_argument("pack: every hyperrectangle has a zero side");

  std::stable_sort(buckets.begin(), buckets.end(),
                   [](const Bucket& a, const Bucket& b) { return exp_sum(a.shape) < exp_sum(b.shape); });
  for (std::size_t t = 0; t + 1 < buckets.size(); ++t) {
    if (!componentwise_le(buckets[t].shape, buckets[t + 1].shape) ||
        exp_sum(buckets[t].shape) == exp_sum(buckets[t + 1].shape)) {
      throw std::invalid_argument("pack: rounded shapes " + shape_str(buckets[t].shape) + " and " +
                                  shape_str(buckets[t + 1].shape) + " are not ordered; cannot merge");
    }
  }
  for (const auto& b : buckets) {
    std::vector<int> ids;
    for (auto node : b.items) ids.push_back(out.nodes[node].machine);
    out.trace.push_back("bucket " + shape_str(b.shape) + ": " + std::to_string(b.items.size()) + " " + ids_str(ids));
  }

  std::vector<std::size_t> discarded;
  // Small-to-large merging between consecutive buckets.
  for (std::size_t t = 0; t + 1 < buckets.size(); ++t) {
    const int gap = exp_sum(buckets[t + 1].shape) - exp_sum(buckets[t].shape);
    const std::size_t needed = gap < 62 ? (std::size_t{1} << gap) : std::numeric_limits<std::size_t>::max();
    auto& items = buckets[t].items;
    std::size_t taken = 0;
    while (items.size() - taken >= needed) {
      std::vector<std::size_t> group(items.begin() + static_cast<std::ptrdiff_t>(taken),
                                     items.begin() + static_cast<std::ptrdiff_t>(taken + needed));
      taken += needed;
      const auto merged = merge_nodes(out.nodes, group, buckets[t].shape, buckets[t + 1].shape);
      buckets[t + 1].items.push_back(merged);
      std::vector<int> ids;
      collect_machines(out.nodes, merged, ids);
      out.trace.push_back("merge " + std::to_string(needed) + " x " + shape_str(buckets[t].shape) + " -> " +
                          shape_str(buckets[t + 1].shape) + " machines " + ids_str(ids));
    }
    for (std::size_t i = taken; i < items.size(); ++i) discarded.push_back(items[i]);
  }

  // Pairwise merging of the top bucket along its smallest side.
  std::vector<int> shape = buckets.back().shape;
  std::vector<std::size_t> level = buckets.back().items;
  while (level.size() > 1) {
    // Smallest side; ties go to the highest dimension index.
    std::size_t dim = 0;
    for (std::size_t i = 1; i < k; ++i) {
      if (shape[i] <= shape[dim]) dim = i;
    }
    std::vector<int> next_shape = shape;
    ++next_shape[dim];
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      next.push_back(merge_nodes(out.nodes, {level[i], level[i + 1]}, shape, next_shape));
    }
    if (level.size() % 2 == 1) discarded.push_back(level.back());
    out.trace.push_back("pair " + std::to_string(level.size()) + " x " + shape_str(shape) + " along dim " +
                        std::to_string(dim) + " -> " + std::to_string(next.size()) + " x " + shape_str(next_shape));
    shape = std::move(next_shape);
    level = std::move(next);
  }
  out.root = level.front();
  out.root_shape = shape;

  for (auto node : discarded) {
    std::vector<int> ids;
    collect_machines(out.nodes, node, ids);
    out.trace.push_back("unused: leftover " + shape_str(out.nodes[node].shape) + " machines " + ids_str(ids));
  }

  for (std::size_t i = 0; i < k; ++i) {
    const Rational side = pow2(out.root_shape[i]);
    const Rational ratio = Rational(n) / side;
    out.scale.push_back(ratio > 1 ? ratio : Rational(1));
  }
  {
    std::ostringstream line;
    line << "root " << shape_str(out.root_shape) << " scale (";
    for (std::size_t i = 0; i < k; ++i) line << (i ? "," : "") << to_string(out.scale[i]);
    line << ")";
    out.trace.push_back(line.str());
  }

  std::vector<RationalVector> leaf_origin(rects.size());
  layout(out.nodes, out.root, RationalVector(k, Rational(0)), leaf_origin, leaf_slot);
  for (std::size_t c = 0; c < rects.size(); ++c) {
    if (leaf_origin[c].empty()) continue;
    auto& mp = out.machines[c];
    mp.used = true;
    for (std::size_t i = 0; i < k; ++i) {
      mp.lo[i] = leaf_origin[c][i] * out.scale[i];
      mp.hi[i] = (leaf_origin[c][i] + pow2(mp.rounded[i])) * out.scale[i];
      mp.grid_lo[i] = clip(ceil_to_int(mp.lo[i]), n);
      mp.grid_hi[i] = clip(ceil_to_int(mp.hi[i]), n);
    }
  }
  return out;
}

}  // namespace hetjoin

namespace hetjoin {

std::vector<std::string> check_placement(const Placement& p) {
  std::vector<std::string> failures;
  const std::size_t k = p.k;
  if (p.scale.size() != k || p.root_shape.size() != k) {
    failures.push_back("scale or root shape has the wrong dimension");
    return failures;
  }
  if (p.nodes.empty() || p.root >= p.nodes.size()) {
    failures.push_back("merge tree is empty");
    return failures;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const Rational expected = std::max(Rational(p.n) / pow2(p.root_shape[i]), Rational(1));
    if (p.scale[i] != expected) failures.push_back("scale factor " + std::to_string(i) + " is not max(n/|R_i|, 1)");
  }

  // Rebuild leaf offsets from the tree.
  std::vector<std::size_t> slot(p.nodes.size(), 0);
  for (std::size_t node = 0; node < p.nodes.size(); ++node) {
    if (!p.nodes[node].is_leaf()) continue;
    bool found = false;
    for (std::size_t c = 0; c < p.machines.size(); ++c) {
      if (p.machines[c].machine == p.nodes[node].machine) {
        slot[node] = c;
        found = true;
      }
    }
    if (!found) failures.push_back("merge tree leaf names unknown machine " + std::to_string(p.nodes[node].machine));
  }
  if (!failures.empty()) return failures;
  std::vector<RationalVector> origin(p.machines.size());
  try {
    layout(p.nodes, p.root, RationalVector(k, Rational(0)), origin, slot);
  } catch (const std::exception& e) {
    failures.push_back(std::string("merge tree layout failed: ") + e.what());
    return failures;
  }

  for (std::size_t c = 0; c < p.machines.size(); ++c) {
    const auto& m = p.machines[c];
    const std::string who = "machine " + std::to_string(m.machine);
    if (m.used != !origin[c].empty()) {
      failures.push_back(who + ": used flag disagrees with the merge tree");
      continue;
    }
    if (!m.used) continue;
    if (m.rounded.size() != k || m.lo.size() != k || m.hi.size() != k || m.grid_lo.size() != k ||
        m.grid_hi.size() != k) {
      failures.push_back(who + ": box has the wrong dimension");
      continue;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const Rational lo = origin[c][i] * p.scale[i];
      const Rational hi = (origin[c][i] + pow2(m.rounded[i])) * p.scale[i];
      if (m.lo[i] != lo || m.hi[i] != hi) failures.push_back(who + ": box differs from the merge tree");
      if (m.grid_lo[i] != clip(ceil_to_int(lo), p.n) || m.grid_hi[i] != clip(ceil_to_int(hi), p.n)) {
        failures.push_back(who + ": grid range differs from the scaled box");
      }
    }
  }
  if (!failures.empty()) return failures;

  // Exact cover: clipped boxes pairwise disjoint and volumes summing to n^k.
  BigInt covered = 0;
  for (std::size_t a = 0; a < p.machines.size(); ++a) {
    const auto& ma = p.machines[a];
    if (!ma.owns_grid_points()) continue;
    BigInt vol = 1;
    for (std::size_t i = 0; i < k; ++i) vol *= ma.grid_hi[i] - ma.grid_lo[i];
    covered += vol;
    for (std::size_t b = a + 1; b < p.machines.size(); ++b) {
      const auto& mb = p.machines[b];
      if (!mb.owns_grid_points()) continue;
      bool overlap = true;
      for (std::size_t i = 0; i < k && overlap; ++i) {
        overlap = std::max(ma.grid_lo[i], mb.grid_lo[i]) < std::min(ma.grid_hi[i], mb.grid_hi[i]);
      }
      if (overlap) {
        failures.push_back("machines " + std::to_string(ma.machine) + " and " + std::to_string(mb.machine) +
                           " overlap");
      }
    }
  }
  BigInt grid = 1;
  for (std::size_t i = 0; i < k; ++i) grid *= p.n;
  if (covered != grid) failures.push_back("boxes cover " + covered.str() + " of " + grid.str() + " grid points");
  if (!failures.empty()) return failures;

  // locate against the boxes on corners and a deterministic sample.
  std::vector<std::int64_t> point(k);
  std::uint64_t state = 0x2545f4914f6cdd1dULL;
  for (int s = 0; s < 512; ++s) {
    for (std::size_t i = 0; i < k; ++i) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      if (s < 2) {
        point[i] = s == 0 ? 0 : static_cast<std::int64_t>(p.n - 1);
      } else {
        point[i] = static_cast<std::int64_t>((state >> 17) % p.n);
      }
    }
    try {
      p.locate(point);
    } catch (const std::exception& e) {
      failures.push_back(std::string("locate failed: ") + e.what());
      break;
    }
  }
  return failures;
}

}  // namespace hetjoin

#include "hetjoin/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hetjoin {

namespace {

// Slack absorbing rounding in sums that should reach exactly 1.
constexpr double kConditionSlack = 1e-12;

double pow_u64(std::uint64_t base, std::size_t e) {
  double out = 1;
  for (std::size_t i = 0; i < e; ++i) out *= static_cast<double>(base);
  return out;
}

}  // namespace

InstanceSchema InstanceSchema::uniform(const Query& q, std::uint64_t n, std::uint64_t m) {
  return with_cardinalities(q, n, std::vector<std::uint64_t>(q.num_atoms(), m));
}

InstanceSchema InstanceSchema::with_cardinalities(const Query& q, std::uint64_t n, std::vector<std::uint64_t> m) {
  if (m.size() != q.num_atoms()) throw std::invalid_argument("one cardinality per atom required");
  InstanceSchema s;
  s.n = n;
  s.cardinalities = std::move(m);
  for (const auto& a : q.atoms()) s.arities.push_back(a.arity());
  return s;
}

void InstanceSchema::validate() const {
  if (n < 2) throw std::invalid_argument("domain size n must be at least 2");
  if (cardinalities.size() != arities.size()) throw std::invalid_argument("schema arity/cardinality mismatch");
  for (std::size_t j = 0; j < cardinalities.size(); ++j) {
    if (cardinalities[j] < 1) throw std::invalid_argument("relation cardinality must be at least 1");
    if (static_cast<double>(cardinalities[j]) > pow_u64(n, arities[j])) {
      throw std::invalid_argument("relation cardinality exceeds n^arity");
    }
  }
}

std::uint64_t InstanceSchema::bits_per_value() const {
  std::uint64_t bits = 0;
  while ((std::uint64_t{1} << bits) < n) ++bits;
  return bits;
}

std::uint64_t InstanceSchema::encoded_bits(std::size_t j) const {
  return cardinalities.at(j) * arities.at(j) * bits_per_value();
}

double InstanceSchema::log2n() const { return std::log2(static_cast<double>(n)); }

bool InstanceSchema::is_uniform() const {
  return std::adjacent_find(cardinalities.begin(), cardinalities.end(), std::not_equal_to<>()) ==
         cardinalities.end();
}

std::uint64_t InstanceSchema::uniform_cardinality() const {
  if (cardinalities.empty() || !is_uniform()) {
    throw std::invalid_argument("operation requires uniform relation cardinalities");
  }
  return cardinalities.front();
}

std::vector<double> InstanceSchema::cardinalities_as_double() const {
  std::vector<double> out;
  for (auto m : cardinalities) out.push_back(static_cast<double>(m));
  return out;
}

double upper_bound_linear(const InstanceSchema& schema, const MachineFleet& fleet, const VertexCover& cover) {
  const double m = static_cast<double>(schema.uniform_cardinality());
  return m * schema.log2n() / lp_norm(fleet, cover.total);
}

double lower_bound_linear(const InstanceSchema& schema, const MachineFleet& fleet, const EdgePacking& packing) {
  const double m = static_cast<double>(schema.uniform_cardinality());
  return m / lp_norm(fleet, packing.total);
}

bool general_feasible(const InstanceSchema& schema, const MachineFleet& fleet, double u, double load) {
  const double m = static_cast<double>(schema.uniform_cardinality());
  double sum = 0;
  for (const auto& machine : fleet.machines()) {
    const double bits = static_cast<double>(machine.cost.pseudo_inverse(load));
    if (bits >= m) return true;  // one machine alone saturates the condition
    sum += std::pow(bits / m, u);
  }
  return sum >= 1.0 - kConditionSlack;
}

double lower_bound_general(const InstanceSchema& schema, const MachineFleet& fleet, const EdgePacking& packing,
                           double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  const double u = to_double(packing.total);
  const std::uint64_t m = schema.uniform_cardinality();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& machine : fleet.machines()) hi = std::min(hi, machine.cost.evaluate(m));
  if (!general_feasible(schema, fleet, u, hi)) throw std::logic_error("general bound: L_max is not feasible");
  double lo = 0;
  while (hi - lo > tol * hi) {
    const double mid = lo + (hi - lo) / 2;
    if (general_feasible(schema, fleet, u, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // The condition only depends on the integers g*_c(L); the smallest load with
  // the same integers is max_c g_c(g*_c(hi)).
  double snapped = 0;
  for (const auto& machine : fleet.machines()) {
    snapped = std::max(snapped, machine.cost.evaluate(machine.cost.pseudo_inverse(hi)));
  }
  if (snapped > 0 && snapped <= hi && general_feasible(schema, fleet, u, snapped)) return snapped;
  return hi;
}

namespace {

struct PackingChoice {
  std::size_t index = 0;
  double log_value = 0;
};

PackingChoice best_packing(const std::vector<RationalVector>& vertices, std::span<const double> log_ratios,
                           const std::vector<double>& totals, const std::vector<std::vector<double>>& as_double) {
  PackingChoice best{0, std::numeric_limits<double>::infinity()};
  bool found = false;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    double value = 0;
    for (std::size_t j = 0; j < log_ratios.size(); ++j) value += as_double[v][j] * log_ratios[j];
    if (!found) {
      best = {v, value};
      found = true;
      continue;
    }
    const double eps = 1e-12 * std::max(1.0, std::max(std::abs(value), std::abs(best.log_value)));
    if (value < best.log_value - eps) {
      best = {v, value};
    } else if (std::abs(value - best.log_value) <= eps && totals[v] >= totals[best.index]) {
      // Vertices are sorted ascending, so on equal totals the later one is the
      // lexicographic maximum: weight goes to the earliest atom.
      best = {v, value};
    }
  }
  return best;
}

struct VertexCache {
  std::vector<double> totals;
  std::vector<std::vector<double>> as_double;

  explicit VertexCache(const std::vector<RationalVector>& vertices) {
    for (const auto& v : vertices) {
      std::vector<double> d;
      Rational t = 0;
      for (const auto& x : v) {
        d.push_back(to_double(x));
        t += x;
      }
      as_double.push_back(std::move(d));
      totals.push_back(to_double(t));
    }
  }
};

std::vector<double> log_ratios(double budget, std::span<const double> sizes) {
  std::vector<double> out;
  for (double s : sizes) out.push_back(std::log(budget / s));
  return out;
}

}  // namespace

EdgePacking per_machine_edge_packing(const std::vector<RationalVector>& vertices, double budget,
                                     std::span<const double> sizes) {
  if (!(budget > 0)) throw std::invalid_argument("per-machine packing: budget must be positive");
  if (vertices.empty()) throw std::invalid_argument("per-machine packing: empty polytope");
  const VertexCache cache(vertices);
  const auto ratios = log_ratios(budget, sizes);
  const auto choice = best_packing(vertices, ratios, cache.totals, cache.as_double);
  return make_packing(vertices[choice.index]);
}

EdgePacking per_machine_edge_packing(const Query& q, double budget, const InstanceSchema& schema) {
  const auto sizes = schema.cardinalities_as_double();
  return per_machine_edge_packing(edge_packing_vertices(q), budget, sizes);
}

std::string_view to_string(BoundMethod method) {
  switch (method) {
    case BoundMethod::EqualLinear: return "equal-linear";
    case BoundMethod::EqualGeneral: return "equal-general";
    case BoundMethod::Unequal: return "unequal";
  }
  return "unknown";
}

double unequal_condition_value(const std::vector<RationalVector>& vertices, const MachineFleet& fleet,
                               std::span<const double> sizes, double load) {
  const VertexCache cache(vertices);
  double sum = 0;
  for (auto w : fleet.linear_weights()) {
    const auto ratios = log_ratios(load * static_cast<double>(w), sizes);
    sum += std::exp(best_packing(vertices, ratios, cache.totals, cache.as_double).log_value);
  }
  return sum;
}

BoundReport lower_bound_unequal(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  schema.validate();
  const auto weights = fleet.linear_weights();
  const auto sizes = schema.cardinalities_as_double();
  const auto vertices = edge_packing_vertices(q);

  const double max_m = *std::max_element(sizes.begin(), sizes.end());
  double weight_sum = 0;
  for (auto w : weights) weight_sum += static_cast<double>(w);
  const double max_w = static_cast<double>(*std::max_element(weights.begin(), weights.end()));

  BoundReport report;
  report.method = BoundMethod::Unequal;
  report.bracket = LoadBracket{max_m / weight_sum, max_m / max_w};

  auto probe = [&](double load) {
    const bool ok = unequal_condition_value(vertices, fleet, sizes, load) >= 1.0 - kConditionSlack;
    report.probes.push_back({load, ok});
    return ok;
  };

  // Doubling phase; the bracket spans at most a factor p, and its upper end is
  // always feasible (the largest machine can hold every relation).
  double guess = report.bracket->lower;
  double lo = 0;
  while (true) {
    ++report.doubling_probes;
    if (probe(guess)) break;
    lo = guess;
    if (guess >= report.bracket->upper) throw std::logic_error("unequal bound: upper bracket infeasible");
    guess = std::min(2 * guess, report.bracket->upper);
  }
  double hi = guess;

  // Refinement by bisection.
  if (lo > 0) {
    while (hi - lo > tol * hi) {
      const double mid = lo + (hi - lo) / 2;
      if (probe(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  report.lower = hi;
  report.upper_predicted = hi * schema.log2n();

  // Flag any probe pair where a larger load failed after a smaller one passed.
  auto sorted = report.probes;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.load < b.load; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1].feasible && !sorted[i].feasible) report.monotonicity_violation = true;
  }

  for (auto w : weights) {
    report.machine_packings.push_back(per_machine_edge_packing(vertices, hi * static_cast<double>(w), sizes));
  }
  return report;
}

BoundReport equal_linear_bounds(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet) {
  schema.validate();
  BoundReport report;
  report.method = BoundMethod::EqualLinear;
  report.packing = maximum_fractional_edge_packing(q);
  report.cover = minimum_fractional_vertex_cover(q);
  report.lower = lower_bound_linear(schema, fleet, *report.packing);
  report.upper_predicted = upper_bound_linear(schema, fleet, *report.cover);
  return report;
}

BoundReport equal_general_bounds(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                 double tol) {
  schema.validate();
  BoundReport report;
  report.method = BoundMethod::EqualGeneral;
  report.packing = maximum_fractional_edge_packing(q);
  report.cover = minimum_fractional_vertex_cover(q);
  report.lower = lower_bound_general(schema, fleet, *report.packing, tol);
  report.upper_predicted = report.lower * schema.log2n();
  return report;
}

}  // namespace hetjoin

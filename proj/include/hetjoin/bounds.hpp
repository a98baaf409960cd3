#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hetjoin/cost_model.hpp"
#include "hetjoin/query.hpp"

namespace hetjoin {

// Sizes of one database instance as seen by the planner. Values range over
// [0, n); each relation j holds `cardinalities[j]` tuples of arity `arities[j]`.
struct InstanceSchema {
  std::uint64_t n = 2;
  std::vector<std::uint64_t> cardinalities;
  std::vector<std::size_t> arities;

  static InstanceSchema uniform(const Query& q, std::uint64_t n, std::uint64_t m);
  static InstanceSchema with_cardinalities(const Query& q, std::uint64_t n, std::vector<std::uint64_t> m);

  // Throws std::invalid_argument unless n >= 2 and 1 <= m_j <= n^{r_j}.
  void validate() const;

  std::uint64_t bits_per_value() const;        // ceil(log2 n)
  std::uint64_t encoded_bits(std::size_t j) const;  // m_j * r_j * ceil(log2 n)
  double log2n() const;
  bool is_uniform() const;
  // Throws std::invalid_argument when cardinalities differ.
  std::uint64_t uniform_cardinality() const;
  std::vector<double> cardinalities_as_double() const;
};

// m log2(n) / ||w||_v
double upper_bound_linear(const InstanceSchema& schema, const MachineFleet& fleet, const VertexCover& cover);
// m / ||w||_u
double lower_bound_linear(const InstanceSchema& schema, const MachineFleet& fleet, const EdgePacking& packing);

// Feasibility predicate of the general-cost bound: sum_c g*_c(L)^u >= m^u.
bool general_feasible(const InstanceSchema& schema, const MachineFleet& fleet, double u, double load);

// Smallest L (to relative tolerance `tol`) with sum_c g*_c(L)^u >= m^u, found by
// bisection on (0, min_c g_c(m)]. The result is snapped down to the smallest
// load that keeps every g*_c unchanged, so it is exactly feasible.
double lower_bound_general(const InstanceSchema& schema, const MachineFleet& fleet, const EdgePacking& packing,
                           double tol = 1e-6);

// Edge packing minimizing prod_j (budget / size_j)^{u_j} over the packing
// polytope `vertices`. Ties prefer the larger total weight, then the
// lexicographically largest vector (weight on the earliest atom).
EdgePacking per_machine_edge_packing(const std::vector<RationalVector>& vertices, double budget,
                                     std::span<const double> sizes);
EdgePacking per_machine_edge_packing(const Query& q, double budget, const InstanceSchema& schema);

enum class BoundMethod { EqualLinear, EqualGeneral, Unequal };
std::string_view to_string(BoundMethod method);

struct LoadBracket {
  double lower = 0;
  double upper = 0;
};

struct SearchProbe {
  double load = 0;
  bool feasible = false;
};

struct BoundReport {
  BoundMethod method = BoundMethod::EqualLinear;
  double lower = 0;            // L_lower
  double upper_predicted = 0;  // predicted load of the matching algorithm
  std::optional<EdgePacking> packing;         // uniform-cardinality witness
  std::optional<VertexCover> cover;           // cover used by the upper bound
  std::vector<EdgePacking> machine_packings;  // per-machine witnesses (unequal case)
  std::optional<LoadBracket> bracket;
  std::vector<SearchProbe> probes;
  int doubling_probes = 0;
  bool monotonicity_violation = false;
};

// Left-hand side of the unequal-cardinality condition at `load`, with every
// machine using its own minimizing packing.
double unequal_condition_value(const std::vector<RationalVector>& vertices, const MachineFleet& fleet,
                               std::span<const double> sizes, double load);

// Smallest L satisfying sum_c prod_j (L w_c / m_j)^{u_{c,j}} >= 1 with per-machine
// minimizing packings: doubling from max_j m_j / sum_c w_c, then bisection to `tol`.
BoundReport lower_bound_unequal(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                double tol = 1e-6);

BoundReport equal_linear_bounds(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet);
BoundReport equal_general_bounds(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                 double tol = 1e-6);

}  // namespace hetjoin

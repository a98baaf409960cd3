#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetjoin/bounds.hpp"
#include "hetjoin/cost_model.hpp"
#include "hetjoin/datagen.hpp"
#include "hetjoin/packing.hpp"
#include "hetjoin/partition.hpp"
#include "hetjoin/query.hpp"

namespace hetjoin {

enum class HashMode { Identity, Random };
std::string_view to_string(HashMode mode);

// One function [n] -> [n] per query variable.
class HashFamily {
 public:
  HashMode mode = HashMode::Identity;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint32_t>> permutations;  // empty in identity mode

  std::uint32_t apply(std::size_t var, std::uint32_t value) const {
    return mode == HashMode::Identity ? value : permutations[var][value];
  }
};

HashFamily make_hash_family(HashMode mode, std::uint64_t n, std::size_t k, std::uint64_t seed);

enum class PlanKind { EqualLinear, EqualGeneral, Cartesian, BinaryJoin, Star, Triangle };
std::string_view to_string(PlanKind kind);
PlanKind parse_plan_kind(std::string_view text);
const std::vector<PlanKind>& all_plan_kinds();

struct Plan {
  PlanKind kind = PlanKind::EqualLinear;
  InstanceSchema schema;  // the schema the plan was computed for
  BoundReport bounds;
  double load = 0;  // load plugged into the dims
  std::vector<Hyperrectangle> dims;
  std::vector<std::string> labels;  // triangle machine labels, else empty
  // ||w||_v of the fleet for equal-linear plans; exact when rational.
  std::optional<double> norm;
  std::optional<Rational> exact_norm;
  Placement placement;
};

// bounds -> partition -> packing. Equal-cardinality kinds plan for
// m = max_j m_j when the schema is not uniform. `tol` is the relative tolerance
// of the load searches.
Plan make_plan(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet, PlanKind kind,
               double tol = 1e-6);

// Output tuples over all k variables, rows sorted lexicographically.
struct OutputSet {
  std::size_t k = 0;
  std::vector<std::uint32_t> data;

  std::size_t size() const { return k == 0 ? 0 : data.size() / k; }
  std::span<const std::uint32_t> row(std::size_t i) const { return {data.data() + i * k, k}; }
  void normalize();  // sort rows and drop duplicates
  friend bool operator==(const OutputSet& a, const OutputSet& b) { return a.k == b.k && a.data == b.data; }
};

struct Shard {
  int machine = 0;
  std::vector<Relation> relations;  // in atom order
};

std::vector<Shard> route(const DatabaseInstance& db, const Placement& placement, const HashFamily& hashes,
                         const Query& q, unsigned threads = 1);

// Join of the shard restricted to tuples a with h(a) inside the machine's grid box.
OutputSet local_join(const Shard& shard, const Query& q, const MachinePlacement& box, const HashFamily& hashes);

// Nested-loop evaluation, used as ground truth.
OutputSet brute_force_join(const Query& q, const DatabaseInstance& db);

struct MachineLoad {
  int machine = 0;
  std::vector<std::uint64_t> tuples_per_atom;
  std::uint64_t bits = 0;
  double cost = 0;
  std::uint64_t output_tuples = 0;
};

struct LoadReport {
  std::vector<MachineLoad> machines;
  double max_cost = 0;
  double lower_bound = 0;
  double ratio = 0;  // max_cost / (lower_bound * log2 n)
  std::uint64_t output_size = 0;
};

struct RunOptions {
  unsigned threads = 1;
  // Defaults to identity hashing for dense instances and random otherwise.
  std::optional<HashMode> hash;
  double tol = 1e-6;
};

struct RunResult {
  Plan plan;
  HashFamily hashes;
  OutputSet output;
  std::vector<OutputSet> per_machine;
  LoadReport report;
};

// Throws std::logic_error if two machines produce the same output tuple.
RunResult run_one_round(const Query& q, const DatabaseInstance& db, const MachineFleet& fleet, PlanKind kind,
                        std::uint64_t seed, const RunOptions& options = {});

}  // namespace hetjoin

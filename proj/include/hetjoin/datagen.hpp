#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetjoin/bounds.hpp"
#include "hetjoin/query.hpp"

namespace hetjoin {

// Tuples stored row-major; values lie in [0, n).
struct Relation {
  std::string name;
  std::size_t arity = 0;
  std::vector<std::uint32_t> data;

  std::size_t size() const { return arity == 0 ? 0 : data.size() / arity; }
  std::span<const std::uint32_t> tuple(std::size_t i) const { return {data.data() + i * arity, arity}; }
  void add(std::span<const std::uint32_t> t) { data.insert(data.end(), t.begin(), t.end()); }
};

enum class Distribution { Matching, Dense };
std::string_view to_string(Distribution d);
Distribution parse_distribution(std::string_view text);

struct DatabaseInstance {
  std::uint64_t n = 0;
  std::vector<Relation> relations;  // one per atom, in atom order
  std::uint64_t seed = 0;
  Distribution distribution = Distribution::Matching;

  InstanceSchema schema(const Query& q) const;
  // Schema with every cardinality clamped to at least one tuple, for planning.
  InstanceSchema planning_schema(const Query& q) const;
};

struct MatchingSpec {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> cardinalities;  // one per atom
  std::optional<double> theta;               // density cap for unary relations
  std::uint64_t seed = 0;
};

enum class DenseMode { ExactCount, Bernoulli };

struct DenseSpec {
  std::uint64_t n = 0;
  double theta = 0.5;
  std::uint64_t seed = 0;
  DenseMode mode = DenseMode::ExactCount;
};

// Mixes `stream` into `seed`; used to give every relation its own generator.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
// Uniform integer in [0, bound) by rejection; bound > 0.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);
// Uniform double in [0, 1) from 53 random bits.
double uniform_unit(std::mt19937_64& rng);

// Each attribute column is an independent uniform injection [m_j] -> [n].
DatabaseInstance gen_matching(const Query& q, const MatchingSpec& spec);
// Exactly floor(theta n^r) distinct tuples per relation, or independent
// per-tuple coin flips in Bernoulli mode.
DatabaseInstance gen_dense(const Query& q, const DenseSpec& spec);

std::uint64_t dense_cardinality(std::uint64_t n, std::size_t arity, double theta);

bool is_matching(const Relation& r, std::uint64_t n);

// (prod_j m_j) n^{k - sum_j r_j}
double expected_output_size(const Query& q, const InstanceSchema& schema);

void write_relation_csv(std::ostream& out, const Relation& r, std::uint64_t n);
// Returns the relation; the header's n is stored in `n`.
Relation read_relation_csv(std::istream& in, std::uint64_t& n);

void write_instance(const std::filesystem::path& dir, const DatabaseInstance& db);
DatabaseInstance read_instance(const std::filesystem::path& dir, const Query& q);

}  // namespace hetjoin

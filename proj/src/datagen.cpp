#include "hetjoin/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace hetjoin {

namespace {

constexpr std::uint64_t kMaxDenseSpace = std::uint64_t{1} << 28;

std::uint64_t checked_space(std::uint64_t n, std::size_t arity) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < arity; ++i) {
    if (total > kMaxDenseSpace / n) throw std::invalid_argument("dense relation space n^r is too large");
    total *= n;
  }
  return total;
}

void decode(std::uint64_t index, std::uint64_t n, std::span<std::uint32_t> out) {
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = static_cast<std::uint32_t>(index % n);
    index /= n;
  }
}

void check_domain(std::uint64_t n) {
  if (n < 1 || n > std::uint64_t{0x7fffffff}) throw std::invalid_argument("domain size n must be in [1, 2^31)");
}

}  // namespace

std::string_view to_string(Distribution d) { return d == Distribution::Matching ? "matching" : "dense"; }

Distribution parse_distribution(std::string_view text) {
  if (text == "matching") return Distribution::Matching;
  if (text == "dense") return Distribution::Dense;
  throw std::invalid_argument("unknown distribution: " + std::string(text));
}

InstanceSchema DatabaseInstance::schema(const Query& q) const {
  std::vector<std::uint64_t> m;
  for (const auto& r : relations) m.push_back(r.size());
  return InstanceSchema::with_cardinalities(q, n, std::move(m));
}

InstanceSchema DatabaseInstance::planning_schema(const Query& q) const {
  auto s = schema(q);
  for (auto& m : s.cardinalities) m = std::max<std::uint64_t>(m, 1);
  return s;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  while (true) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

DatabaseInstance gen_matching(const Query& q, const MatchingSpec& spec) {
  check_domain(spec.n);
  if (spec.cardinalities.size() != q.num_atoms()) throw std::invalid_argument("one cardinality per atom required");
  DatabaseInstance db;
  db.n = spec.n;
  db.seed = spec.seed;
  std::vector<std::uint32_t> pool(spec.n);
  for (std::size_t j = 0; j < q.num_atoms(); ++j) {
    const auto& atom = q.atom(j);
    const std::uint64_t m = spec.cardinalities[j];
    if (m > spec.n) throw std::invalid_argument("matching relation " + atom.name + " has m > n");
    if (atom.arity() == 1 && spec.theta &&
        static_cast<double>(m) / static_cast<double>(spec.n) > *spec.theta) {
      throw std::invalid_argument("unary matching relation " + atom.name + " exceeds density theta");
    }
    std::mt19937_64 rng(derive_seed(spec.seed, j));
    Relation rel{atom.name, atom.arity(), std::vector<std::uint32_t>(m * atom.arity())};
    for (std::size_t col = 0; col < atom.arity(); ++col) {
      std::iota(pool.begin(), pool.end(), 0U);
      for (std::uint64_t i = 0; i < m; ++i) {
        const auto pick = i + uniform_below(rng, spec.n - i);
        std::swap(pool[i], pool[pick]);
        rel.data[i * atom.arity() + col] = pool[i];
      }
    }
    db.relations.push_back(std::move(rel));
  }
  return db;
}

std::uint64_t dense_cardinality(std::uint64_t n, std::size_t arity, double theta) {
  const double total = std::pow(static_cast<double>(n), static_cast<double>(arity));
  // Relative slack keeps e.g. 0.29 * 100 from flooring to 28.
  return static_cast<std::uint64_t>(std::floor(theta * total * (1 + 1e-12)));
}

DatabaseInstance gen_dense(const Query& q, const DenseSpec& spec) {
  check_domain(spec.n);
  if (!(spec.theta > 0 && spec.theta < 1)) throw std::invalid_argument("dense theta must lie in (0, 1)");
  DatabaseInstance db;
  db.n = spec.n;
  db.seed = spec.seed;
  db.distribution = Distribution::Dense;
  for (std::size_t j = 0; j < q.num_atoms(); ++j) {
    const auto& atom = q.atom(j);
    const std::uint64_t space = checked_space(spec.n, atom.arity());
    std::mt19937_64 rng(derive_seed(spec.seed, j));
    std::vector<std::uint64_t> chosen;
    if (spec.mode == DenseMode::Bernoulli) {
      for (std::uint64_t idx = 0; idx < space; ++idx) {
        if (uniform_unit(rng) < spec.theta) chosen.push_back(idx);
      }
    } else {
      // Floyd's sampling of a uniform subset of fixed size.
      const std::uint64_t count = std::min(dense_cardinality(spec.n, atom.arity(), spec.theta), space);
      std::unordered_set<std::uint64_t> picked;
      picked.reserve(count * 2);
      for (std::uint64_t t = space - count; t < space; ++t) {
        const std::uint64_t r = uniform_below(rng, t + 1);
        picked.insert(picked.count(r) ? t : r);
      }
      chosen.assign(picked.begin(), picked.end());
      std::sort(chosen.begin(), chosen.end());
    }
    Relation rel{atom.name, atom.arity(), {}};
    rel.data.resize(chosen.size() * atom.arity());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      decode(chosen[i], spec.n, {rel.data.data() + i * atom.arity(), atom.arity()});
    }
    db.relations.push_back(std::move(rel));
  }
  return db;
}

bool is_matching(const Relation& r, std::uint64_t n) {
  std::vector<char> seen(n);
  for (std::size_t col = 0; col < r.arity; ++col) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto v = r.tuple(i)[col];
      if (v >= n || seen[v]) return false;
      seen[v] = 1;
    }
  }
  return true;
}

double expected_output_size(const Query& q, const InstanceSchema& schema) {
  double out = 1;
  for (auto m : schema.cardinalities) out *= static_cast<double>(m);
  const auto exponent = static_cast<double>(q.num_variables()) - static_cast<double>(q.total_arity());
  return out * std::pow(static_cast<double>(schema.n), exponent);
}

void write_relation_csv(std::ostream& out, const Relation& r, std::uint64_t n) {
  out << "# atom=" << r.name << " arity=" << r.arity << " n=" << n << "\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto t = r.tuple(i);
    for (std::size_t c = 0; c < t.size(); ++c) out << (c ? "," : "") << t[c];
    out << "\n";
  }
}

Relation read_relation_csv(std::istream& in, std::uint64_t& n) {
  static const std::regex header(R"(#\s*atom=(\S+)\s+arity=(\d+)\s+n=(\d+)\s*)");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("relation file is empty");
  std::smatch match;
  if (!std::regex_match(line, match, header)) throw std::runtime_error("bad relation header: " + line);
  Relation r{match[1].str(), std::stoul(match[2].str()), {}};
  n = std::stoull(match[3].str());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream fields(line);
    std::string field;
    std::size_t count = 0;
    while (std::getline(fields, field, ',')) {
      std::size_t used = 0;
      const auto v = std::stoull(field, &used);
      if (v >= n) throw std::runtime_error("value out of domain on line " + std::to_string(lineno));
      r.data.push_back(static_cast<std::uint32_t>(v));
      ++count;
    }
    if (count != r.arity) throw std::runtime_error("wrong number of fields on line " + std::to_string(lineno));
  }
  return r;
}

void write_instance(const std::filesystem::path& dir, const DatabaseInstance& db) {
  std::filesystem::create_directories(dir);
  for (const auto& r : db.relations) {
    std::ofstream out(dir / (r.name + ".csv"));
    if (!out) throw std::runtime_error("cannot write " + (dir / (r.name + ".csv")).string());
    write_relation_csv(out, r, db.n);
  }
}

DatabaseInstance read_instance(const std::filesystem::path& dir, const Query& q) {
  DatabaseInstance db;
  for (const auto& atom : q.atoms()) {
    const auto path = dir / (atom.name + ".csv");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::uint64_t n = 0;
    auto r = read_relation_csv(in, n);
    if (r.name != atom.name || r.arity != atom.arity()) {
      throw std::runtime_error(path.string() + " does not match atom " + atom.name);
    }
    if (db.n != 0 && db.n != n) throw std::runtime_error("relation files disagree on n");
    db.n = n;
    db.relations.push_back(std::move(r));
  }
  const bool matching =
      std::all_of(db.relations.begin(), db.relations.end(), [&](const Relation& r) { return is_matching(r, db.n); });
  db.distribution = matching ? Distribution::Matching : Distribution::Dense;
  return db;
}

}  // namespace hetjoin

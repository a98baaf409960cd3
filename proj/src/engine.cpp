#include "hetjoin/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "hetjoin/kernels.hpp"

namespace hetjoin {

namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::uint64_t mix_key(std::uint64_t h, std::uint32_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h * 0xff51afd7ed558ccdULL;
}

std::uint64_t planning_m(const InstanceSchema& schema) {
  return std::max<std::uint64_t>(1, *std::max_element(schema.cardinalities.begin(), schema.cardinalities.end()));
}

void require_linear(const MachineFleet& fleet, PlanKind kind) {
  if (!fleet.all_linear()) {
    throw std::invalid_argument("plan " + std::string(to_string(kind)) + " needs a linear-cost fleet");
  }
}

}  // namespace

std::string_view to_string(HashMode mode) { return mode == HashMode::Identity ? "identity" : "random"; }

HashFamily make_hash_family(HashMode mode, std::uint64_t n, std::size_t k, std::uint64_t seed) {
  HashFamily h;
  h.mode = mode;
  h.n = n;
  h.seed = seed;
  if (mode == HashMode::Random) {
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<std::uint32_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0U);
      std::mt19937_64 rng(derive_seed(seed, 0x1000 + i));
      for (std::uint64_t a = n; a > 1; --a) std::swap(perm[a - 1], perm[uniform_below(rng, a)]);
      h.permutations.push_back(std::move(perm));
    }
  }
  return h;
}

std::string_view to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::EqualLinear: return "equal-linear";
    case PlanKind::EqualGeneral: return "equal-general";
    case PlanKind::Cartesian: return "cartesian";
    case PlanKind::BinaryJoin: return "binary-join";
    case PlanKind::Star: return "star";
    case PlanKind::Triangle: return "triangle";
  }
  return "unknown";
}

PlanKind parse_plan_kind(std::string_view text) {
  for (auto kind : all_plan_kinds()) {
    if (to_string(kind) == text) return kind;
  }
  throw std::invalid_argument("unknown plan kind: " + std::string(text));
}

const std::vector<PlanKind>& all_plan_kinds() {
  static const std::vector<PlanKind> kinds{PlanKind::EqualLinear, PlanKind::EqualGeneral, PlanKind::Cartesian,
                                           PlanKind::BinaryJoin,  PlanKind::Star,         PlanKind::Triangle};
  return kinds;
}

Plan make_plan(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet, PlanKind kind,
               double tol) {
  Plan plan;
  plan.kind = kind;
  switch (kind) {
    case PlanKind::EqualLinear: {
      require_linear(fleet, kind);
      plan.schema = InstanceSchema::uniform(q, schema.n, planning_m(schema));
      plan.bounds = equal_linear_bounds(q, plan.schema, fleet);
      plan.load = plan.bounds.lower;
      plan.dims = equal_card_linear_dims(q, plan.schema, fleet, *plan.bounds.cover);
      plan.norm = lp_norm(fleet, plan.bounds.cover->total);
      plan.exact_norm = exact_lp_norm(fleet, plan.bounds.cover->total);
      break;
    }
    case PlanKind::EqualGeneral: {
      plan.schema = InstanceSchema::uniform(q, schema.n, planning_m(schema));
      plan.bounds = equal_general_bounds(q, plan.schema, fleet, tol);
      plan.load = plan.bounds.lower;
      plan.dims = equal_card_general_dims(q, plan.schema, fleet, *plan.bounds.cover, plan.load);
      break;
    }
    case PlanKind::Cartesian:
    case PlanKind::BinaryJoin:
    case PlanKind::Star:
    case PlanKind::Triangle: {
      require_linear(fleet, kind);
      plan.schema = schema;
      // Reject the shape before searching for the bound.
      const auto shape = classify(q);
      const bool fits = (kind == PlanKind::Cartesian && shape == QueryShape::Cartesian) ||
                        (kind == PlanKind::BinaryJoin && shape == QueryShape::BinaryJoin) ||
                        (kind == PlanKind::Star && (shape == QueryShape::Star || shape == QueryShape::BinaryJoin)) ||
                        (kind == PlanKind::Triangle && shape == QueryShape::Triangle);
      if (!fits) {
        throw UnsupportedQueryShape("unsupported query shape: plan " + std::string(to_string(kind)) +
                                    " does not apply to a " + std::string(to_string(shape)) + " query");
      }
      plan.bounds = lower_bound_unequal(q, schema, fleet, tol);
      plan.load = plan.bounds.lower;
      if (kind == PlanKind::Cartesian) plan.dims = cartesian_dims(q, schema, fleet, plan.load);
      if (kind == PlanKind::BinaryJoin) plan.dims = binary_join_dims(q, schema, fleet, plan.load);
      if (kind == PlanKind::Star) plan.dims = star_dims(q, schema, fleet, plan.load);
      if (kind == PlanKind::Triangle) {
        plan.dims = triangle_dims(q, schema, fleet, plan.load);
        const auto roles = triangle_roles(q, schema);
        for (auto w : fleet.linear_weights()) {
          try {
            plan.labels.emplace_back(to_string(triangle_profile(roles.sizes, static_cast<double>(w), plan.load).label));
          } catch (const std::domain_error&) {
            plan.labels.emplace_back("full");
          }
        }
      }
      break;
    }
  }
  plan.placement = pack(plan.dims, schema.n);
  return plan;
}

void OutputSet::normalize() {
  const std::size_t rows = size();
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(data.begin() + static_cast<std::ptrdiff_t>(a * k),
                                        data.begin() + static_cast<std::ptrdiff_t>((a + 1) * k),
                                        data.begin() + static_cast<std::ptrdiff_t>(b * k),
                                        data.begin() + static_cast<std::ptrdiff_t>((b + 1) * k));
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<std::uint32_t> sorted;
  sorted.reserve(data.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = row(order[i]);
    if (i > 0 && std::equal(r.begin(), r.end(), sorted.end() - static_cast<std::ptrdiff_t>(k))) continue;
    sorted.insert(sorted.end(), r.begin(), r.end());
  }
  data = std::move(sorted);
}

std::vector<Shard> route(const DatabaseInstance& db, const Placement& placement, const HashFamily& hashes,
                         const Query& q, unsigned threads) {
  if (db.relations.size() != q.num_atoms()) throw std::invalid_argument("instance does not match the query");
  // Hashed coordinates, one column per atom attribute.
  std::vector<std::vector<std::vector<std::int32_t>>> columns(q.num_atoms());
  for (std::size_t j = 0; j < q.num_atoms(); ++j) {
    const auto& rel = db.relations[j];
    const auto& atom = q.atom(j);
    columns[j].assign(atom.arity(), std::vector<std::int32_t>(rel.size()));
    for (std::size_t t = 0; t < rel.size(); ++t) {
      const auto tuple = rel.tuple(t);
      for (std::size_t a = 0; a < atom.arity(); ++a) {
        columns[j][a][t] = static_cast<std::int32_t>(hashes.apply(atom.vars[a], tuple[a]));
      }
    }
  }

  std::vector<Shard> shards(placement.machines.size());
  parallel_for(shards.size(), threads, [&](std::size_t c) {
    const auto& box = placement.machines[c];
    auto& shard = shards[c];
    shard.machine = box.machine;
    std::vector<std::uint32_t> picked;
    for (std::size_t j = 0; j < q.num_atoms(); ++j) {
      const auto& rel = db.relations[j];
      const auto& atom = q.atom(j);
      Relation out{rel.name, rel.arity, {}};
      if (box.owns_grid_points() && rel.size() > 0) {
        std::vector<const std::int32_t*> cols;
        std::vector<std::int32_t> lo;
        std::vector<std::int32_t> hi;
        for (std::size_t a = 0; a < atom.arity(); ++a) {
          cols.push_back(columns[j][a].data());
          lo.push_back(static_cast<std::int32_t>(box.grid_lo[atom.vars[a]]));
          hi.push_back(static_cast<std::int32_t>(box.grid_hi[atom.vars[a]]));
        }
        picked.resize(rel.size());
        const auto count = kernels::box_filter(cols.data(), cols.size(), rel.size(), lo.data(), hi.data(), picked.data());
        out.data.reserve(count * rel.arity);
        for (std::size_t i = 0; i < count; ++i) out.add(rel.tuple(picked[i]));
      }
      shard.relations.push_back(std::move(out));
    }
  });
  return shards;
}

OutputSet local_join(const Shard& shard, const Query& q, const MachinePlacement& box, const HashFamily& hashes) {
  const std::size_t k = q.num_variables();
  OutputSet out;
  out.k = k;
  if (!box.owns_grid_points()) return out;
  auto in_box = [&](std::size_t var, std::uint32_t value) {
    const auto h = static_cast<std::int64_t>(hashes.apply(var, value));
    return h >= box.grid_lo[var] && h < box.grid_hi[var];
  };

  // Atom order: start with the smallest relation, then repeatedly take the
  // atom sharing the most already-bound variables.
  std::vector<bool> bound(k, false);
  std::vector<bool> done(q.num_atoms(), false);
  std::vector<std::size_t> order;
  for (std::size_t step = 0; step < q.num_atoms(); ++step) {
    std::size_t best = q.num_atoms();
    std::size_t best_shared = 0;
    for (std::size_t j = 0; j < q.num_atoms(); ++j) {
      if (done[j]) continue;
      std::size_t shared = 0;
      for (auto v : q.atom(j).vars) shared += bound[v] ? 1 : 0;
      const bool better = best == q.num_atoms() || shared > best_shared ||
                          (shared == best_shared && shard.relations[j].size() < shard.relations[best].size());
      if (better) {
        best = j;
        best_shared = shared;
      }
    }
    done[best] = true;
    order.push_back(best);
    for (auto v : q.atom(best).vars) bound[v] = true;
  }

  std::fill(bound.begin(), bound.end(), false);
  std::vector<std::uint32_t> partial;  // rows of k values
  std::size_t partial_rows = 1;
  partial.assign(k, 0);
  for (auto j : order) {
    const auto& atom = q.atom(j);
    const auto& rel = shard.relations[j];
    std::vector<std::size_t> key_pos;  // attribute positions whose variable is bound
    for (std::size_t a = 0; a < atom.arity(); ++a) {
      if (bound[atom.vars[a]]) key_pos.push_back(a);
    }
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index;
    for (std::size_t t = 0; t < rel.size(); ++t) {
      const auto tuple = rel.tuple(t);
      bool keep = true;
      for (std::size_t a = 0; a < atom.arity() && keep; ++a) keep = in_box(atom.vars[a], tuple[a]);
      if (!keep) continue;
      std::uint64_t key = 0;
      for (auto a : key_pos) key = mix_key(key, tuple[a]);
      index[key].push_back(static_cast<std::uint32_t>(t));
    }
    std::vector<std::uint32_t> next;
    std::size_t next_rows = 0;
    for (std::size_t r = 0; r < partial_rows; ++r) {
      const std::uint32_t* row = partial.data() + r * k;
      std::uint64_t key = 0;
      for (auto a : key_pos) key = mix_key(key, row[atom.vars[a]]);
      const auto it = index.find(key);
      if (it == index.end()) continue;
      for (auto t : it->second) {
        const auto tuple = rel.tuple(t);
        bool match = true;
        for (auto a : key_pos) match = match && tuple[a] == row[atom.vars[a]];
        if (!match) continue;
        next.insert(next.end(), row, row + k);
        for (std::size_t a = 0; a < atom.arity(); ++a) next[next_rows * k + atom.vars[a]] = tuple[a];
        ++next_rows;
      }
    }
    partial = std::move(next);
    partial_rows = next_rows;
    for (auto v : atom.vars) bound[v] = true;
    if (partial_rows == 0) break;
  }
  out.data = std::move(partial);
  out.data.resize(partial_rows * k);
  out.normalize();
  return out;
}

namespace {

void nested_loop(const Query& q, const DatabaseInstance& db, std::size_t atom, std::vector<std::uint32_t>& values,
                 std::vector<int>& depth_bound, OutputSet& out) {
  if (atom == q.num_atoms()) {
    out.data.insert(out.data.end(), values.begin(), values.end());
    return;
  }
  const auto& vars = q.atom(atom).vars;
  const auto& rel = db.relations[atom];
  for (std::size_t t = 0; t < rel.size(); ++t) {
    const auto tuple = rel.tuple(t);
    bool consistent = true;
    for (std::size_t a = 0; a < vars.size() && consistent; ++a) {
      consistent = depth_bound[vars[a]] < 0 || values[vars[a]] == tuple[a];
    }
    if (!consistent) continue;
    std::vector<std::size_t> newly;
    for (std::size_t a = 0; a < vars.size(); ++a) {
      if (depth_bound[vars[a]] < 0) {
        depth_bound[vars[a]] = static_cast<int>(atom);
        values[vars[a]] = tuple[a];
        newly.push_back(vars[a]);
      }
    }
    nested_loop(q, db, atom + 1, values, depth_bound, out);
    for (auto v : newly) depth_bound[v] = -1;
  }
}

}  // namespace

OutputSet brute_force_join(const Query& q, const DatabaseInstance& db) {
  if (db.relations.size() != q.num_atoms()) throw std::invalid_argument("instance does not match the query");
  OutputSet out;
  out.k = q.num_variables();
  std::vector<std::uint32_t> values(out.k, 0);
  std::vector<int> depth_bound(out.k, -1);
  nested_loop(q, db, 0, values, depth_bound, out);
  out.normalize();
  return out;
}

RunResult run_one_round(const Query& q, const DatabaseInstance& db, const MachineFleet& fleet, PlanKind kind,
                        std::uint64_t seed, const RunOptions& options) {
  RunResult result;
  result.plan = make_plan(q, db.planning_schema(q), fleet, kind, options.tol);
  const HashMode mode =
      options.hash.value_or(db.distribution == Distribution::Dense ? HashMode::Identity : HashMode::Random);
  result.hashes = make_hash_family(mode, db.n, q.num_variables(), seed);
  const auto& placement = result.plan.placement;

  const auto shards = route(db, placement, result.hashes, q, options.threads);
  result.per_machine.resize(shards.size());
  parallel_for(shards.size(), options.threads, [&](std::size_t c) {
    result.per_machine[c] = local_join(shards[c], q, placement.machines[c], result.hashes);
  });

  // Disjointness check and union.
  result.output.k = q.num_variables();
  std::size_t total = 0;
  for (const auto& part : result.per_machine) {
    result.output.data.insert(result.output.data.end(), part.data.begin(), part.data.end());
    total += part.size();
  }
  result.output.normalize();
  if (result.output.size() != total) throw std::logic_error("two machines produced the same output tuple");

  const auto schema = db.schema(q);
  const auto bits_per_value = schema.bits_per_value();
  auto& report = result.report;
  for (std::size_t c = 0; c < shards.size(); ++c) {
    MachineLoad load;
    load.machine = shards[c].machine;
    for (std::size_t j = 0; j < q.num_atoms(); ++j) {
      const auto tuples = shards[c].relations[j].size();
      load.tuples_per_atom.push_back(tuples);
      load.bits += tuples * q.atom(j).arity() * bits_per_value;
    }
    load.cost = fleet.machine(c).cost.evaluate(load.bits);
    load.output_tuples = result.per_machine[c].size();
    report.max_cost = std::max(report.max_cost, load.cost);
    report.machines.push_back(std::move(load));
  }
  report.lower_bound = result.plan.bounds.lower;
  const double denom = report.lower_bound * schema.log2n();
  report.ratio = denom > 0 ? report.max_cost / denom : 0;
  report.output_size = result.output.size();
  return result;
}

}  // namespace hetjoin

#include <gtest/gtest.h>

#include <set>

#include "hetjoin/engine.hpp"
#include "hetjoin/kernels.hpp"
#include "oracles.hpp"

using namespace hetjoin;

namespace {

Relation rel(std::string name, std::size_t arity, std::vector<std::uint32_t> data) {
  return Relation{std::move(name), arity, std::move(data)};
}

// Four triangles hidden among matching relations over n = 5.
DatabaseInstance triangle_fixture() {
  DatabaseInstance db;
  db.n = 5;
  db.relations = {rel("S1", 2, {0, 1, 1, 2, 2, 0, 3, 3}), rel("S2", 2, {1, 2, 2, 0, 0, 1, 3, 4}),
                  rel("S3", 2, {2, 0, 0, 1, 1, 2, 4, 3})};
  return db;
}

const std::vector<std::uint32_t> kTriangleAnswer{0, 1, 2, 1, 2, 0, 2, 0, 1, 3, 3, 4};

std::vector<PlanKind> kinds_for(const Query& q) {
  std::vector<PlanKind> out{PlanKind::EqualLinear, PlanKind::EqualGeneral};
  switch (classify(q)) {
    case QueryShape::Cartesian: out.push_back(PlanKind::Cartesian); break;
    case QueryShape::BinaryJoin: out.push_back(PlanKind::BinaryJoin); out.push_back(PlanKind::Star); break;
    case QueryShape::Star: out.push_back(PlanKind::Star); break;
    case QueryShape::Triangle: out.push_back(PlanKind::Triangle); break;
    case QueryShape::Other: break;
  }
  return out;
}

}  // namespace

TEST(BruteForce, TriangleFixture) {
  const auto q = oracle::triangle();
  const auto db = triangle_fixture();
  EXPECT_EQ(brute_force_join(q, db).data, kTriangleAnswer);
  EXPECT_EQ(oracle::join_by_enumeration(q, db), kTriangleAnswer);
}

TEST(BruteForce, MatchesEnumeration) {
  for (const auto& q : {oracle::cartesian(), oracle::binary_join(), oracle::star3(), oracle::triangle()}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto db = gen_dense(q, {5, 0.4, s, DenseMode::Bernoulli});
      EXPECT_EQ(brute_force_join(q, db).data, oracle::join_by_enumeration(q, db));
    }
  }
}

TEST(Hash, Bijective) {
  const auto h = make_hash_family(HashMode::Random, 37, 4, 9);
  ASSERT_EQ(h.permutations.size(), 4u);
  for (std::size_t v = 0; v < 4; ++v) {
    std::set<std::uint32_t> image;
    for (std::uint32_t x = 0; x < 37; ++x) image.insert(h.apply(v, x));
    EXPECT_EQ(image.size(), 37u);
    EXPECT_LT(*image.rbegin(), 37u);
  }
  EXPECT_NE(h.permutations[0], h.permutations[1]);
  const auto id = make_hash_family(HashMode::Identity, 37, 4, 9);
  for (std::uint32_t x = 0; x < 37; ++x) EXPECT_EQ(id.apply(2, x), x);
  EXPECT_EQ(make_hash_family(HashMode::Random, 37, 4, 9).permutations, h.permutations);
}

TEST(PlanKinds, Names) {
  for (auto k : all_plan_kinds()) EXPECT_EQ(parse_plan_kind(to_string(k)), k);
  EXPECT_EQ(all_plan_kinds().size(), 6u);
  EXPECT_EQ(to_string(PlanKind::BinaryJoin), "binary-join");
  EXPECT_THROW(parse_plan_kind("hypercube"), std::invalid_argument);
}

TEST(MakePlan, RejectsMismatchedShape) {
  const auto q = oracle::triangle();
  const auto schema = InstanceSchema::uniform(q, 8, 8);
  const auto fleet = MachineFleet::linear({2, 1});
  EXPECT_THROW(make_plan(q, schema, fleet, PlanKind::Cartesian), UnsupportedQueryShape);
  EXPECT_THROW(make_plan(q, schema, fleet, PlanKind::Star), UnsupportedQueryShape);
  EXPECT_NO_THROW(make_plan(q, schema, fleet, PlanKind::Triangle));
  const MachineFleet poly({{1, CostFunction::polynomial(2, 1)}});
  EXPECT_THROW(make_plan(q, schema, poly, PlanKind::EqualLinear), std::invalid_argument);
  EXPECT_NO_THROW(make_plan(q, schema, poly, PlanKind::EqualGeneral));
}

TEST(MakePlan, TriangleLabels) {
  const auto q = oracle::triangle();
  const auto plan = make_plan(q, InstanceSchema::with_cardinalities(q, 64, {4000, 400, 40}), MachineFleet::linear({64, 8, 1}),
                              PlanKind::Triangle);
  ASSERT_EQ(plan.labels.size(), 3u);
  const std::set<std::string> allowed{"small", "medium", "big", "full"};
  for (const auto& l : plan.labels) EXPECT_TRUE(allowed.count(l)) << l;
}

TEST(Route, ShardHoldsExactlyTheTuplesMeetingTheBox) {
  const auto q = oracle::triangle();
  const auto db = gen_dense(q, {8, 0.3, 1, DenseMode::ExactCount});
  const auto plan = make_plan(q, db.planning_schema(q), MachineFleet::linear({3, 2, 1, 1}), PlanKind::EqualLinear);
  const auto hashes = make_hash_family(HashMode::Random, 8, 3, 4);
  const auto shards = route(db, plan.placement, hashes, q);
  ASSERT_EQ(shards.size(), 4u);
  for (std::size_t c = 0; c < shards.size(); ++c) {
    const auto& box = plan.placement.machines[c];
    EXPECT_EQ(shards[c].machine, box.machine);
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<std::uint32_t> expected;
      const auto& r = db.relations[j];
      for (std::size_t t = 0; t < r.size(); ++t) {
        bool in = box.owns_grid_points();
        for (std::size_t a = 0; a < 2; ++a) {
          const auto v = q.atom(j).vars[a];
          const auto h = static_cast<std::int64_t>(hashes.apply(v, r.tuple(t)[a]));
          in = in && h >= box.grid_lo[v] && h < box.grid_hi[v];
        }
        if (in) expected.insert(expected.end(), r.tuple(t).begin(), r.tuple(t).end());
      }
      EXPECT_EQ(shards[c].relations[j].data, expected);
    }
  }
}

TEST(Run, TriangleFixtureEveryPlan) {
  const auto q = oracle::triangle();
  const auto db = triangle_fixture();
  for (const auto& w : std::vector<std::vector<std::int64_t>>{{1}, {1, 1}, {4, 4, 3, 2, 2, 2, 1}, {8, 1, 1, 1}}) {
    for (auto kind : kinds_for(q)) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = run_one_round(q, db, MachineFleet::linear(w), kind, seed);
        EXPECT_EQ(r.output.data, kTriangleAnswer) << to_string(kind);
        EXPECT_EQ(r.report.output_size, 4u);
      }
    }
  }
}

TEST(Run, RandomInstancesMatchEnumeration) {
  std::mt19937_64 rng(17);
  for (const auto& q : {oracle::cartesian(), oracle::binary_join(), oracle::star3(), oracle::triangle()}) {
    for (int trial = 0; trial < 12; ++trial) {
      const std::uint64_t n = 4 + rng() % 5;
      std::vector<std::int64_t> w;
      for (int i = 0, p = 1 + static_cast<int>(rng() % 9); i < p; ++i) w.push_back(1 + static_cast<std::int64_t>(rng() % 6));
      DatabaseInstance db;
      if (trial % 2 == 0) {
        db = gen_dense(q, {n, 0.2 + 0.1 * static_cast<double>(trial % 5), rng(), DenseMode::ExactCount});
      } else {
        std::vector<std::uint64_t> m;
        for (std::size_t j = 0; j < q.num_atoms(); ++j) m.push_back(1 + rng() % n);
        db = gen_matching(q, {n, m, std::nullopt, rng()});
      }
      const auto truth = oracle::join_by_enumeration(q, db);
      for (auto kind : kinds_for(q)) {
        const auto r = run_one_round(q, db, MachineFleet::linear(w), kind, rng());
        EXPECT_EQ(r.output.data, truth) << q.to_string() << " " << to_string(kind) << " n=" << n;
      }
    }
  }
}

TEST(Run, LoadAccounting) {
  const auto q = oracle::binary_join();
  const auto db = gen_matching(q, {16, {12, 9}, std::nullopt, 3});
  const auto fleet = MachineFleet::linear({4, 2, 1});
  const auto r = run_one_round(q, db, fleet, PlanKind::BinaryJoin, 8);
  double max_cost = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& m = r.report.machines[c];
    EXPECT_EQ(m.machine, static_cast<int>(c + 1));
    const std::uint64_t bits = (m.tuples_per_atom[0] + m.tuples_per_atom[1]) * 2 * 4;
    EXPECT_EQ(m.bits, bits);
    EXPECT_DOUBLE_EQ(m.cost, static_cast<double>(bits) / static_cast<double>(fleet.linear_weights()[c]));
    EXPECT_EQ(m.output_tuples, r.per_machine[c].size());
    max_cost = std::max(max_cost, m.cost);
  }
  EXPECT_DOUBLE_EQ(r.report.max_cost, max_cost);
  EXPECT_DOUBLE_EQ(r.report.lower_bound, r.plan.bounds.lower);
  EXPECT_DOUBLE_EQ(r.report.ratio, max_cost / (r.plan.bounds.lower * 4));
}

TEST(Run, ThreadCountDoesNotChangeResult) {
  const auto q = oracle::triangle();
  const auto db = gen_dense(q, {12, 0.3, 6, DenseMode::ExactCount});
  const auto fleet = MachineFleet::linear({5, 4, 3, 2, 2, 1, 1, 1});
  const auto one = run_one_round(q, db, fleet, PlanKind::Triangle, 2, {1, std::nullopt});
  const auto many = run_one_round(q, db, fleet, PlanKind::Triangle, 2, {6, std::nullopt});
  EXPECT_EQ(one.output, many.output);
  ASSERT_EQ(one.per_machine.size(), many.per_machine.size());
  for (std::size_t c = 0; c < one.per_machine.size(); ++c) {
    EXPECT_EQ(one.per_machine[c], many.per_machine[c]);
    EXPECT_EQ(one.report.machines[c].bits, many.report.machines[c].bits);
  }
}

TEST(Run, ScalarAndVectorRoutingAgree) {
  if (kernels::detected_isa() != kernels::Isa::Avx2) GTEST_SKIP() << "AVX2 not available";
  const auto q = oracle::star3();
  const auto db = gen_dense(q, {10, 0.2, 1, DenseMode::ExactCount});
  const auto fleet = MachineFleet::linear({3, 3, 2, 1});
  kernels::set_active_isa(kernels::Isa::Scalar);
  const auto scalar = run_one_round(q, db, fleet, PlanKind::Star, 5);
  kernels::set_active_isa(kernels::Isa::Avx2);
  const auto vector = run_one_round(q, db, fleet, PlanKind::Star, 5);
  EXPECT_EQ(scalar.output, vector.output);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(scalar.report.machines[c].bits, vector.report.machines[c].bits);
}

TEST(Run, DefaultHashModeFollowsDistribution) {
  const auto q = oracle::binary_join();
  const auto fleet = MachineFleet::linear({1, 1});
  EXPECT_EQ(run_one_round(q, gen_dense(q, {4, 0.5, 0}), fleet, PlanKind::EqualLinear, 0).hashes.mode, HashMode::Identity);
  EXPECT_EQ(run_one_round(q, gen_matching(q, {4, {3, 3}, std::nullopt, 0}), fleet, PlanKind::EqualLinear, 0).hashes.mode,
            HashMode::Random);
}

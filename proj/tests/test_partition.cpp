#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hetjoin/partition.hpp"
#include "oracles.hpp"

using namespace hetjoin;

namespace {

std::vector<std::int64_t> weight_class_weights() {
  std::vector<std::int64_t> w{4, 4, 3, 2, 2, 2};
  for (int i = 0; i < 11; ++i) w.push_back(1);
  return w;
}

std::vector<std::int64_t> random_weights(std::mt19937_64& rng, int max_p) {
  std::vector<std::int64_t> w;
  for (int i = 0, p = 1 + static_cast<int>(rng() % max_p); i < p; ++i) w.push_back(1 + static_cast<std::int64_t>(rng() % 12));
  return w;
}

double total_volume(const std::vector<Hyperrectangle>& dims) {
  double v = 0;
  for (const auto& d : dims) v += d.volume();
  return v;
}

void expect_monotone(const std::vector<Hyperrectangle>& dims, const std::vector<std::int64_t>& w) {
  for (std::size_t a = 0; a < dims.size(); ++a) {
    for (std::size_t b = 0; b < dims.size(); ++b) {
      if (w[a] > w[b]) continue;
      for (std::size_t i = 0; i < dims[a].sides.size(); ++i) {
        EXPECT_LE(dims[a].sides[i], dims[b].sides[i] * (1 + 1e-12));
      }
    }
  }
}

}  // namespace

TEST(EqualLinearDims, WeightClassExact) {
  const auto q = oracle::cartesian();
  const auto fleet = MachineFleet::linear(weight_class_weights());
  const std::uint64_t n = 64;
  const auto schema = InstanceSchema::uniform(q, n, 64);
  const auto cover = minimum_fractional_vertex_cover(q);
  const auto exact = equal_card_linear_dims_exact(q, schema, fleet, cover);
  ASSERT_TRUE(exact.has_value());
  const Rational N(n);
  const std::vector<std::pair<std::size_t, Rational>> expected{
      {0, N / 2}, {1, N / 2}, {2, 3 * N / 8}, {3, N / 4}, {6, N / 8}, {16, N / 8}};
  for (const auto& [c, side] : expected) {
    EXPECT_EQ((*exact)[c][0], side);
    EXPECT_EQ((*exact)[c][1], side);
  }
  const auto dims = equal_card_linear_dims(q, schema, fleet, cover);
  for (const auto& [c, side] : expected) EXPECT_NEAR(dims[c].sides[0], to_double(side), 1e-12);
  Rational vol = 0;
  for (const auto& s : *exact) vol += s[0] * s[1];
  EXPECT_EQ(vol, N * N);
}

TEST(EqualLinearDims, SmallCases) {
  const auto q = oracle::cartesian();
  const auto schema = InstanceSchema::uniform(q, 16, 16);
  const auto cover = minimum_fractional_vertex_cover(q);
  const auto single = equal_card_linear_dims(q, schema, MachineFleet::linear({5}), cover);
  EXPECT_DOUBLE_EQ(single[0].sides[0], 16);
  EXPECT_DOUBLE_EQ(single[0].sides[1], 16);
  const auto two = equal_card_linear_dims(q, schema, MachineFleet::linear({1, 1}), cover);
  EXPECT_NEAR(two[0].sides[0], 16 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(total_volume(two), 256, 1e-9);
}

TEST(EqualLinearDims, VolumeAndProjectionProperties) {
  std::mt19937_64 rng(1);
  for (const auto& q : {oracle::cartesian(), oracle::binary_join(), oracle::star3(), oracle::triangle()}) {
    const auto cover = minimum_fractional_vertex_cover(q);
    for (int t = 0; t < 50; ++t) {
      const auto w = random_weights(rng, 20);
      const auto fleet = MachineFleet::linear(w);
      const std::uint64_t n = 32;
      const auto schema = InstanceSchema::uniform(q, n, 100);
      const auto dims = equal_card_linear_dims(q, schema, fleet, cover);
      const double nk = std::pow(static_cast<double>(n), static_cast<double>(q.num_variables()));
      EXPECT_NEAR(total_volume(dims), nk, 1e-9 * nk);
      const double norm = oracle::norm(w, to_double(cover.total));
      for (std::size_t c = 0; c < dims.size(); ++c) {
        for (const auto& atom : q.atoms()) {
          const double bound = static_cast<double>(w[c]) / norm * std::pow(static_cast<double>(n), static_cast<double>(atom.arity()));
          EXPECT_LE(dims[c].projection_volume(atom), bound * (1 + 1e-9));
        }
      }
      expect_monotone(dims, w);
    }
  }
}

TEST(EqualGeneralDims, LinearFleetMatchesLinearDims) {
  const auto q = oracle::triangle();
  const auto schema = InstanceSchema::uniform(q, 64, 100000);
  const auto fleet = MachineFleet::linear({8, 4, 2, 1, 1});
  const auto cover = minimum_fractional_vertex_cover(q);
  const double load = lower_bound_general(schema, fleet, maximum_fractional_edge_packing(q), 1e-9);
  const auto gen = equal_card_general_dims(q, schema, fleet, cover, load);
  const auto lin = equal_card_linear_dims(q, schema, fleet, cover);
  for (std::size_t c = 0; c < gen.size(); ++c) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(gen[c].sides[i], lin[c].sides[i], 1e-3 * lin[c].sides[i]);
  }
  EXPECT_GE(total_volume(gen), std::pow(64.0, 3) * (1 - 1e-9));
}

TEST(EqualGeneralDims, SingleMachineAndPolynomialPair) {
  const auto q = oracle::cartesian();
  const auto cover = minimum_fractional_vertex_cover(q);
  const auto packing = maximum_fractional_edge_packing(q);
  const auto schema = InstanceSchema::uniform(q, 16, 16);
  const MachineFleet one({{1, CostFunction::polynomial(2, 3)}});
  const auto single = equal_card_general_dims(q, schema, one, cover, lower_bound_general(schema, one, packing));
  EXPECT_DOUBLE_EQ(single[0].sides[0], 16);
  EXPECT_DOUBLE_EQ(single[0].sides[1], 16);

  const MachineFleet pair({{1, CostFunction::polynomial(2, 1)}, {2, CostFunction::polynomial(2, 4)}});
  const double load = lower_bound_general(schema, pair, packing, 1e-9);
  // Closed form m^2 / (1 + 4)^1 with the integer floor of g* on top.
  EXPECT_NEAR(load, oracle::general_closed_form(16, 2, {1, 4}, 2), 0.25 * load);
  const auto dims = equal_card_general_dims(q, schema, pair, cover, load);
  EXPECT_GE(total_volume(dims), 256 * (1 - 1e-12));
  EXPECT_LE(dims[0].sides[0], dims[1].sides[0]);
}

TEST(EqualGeneralDims, ClampsAboveM) {
  const auto q = oracle::cartesian();
  const auto schema = InstanceSchema::uniform(q, 16, 16);
  const auto dims =
      equal_card_general_dims(q, schema, MachineFleet::linear({1}), minimum_fractional_vertex_cover(q), 100.0);
  EXPECT_TRUE(dims[0].clamped);
  EXPECT_DOUBLE_EQ(dims[0].sides[0], 16);
}

TEST(CartesianDims, Examples) {
  const auto q = oracle::cartesian();
  const auto schema = InstanceSchema::with_cardinalities(q, 16, {40, 40});
  const auto dims = cartesian_dims(q, schema, MachineFleet::linear({4, 1, 2}), 10.0);
  EXPECT_DOUBLE_EQ(dims[0].sides[0], 16);  // 10 * 4 >= 40
  EXPECT_DOUBLE_EQ(dims[0].sides[1], 16);
  EXPECT_DOUBLE_EQ(dims[1].sides[0], 16.0 * 10 / 40);
  EXPECT_DOUBLE_EQ(dims[2].sides[0], 8);  // L w = M / 2
  EXPECT_DOUBLE_EQ(dims[2].sides[1], 8);
}

TEST(StarDims, Examples) {
  const auto q = oracle::binary_join();
  const auto schema = InstanceSchema::uniform(q, 16, 64);
  const auto fleet = MachineFleet::linear({1, 1, 1, 1});
  const auto dims = binary_join_dims(q, schema, fleet, 64.0 / 4);
  for (const auto& d : dims) {
    EXPECT_DOUBLE_EQ(d.sides[0], 16);
    EXPECT_DOUBLE_EQ(d.sides[1], 4);  // z is the second variable in first-appearance order
    EXPECT_DOUBLE_EQ(d.sides[2], 16);
  }
  const auto single = binary_join_dims(q, schema, MachineFleet::linear({2}), 32);
  EXPECT_DOUBLE_EQ(single[0].sides[1], 16);

  const auto skew = InstanceSchema::with_cardinalities(q, 16, {64, 32});
  const auto sk = binary_join_dims(q, skew, MachineFleet::linear({1, 1}), 32);
  for (const auto& d : sk) {
    // projection onto S2(y,z) against (L w / M_2) n^2 = n^2: slack factor two
    EXPECT_LE(d.projection_volume(q.atom(1)), 32.0 / 32 * 256);
    EXPECT_DOUBLE_EQ(d.projection_volume(q.atom(1)), 128);
  }
  EXPECT_THROW(binary_join_dims(oracle::star3(), InstanceSchema::uniform(oracle::star3(), 8, 8), fleet, 2),
               UnsupportedQueryShape);
  EXPECT_THROW(star_dims(oracle::triangle(), InstanceSchema::uniform(oracle::triangle(), 8, 8), fleet, 2),
               UnsupportedQueryShape);
}

TEST(StarDims, ThreeArmsHubSide) {
  const auto q = oracle::star3();
  const auto schema = InstanceSchema::with_cardinalities(q, 8, {40, 20, 10});
  const auto dims = star_dims(q, schema, MachineFleet::linear({2, 1}), 10);
  EXPECT_DOUBLE_EQ(dims[0].sides[0], 8.0 * 20 / 40);
  EXPECT_DOUBLE_EQ(dims[1].sides[0], 8.0 * 10 / 40);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(dims[0].sides[i], 8);
}

TEST(Triangle, ProfileExamples) {
  const TriangleSizes equal{100, 100, 100};
  const auto p = triangle_profile(equal, 1, 25);
  EXPECT_EQ(p.label, TriangleLabel::Small);
  EXPECT_DOUBLE_EQ(p.fx, 0.5);
  EXPECT_DOUBLE_EQ(p.fy, 0.5);
  EXPECT_DOUBLE_EQ(p.fz, 0.5);
  EXPECT_THROW(triangle_profile(equal, 1, 100), std::domain_error);
  const TriangleSizes skew{400, 100, 25};
  // f_z^2 = Lw M1/(M2 M3) = Lw * 0.16, f_x^2 = Lw * 0.01, f_y^2 = Lw / 1600
  EXPECT_EQ(triangle_profile(skew, 1, 4).label, TriangleLabel::Small);
  EXPECT_EQ(triangle_profile(skew, 1, 25).label, TriangleLabel::Medium);
  EXPECT_EQ(triangle_profile(skew, 1, 400).label, TriangleLabel::Big);
  const auto q = triangle_profile(skew, 3, 7);
  EXPECT_GE(q.fz, q.fx);
  EXPECT_GE(q.fx, q.fy);
}

TEST(Triangle, ContinuityAtBoundaries) {
  const TriangleSizes s{400, 100, 25};
  const double n = 64;
  // f_z = 1 at Lw = M2 M3 / M1, f_x = 1 at Lw = M1 M3 / M2.
  for (double boundary : {100.0 * 25 / 400, 400.0 * 25 / 100}) {
    const auto below = triangle_sides(s, 1, boundary * (1 - 1e-13), n);
    const auto above = triangle_sides(s, 1, boundary * (1 + 1e-13), n);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(below[i], above[i], 1e-9 * n) << boundary;
  }
}

TEST(Triangle, DimsCoverageProjectionAndOrder) {
  std::mt19937_64 rng(12);
  const auto q = oracle::triangle();
  for (int t = 0; t < 100; ++t) {
    const auto w = random_weights(rng, 12);
    std::vector<std::uint64_t> m{1 + rng() % 256, 1 + rng() % 256, 1 + rng() % 256};
    const auto schema = InstanceSchema::with_cardinalities(q, 16, m);
    const auto fleet = MachineFleet::linear(w);
    const double load = lower_bound_unequal(q, schema, fleet, 1e-9).lower;
    const auto dims = triangle_dims(q, schema, fleet, load);
    EXPECT_GE(total_volume(dims), 4096 * (1 - 1e-9));
    for (std::size_t c = 0; c < dims.size(); ++c) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double bound = load * static_cast<double>(w[c]) / static_cast<double>(m[j]) * 256;
        if (!dims[c].clamped) EXPECT_LE(dims[c].projection_volume(q.atom(j)), bound * (1 + 1e-9));
      }
      for (double s : dims[c].sides) {
        EXPECT_GT(s, 0);
        EXPECT_LE(s, 16 * (1 + 1e-12));
      }
    }
    expect_monotone(dims, w);
  }
}

TEST(UnequalDims, CoverageAndOrderForEveryShape) {
  std::mt19937_64 rng(13);
  struct Case {
    Query q;
    std::vector<Hyperrectangle> (*dims)(const Query&, const InstanceSchema&, const MachineFleet&, double);
  };
  const std::vector<Case> cases{{oracle::cartesian(), cartesian_dims},
                                {oracle::binary_join(), binary_join_dims},
                                {oracle::star3(), star_dims}};
  for (const auto& [q, fn] : cases) {
    for (int t = 0; t < 100; ++t) {
      const auto w = random_weights(rng, 16);
      std::vector<std::uint64_t> m;
      for (std::size_t j = 0; j < q.num_atoms(); ++j) m.push_back(1 + rng() % (q.atom(j).arity() == 1 ? 16 : 200));
      const auto schema = InstanceSchema::with_cardinalities(q, 16, m);
      const auto fleet = MachineFleet::linear(w);
      const double load = lower_bound_unequal(q, schema, fleet, 1e-9).lower;
      const auto dims = fn(q, schema, fleet, load);
      const double nk = std::pow(16.0, static_cast<double>(q.num_variables()));
      EXPECT_GE(total_volume(dims), nk * (1 - 1e-9)) << q.to_string();
      for (std::size_t c = 0; c < dims.size(); ++c) {
        for (std::size_t j = 0; j < q.num_atoms(); ++j) {
          const double bound = load * static_cast<double>(w[c]) / static_cast<double>(m[j]) *
                               std::pow(16.0, static_cast<double>(q.atom(j).arity()));
          EXPECT_LE(dims[c].projection_volume(q.atom(j)), bound * (1 + 1e-9)) << q.to_string();
        }
      }
      expect_monotone(dims, w);
    }
  }
}

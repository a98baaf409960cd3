#include "hetjoin/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hetjoin {

namespace {

constexpr double kClampSlack = 1e-9;

double clamp_unit(double ratio, bool& clamped) {
  if (ratio > 1.0) {
    if (ratio > 1.0 + kClampSlack) clamped = true;
    return 1.0;
  }
  return ratio;
}

void require_shape(const Query& q, std::initializer_list<QueryShape> allowed, std::string_view construction) {
  const auto shape = classify(q);
  if (std::find(allowed.begin(), allowed.end(), shape) == allowed.end()) {
    throw UnsupportedQueryShape("unsupported query shape: " + std::string(construction) +
                                " construction does not apply to a " + std::string(to_string(shape)) + " query");
  }
}

}  // namespace

double Hyperrectangle::volume() const {
  double v = 1;
  for (double s : sides) v *= s;
  return v;
}

double Hyperrectangle::projection_volume(const Atom& atom) const {
  double v = 1;
  for (auto i : atom.vars) v *= sides.at(i);
  return v;
}

std::vector<Hyperrectangle> equal_card_linear_dims(const Query& q, const InstanceSchema& schema,
                                                   const MachineFleet& fleet, const VertexCover& cover) {
  if (!schema.is_uniform()) throw std::invalid_argument("equal-cardinality dims need uniform cardinalities");
  const double norm = lp_norm(fleet, cover.total);
  const double n = static_cast<double>(schema.n);
  std::vector<Hyperrectangle> out;
  for (const auto& machine : fleet.machines()) {
    const double share = static_cast<double>(*machine.cost.linear_weight()) / norm;
    Hyperrectangle rect{machine.id, {}, false};
    for (std::size_t i = 0; i < q.num_variables(); ++i) {
      rect.sides.push_back(std::pow(share, to_double(cover.weights[i])) * n);
    }
    out.push_back(std::move(rect));
  }
  return out;
}

std::optional<std::vector<RationalVector>> equal_card_linear_dims_exact(const Query& q, const InstanceSchema& schema,
                                                                        const MachineFleet& fleet,
                                                                        const VertexCover& cover) {
  if (!schema.is_uniform()) throw std::invalid_argument("equal-cardinality dims need uniform cardinalities");
  const auto norm = exact_lp_norm(fleet, cover.total);
  if (!norm) return std::nullopt;
  std::vector<RationalVector> out;
  for (auto w : fleet.linear_weights()) {
    const Rational share = Rational(w) / *norm;
    RationalVector sides;
    for (std::size_t i = 0; i < q.num_variables(); ++i) {
      auto factor = exact_pow(share, cover.weights[i]);
      if (!factor) return std::nullopt;
      sides.push_back(*factor * Rational(schema.n));
    }
    out.push_back(std::move(sides));
  }
  return out;
}

std::vector<Hyperrectangle> equal_card_general_dims(const Query& q, const InstanceSchema& schema,
                                                    const MachineFleet& fleet, const VertexCover& cover,
                                                    double load) {
  const double m = static_cast<double>(schema.uniform_cardinality());
  const double n = static_cast<double>(schema.n);
  std::vector<Hyperrectangle> out;
  for (const auto& machine : fleet.machines()) {
    Hyperrectangle rect{machine.id, {}, false};
    const double ratio = clamp_unit(static_cast<double>(machine.cost.pseudo_inverse(load)) / m, rect.clamped);
    for (std::size_t i = 0; i < q.num_variables(); ++i) {
      rect.sides.push_back(std::pow(ratio, to_double(cover.weights[i])) * n);
    }
    out.push_back(std::move(rect));
  }
  return out;
}

std::vector<Hyperrectangle> cartesian_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                           double load) {
  require_shape(q, {QueryShape::Cartesian}, "cartesian");
  const double n = static_cast<double>(schema.n);
  std::vector<Hyperrectangle> out;
  for (const auto& machine : fleet.machines()) {
    const double budget = load * static_cast<double>(*machine.cost.linear_weight());
    Hyperrectangle rect{machine.id, std::vector<double>(q.num_variables(), n), false};
    for (std::size_t j = 0; j < q.num_atoms(); ++j) {
      bool unused = false;
      const double ratio = clamp_unit(budget / static_cast<double>(schema.cardinalities[j]), unused);
      rect.sides[q.atom(j).vars.front()] = ratio * n;
    }
    out.push_back(std::move(rect));
  }
  return out;
}

std::vector<Hyperrectangle> star_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                      double load) {
  require_shape(q, {QueryShape::Star, QueryShape::BinaryJoin}, "star");
  // The hub is the variable shared by every atom.
  std::size_t hub = 0;
  for (std::size_t i = 0; i < q.num_variables(); ++i) {
    bool everywhere = true;
    for (std::size_t j = 0; j < q.num_atoms(); ++j) everywhere = everywhere && q.atom_contains(j, i);
    if (everywhere) hub = i;
  }
  const double largest = static_cast<double>(*std::max_element(schema.cardinalities.begin(), schema.cardinalities.end()));
  const double n = static_cast<double>(schema.n);
  std::vector<Hyperrectangle> out;
  for (const auto& machine : fleet.machines()) {
    Hyperrectangle rect{machine.id, std::vector<double>(q.num_variables(), n), false};
    const double budget = load * static_cast<double>(*machine.cost.linear_weight());
    rect.sides[hub] = clamp_unit(budget / largest, rect.clamped) * n;
    out.push_back(std::move(rect));
  }
  return out;
}

std::vector<Hyperrectangle> binary_join_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                             double load) {
  require_shape(q, {QueryShape::BinaryJoin}, "binary-join");
  return star_dims(q, schema, fleet, load);
}

std::string_view to_string(TriangleLabel label) {
  switch (label) {
    case TriangleLabel::Small: return "small";
    case TriangleLabel::Medium: return "medium";
    case TriangleLabel::Big: return "big";
  }
  return "unknown";
}

TriangleRoles triangle_roles(const Query& q, const InstanceSchema& schema) {
  require_shape(q, {QueryShape::Triangle}, "triangle");
  TriangleRoles roles;
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return schema.cardinalities[a] > schema.cardinalities[b];
  });
  roles.atoms = order;
  auto shared = [&](std::size_t a, std::size_t b) {
    for (auto v : q.atom(a).vars) {
      if (q.atom_contains(b, v)) return v;
    }
    throw std::logic_error("triangle atoms share no variable");
  };
  roles.x = shared(order[0], order[2]);
  roles.y = shared(order[0], order[1]);
  roles.z = shared(order[1], order[2]);
  roles.sizes = {static_cast<double>(schema.cardinalities[order[0]]),
                 static_cast<double>(schema.cardinalities[order[1]]),
                 static_cast<double>(schema.cardinalities[order[2]])};
  return roles;
}

namespace {

TriangleProfile triangle_factors(const TriangleSizes& s, double weight, double load) {
  const double budget = load * weight;
  TriangleProfile p;
  p.fx = std::sqrt(budget * s.middle / (s.largest * s.smallest));
  p.fy = std::sqrt(budget * s.smallest / (s.largest * s.middle));
  p.fz = std::sqrt(budget * s.largest / (s.middle * s.smallest));
  if (p.fz < 1) {
    p.label = TriangleLabel::Small;
  } else if (p.fx < 1) {
    p.label = TriangleLabel::Medium;
  } else {
    p.label = TriangleLabel::Big;
  }
  return p;
}

}  // namespace

TriangleProfile triangle_profile(const TriangleSizes& sizes, double weight, double load) {
  auto p = triangle_factors(sizes, weight, load);
  if (p.fy >= 1) {
    throw std::domain_error("triangle profile: f_y >= 1 is outside the small/medium/big classes");
  }
  return p;
}

std::array<double, 3> triangle_sides(const TriangleSizes& sizes, double weight, double load, double n,
                                     bool* clamped) {
  const auto p = triangle_factors(sizes, weight, load);
  bool capped = false;
  std::array<double, 3> out{};
  if (p.fy >= 1) {
    out = {n, n, n};
    capped = true;
  } else {
    switch (p.label) {
      case TriangleLabel::Small: out = {p.fx * n, p.fy * n, p.fz * n}; break;
      case TriangleLabel::Medium: out = {p.fx * n, p.fy * n, n}; break;
      case TriangleLabel::Big: out = {n, clamp_unit(load * weight / sizes.largest, capped) * n, n}; break;
    }
  }
  if (clamped) *clamped = capped;
  return out;
}

std::vector<Hyperrectangle> triangle_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                          double load) {
  const auto roles = triangle_roles(q, schema);
  const double n = static_cast<double>(schema.n);
  std::vector<Hyperrectangle> out;
  for (const auto& machine : fleet.machines()) {
    Hyperrectangle rect{machine.id, std::vector<double>(3, n), false};
    const auto sides =
        triangle_sides(roles.sizes, static_cast<double>(*machine.cost.linear_weight()), load, n, &rect.clamped);
    rect.sides[roles.x] = sides[0];
    rect.sides[roles.y] = sides[1];
    rect.sides[roles.z] = sides[2];
    out.push_back(std::move(rect));
  }
  return out;
}

}  // namespace hetjoin

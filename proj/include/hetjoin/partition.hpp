#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetjoin/bounds.hpp"
#include "hetjoin/cost_model.hpp"
#include "hetjoin/query.hpp"

namespace hetjoin {

// Thrown when an unequal-cardinality construction is requested for a query
// outside the four shapes that have one.
class UnsupportedQueryShape : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Machine c's box in the output space before packing. Sides are real and may
// be fractional or zero; they are indexed by query variable.
struct Hyperrectangle {
  int machine = 0;
  std::vector<double> sides;
  // Set when a side had to be capped at n (or a budget capped at m).
  bool clamped = false;

  double volume() const;
  double projection_volume(const Atom& atom) const;
};

// lambda_{c,i} = (w_c / ||w||_v)^{v_i} n
std::vector<Hyperrectangle> equal_card_linear_dims(const Query& q, const InstanceSchema& schema,
                                                   const MachineFleet& fleet, const VertexCover& cover);

// Same sides in exact arithmetic, available when every side is rational.
std::optional<std::vector<RationalVector>> equal_card_linear_dims_exact(const Query& q, const InstanceSchema& schema,
                                                                        const MachineFleet& fleet,
                                                                        const VertexCover& cover);

// lambda_{c,i} = min(g*_c(L*) / m, 1)^{v_i} n
std::vector<Hyperrectangle> equal_card_general_dims(const Query& q, const InstanceSchema& schema,
                                                    const MachineFleet& fleet, const VertexCover& cover,
                                                    double load);

// lambda_{c,j} = min(L* w_c / m_j, 1) n
std::vector<Hyperrectangle> cartesian_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                           double load);

// Hub side (L* w_c / m_max) n, arm sides n.
std::vector<Hyperrectangle> binary_join_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                             double load);
std::vector<Hyperrectangle> star_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                      double load);

enum class TriangleLabel { Small, Medium, Big };
std::string_view to_string(TriangleLabel label);

// Relation sizes ordered so that largest >= middle >= smallest.
struct TriangleSizes {
  double largest = 1;
  double middle = 1;
  double smallest = 1;
};

struct TriangleProfile {
  double fx = 0;
  double fy = 0;
  double fz = 0;
  TriangleLabel label = TriangleLabel::Small;
};

// Variable and atom roles of a triangle query after ordering the atoms by
// decreasing size: S1(x,y), S2(y,z), S3(z,x) with |S1| >= |S2| >= |S3|.
struct TriangleRoles {
  std::array<std::size_t, 3> atoms{};  // S1, S2, S3
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;
  TriangleSizes sizes;
};

TriangleRoles triangle_roles(const Query& q, const InstanceSchema& schema);

// Throws std::domain_error when f_y >= 1, which lies outside the three labels.
TriangleProfile triangle_profile(const TriangleSizes& sizes, double weight, double load);

// Sides (x, y, z) for one machine; machines past the big range get the full
// cube and are flagged as clamped.
std::array<double, 3> triangle_sides(const TriangleSizes& sizes, double weight, double load, double n,
                                     bool* clamped = nullptr);

std::vector<Hyperrectangle> triangle_dims(const Query& q, const InstanceSchema& schema, const MachineFleet& fleet,
                                          double load);

}  // namespace hetjoin

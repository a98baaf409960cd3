#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetjoin/lp.hpp"
#include "hetjoin/rational.hpp"

namespace hetjoin {

struct Atom {
  std::string name;
  std::vector<std::size_t> vars;  // indices into Query::variables()

  std::size_t arity() const { return vars.size(); }
};

// A full conjunctive query without self-joins, viewed as a hypergraph whose
// vertices are variables and whose edges are atoms.
class Query {
 public:
  // Throws std::invalid_argument when the hypergraph is malformed.
  Query(std::vector<std::string> variables, std::vector<Atom> atoms);

  // Accepts one atom per line ("S1(x,z)"), comma separated atoms, and an
  // optional head ("q(x,y,z) :- ..."). Without a head, variables are ordered
  // by first appearance. '#' starts a comment.
  static Query parse(std::string_view text);

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_atoms() const { return atoms_.size(); }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t j) const { return atoms_.at(j); }

  std::optional<std::size_t> find_variable(std::string_view name) const;
  std::optional<std::size_t> find_atom(std::string_view name) const;
  bool atom_contains(std::size_t atom, std::size_t var) const;
  std::size_t total_arity() const;

  // Round-trips through parse().
  std::string to_string() const;

  friend bool operator==(const Query& a, const Query& b);

 private:
  std::vector<std::string> variables_;
  std::vector<Atom> atoms_;
};

inline bool operator==(const Atom& a, const Atom& b) { return a.name == b.name && a.vars == b.vars; }

struct VertexCover {
  RationalVector weights;  // one per variable
  Rational total = 0;
};

struct EdgePacking {
  RationalVector weights;  // one per atom
  Rational total = 0;
};

bool is_vertex_cover(const Query& q, const RationalVector& weights);
bool is_edge_packing(const Query& q, const RationalVector& weights);

VertexCover make_cover(RationalVector weights);
EdgePacking make_packing(RationalVector weights);

// Vertices of the edge-packing polytope, sorted lexicographically.
std::vector<RationalVector> edge_packing_vertices(const Query& q);
// Vertices of the vertex-cover polyhedron, sorted lexicographically.
std::vector<RationalVector> vertex_cover_vertices(const Query& q);

// Minimal total; ties go to the lexicographically smallest vertex.
VertexCover minimum_fractional_vertex_cover(const Query& q);
// Maximal total; ties go to the lexicographically smallest vertex.
EdgePacking maximum_fractional_edge_packing(const Query& q);

enum class QueryShape { Cartesian, BinaryJoin, Star, Triangle, Other };

std::string_view to_string(QueryShape shape);

// Recognizes the four query shapes that have unequal-cardinality constructions.
// A star with two arms is reported as BinaryJoin.
QueryShape classify(const Query& q);

}  // namespace hetjoin

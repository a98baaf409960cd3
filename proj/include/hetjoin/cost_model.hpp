#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hetjoin/rational.hpp"

namespace hetjoin {

// g(N) = N / weight
struct LinearCost {
  std::int64_t weight = 1;
};

// g(N) = N^exponent / weight
struct PolynomialCost {
  double exponent = 1.0;
  double weight = 1.0;
};

// Piecewise-linear through (bits, cost) breakpoints starting at (0, 0); the
// last segment's slope continues past the final breakpoint. `growth_exponent`
// is the declared constant a > 1 bounding g((1+d)x) <= (1+d)^a g(x).
struct TableCost {
  std::vector<std::pair<std::uint64_t, double>> points;
  double growth_exponent = 2.0;
};

// A well-behaved cost function mapping bits received to cost. Construction
// validates g(0) = 0, strict monotonicity and (for tables) the growth cap.
class CostFunction {
 public:
  using Variant = std::variant<LinearCost, PolynomialCost, TableCost>;

  static CostFunction linear(std::int64_t weight);
  static CostFunction polynomial(double exponent, double weight);
  static CostFunction table(std::vector<std::pair<std::uint64_t, double>> points, double growth_exponent);

  double evaluate(std::uint64_t bits) const;
  // Largest x with evaluate(x) <= load; 0 when evaluate(1) > load.
  std::uint64_t pseudo_inverse(double load) const;

  bool is_linear() const { return std::holds_alternative<LinearCost>(impl_); }
  std::optional<std::int64_t> linear_weight() const;
  const Variant& variant() const { return impl_; }
  std::string describe() const;

 private:
  explicit CostFunction(Variant impl) : impl_(std::move(impl)) {}
  Variant impl_;
};

inline double evaluate_cost(const CostFunction& f, std::uint64_t bits) { return f.evaluate(bits); }
inline std::uint64_t pseudo_inverse(const CostFunction& f, double load) { return f.pseudo_inverse(load); }

struct Machine {
  int id = 0;
  CostFunction cost;
};

class MachineFleet {
 public:
  // Ids must be exactly 1..p in order.
  explicit MachineFleet(std::vector<Machine> machines);
  static MachineFleet linear(const std::vector<std::int64_t>& weights);

  std::size_t size() const { return machines_.size(); }
  const std::vector<Machine>& machines() const { return machines_; }
  const Machine& machine(std::size_t index) const { return machines_.at(index); }

  bool all_linear() const;
  // Throws std::invalid_argument unless every machine is linear.
  std::vector<std::int64_t> linear_weights() const;

 private:
  std::vector<Machine> machines_;
};

// (sum_c w_c^exponent)^(1/exponent) over a linear fleet.
double lp_norm(const MachineFleet& fleet, double exponent);
double lp_norm(const MachineFleet& fleet, const Rational& exponent);
// The same norm computed exactly, when it is rational.
std::optional<Rational> exact_lp_norm(const MachineFleet& fleet, const Rational& exponent);

}  // namespace hetjoin

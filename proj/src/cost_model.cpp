#include "hetjoin/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hetjoin {

namespace {

constexpr std::uint64_t kMaxBits = std::uint64_t{1} << 62;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double table_eval(const TableCost& t, std::uint64_t bits) {
  const auto& pts = t.points;
  auto it = std::upper_bound(pts.begin(), pts.end(), bits,
                             [](std::uint64_t b, const auto& p) { return b < p.first; });
  // it points past the segment start; clamp to the last segment for extrapolation.
  std::size_t hi = static_cast<std::size_t>(it - pts.begin());
  if (hi >= pts.size()) hi = pts.size() - 1;
  if (hi == 0) hi = 1;
  const auto& [x0, y0] = pts[hi - 1];
  const auto& [x1, y1] = pts[hi];
  const double slope = (y1 - y0) / static_cast<double>(x1 - x0);
  return y0 + slope * (static_cast<double>(bits) - static_cast<double>(x0));
}

// Largest x with f(x) <= load, starting from a guess and correcting locally
// or by galloping + bisection.
template <typename F>
std::uint64_t invert_monotone(F&& f, double load, std::uint64_t guess) {
  guess = std::min(guess, kMaxBits);
  if (f(guess) <= load) {
    std::uint64_t lo = guess;
    std::uint64_t step = 1;
    std::uint64_t hi = guess + step;
    while (hi < kMaxBits && f(hi) <= load) {
      lo = hi;
      step *= 2;
      hi = std::min(kMaxBits, lo + step);
    }
    if (f(hi) <= load) return hi;
    // f(lo) <= load < f(hi)
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (f(mid) <= load ? lo : hi) = mid;
    }
    return lo;
  }
  std::uint64_t hi = guess;
  std::uint64_t step = 1;
  std::uint64_t lo = guess >= step ? guess - step : 0;
  while (lo > 0 && f(lo) > load) {
    hi = lo;
    step *= 2;
    lo = lo >= step ? lo - step : 0;
  }
  // f(lo) <= load (f(0) = 0 <= load) and f(hi) > load
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (f(mid) <= load ? lo : hi) = mid;
  }
  return lo;
}

std::uint64_t guess_from(double x) {
  if (!(x > 0)) return 0;
  if (x >= static_cast<double>(kMaxBits)) return kMaxBits;
  return static_cast<std::uint64_t>(std::floor(x));
}

}  // namespace

CostFunction CostFunction::linear(std::int64_t weight) {
  if (weight <= 0) throw std::invalid_argument("linear cost weight must be a positive integer");
  return CostFunction(LinearCost{weight});
}

CostFunction CostFunction::polynomial(double exponent, double weight) {
  if (!(exponent > 0) || !std::isfinite(exponent)) throw std::invalid_argument("polynomial exponent must be positive");
  if (!(weight > 0) || !std::isfinite(weight)) throw std::invalid_argument("polynomial weight must be positive");
  return CostFunction(PolynomialCost{exponent, weight});
}

CostFunction CostFunction::table(std::vector<std::pair<std::uint64_t, double>> points, double growth_exponent) {
  if (points.size() < 2) throw std::invalid_argument("cost table needs at least two breakpoints");
  if (points.front().first != 0 || points.front().second != 0.0) {
    throw std::invalid_argument("cost table must start at (0, 0)");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first <= points[i - 1].first) throw std::invalid_argument("cost table bits must strictly increase");
    if (!(points[i].second > points[i - 1].second)) {
      throw std::invalid_argument("cost table costs must strictly increase");
    }
  }
  if (!(growth_exponent > 1)) throw std::invalid_argument("cost table growth exponent must exceed 1");
  // Growth cap sampled on every pair of breakpoints with x >= 1.
  for (std::size_t i = 1; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double x = static_cast<double>(points[i].first);
      const double y = static_cast<double>(points[j].first);
      const double cap = std::pow(y / x, growth_exponent) * points[i].second;
      if (points[j].second > cap * (1 + 1e-12)) {
        std::ostringstream msg;
        msg << "cost table violates growth cap a=" << growth_exponent << " between bits " << points[i].first
            << " and " << points[j].first;
        throw std::invalid_argument(msg.str());
      }
    }
  }
  return CostFunction(TableCost{std::move(points), growth_exponent});
}

double CostFunction::evaluate(std::uint64_t bits) const {
  return std::visit(overloaded{
                        [&](const LinearCost& c) { return static_cast<double>(bits) / static_cast<double>(c.weight); },
                        [&](const PolynomialCost& c) {
                          return std::pow(static_cast<double>(bits), c.exponent) / c.weight;
                        },
                        [&](const TableCost& c) { return bits == 0 ? 0.0 : table_eval(c, bits); },
                    },
                    impl_);
}

std::uint64_t CostFunction::pseudo_inverse(double load) const {
  if (std::isnan(load) || load < 0) throw std::invalid_argument("pseudo_inverse: load must be nonnegative");
  if (std::isinf(load)) return kMaxBits;
  auto f = [this](std::uint64_t x) { return evaluate(x); };
  const std::uint64_t guess = std::visit(
      overloaded{
          [&](const LinearCost& c) { return guess_from(load * static_cast<double>(c.weight)); },
          [&](const PolynomialCost& c) { return guess_from(std::pow(load * c.weight, 1.0 / c.exponent)); },
          [&](const TableCost&) { return std::uint64_t{0}; },
      },
      impl_);
  return invert_monotone(f, load, guess);
}

std::optional<std::int64_t> CostFunction::linear_weight() const {
  if (const auto* c = std::get_if<LinearCost>(&impl_)) return c->weight;
  return std::nullopt;
}

std::string CostFunction::describe() const {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const LinearCost& c) { out << "linear(w=" << c.weight << ")"; },
                 [&](const PolynomialCost& c) { out << "poly(a=" << c.exponent << ",w=" << c.weight << ")"; },
                 [&](const TableCost& c) { out << "table(" << c.points.size() << " pts,a=" << c.growth_exponent << ")"; },
             },
             impl_);
  return out.str();
}

MachineFleet::MachineFleet(std::vector<Machine> machines) : machines_(std::move(machines)) {
  if (machines_.empty()) throw std::invalid_argument("fleet must contain at least one machine");
  for (std::size_t i = 0; i < machines_.size(); ++i) {
    if (machines_[i].id != static_cast<int>(i + 1)) {
      throw std::invalid_argument("machine ids must be dense 1..p in order");
    }
  }
}

MachineFleet MachineFleet::linear(const std::vector<std::int64_t>& weights) {
  std::vector<Machine> machines;
  machines.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    machines.push_back(Machine{static_cast<int>(i + 1), CostFunction::linear(weights[i])});
  }
  return MachineFleet(std::move(machines));
}

bool MachineFleet::all_linear() const {
  return std::all_of(machines_.begin(), machines_.end(), [](const Machine& m) { return m.cost.is_linear(); });
}

std::vector<std::int64_t> MachineFleet::linear_weights() const {
  std::vector<std::int64_t> out;
  out.reserve(machines_.size());
  for (const auto& m : machines_) {
    auto w = m.cost.linear_weight();
    if (!w) throw std::invalid_argument("operation requires a fleet of linear cost functions");
    out.push_back(*w);
  }
  return out;
}

double lp_norm(const MachineFleet& fleet, double exponent) {
  if (!(exponent > 0)) throw std::invalid_argument("lp_norm: exponent must be positive");
  const auto weights = fleet.linear_weights();
  // Factor out the maximum weight so large exponents do not overflow.
  const double top = static_cast<double>(*std::max_element(weights.begin(), weights.end()));
  double sum = 0;
  for (auto w : weights) sum += std::pow(static_cast<double>(w) / top, exponent);
  return top * std::pow(sum, 1.0 / exponent);
}

double lp_norm(const MachineFleet& fleet, const Rational& exponent) {
  if (auto exact = exact_lp_norm(fleet, exponent)) return to_double(*exact);
  return lp_norm(fleet, to_double(exponent));
}

std::optional<Rational> exact_lp_norm(const MachineFleet& fleet, const Rational& exponent) {
  if (exponent <= 0) throw std::invalid_argument("lp_norm: exponent must be positive");
  const auto weights = fleet.linear_weights();
  Rational sum = 0;
  for (auto w : weights) {
    auto term = exact_pow(Rational(w), exponent);
    if (!term) return std::nullopt;
    sum += *term;
  }
  return exact_pow(sum, Rational(1) / exponent);
}

}  // namespace hetjoin

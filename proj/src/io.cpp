#include "hetjoin/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hetjoin {

namespace {

Json rationals_to_json(const RationalVector& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

RationalVector rationals_from_json(const Json& j) {
  RationalVector out;
  for (const auto& x : j) out.push_back(parse_rational(x.get<std::string>()));
  return out;
}

Json packing_to_json(const EdgePacking& p) {
  return Json{{"weights", rationals_to_json(p.weights)}, {"total", to_string(p.total)}};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MachineFleet fleet_from_json(const Json& j) {
  if (j.contains("weights")) {
    return MachineFleet::linear(j.at("weights").get<std::vector<std::int64_t>>());
  }
  if (!j.contains("machines")) throw std::runtime_error("fleet needs \"machines\" or \"weights\"");
  std::vector<Machine> machines;
  int next_id = 1;
  for (const auto& m : j.at("machines")) {
    const int id = m.value("id", next_id);
    ++next_id;
    const auto kind = m.value("kind", std::string("linear"));
    if (kind == "linear") {
      machines.push_back({id, CostFunction::linear(m.at("weight").get<std::int64_t>())});
    } else if (kind == "poly") {
      machines.push_back({id, CostFunction::polynomial(m.at("exponent").get<double>(), m.at("weight").get<double>())});
    } else if (kind == "table") {
      std::vector<std::pair<std::uint64_t, double>> points;
      for (const auto& pt : m.at("points")) points.emplace_back(pt.at(0).get<std::uint64_t>(), pt.at(1).get<double>());
      machines.push_back({id, CostFunction::table(std::move(points), m.at("growth").get<double>())});
    } else {
      throw std::runtime_error("unknown machine kind: " + kind);
    }
  }
  return MachineFleet(std::move(machines));
}

Json fleet_to_json(const MachineFleet& fleet) {
  Json machines = Json::array();
  for (const auto& m : fleet.machines()) {
    Json entry{{"id", m.id}};
    std::visit(
        [&](const auto& impl) {
          using T = std::decay_t<decltype(impl)>;
          if constexpr (std::is_same_v<T, LinearCost>) {
            entry["kind"] = "linear";
            entry["weight"] = impl.weight;
          } else if constexpr (std::is_same_v<T, PolynomialCost>) {
            entry["kind"] = "poly";
            entry["exponent"] = impl.exponent;
            entry["weight"] = impl.weight;
          } else {
            entry["kind"] = "table";
            Json pts = Json::array();
            for (const auto& [x, y] : impl.points) pts.push_back(Json::array({x, y}));
            entry["points"] = pts;
            entry["growth"] = impl.growth_exponent;
          }
        },
        m.cost.variant());
    machines.push_back(entry);
  }
  return Json{{"machines", machines}};
}

MachineFleet load_fleet(const std::filesystem::path& path) { return fleet_from_json(read_json_file(path)); }

Json bound_report_to_json(const BoundReport& r) {
  Json out{{"schema", kReportSchema},
           {"method", std::string(to_string(r.method))},
           {"lower_bound", r.lower},
           {"upper_predicted", r.upper_predicted}};
  if (r.packing) out["edge_packing"] = packing_to_json(*r.packing);
  if (r.cover) out["vertex_cover"] = Json{{"weights", rationals_to_json(r.cover->weights)}, {"total", to_string(r.cover->total)}};
  if (r.bracket) out["bracket"] = Json::array({r.bracket->lower, r.bracket->upper});
  if (!r.machine_packings.empty()) {
    Json packs = Json::array();
    for (const auto& p : r.machine_packings) packs.push_back(packing_to_json(p));
    out["machine_packings"] = packs;
  }
  if (!r.probes.empty()) {
    Json probes = Json::array();
    for (const auto& p : r.probes) probes.push_back(Json{{"load", p.load}, {"feasible", p.feasible}});
    out["probes"] = probes;
    out["doubling_probes"] = r.doubling_probes;
    out["monotonicity_violation"] = r.monotonicity_violation;
  }
  return out;
}

Json dims_to_json(const std::vector<Hyperrectangle>& dims) {
  Json out = Json::array();
  for (const auto& d : dims) out.push_back(Json{{"machine", d.machine}, {"sides", d.sides}, {"clamped", d.clamped}});
  return out;
}

Json plan_to_json(const Query& q, const Plan& plan) {
  Json out{{"schema", kReportSchema},
           {"query", q.to_string()},
           {"plan", std::string(to_string(plan.kind))},
           {"n", plan.schema.n},
           {"cardinalities", plan.schema.cardinalities},
           {"load", plan.load},
           {"bounds", bound_report_to_json(plan.bounds)},
           {"dims", dims_to_json(plan.dims)}};
  if (plan.norm) {
    Json norm{{"exponent", to_string(plan.bounds.cover->total)}, {"value", *plan.norm}};
    if (plan.exact_norm) norm["exact"] = to_string(*plan.exact_norm);
    out["norm"] = norm;
  }
  if (!plan.labels.empty()) out["labels"] = plan.labels;
  return out;
}

Json placement_to_json(const Placement& p) {
  Json machines = Json::array();
  for (const auto& m : p.machines) {
    machines.push_back(Json{{"machine", m.machine},
                            {"used", m.used},
                            {"rounded", m.rounded},
                            {"lo", rationals_to_json(m.lo)},
                            {"hi", rationals_to_json(m.hi)},
                            {"grid_lo", m.grid_lo},
                            {"grid_hi", m.grid_hi}});
  }
  Json nodes = Json::array();
  for (const auto& nd : p.nodes) {
    nodes.push_back(Json{{"shape", nd.shape}, {"machine", nd.machine}, {"children", nd.children}, {"grid", nd.grid}});
  }
  return Json{{"schema", kReportSchema}, {"n", p.n},         {"k", p.k},         {"f", rationals_to_json(p.scale)},
              {"root_shape", p.root_shape}, {"root", p.root}, {"machines", machines}, {"nodes", nodes},
              {"trace", p.trace}};
}

Placement placement_from_json(const Json& j) {
  try {
    if (j.at("schema").get<int>() != kReportSchema) throw std::runtime_error("unsupported placement schema");
    Placement p;
    p.n = j.at("n").get<std::uint64_t>();
    p.k = j.at("k").get<std::size_t>();
    p.scale = rationals_from_json(j.at("f"));
    p.root_shape = j.at("root_shape").get<std::vector<int>>();
    p.root = j.at("root").get<std::size_t>();
    p.trace = j.value("trace", std::vector<std::string>{});
    for (const auto& m : j.at("machines")) {
      MachinePlacement mp;
      mp.machine = m.at("machine").get<int>();
      mp.used = m.at("used").get<bool>();
      mp.rounded = m.at("rounded").get<std::vector<int>>();
      mp.lo = rationals_from_json(m.at("lo"));
      mp.hi = rationals_from_json(m.at("hi"));
      mp.grid_lo = m.at("grid_lo").get<std::vector<std::int64_t>>();
      mp.grid_hi = m.at("grid_hi").get<std::vector<std::int64_t>>();
      p.machines.push_back(std::move(mp));
    }
    for (const auto& nd : j.at("nodes")) {
      MergeNode node;
      node.shape = nd.at("shape").get<std::vector<int>>();
      node.machine = nd.at("machine").get<int>();
      node.children = nd.at("children").get<std::vector<std::size_t>>();
      node.grid = nd.at("grid").get<std::vector<int>>();
      p.nodes.push_back(std::move(node));
    }
    // The tree must be well formed before anything walks it.
    if (p.root >= p.nodes.size()) throw std::runtime_error("root index out of range");
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      const auto& nd = p.nodes[i];
      if (nd.shape.size() != p.k) throw std::runtime_error("node shape has the wrong dimension");
      if (nd.is_leaf()) {
        if (!nd.children.empty()) throw std::runtime_error("leaf node with children");
        continue;
      }
      if (nd.grid.size() != p.k || nd.children.empty()) throw std::runtime_error("internal node without a grid");
      std::size_t cells = 1;
      for (std::size_t d = 0; d < p.k; ++d) {
        if (nd.grid[d] < 1 || nd.grid[d] > (1 << 20)) throw std::runtime_error("node grid out of range");
        cells *= static_cast<std::size_t>(nd.grid[d]);
      }
      if (cells != nd.children.size()) throw std::runtime_error("node grid does not match its children");
      for (auto c : nd.children) {
        if (c >= i) throw std::runtime_error("child index must precede its parent");
        for (std::size_t d = 0; d < p.k; ++d) {
          const int gap = nd.shape[d] - p.nodes[c].shape[d];
          if (gap < 0 || gap > 20 || (1 << gap) != nd.grid[d]) {
            throw std::runtime_error("child shape does not tile its parent");
          }
        }
      }
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed placement: ") + e.what());
  }
}

Json load_report_to_json(const LoadReport& r) {
  Json machines = Json::array();
  for (const auto& m : r.machines) {
    machines.push_back(Json{{"id", m.machine},
                            {"bits", m.bits},
                            {"tuples_per_atom", m.tuples_per_atom},
                            {"cost", m.cost},
                            {"output_tuples", m.output_tuples}});
  }
  return Json{{"schema", kReportSchema},    {"machines", machines}, {"max_cost", r.max_cost},
              {"lower_bound", r.lower_bound}, {"ratio", r.ratio},     {"output_size", r.output_size}};
}

void write_dims_csv(std::ostream& out, const Query& q, const std::vector<Hyperrectangle>& dims) {
  out << "machine,var,lambda\n";
  for (const auto& d : dims) {
    for (std::size_t i = 0; i < d.sides.size(); ++i) {
      out << d.machine << "," << q.variables()[i] << "," << format_double(d.sides[i]) << "\n";
    }
  }
}

std::vector<Hyperrectangle> read_dims_csv(std::istream& in, const Query& q) {
  std::string line;
  if (!std::getline(in, line) || line != "machine,var,lambda") throw std::runtime_error("bad dims CSV header");
  std::map<int, Hyperrectangle> by_machine;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string machine, var, lambda;
    if (!std::getline(fields, machine, ',') || !std::getline(fields, var, ',') || !std::getline(fields, lambda)) {
      throw std::runtime_error("bad dims CSV row: " + line);
    }
    const auto idx = q.find_variable(var);
    if (!idx) throw std::runtime_error("dims CSV names unknown variable " + var);
    auto& rect = by_machine[std::stoi(machine)];
    rect.machine = std::stoi(machine);
    rect.sides.resize(q.num_variables(), 0.0);
    rect.sides[*idx] = std::stod(lambda);
  }
  std::vector<Hyperrectangle> out;
  for (auto& [id, rect] : by_machine) out.push_back(std::move(rect));
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace hetjoin

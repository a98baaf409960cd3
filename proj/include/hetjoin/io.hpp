#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetjoin/bounds.hpp"
#include "hetjoin/cost_model.hpp"
#include "hetjoin/engine.hpp"
#include "hetjoin/packing.hpp"
#include "hetjoin/partition.hpp"

namespace hetjoin {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

// {"machines": [{"id": 1, "kind": "linear", "weight": 4}, ...]} or the
// shorthand {"weights": [4, 4, 3]}. Polynomial machines carry "exponent" and
// "weight"; table machines carry "points" ([[bits, cost], ...]) and "growth".
MachineFleet fleet_from_json(const Json& j);
Json fleet_to_json(const MachineFleet& fleet);
MachineFleet load_fleet(const std::filesystem::path& path);

Json bound_report_to_json(const BoundReport& report);
Json dims_to_json(const std::vector<Hyperrectangle>& dims);
Json plan_to_json(const Query& q, const Plan& plan);

Json placement_to_json(const Placement& placement);
// Throws std::runtime_error on malformed or structurally impossible input.
Placement placement_from_json(const Json& j);

Json load_report_to_json(const LoadReport& report);

// CSV with header "machine,var,lambda"; lambda printed with 17 significant digits.
void write_dims_csv(std::ostream& out, const Query& q, const std::vector<Hyperrectangle>& dims);
std::vector<Hyperrectangle> read_dims_csv(std::istream& in, const Query& q);

Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hetjoin

// Command-line front end: plan, pack, gen, run, verify, sweep.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hetjoin/datagen.hpp"
#include "hetjoin/engine.hpp"
#include "hetjoin/io.hpp"

namespace {

using namespace hetjoin;

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

// One experiment. Filled from the config file first, then from flags.
struct ExperimentConfig {
  std::string query_text;
  Json fleet = Json{{"weights", {1}}};
  Distribution distribution = Distribution::Matching;
  DenseMode dense_mode = DenseMode::ExactCount;
  double theta = 0.5;
  std::uint64_t n = 8;
  std::vector<std::uint64_t> m;  // empty: n per atom (matching) or floor(theta n^r) (dense)
  PlanKind plan = PlanKind::EqualLinear;
  std::vector<std::uint64_t> seeds{0};
  unsigned threads = 1;
  double tol = 1e-6;
  std::string data_dir;
  std::string report_path;
  std::string placement_path;
  std::string out_path;
  std::string sweep_param;
  std::vector<double> sweep_values;
};

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

DenseMode parse_dense_mode(const std::string& text) {
  if (text == "exact") return DenseMode::ExactCount;
  if (text == "bernoulli") return DenseMode::Bernoulli;
  throw std::invalid_argument("unknown dense mode: " + text);
}

// Relative paths in a config file resolve against the file's directory.
std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& file) {
  const auto j = read_json_file(file);
  const auto base = file.parent_path();
  if (j.contains("query")) cfg.query_text = j.at("query").get<std::string>();
  if (j.contains("query_file")) cfg.query_text = read_text_file(resolve(base, j.at("query_file").get<std::string>()));
  if (j.contains("fleet")) cfg.fleet = j.at("fleet");
  if (j.contains("fleet_file")) cfg.fleet = read_json_file(resolve(base, j.at("fleet_file").get<std::string>()));
  if (j.contains("distribution")) {
    const auto& d = j.at("distribution");
    cfg.distribution = parse_distribution(d.at("kind").get<std::string>());
    cfg.theta = d.value("theta", cfg.theta);
    if (d.contains("mode")) cfg.dense_mode = parse_dense_mode(d.at("mode").get<std::string>());
    if (d.contains("m")) {
      const auto& m = d.at("m");
      cfg.m = m.is_array() ? m.get<std::vector<std::uint64_t>>() : std::vector<std::uint64_t>{m.get<std::uint64_t>()};
    }
  }
  cfg.n = j.value("n", cfg.n);
  if (j.contains("plan")) cfg.plan = parse_plan_kind(j.at("plan").get<std::string>());
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.threads = j.value("threads", cfg.threads);
  cfg.tol = j.value("tolerance", cfg.tol);
  if (j.contains("data_dir")) cfg.data_dir = resolve(base, j.at("data_dir").get<std::string>()).string();
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    if (o.contains("report")) cfg.report_path = resolve(base, o.at("report").get<std::string>()).string();
    if (o.contains("placement")) cfg.placement_path = resolve(base, o.at("placement").get<std::string>()).string();
    if (o.contains("out")) cfg.out_path = resolve(base, o.at("out").get<std::string>()).string();
  }
  if (j.contains("sweep")) {
    cfg.sweep_param = j.at("sweep").at("param").get<std::string>();
    cfg.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
  }
}

// Raw flag values; empty or unset means "keep the config value".
struct Flags {
  std::string config;
  std::string query_file;
  std::string query_text;
  std::string fleet_file;
  std::string weights;
  std::string dist;
  std::string dense_mode;
  std::optional<double> theta;
  std::optional<std::uint64_t> n;
  std::string m;
  std::string plan;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::optional<unsigned> threads;
  std::optional<double> tol;
  std::string data_dir;
  std::string report;
  std::string placement;
  std::string out;
  std::string param;
  std::string values;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config; flags override its fields");
  cmd->add_option("--query", f.query_file, "query file, one atom per line");
  cmd->add_option("--query-text", f.query_text, "query given inline, e.g. \"S1(x,y), S2(y,z)\"");
  cmd->add_option("--fleet", f.fleet_file, "fleet JSON file");
  cmd->add_option("--weights", f.weights, "linear fleet weights, comma separated");
  cmd->add_option("--dist", f.dist, "matching | dense");
  cmd->add_option("--dense-mode", f.dense_mode, "exact | bernoulli");
  cmd->add_option("--theta", f.theta, "density of dense relations");
  cmd->add_option("--n", f.n, "domain size");
  cmd->add_option("--m", f.m, "relation sizes: one value for all atoms or one per atom");
  cmd->add_option("--plan", f.plan, "equal-linear | equal-general | cartesian | binary-join | star | triangle");
  cmd->add_option("--seed", f.seed, "single seed");
  cmd->add_option("--seeds", f.seeds, "comma separated seeds");
  cmd->add_option("--threads", f.threads, "worker threads for routing and local joins");
  cmd->add_option("--tol", f.tol, "relative tolerance of the load searches");
  cmd->add_option("--data", f.data_dir, "read relations from this directory instead of generating them");
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) apply_config_file(cfg, f.config);
  if (!f.query_file.empty()) cfg.query_text = read_text_file(f.query_file);
  if (!f.query_text.empty()) cfg.query_text = f.query_text;
  if (!f.fleet_file.empty()) cfg.fleet = read_json_file(f.fleet_file);
  if (!f.weights.empty()) {
    std::vector<std::int64_t> w;
    for (auto x : parse_u64_list(f.weights)) w.push_back(static_cast<std::int64_t>(x));
    cfg.fleet = Json{{"weights", w}};
  }
  if (!f.dist.empty()) cfg.distribution = parse_distribution(f.dist);
  if (!f.dense_mode.empty()) cfg.dense_mode = parse_dense_mode(f.dense_mode);
  if (f.theta) cfg.theta = *f.theta;
  if (f.n) cfg.n = *f.n;
  if (!f.m.empty()) cfg.m = parse_u64_list(f.m);
  if (!f.plan.empty()) cfg.plan = parse_plan_kind(f.plan);
  if (f.seed) cfg.seeds = {*f.seed};
  if (!f.seeds.empty()) cfg.seeds = parse_u64_list(f.seeds);
  if (f.threads) cfg.threads = *f.threads;
  if (f.tol) cfg.tol = *f.tol;
  if (!f.data_dir.empty()) cfg.data_dir = f.data_dir;
  if (!f.report.empty()) cfg.report_path = f.report;
  if (!f.placement.empty()) cfg.placement_path = f.placement;
  if (!f.out.empty()) cfg.out_path = f.out;
  if (!f.param.empty()) cfg.sweep_param = f.param;
  if (!f.values.empty()) cfg.sweep_values = parse_double_list(f.values);
  if (cfg.seeds.empty()) throw std::invalid_argument("at least one seed is required");
  return cfg;
}

Query config_query(const ExperimentConfig& cfg) {
  if (cfg.query_text.empty()) throw std::invalid_argument("no query given (use --query or --query-text)");
  return Query::parse(cfg.query_text);
}

std::vector<std::uint64_t> cardinalities(const ExperimentConfig& cfg, const Query& q) {
  if (cfg.m.size() == 1) return std::vector<std::uint64_t>(q.num_atoms(), cfg.m.front());
  if (!cfg.m.empty()) {
    if (cfg.m.size() != q.num_atoms()) throw std::invalid_argument("--m needs one value or one per atom");
    return cfg.m;
  }
  std::vector<std::uint64_t> m;
  for (const auto& a : q.atoms()) {
    m.push_back(cfg.distribution == Distribution::Dense ? dense_cardinality(cfg.n, a.arity(), cfg.theta) : cfg.n);
  }
  return m;
}

DatabaseInstance make_instance(const ExperimentConfig& cfg, const Query& q, std::uint64_t seed) {
  if (!cfg.data_dir.empty()) return read_instance(cfg.data_dir, q);
  if (cfg.distribution == Distribution::Dense) return gen_dense(q, {cfg.n, cfg.theta, seed, cfg.dense_mode});
  return gen_matching(q, {cfg.n, cardinalities(cfg, q), std::nullopt, seed});
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_plan(const ExperimentConfig& cfg, bool emit_dims) {
  const auto q = config_query(cfg);
  const auto fleet = fleet_from_json(cfg.fleet);
  const auto schema = InstanceSchema::with_cardinalities(q, cfg.n, cardinalities(cfg, q));
  const auto plan = make_plan(q, schema, fleet, cfg.plan, cfg.tol);
  if (emit_dims) {
    std::ostringstream csv;
    write_dims_csv(csv, q, plan.dims);
    write_text(cfg.out_path, csv.str());
  } else {
    write_text(cfg.out_path, plan_to_json(q, plan).dump(2) + "\n");
  }
  return 0;
}

int cmd_pack(const ExperimentConfig& cfg, const std::string& dims_path, bool trace_only) {
  Placement placement;
  if (!dims_path.empty()) {
    const auto q = config_query(cfg);
    std::ifstream in(dims_path);
    if (!in) throw std::runtime_error("cannot read " + dims_path);
    placement = pack(read_dims_csv(in, q), cfg.n);
  } else {
    const auto q = config_query(cfg);
    const auto schema = InstanceSchema::with_cardinalities(q, cfg.n, cardinalities(cfg, q));
    placement = make_plan(q, schema, fleet_from_json(cfg.fleet), cfg.plan, cfg.tol).placement;
  }
  if (!trace_only) write_text(cfg.out_path, placement_to_json(placement).dump(2) + "\n");
  if (trace_only || !cfg.out_path.empty()) {
    for (const auto& line : placement.trace) std::cout << line << "\n";
  }
  return 0;
}

int cmd_gen(const ExperimentConfig& cfg, const std::string& dir) {
  const auto q = config_query(cfg);
  const auto db = make_instance(cfg, q, cfg.seeds.front());
  write_instance(dir, db);
  for (const auto& r : db.relations) std::cout << r.name << " " << r.size() << "\n";
  return 0;
}

int cmd_run(const ExperimentConfig& cfg, bool check) {
  const auto q = config_query(cfg);
  const auto fleet = fleet_from_json(cfg.fleet);
  Json reports = Json::array();
  int status = 0;
  for (auto seed : cfg.seeds) {
    const auto db = make_instance(cfg, q, seed);
    RunOptions options;
    options.threads = cfg.threads;
    options.tol = cfg.tol;
    const auto result = run_one_round(q, db, fleet, cfg.plan, seed, options);
    auto report = load_report_to_json(result.report);
    report["seed"] = seed;
    std::cout << "seed=" << seed << " output=" << result.report.output_size
              << " max_cost=" << format_double(result.report.max_cost)
              << " lower_bound=" << format_double(result.report.lower_bound)
              << " ratio=" << format_double(result.report.ratio);
    if (check) {
      const bool ok = result.output == brute_force_join(q, db);
      std::cout << (ok ? " oracle=PASS" : " oracle=FAIL");
      if (!ok) status = kExitFail;
    }
    std::cout << "\n";
    reports.push_back(std::move(report));
  }
  if (!cfg.report_path.empty()) {
    write_text(cfg.report_path, (reports.size() == 1 ? reports.front() : reports).dump(2) + "\n");
  }
  return status;
}

// Prints one PASS/FAIL line and returns the verdict.
bool report_check(const std::string& name, const std::vector<std::string>& failures) {
  std::cout << (failures.empty() ? "PASS " : "FAIL ") << name << "\n";
  for (std::size_t i = 0; i < failures.size() && i < 10; ++i) std::cout << "  " << failures[i] << "\n";
  return failures.empty();
}

std::vector<std::string> inflation_failures(const Query& q, const Plan& plan) {
  std::vector<std::string> out;
  const auto k = q.num_variables();
  for (std::size_t c = 0; c < plan.placement.machines.size(); ++c) {
    const auto& m = plan.placement.machines[c];
    if (!m.used) continue;
    const auto sides = m.sides();
    for (const auto& atom : q.atoms()) {
      Rational packed = 1;
      for (auto i : atom.vars) packed *= sides[i];
      const double bound = std::ldexp(plan.dims[c].projection_volume(atom), static_cast<int>(k + 1 + atom.arity()));
      if (to_double(packed) > bound * (1 + 1e-12)) {
        out.push_back("machine " + std::to_string(m.machine) + " atom " + atom.name + " inflated past 2^(k+1+r)");
      }
    }
  }
  if (plan.placement.scale_product() > pow2(static_cast<int>(k + 1))) out.push_back("scale product exceeds 2^(k+1)");
  return out;
}

std::vector<std::string> presize_failures(const Query& q, const Plan& plan) {
  double total = 0;
  for (const auto& d : plan.dims) total += d.volume();
  const double nk = std::pow(static_cast<double>(plan.schema.n), static_cast<double>(q.num_variables()));
  if (total < nk * (1 - 1e-9)) return {"box volumes sum to " + format_double(total) + " < n^k"};
  return {};
}

int cmd_verify(const ExperimentConfig& cfg) {
  if (!cfg.placement_path.empty()) {
    Placement p;
    try {
      p = placement_from_json(read_json_file(cfg.placement_path));
    } catch (const std::exception& e) {
      report_check("placement", {e.what()});
      return kExitFail;
    }
    return report_check("placement", check_placement(p)) ? 0 : kExitFail;
  }
  const auto q = config_query(cfg);
  const auto fleet = fleet_from_json(cfg.fleet);
  bool ok = true;
  for (auto seed : cfg.seeds) {
    const auto db = make_instance(cfg, q, seed);
    RunOptions options;
    options.threads = cfg.threads;
    options.tol = cfg.tol;
    std::cout << "seed " << seed << "\n";
    std::optional<RunResult> result;
    try {
      result = run_one_round(q, db, fleet, cfg.plan, seed, options);
    } catch (const UnsupportedQueryShape&) {
      throw;
    } catch (const std::logic_error& e) {
      ok = report_check("unique production", {e.what()}) && ok;
      continue;
    }
    const auto& plan = result->plan;
    ok = report_check("box volumes cover n^k", presize_failures(q, plan)) && ok;
    ok = report_check("placement", check_placement(plan.placement)) && ok;
    ok = report_check("projection inflation", inflation_failures(q, plan)) && ok;
    std::vector<std::string> oracle;
    const auto truth = brute_force_join(q, db);
    if (!(result->output == truth)) {
      oracle.push_back("output has " + std::to_string(result->output.size()) + " tuples, oracle " +
                       std::to_string(truth.size()));
    }
    ok = report_check("oracle equality (" + std::to_string(truth.size()) + " tuples)", oracle) && ok;
  }
  return ok ? 0 : kExitFail;
}

// Linear weights for the sweep: p machines of weight 1, or weights s^(p-c)
// rounded, c = 1..p, for a skew sweep.
std::vector<std::int64_t> skewed_weights(std::size_t p, double skew) {
  std::vector<std::int64_t> w;
  for (std::size_t c = 1; c <= p; ++c) w.push_back(std::max<std::int64_t>(1, std::llround(std::pow(skew, static_cast<double>(p - c)))));
  return w;
}

int cmd_sweep(const ExperimentConfig& base) {
  if (base.sweep_param.empty() || base.sweep_values.empty()) {
    throw std::invalid_argument("sweep needs --param and --values");
  }
  const auto q = config_query(base);
  std::cout << "param,value,seed,max_cost,lower_bound,ratio,output_size\n";
  for (double value : base.sweep_values) {
    auto cfg = base;
    if (cfg.sweep_param == "p") {
      cfg.fleet = Json{{"weights", skewed_weights(static_cast<std::size_t>(value), 1)}};
    } else if (cfg.sweep_param == "skew") {
      cfg.fleet = Json{{"weights", skewed_weights(fleet_from_json(base.fleet).size(), value)}};
    } else if (cfg.sweep_param == "theta") {
      cfg.theta = value;
    } else if (cfg.sweep_param == "m") {
      cfg.m = {static_cast<std::uint64_t>(value)};
    } else {
      throw std::invalid_argument("unknown sweep parameter: " + cfg.sweep_param + " (p, theta, m, skew)");
    }
    const auto fleet = fleet_from_json(cfg.fleet);
    for (auto seed : cfg.seeds) {
      const auto db = make_instance(cfg, q, seed);
      RunOptions options;
      options.threads = cfg.threads;
      options.tol = cfg.tol;
      const auto r = run_one_round(q, db, fleet, cfg.plan, seed, options).report;
      std::cout << cfg.sweep_param << "," << format_double(value) << "," << seed << "," << format_double(r.max_cost)
                << "," << format_double(r.lower_bound) << "," << format_double(r.ratio) << "," << r.output_size
                << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetjoin: one-round join planning and simulation on heterogeneous machines"};
  app.require_subcommand(1);
  Flags flags;

  auto* plan = app.add_subcommand("plan", "compute load bounds and per-machine boxes");
  add_common_flags(plan, flags);
  bool emit_dims = false;
  plan->add_flag("--emit-dims", emit_dims, "print the boxes as CSV (machine,var,lambda)");
  plan->add_option("--out", flags.out, "write to this file instead of stdout");

  auto* packc = app.add_subcommand("pack", "pack the boxes into a cover of the output space");
  add_common_flags(packc, flags);
  std::string dims_path;
  bool trace_only = false;
  packc->add_option("--dims", dims_path, "pack boxes read from a dims CSV instead of planning");
  packc->add_flag("--trace", trace_only, "print only the merge trace");
  packc->add_option("--out", flags.out, "write the placement JSON here and the trace to stdout");

  auto* gen = app.add_subcommand("gen", "generate relations as CSV files");
  add_common_flags(gen, flags);
  std::string gen_dir;
  gen->add_option("--dir", gen_dir, "output directory")->required();

  auto* run = app.add_subcommand("run", "simulate one round and report per-machine loads");
  add_common_flags(run, flags);
  bool check = false;
  run->add_option("--report", flags.report, "write the load report JSON here");
  run->add_flag("--check", check, "compare the output with the nested-loop join");

  auto* verify = app.add_subcommand("verify", "check placement invariants and oracle equality");
  add_common_flags(verify, flags);
  verify->add_option("--placement", flags.placement, "check this placement JSON file only");

  auto* sweep = app.add_subcommand("sweep", "vary one parameter and print a CSV of loads");
  add_common_flags(sweep, flags);
  sweep->add_option("--param", flags.param, "p | theta | m | skew");
  sweep->add_option("--values", flags.values, "comma separated values");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = build_config(flags);
    if (plan->parsed()) return cmd_plan(cfg, emit_dims);
    if (packc->parsed()) return cmd_pack(cfg, dims_path, trace_only);
    if (gen->parsed()) return cmd_gen(cfg, gen_dir);
    if (run->parsed()) return cmd_run(cfg, check);
    if (verify->parsed()) return cmd_verify(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

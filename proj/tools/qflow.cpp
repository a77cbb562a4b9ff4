// qflow: command-line front end for the routing pipeline.
//
//   qflow solve    --topology T --demands D --out DIR   -> DIR/solution.json
//   qflow extract  --topology T --demands D --out DIR   -> DIR/paths.json
//   qflow verify   --topology T --demands D --out DIR   -> DIR/verify.json
//   qflow simulate --topology T --demands D --out DIR   -> DIR/simulation.{json,csv}
//   qflow export-lp --topology T --demands D --out DIR  -> DIR/model.lp
//   qflow convert-graphml --input G.graphml --output T.json
//
// Exit codes: 0 ok, 2 bad input, 3 infeasible or unbounded LP, 4 numerical
// failure or failed verification, 5 verification failed with the oracle
// skipped.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "qflow/qflow.hpp"

namespace fs = std::filesystem;
using namespace qflow;

namespace {

enum ExitCode { kOk = 0, kInput = 2, kInfeasible = 3, kNumerical = 4, kSkippedWithFailures = 5 };

struct Options {
  std::string topology;
  std::string demands;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t trials = 100000;
  std::string schedule = "sequential";
  Tolerances tol;
  bool simulate = false;
  std::size_t oracle_cap = kDefaultEnumerationCap;
  // convert-graphml
  std::string input;
  std::string output;
  GraphmlOptions graphml;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_file(path, doc.dump(2) + "\n"); }

unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QFLOW_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

struct Loaded {
  NetworkGraph graph;
  std::vector<DemandSpec> specs;
};

Loaded load_inputs(const Options& o) {
  if (o.topology.empty() || o.demands.empty()) throw InputError("--topology and --demands are required");
  return {load_topology(read_json(o.topology)), parse_demands(read_json(o.demands))};
}

RunInfo run_info(const Options& o, const char* command) { return {command, o.seed, o.tol}; }

int cmd_solve(const Options& o) {
  const Loaded in = load_inputs(o);
  const SolveResult r = solve_instance(in.graph, in.specs, o.tol);
  write_json(fs::path(o.out) / "solution.json", solution_document(r, run_info(o, "solve")));
  std::cout << "total_rate " << sig12(r.flow.objective) << "\n";
  for (std::size_t i = 0; i < r.demands.size(); ++i) {
    if (!r.demands[i].feasible()) {
      std::cout << "demand " << i << " cannot be satisfied: target fidelity above elementary fidelity\n";
    }
  }
  return kOk;
}

int cmd_extract(const Options& o) {
  const Loaded in = load_inputs(o);
  const DemandSet d = reduce_demands(in.specs, in.graph);
  const LayeredGraph lg = build_layered_graph(in.graph, d);
  const auto subs = decompose_demands(d);
  const fs::path solution = fs::path(o.out) / "solution.json";
  if (!fs::exists(solution)) throw InputError("missing '" + solution.string() + "'; run solve first");
  const FlowSolution f = flow_from_document(read_json(solution.string()), lg, subs, in.graph.swap_success());
  const auto bad = check_flow_feasibility(f, lg, subs, o.tol.feas);
  if (!bad.empty()) throw InputError("solution document is not a feasible flow: " + bad.front().where);
  const PathAssignment pa = extract_paths(f, lg, subs, d.size(), in.graph.swap_success(), o.tol);
  write_json(fs::path(o.out) / "paths.json", paths_document(pa, in.graph, d, run_info(o, "extract")));
  std::cout << "paths " << pa.num_paths() << " total_rate " << sig12(pa.total_rate()) << "\n";
  return kOk;
}

SimulationConfig sim_config(const Options& o) {
  SimulationConfig cfg;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.scheduling = o.schedule == "round-robin" ? Scheduling::kRoundRobin : Scheduling::kSequential;
  cfg.threads = worker_threads();
  return cfg;
}

int cmd_simulate(const Options& o) {
  const Loaded in = load_inputs(o);
  const DemandSet d = reduce_demands(in.specs, in.graph);
  const fs::path paths = fs::path(o.out) / "paths.json";
  if (!fs::exists(paths)) throw InputError("missing '" + paths.string() + "'; run extract first");
  const PathAssignment pa = paths_from_document(read_json(paths.string()), in.graph, d);
  const SimulationReport rep = simulate_network(pa, in.graph, sim_config(o));
  write_json(fs::path(o.out) / "simulation.json", simulation_document(rep, in.graph, run_info(o, "simulate")));
  write_file(fs::path(o.out) / "simulation.csv", simulation_csv(rep, in.graph));
  std::cout << "simulated " << rep.paths.size() << " paths over " << rep.trials << " trials\n";
  return kOk;
}

int cmd_export_lp(const Options& o) {
  const Loaded in = load_inputs(o);
  const DemandSet d = reduce_demands(in.specs, in.graph);
  const LayeredGraph lg = build_layered_graph(in.graph, d);
  const auto subs = decompose_demands(d);
  const EdgeLp model = build_edge_lp(lg, subs, in.graph.swap_success());
  write_file(fs::path(o.out) / "model.lp", export_lp_text(model.lp));
  std::cout << "variables " << model.lp.num_variables() << " constraints " << model.lp.num_constraints() << "\n";
  return kOk;
}

int cmd_verify(const Options& o) {
  const Loaded in = load_inputs(o);
  const double q = in.graph.swap_success();
  nlohmann::json checks = nlohmann::json::array();
  bool failed = false;
  bool skipped = false;
  auto record = [&](const std::string& name, const std::string& status, const std::string& detail) {
    checks.push_back({{"name", name}, {"status", status}, {"detail", detail}});
    failed = failed || status == "fail";
    skipped = skipped || status == "skipped";
    std::cout << name << ": " << status << (detail.empty() ? "" : " (" + detail + ")") << "\n";
  };
  auto first_violation = [](const ValidationReport& r) {
    return r.empty() ? std::string() : r.front().kind + " " + r.front().where;
  };

  const SolveResult r = solve_instance(in.graph, in.specs, o.tol);
  record("edge_lp", "pass", "objective " + std::to_string(sig12(r.flow.objective)));

  const auto flow_report = check_flow_feasibility(r.flow, r.layered, r.subs, o.tol.feas);
  record("flow_feasible", flow_report.empty() ? "pass" : "fail", first_violation(flow_report));

  std::optional<PathAssignment> pa;
  try {
    pa = extract_instance(r, o.tol);
    const auto rep = verify_assignment(*pa, in.graph, r.demands, q, r.flow.objective, o.tol);
    std::string detail = rep.ok() ? std::to_string(pa->num_paths()) + " paths" : first_violation(rep.violations);
    if (!rep.notes.empty()) detail += "; " + std::to_string(rep.notes.size()) + " paths revisit a node";
    record("extraction", rep.ok() ? "pass" : "fail", detail);
  } catch (const NumericalError& e) {
    record("extraction", "fail", e.what());
  }

  try {
    const auto groups = sub_demand_path_sets(in.graph, r.demands, o.oracle_cap);
    const LpSolution path_sol = solve_lp(build_path_lp(groups, in.graph, q), simplex_options(o.tol));
    if (path_sol.status != LpStatus::kOptimal) {
      record("oracle_agreement", "fail", std::string("path LP is ") + to_string(path_sol.status));
    } else {
      const double gap = std::abs(path_sol.objective - r.flow.objective);
      const bool agree = gap <= o.tol.objective_slack(r.flow.objective);
      record("oracle_agreement", agree ? "pass" : "fail",
             "oracle " + std::to_string(sig12(path_sol.objective)) + " gap " + std::to_string(gap));
      const FlowSolution mapped = flow_from_path_rates(groups, path_sol.values, r.layered, r.subs, q);
      const auto mapped_report = check_flow_feasibility(mapped, r.layered, r.subs, o.tol.feas);
      record("oracle_to_edge_flow", mapped_report.empty() ? "pass" : "fail", first_violation(mapped_report));
    }
  } catch (const EnumerationCapError& e) {
    record("oracle_agreement", "skipped", e.what());
  }

  if (o.simulate && pa) {
    try {
      const SimulationReport rep = simulate_network(*pa, in.graph, sim_config(o));
      std::size_t outside = 0;
      for (const auto& p : rep.paths) {
        if (std::abs(p.empirical_rate - p.analytic_rate) > 4.0 * p.standard_error + 1e-12) ++outside;
      }
      record("simulation", outside == 0 ? "pass" : "fail",
             std::to_string(outside) + " of " + std::to_string(rep.paths.size()) + " paths outside 4 standard errors");
    } catch (const InfeasibleError& e) {
      record("simulation", "fail", e.what());
    }
  }

  nlohmann::json doc;
  doc["header"] = document_header(run_info(o, "verify"));
  doc["checks"] = checks;
  doc["passed"] = !failed;
  write_json(fs::path(o.out) / "verify.json", doc);
  if (!failed) return kOk;
  return skipped ? kSkippedWithFailures : kNumerical;
}

int cmd_convert(const Options& o) {
  const GraphData data = parse_graphml(read_file(o.input), o.graphml);
  const NetworkGraph g = NetworkGraph::from_data(data);
  write_json(o.output, serialize_topology(g));
  std::cout << "nodes " << g.num_nodes() << " directed edges " << g.num_edges() << "\n";
  return kOk;
}

void add_instance_flags(CLI::App* sub, Options& o) {
  sub->add_option("--topology", o.topology, "Topology JSON document")->required()->check(CLI::ExistingFile);
  sub->add_option("--demands", o.demands, "Demand JSON document")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_option("--eps", o.tol.eps, "Extraction epsilon")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--tol-feas", o.tol.feas, "Feasibility tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--tol-obj", o.tol.obj, "Objective tolerance")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_sim_flags(CLI::App* sub, Options& o) {
  sub->add_option("--trials", o.trials, "Monte-Carlo trials")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--schedule", o.schedule, "Link scheduling")
      ->capture_default_str()
      ->check(CLI::IsMember({"sequential", "round-robin"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement routing under fidelity constraints"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "Solve the edge-based LP and write solution.json");
  add_instance_flags(solve, o);
  auto* extract = app.add_subcommand("extract", "Extract paths from solution.json into paths.json");
  add_instance_flags(extract, o);
  auto* verify = app.add_subcommand("verify", "Cross-check the LP against the path oracle");
  add_instance_flags(verify, o);
  add_sim_flags(verify, o);
  verify->add_flag("--simulate", o.simulate, "Also simulate the extracted paths");
  verify->add_option("--oracle-cap", o.oracle_cap, "Maximum number of enumerated paths")->capture_default_str();
  auto* simulate = app.add_subcommand("simulate", "Simulate paths.json and write simulation.json/.csv");
  add_instance_flags(simulate, o);
  add_sim_flags(simulate, o);
  auto* export_lp = app.add_subcommand("export-lp", "Write the edge-based LP as model.lp");
  add_instance_flags(export_lp, o);

  auto* convert = app.add_subcommand("convert-graphml", "Convert a topology-zoo GraphML file");
  convert->add_option("--input", o.input, "GraphML file")->required()->check(CLI::ExistingFile);
  convert->add_option("--output", o.output, "Topology JSON to write")->required();
  convert->add_option("--cap-min", o.graphml.capacity_min, "Smallest drawn capacity")->capture_default_str();
  convert->add_option("--cap-max", o.graphml.capacity_max, "Largest drawn capacity")->capture_default_str();
  convert->add_option("--seed", o.graphml.seed, "Seed for drawn capacities")->capture_default_str();
  convert->add_option("--fidelity", o.graphml.elementary_fidelity, "Elementary fidelity")->capture_default_str();
  convert->add_option("--swap-success", o.graphml.swap_success, "Swap success probability")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*extract) return cmd_extract(o);
    if (*verify) return cmd_verify(o);
    if (*simulate) return cmd_simulate(o);
    if (*export_lp) return cmd_export_lp(o);
    if (*convert) return cmd_convert(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const EnumerationCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}

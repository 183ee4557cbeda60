#include "cellhom/runconfig.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cellhom/cellsolver.hpp"
#include "cellhom/csv.hpp"
#include "cellhom/fixtures.hpp"
#include "cellhom/gammacheck.hpp"
#include "cellhom/homog.hpp"
#include "cellhom/integrand.hpp"
#include "cellhom/numeric.hpp"
#include "cellhom/oracles.hpp"
#include "cellhom/structure.hpp"
#include "cellhom/taskpool.hpp"

namespace cellhom {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& msg) { fail(ErrorCode::InvalidConfig, msg); }

const json& need(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end())
    fail(ErrorCode::MissingParameter, std::string("missing field '") + key + "'");
  return *it;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) bad("unknown field '" + it.key() + "' in " + where);
  }
}

double as_num(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + " must be a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) bad(what + " must be an integer");
  return j.get<int>();
}

std::vector<int> as_int_list(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) bad(what + " must be a nonempty array of integers");
  std::vector<int> out;
  for (const auto& v : j) out.push_back(as_int(v, what + " entry"));
  return out;
}

std::vector<double> as_num_list(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) bad(what + " must be a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_num(v, what + " entry"));
  return out;
}

Vec2 as_point(const json& j, int dim, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    bad(what + " must be an array of " + std::to_string(dim) + " numbers");
  Vec2 p = Vec2::Zero();
  for (int d = 0; d < dim; ++d) p[d] = as_num(j[d], what + " entry");
  return p;
}

PeriodicStructure parse_structure(const json& j) {
  if (!j.is_object()) bad("structure must be an object");
  const std::string type = need(j, "type").get<std::string>();
  if (type == "euclidean") {
    check_keys(j, {"type", "dim"}, "structure");
    return build_euclidean(as_int(need(j, "dim"), "structure.dim"));
  }
  if (type == "graph") {
    check_keys(j, {"type", "dim", "vertices", "edges", "identifications"}, "structure");
    GraphSpec spec;
    spec.dim = as_int(need(j, "dim"), "structure.dim");
    for (const auto& v : need(j, "vertices"))
      spec.vertices.push_back(as_point(v, spec.dim, "vertex"));
    for (const auto& e : need(j, "edges")) {
      if (!e.is_array() || e.size() != 4)
        bad("edge must be [from, to, length, weight]");
      GraphEdge edge;
      edge.from = as_int(e[0], "edge.from");
      edge.to = as_int(e[1], "edge.to");
      edge.length = as_num(e[2], "edge.length");
      edge.weight = as_num(e[3], "edge.weight");
      spec.edges.push_back(edge);
    }
    if (j.contains("identifications")) {
      for (const auto& idf : j["identifications"]) {
        if (!idf.is_array() || idf.size() != 3)
          bad("identification must be [vertex, partner, shift]");
        GraphIdentification g;
        g.vertex = as_int(idf[0], "identification.vertex");
        g.partner = as_int(idf[1], "identification.partner");
        const json& shift = idf[2];
        if (!shift.is_array() || static_cast<int>(shift.size()) != spec.dim)
          bad("identification shift must have " + std::to_string(spec.dim) + " entries");
        for (int d = 0; d < spec.dim; ++d)
          g.shift[static_cast<std::size_t>(d)] = as_int(shift[d], "shift entry");
        spec.identifications.push_back(g);
      }
    }
    return build_periodic_graph(spec);
  }
  bad("structure.type must be 'euclidean' or 'graph'");
}

ParamMap parse_params(const json& j, const std::string& where) {
  ParamMap params;
  if (j.is_null()) return params;
  if (!j.is_object()) bad(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_number())
      params.num[it.key()] = it.value().get<double>();
    else if (it.value().is_string())
      params.str[it.key()] = it.value().get<std::string>();
    else
      bad(where + "." + it.key() + " must be a number or string");
  }
  return params;
}

struct ParsedIntegrand {
  IntegrandPtr L;
  ParamMap params;
  std::string id;
};

ParsedIntegrand parse_integrand(const json& j) {
  if (!j.is_object()) bad("integrand must be an object");
  check_keys(j, {"id", "params"}, "integrand");
  ParsedIntegrand out;
  out.id = need(j, "id").get<std::string>();
  if (j.contains("params")) out.params = parse_params(j["params"], "integrand.params");
  out.L = make_integrand(out.id, out.params);
  return out;
}

Eigen::MatrixXd parse_xi_entry(const json& j, int m, int n) {
  Eigen::MatrixXd xi(m, n);
  if (j.is_number()) {
    if (m * n != 1) bad("scalar xi entry needs a 1x1 gradient shape");
    xi(0, 0) = j.get<double>();
    return xi;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != m * n)
    bad("xi entry must be a number or a flat array of " + std::to_string(m * n) +
        " values (row-major)");
  int idx = 0;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) xi(r, c) = as_num(j[idx++], "xi entry");
  return xi;
}

std::vector<Eigen::MatrixXd> parse_xi_list(const json& cfg, int m, int n) {
  if (!cfg.contains("xi")) {
    if (m * n == 1) return default_xi_grid();
    fail(ErrorCode::MissingParameter, "missing field 'xi' (required unless the gradient is 1x1)");
  }
  const json& j = cfg["xi"];
  if (!j.is_array() || j.empty()) bad("xi must be a nonempty array");
  std::vector<Eigen::MatrixXd> out;
  for (const auto& entry : j) out.push_back(parse_xi_entry(entry, m, n));
  return out;
}

Eigen::MatrixXd parse_single_xi(const json& cfg, int m, int n) {
  const std::vector<Eigen::MatrixXd> list = parse_xi_list(cfg, m, n);
  if (list.size() != 1) bad("this command takes exactly one xi entry");
  return list.front();
}

CellDomain parse_domain(const json& cfg, int dim) {
  if (!cfg.contains("domain")) return CellDomain::scaled_cell(1);
  const json& j = cfg["domain"];
  if (!j.is_object()) bad("domain must be an object");
  const std::string type = need(j, "type").get<std::string>();
  if (type == "cell") {
    check_keys(j, {"type", "k", "offset"}, "domain");
    LatticeVec offset{0, 0};
    if (j.contains("offset")) {
      const json& o = j["offset"];
      if (!o.is_array() || static_cast<int>(o.size()) != dim)
        bad("domain.offset must have " + std::to_string(dim) + " entries");
      for (int d = 0; d < dim; ++d)
        offset[static_cast<std::size_t>(d)] = as_int(o[d], "offset entry");
    }
    return CellDomain::scaled_cell(j.contains("k") ? as_int(j["k"], "domain.k") : 1, offset);
  }
  if (type == "ball") {
    check_keys(j, {"type", "center", "rho"}, "domain");
    return CellDomain::ball(as_point(need(j, "center"), dim, "domain.center"),
                            as_num(need(j, "rho"), "domain.rho"));
  }
  bad("domain.type must be 'cell' or 'ball'");
}

Region parse_region(const json& cfg, int dim) {
  const json& j = need(cfg, "region");
  if (!j.is_object()) bad("region must be an object");
  const std::string type = need(j, "type").get<std::string>();
  if (type == "cube") {
    check_keys(j, {"type", "corner", "side"}, "region");
    return Region::cube(as_point(need(j, "corner"), dim, "region.corner"),
                        as_num(need(j, "side"), "region.side"));
  }
  if (type == "ball") {
    check_keys(j, {"type", "center", "radius"}, "region");
    return Region::ball(as_point(need(j, "center"), dim, "region.center"),
                        as_num(need(j, "radius"), "region.radius"));
  }
  bad("region.type must be 'cube' or 'ball'");
}

SolverParams parse_solver(const json& cfg, std::uint64_t seed) {
  SolverParams params;
  params.seed = seed;
  if (!cfg.contains("solver")) return params;
  const json& j = cfg["solver"];
  if (!j.is_object()) bad("solver must be an object");
  check_keys(j, {"max_iterations", "grad_tol", "multistart", "perturbation", "memory", "method"},
             "solver");
  if (j.contains("max_iterations"))
    params.max_iterations = as_int(j["max_iterations"], "solver.max_iterations");
  if (j.contains("grad_tol")) params.grad_tol = as_num(j["grad_tol"], "solver.grad_tol");
  if (j.contains("multistart")) params.multistart = as_int(j["multistart"], "solver.multistart");
  if (j.contains("perturbation"))
    params.perturbation = as_num(j["perturbation"], "solver.perturbation");
  if (j.contains("memory")) params.memory = as_int(j["memory"], "solver.memory");
  if (j.contains("method")) {
    const std::string m = j["method"].get<std::string>();
    if (m == "auto")
      params.method = SolverParams::Method::Auto;
    else if (m == "descent")
      params.method = SolverParams::Method::Descent;
    else if (m == "direct")
      params.method = SolverParams::Method::Direct;
    else
      bad("solver.method must be 'auto', 'descent', or 'direct'");
  }
  return params;
}

json solver_echo(const SolverParams& p) {
  json j;
  j["grad_tol"] = p.grad_tol;
  j["max_iterations"] = p.max_iterations;
  j["memory"] = p.memory;
  j["method"] = p.method == SolverParams::Method::Auto
                    ? "auto"
                    : (p.method == SolverParams::Method::Descent ? "descent" : "direct");
  j["multistart"] = p.multistart;
  j["perturbation"] = p.perturbation;
  return j;
}

json xi_json(const Eigen::MatrixXd& xi) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < xi.rows(); ++r)
    for (Eigen::Index c = 0; c < xi.cols(); ++c) arr.push_back(xi(r, c));
  return arr;
}

json xi_list_json(const std::vector<Eigen::MatrixXd>& list) {
  json arr = json::array();
  for (const auto& xi : list) arr.push_back(xi_json(xi));
  return arr;
}

struct OracleSpec {
  bool present = false;
  std::string id;
  ParamMap params;
};

OracleSpec parse_oracle(const json& cfg, const ParamMap& integrand_params) {
  OracleSpec spec;
  if (!cfg.contains("oracle")) return spec;
  const json& j = cfg["oracle"];
  spec.present = true;
  spec.params = integrand_params;  // oracle params default to the integrand's
  if (j.is_string()) {
    spec.id = j.get<std::string>();
    return spec;
  }
  if (!j.is_object()) bad("oracle must be a string or an object");
  check_keys(j, {"id", "params"}, "oracle");
  spec.id = need(j, "id").get<std::string>();
  if (j.contains("params")) {
    const ParamMap extra = parse_params(j["params"], "oracle.params");
    for (const auto& [k, v] : extra.num) spec.params.num[k] = v;
    for (const auto& [k, v] : extra.str) spec.params.str[k] = v;
  }
  return spec;
}

// Relative comparison with an absolute floor of 1 on the scale, so targets
// near zero get an absolute tolerance.
bool within_tol(double value, double expected, double tol) {
  return std::abs(value - expected) <= tol * std::max(1.0, std::abs(expected));
}

struct CommandOutput {
  std::string results_csv;
  json summary;
  std::map<std::string, std::string> extra;  // extra artifact files
  bool solver_failure = false;
  bool check_failed = false;
};

json homog_summary_json(const HomogSummary& s) {
  json j;
  j["error_estimate"] = s.error_estimate;
  j["k_gap"] = s.k_gap;
  j["k_star"] = s.k_star;
  j["lhom"] = s.lhom;
  j["res_gap"] = s.res_gap;
  j["valid"] = s.valid;
  j["w0_bound"] = s.w0_bound;
  j["xi"] = xi_json(s.xi);
  return j;
}

bool table_failed(const HomogResult& table) {
  if (table.any_failed) return true;
  for (const auto& s : table.summaries)
    if (!s.valid) return true;
  return false;
}

// ---- command handlers ------------------------------------------------------

CommandOutput run_validate(const json& cfg, std::uint64_t seed) {
  check_keys(cfg, {"command", "structure", "integrand", "seed"}, "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  ValidationReport report = validate_structure(s, seed);
  if (cfg.contains("integrand")) {
    const ParsedIntegrand pi = parse_integrand(cfg["integrand"]);
    const GrowthReport growth = validate_growth(*pi.L, s, 200, seed);
    std::ostringstream lower;
    lower << "alpha_hat=" << growth.alpha_hat << " declared=" << pi.L->info().alpha
          << (growth.coercivity_warning ? " (coercivity warning: lower bound exempt)" : "");
    report.entries.push_back({"growth-lower", !growth.alpha_violated, lower.str()});
    std::ostringstream upper;
    upper << "beta_hat=" << growth.beta_hat << " declared=" << pi.L->info().beta;
    report.entries.push_back({"growth-upper", !growth.beta_violated, upper.str()});
    report.entries.push_back(
        {"nonnegativity", growth.nonnegative, growth.nonnegative ? "all samples >= 0" : "negative sample found"});
  }

  CommandOutput out;
  CsvWriter csv;
  csv.row({"check", "pass", "detail"});
  json checks = json::array();
  for (const auto& e : report.entries) {
    csv.row({e.check, e.pass ? "true" : "false", e.detail});
    checks.push_back({{"check", e.check}, {"detail", e.detail}, {"pass", e.pass}});
  }
  out.results_csv = csv.str();
  out.summary["all_pass"] = report.all_pass();
  out.summary["checks"] = checks;
  out.summary["command"] = "validate";
  out.check_failed = !report.all_pass();
  return out;
}

CommandOutput run_cell(const json& cfg, std::uint64_t seed, double check_tol) {
  check_keys(cfg,
             {"command", "structure", "integrand", "xi", "domain", "resolution", "solver",
              "seed", "oracle", "check_tol"},
             "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  const ParsedIntegrand pi = parse_integrand(need(cfg, "integrand"));
  const Eigen::MatrixXd xi = parse_single_xi(cfg, pi.L->info().m, s.dim);
  const CellDomain domain = parse_domain(cfg, s.dim);
  const int resolution = as_int(need(cfg, "resolution"), "resolution");
  const SolverParams params = parse_solver(cfg, seed);

  const DofSpace space = discretize_cell(s, domain, resolution, pi.L->info().m);
  const SolveOutcome sol = solve_cell_problem(space, *pi.L, xi, params);

  CommandOutput out;
  out.solver_failure = sol.status == SolveStatus::Degenerate || !std::isfinite(sol.value);
  CsvWriter csv;
  csv.row({"s", "w0", "iterations", "grad_norm", "status"});
  csv.row({format_double(sol.value), format_double(sol.w0_value), std::to_string(sol.iterations),
           format_double(sol.grad_norm), to_string(sol.status)});
  out.results_csv = csv.str();

  out.summary["command"] = "cell";
  out.summary["grad_norm"] = sol.grad_norm;
  out.summary["iterations"] = sol.iterations;
  out.summary["s"] = sol.value;
  out.summary["solver"] = solver_echo(params);
  out.summary["start_values"] = sol.start_values;
  out.summary["status"] = to_string(sol.status);
  out.summary["w0"] = sol.w0_value;
  out.summary["xi"] = xi_json(xi);

  const OracleSpec oracle = parse_oracle(cfg, pi.params);
  if (oracle.present) {
    const double expected = oracle_value(oracle.id, oracle.params, xi);
    const bool pass = within_tol(sol.value, expected, check_tol);
    out.summary["oracle"] = {{"deviation", std::abs(sol.value - expected)},
                             {"id", oracle.id},
                             {"pass", pass},
                             {"tol", check_tol},
                             {"value", expected}};
    out.check_failed = !pass;
  }
  return out;
}

CommandOutput run_quasiconvexify(const json& cfg, std::uint64_t seed, double check_tol) {
  check_keys(cfg,
             {"command", "structure", "integrand", "x", "xi", "rho_list", "elements_per_rho",
              "solver", "seed", "oracle", "check_tol"},
             "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  const ParsedIntegrand pi = parse_integrand(need(cfg, "integrand"));
  const Eigen::MatrixXd xi = parse_single_xi(cfg, pi.L->info().m, s.dim);
  const Vec2 x = as_point(need(cfg, "x"), s.dim, "x");
  std::vector<double> rho_list{0.5, 0.25, 0.125};
  if (cfg.contains("rho_list")) rho_list = as_num_list(cfg["rho_list"], "rho_list");
  const int epr = cfg.contains("elements_per_rho")
                      ? as_int(cfg["elements_per_rho"], "elements_per_rho")
                      : 256;
  const SolverParams params = parse_solver(cfg, seed);

  const QcResult qc = quasiconvexify(s, *pi.L, x, xi, rho_list, epr, params);

  CommandOutput out;
  CsvWriter csv;
  csv.row({"rho", "resolution", "value"});
  for (std::size_t i = 0; i < qc.rhos.size(); ++i)
    csv.row({format_double(qc.rhos[i]), std::to_string(qc.resolutions[i]),
             format_double(qc.values[i])});
  out.results_csv = csv.str();

  out.summary["command"] = "quasiconvexify";
  out.summary["extrapolated"] = qc.extrapolated;
  out.summary["resolutions"] = qc.resolutions;
  out.summary["rhos"] = qc.rhos;
  out.summary["stabilization"] = qc.stabilization;
  out.summary["values"] = qc.values;
  out.summary["xi"] = xi_json(xi);
  for (double v : qc.values)
    if (!std::isfinite(v)) out.solver_failure = true;

  const OracleSpec oracle = parse_oracle(cfg, pi.params);
  if (oracle.present) {
    const double expected = oracle_value(oracle.id, oracle.params, xi);
    const bool pass = within_tol(qc.extrapolated, expected, check_tol);
    out.summary["oracle"] = {{"deviation", std::abs(qc.extrapolated - expected)},
                             {"id", oracle.id},
                             {"pass", pass},
                             {"tol", check_tol},
                             {"value", expected}};
    out.check_failed = !pass;
  }
  return out;
}

json homog_summary_block(const HomogResult& table) {
  json arr = json::array();
  for (const auto& s : table.summaries) arr.push_back(homog_summary_json(s));
  return arr;
}

CommandOutput run_homogenize(const json& cfg, std::uint64_t seed, double check_tol,
                             TaskPool& pool) {
  check_keys(cfg,
             {"command", "structure", "integrand", "xi", "k_list", "resolutions", "solver",
              "seed", "oracle", "check_tol"},
             "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  const ParsedIntegrand pi = parse_integrand(need(cfg, "integrand"));
  const std::vector<Eigen::MatrixXd> xi_list = parse_xi_list(cfg, pi.L->info().m, s.dim);
  std::vector<int> k_list{1, 2, 4};
  if (cfg.contains("k_list")) k_list = as_int_list(cfg["k_list"], "k_list");
  std::vector<int> resolutions{64, 128};
  if (cfg.contains("resolutions")) resolutions = as_int_list(cfg["resolutions"], "resolutions");
  const SolverParams params = parse_solver(cfg, seed);

  const HomogResult table = compute_lhom(s, pi.L, xi_list, k_list, resolutions, params, pool);

  CommandOutput out;
  out.results_csv = homog_table_csv(table);
  out.solver_failure = table_failed(table);
  out.summary["any_failed"] = table.any_failed;
  out.summary["command"] = "homogenize";
  out.summary["integrand"] = table.integrand_id;
  out.summary["k_list"] = table.k_list;
  out.summary["resolutions"] = table.resolutions;
  out.summary["structure"] = table.structure_id;
  out.summary["summaries"] = homog_summary_block(table);
  out.summary["xi"] = xi_list_json(table.xi_list);

  const OracleSpec oracle = parse_oracle(cfg, pi.params);
  if (oracle.present) {
    json values = json::array();
    json deviations = json::array();
    bool pass = true;
    for (const auto& sum : table.summaries) {
      const double expected = oracle_value(oracle.id, oracle.params, sum.xi);
      values.push_back(expected);
      if (!sum.valid) {
        deviations.push_back(nullptr);
        pass = false;
        continue;
      }
      const double dev = std::abs(sum.lhom - expected);
      deviations.push_back(dev);
      if (!within_tol(sum.lhom, expected, check_tol)) pass = false;
    }
    out.summary["oracle"] =
        {{"deviations", deviations}, {"id", oracle.id}, {"pass", pass}, {"tol", check_tol},
         {"values", values}};
    out.check_failed = !pass;
  }
  return out;
}

CommandOutput run_piecewise(const json& cfg, std::uint64_t seed, double check_tol,
                            TaskPool& pool) {
  check_keys(cfg,
             {"command", "components", "xi", "k_list", "resolutions", "solver", "seed",
              "expected", "check_tol"},
             "config");
  const json& comps_json = need(cfg, "components");
  if (!comps_json.is_array() || comps_json.empty())
    bad("components must be a nonempty array");

  std::vector<PiecewiseComponent> components;
  for (const auto& cj : comps_json) {
    if (!cj.is_object()) bad("component must be an object");
    check_keys(cj, {"structure", "integrand", "weight", "xi"}, "component");
    PiecewiseComponent comp;
    comp.structure = parse_structure(need(cj, "structure"));
    const ParsedIntegrand pi = parse_integrand(need(cj, "integrand"));
    comp.integrand = pi.L;
    comp.weight = as_num(need(cj, "weight"), "component.weight");
    if (cj.contains("xi")) {
      const json& xj = cj["xi"];
      if (!xj.is_array() || xj.empty()) bad("component xi must be a nonempty array");
      for (const auto& entry : xj)
        comp.xi_override.push_back(parse_xi_entry(entry, pi.L->info().m, comp.structure.dim));
    }
    components.push_back(std::move(comp));
  }

  std::vector<Eigen::MatrixXd> shared_xi;
  if (cfg.contains("xi")) {
    // shared entries must fit every component that relies on them
    for (const auto& comp : components) {
      if (!comp.xi_override.empty()) continue;
      shared_xi = [&] {
        std::vector<Eigen::MatrixXd> list;
        for (const auto& entry : cfg["xi"])
          list.push_back(
              parse_xi_entry(entry, comp.integrand->info().m, comp.structure.dim));
        return list;
      }();
      break;
    }
    if (shared_xi.empty() && !cfg["xi"].empty())
      bad("shared xi given but every component overrides it");
  }

  std::vector<int> k_list{1, 2, 4};
  if (cfg.contains("k_list")) k_list = as_int_list(cfg["k_list"], "k_list");
  std::vector<int> resolutions{64, 128};
  if (cfg.contains("resolutions")) resolutions = as_int_list(cfg["resolutions"], "resolutions");
  const SolverParams params = parse_solver(cfg, seed);

  const PiecewiseResult result =
      compute_lhom_piecewise(components, shared_xi, k_list, resolutions, params, pool);

  CommandOutput out;
  out.solver_failure = result.any_failed;
  CsvWriter csv;
  csv.row({"xi_index", "aggregate"});
  for (std::size_t j = 0; j < result.aggregate.size(); ++j)
    csv.row({std::to_string(j), format_double(result.aggregate[j])});
  out.results_csv = csv.str();

  json comp_arr = json::array();
  for (std::size_t i = 0; i < result.per_component.size(); ++i) {
    const HomogResult& table = result.per_component[i];
    json cj;
    cj["integrand"] = table.integrand_id;
    cj["structure"] = table.structure_id;
    cj["summaries"] = homog_summary_block(table);
    cj["weight"] = result.weights[i];
    comp_arr.push_back(cj);
    out.extra["component_" + std::to_string(i) + ".csv"] = homog_table_csv(table);
    if (table_failed(table)) out.solver_failure = true;
  }
  out.summary["aggregate"] = result.aggregate;
  out.summary["command"] = "homogenize-piecewise";
  out.summary["components"] = comp_arr;

  if (cfg.contains("expected")) {
    const std::vector<double> expected = as_num_list(cfg["expected"], "expected");
    if (expected.size() != result.aggregate.size())
      bad("expected must have one entry per xi");
    bool pass = true;
    for (std::size_t j = 0; j < expected.size(); ++j)
      if (!std::isfinite(result.aggregate[j]) ||
          !within_tol(result.aggregate[j], expected[j], check_tol))
        pass = false;
    out.summary["check"] = {{"expected", expected}, {"pass", pass}, {"tol", check_tol}};
    out.check_failed = !pass;
  }
  return out;
}

CommandOutput run_subadd(const json& cfg, std::uint64_t seed, TaskPool& pool) {
  check_keys(cfg,
             {"command", "structure", "integrand", "xi", "k_list", "resolutions", "solver",
              "seed"},
             "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  const ParsedIntegrand pi = parse_integrand(need(cfg, "integrand"));
  const std::vector<Eigen::MatrixXd> xi_list = parse_xi_list(cfg, pi.L->info().m, s.dim);
  std::vector<int> k_list{1, 2, 4};
  if (cfg.contains("k_list")) k_list = as_int_list(cfg["k_list"], "k_list");
  std::vector<int> resolutions{64, 128};
  if (cfg.contains("resolutions")) resolutions = as_int_list(cfg["resolutions"], "resolutions");
  const SolverParams params = parse_solver(cfg, seed);

  const HomogResult table = compute_lhom(s, pi.L, xi_list, k_list, resolutions, params, pool);
  const SubaddReport report = check_subadditivity(table);

  CommandOutput out;
  out.solver_failure = table_failed(table);
  CsvWriter csv;
  csv.row({"xi_index", "k", "ik", "s_k", "s_ik", "tol", "pass"});
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    csv.row({std::to_string(p.xi_index), std::to_string(p.k), std::to_string(p.ik),
             format_double(p.s_k), format_double(p.s_ik), format_double(p.tol),
             p.pass ? "true" : "false"});
    pairs.push_back({{"ik", p.ik},
                     {"k", p.k},
                     {"pass", p.pass},
                     {"s_ik", p.s_ik},
                     {"s_k", p.s_k},
                     {"tol", p.tol},
                     {"xi_index", p.xi_index}});
  }
  out.results_csv = csv.str();

  int zero_bound_failures = 0;
  for (const auto& z : report.zero_bound)
    if (!z.pass) ++zero_bound_failures;
  out.summary["all_pass"] = report.all_pass();
  out.summary["any_failed"] = table.any_failed;
  out.summary["command"] = "subadd-check";
  out.summary["pairs"] = pairs;
  out.summary["summaries"] = homog_summary_block(table);
  out.summary["zero_bound_failures"] = zero_bound_failures;
  out.summary["zero_bound_total"] = static_cast<int>(report.zero_bound.size());
  out.check_failed = !report.all_pass();
  out.extra["homog_table.csv"] = homog_table_csv(table);
  return out;
}

CommandOutput run_periodic(const json& cfg, std::uint64_t seed) {
  check_keys(cfg,
             {"command", "structure", "integrand", "x", "rho", "xi", "t_list", "resolution",
              "solver", "seed"},
             "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  const ParsedIntegrand pi = parse_integrand(need(cfg, "integrand"));
  const Eigen::MatrixXd xi = parse_single_xi(cfg, pi.L->info().m, s.dim);
  const Vec2 x = as_point(need(cfg, "x"), s.dim, "x");
  const double rho = as_num(need(cfg, "rho"), "rho");
  std::vector<int> t_list{8, 16, 32};
  if (cfg.contains("t_list")) t_list = as_int_list(cfg["t_list"], "t_list");
  const int resolution = as_int(need(cfg, "resolution"), "resolution");
  const SolverParams params = parse_solver(cfg, seed);

  const PeriodicReport report =
      periodic_limit_check(s, pi.L, x, rho, xi, t_list, resolution, params);

  CommandOutput out;
  CsvWriter csv;
  csv.row({"t", "value"});
  for (std::size_t i = 0; i < report.values.size(); ++i) {
    csv.row({std::to_string(report.t_list[i]), format_double(report.values[i])});
    if (!std::isfinite(report.values[i])) out.solver_failure = true;
  }
  out.results_csv = csv.str();
  out.summary["command"] = "periodic-check";
  out.summary["pass"] = report.pass;
  out.summary["t_list"] = report.t_list;
  out.summary["tail_mean"] = report.tail_mean;
  out.summary["tail_spread"] = report.tail_spread;
  out.summary["values"] = report.values;
  out.summary["xi"] = xi_json(xi);
  out.check_failed = !report.pass;
  return out;
}

CommandOutput run_gamma(const json& cfg, std::uint64_t seed, TaskPool& pool) {
  check_keys(cfg,
             {"command", "structure", "integrand", "xi", "domain", "t_list",
              "elements_per_period", "k_list", "resolutions", "solver", "seed", "check_tol"},
             "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  const ParsedIntegrand pi = parse_integrand(need(cfg, "integrand"));
  const Eigen::MatrixXd xi = parse_single_xi(cfg, pi.L->info().m, s.dim);
  const CellDomain domain = parse_domain(cfg, s.dim);
  std::vector<int> t_list{4, 8, 16};
  if (cfg.contains("t_list")) t_list = as_int_list(cfg["t_list"], "t_list");
  const int epp = cfg.contains("elements_per_period")
                      ? as_int(cfg["elements_per_period"], "elements_per_period")
                      : 16;
  std::vector<int> k_list{1, 2, 4};
  if (cfg.contains("k_list")) k_list = as_int_list(cfg["k_list"], "k_list");
  std::vector<int> resolutions{64, 128};
  if (cfg.contains("resolutions")) resolutions = as_int_list(cfg["resolutions"], "resolutions");
  const SolverParams params = parse_solver(cfg, seed);

  const HomogResult reference =
      compute_lhom(s, pi.L, {xi}, k_list, resolutions, params, pool);
  CommandOutput out;
  out.extra["homog_reference.csv"] = homog_table_csv(reference);
  if (table_failed(reference)) {
    out.solver_failure = true;
    out.summary["command"] = "gamma";
    out.summary["reference"] = homog_summary_block(reference);
    out.results_csv = "";
    return out;
  }
  const HomogSummary& ref = reference.summaries.front();

  const GammaReport report = gamma_experiment(s, pi.L, xi, domain, t_list, epp, ref.lhom,
                                              ref.error_estimate, params, pool);

  out.results_csv = gamma_table_csv(report);
  out.extra["deviation_plot.dat"] = gamma_plot_data(report);
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"deviation", e.deviation},
                       {"e_t", e.e_t},
                       {"resolution", e.resolution},
                       {"status", to_string(e.status)},
                       {"t", e.t}});
    if (e.status == SolveStatus::Degenerate || !std::isfinite(e.e_t))
      out.solver_failure = true;
  }
  out.summary["command"] = "gamma";
  out.summary["entries"] = entries;
  out.summary["final_deviation"] = report.final_deviation;
  out.summary["final_pass"] = report.final_pass;
  out.summary["lhom_err"] = report.lhom_err;
  out.summary["lhom_ref"] = report.lhom_ref;
  out.summary["monotone_pass"] = report.monotone_pass;
  out.summary["monotone_tol"] = report.monotone_tol;
  out.summary["pass"] = report.pass;
  out.summary["reference"] = homog_summary_block(reference);
  out.summary["xi"] = xi_json(xi);
  out.check_failed = !report.pass;
  return out;
}

CommandOutput run_cover(const json& cfg) {
  check_keys(cfg, {"command", "structure", "region", "t_list", "k", "seed"}, "config");
  const PeriodicStructure s = parse_structure(need(cfg, "structure"));
  const Region region = parse_region(cfg, s.dim);
  std::vector<int> t_list{8, 16, 32, 64};
  if (cfg.contains("t_list")) t_list = as_int_list(cfg["t_list"], "t_list");
  const int k = cfg.contains("k") ? as_int(cfg["k"], "k") : 1;

  CommandOutput out;
  CsvWriter csv;
  csv.row({"t", "inner_count", "outer_count", "inner_measure", "outer_measure",
           "region_measure", "gap_ratio"});
  json rows = json::array();
  std::vector<double> ratios;
  for (const int t : t_list) {
    const LatticeCover cover = lattice_cover(s, region, static_cast<double>(t), k);
    csv.row({std::to_string(t), std::to_string(cover.inner.size()),
             std::to_string(cover.outer.size()), format_double(cover.inner_measure),
             format_double(cover.outer_measure), format_double(cover.region_measure),
             format_double(cover.gap_ratio)});
    rows.push_back({{"gap_ratio", cover.gap_ratio},
                    {"inner_count", cover.inner.size()},
                    {"inner_measure", cover.inner_measure},
                    {"outer_count", cover.outer.size()},
                    {"outer_measure", cover.outer_measure},
                    {"region_measure", cover.region_measure},
                    {"t", t}});
    ratios.push_back(cover.gap_ratio);
  }
  out.results_csv = csv.str();

  bool shrinking = true;
  for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
    if (!(ratios[i + 1] < ratios[i] || (ratios[i] == 0.0 && ratios[i + 1] == 0.0)))
      shrinking = false;
  out.summary["command"] = "cover";
  out.summary["gap_ratios_shrinking"] = shrinking;
  out.summary["rows"] = rows;
  out.check_failed = !shrinking;
  return out;
}

// ---- artifact plumbing -----------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) bad("failed writing " + path.string());
}

json resolved_config(const json& cfg, std::uint64_t seed) {
  json resolved = cfg;
  resolved["seed"] = seed;
  return resolved;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BallOutsideRegion:
    case ErrorCode::InsufficientPairs:
    case ErrorCode::ProblemTooLarge:
      return 2;
    default:
      return 1;
  }
}

int run_from_options(const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if (opts.config_path.empty() == opts.fixture.empty())
      bad("exactly one of --config and --fixture is required");
    json cfg;
    std::string source;
    if (!opts.fixture.empty()) {
      cfg = json::parse(fixture_json(opts.fixture));
      source = "fixture:" + opts.fixture;
    } else {
      std::ifstream in(opts.config_path, std::ios::binary);
      if (!in) bad("cannot read config file " + opts.config_path);
      cfg = json::parse(in);
      source = "config:" + opts.config_path;
    }
    if (!cfg.is_object()) bad("config root must be an object");

    std::uint64_t seed = 0;
    if (opts.has_seed_override) {
      seed = opts.seed_override;
    } else {
      const json& js = need(cfg, "seed");
      if (!js.is_number_integer() || js.get<long long>() < 0)
        bad("seed must be a nonnegative integer");
      seed = js.get<std::uint64_t>();
    }
    const double check_tol =
        cfg.contains("check_tol") ? as_num(cfg["check_tol"], "check_tol") : 0.01;

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int tasks = opts.tasks > 0 ? opts.tasks : static_cast<int>(hw);
    TaskPool pool(tasks);

    const std::string command = need(cfg, "command").get<std::string>();
    CommandOutput out;
    if (command == "validate")
      out = run_validate(cfg, seed);
    else if (command == "cell")
      out = run_cell(cfg, seed, check_tol);
    else if (command == "quasiconvexify")
      out = run_quasiconvexify(cfg, seed, check_tol);
    else if (command == "homogenize")
      out = run_homogenize(cfg, seed, check_tol, pool);
    else if (command == "homogenize-piecewise")
      out = run_piecewise(cfg, seed, check_tol, pool);
    else if (command == "subadd-check")
      out = run_subadd(cfg, seed, pool);
    else if (command == "periodic-check")
      out = run_periodic(cfg, seed);
    else if (command == "gamma")
      out = run_gamma(cfg, seed, pool);
    else if (command == "cover")
      out = run_cover(cfg);
    else
      bad("unknown command '" + command + "'");

    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    write_file(dir / "config.json", resolved_config(cfg, seed).dump(2) + "\n");
    write_file(dir / "results.csv", out.results_csv);
    write_file(dir / "summary.json", out.summary.dump(2) + "\n");
    for (const auto& [name, content] : out.extra) write_file(dir / name, content);

    const auto wall =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    std::ostringstream manifest;
    manifest << "cellhom run manifest\n";
    manifest << "command: " << command << "\n";
    manifest << "source: " << source << "\n";
    manifest << "seed: " << seed << "\n";
    manifest << "tasks: " << tasks << "\n";
    manifest << "check: " << (opts.check ? "yes" : "no") << "\n";
    manifest << "compiler: " << __VERSION__ << "\n";
    manifest << "eigen: " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
             << EIGEN_MINOR_VERSION << "\n";
    manifest << "wall_ms: " << wall.count() << "\n";
    manifest << "artifacts: config.json results.csv summary.json";
    for (const auto& [name, content] : out.extra) manifest << " " << name;
    manifest << "\n";
    write_file(dir / "manifest.txt", manifest.str());

    if (out.solver_failure) {
      std::cerr << "solver failure: see " << (dir / "summary.json").string() << "\n";
      return 2;
    }
    if (opts.check && out.check_failed) {
      std::cerr << "check failed: see " << (dir / "summary.json").string() << "\n";
      return 3;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error: invalid-config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cellhom

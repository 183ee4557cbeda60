#include "cellhom/gammacheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "cellhom/csv.hpp"
#include "cellhom/error.hpp"
#include "cellhom/fespace.hpp"
#include "cellhom/numeric.hpp"
#include "cellhom/rng.hpp"

namespace cellhom {

namespace {

constexpr long long kDofCap2D = 300000;
constexpr long long kDofCapOther = 1000000;

// Cheap upper bound on the node count so oversized euclidean problems are
// rejected before any allocation; graph problems are checked after building.
long long euclidean_dof_bound(const PeriodicStructure& s, const CellDomain& domain,
                              int resolution, int m) {
  if (domain.type == CellDomain::Type::ScaledCell) {
    const long long n = static_cast<long long>(domain.k) * resolution;
    const long long nodes = s.dim == 2 ? (n + 1) * (n + 1) : (n + 1);
    return nodes * m;
  }
  if (s.dim == 1) {
    const long long n =
        std::max<long long>(2, std::llround(2.0 * domain.rho * resolution));
    return (n + 1) * m;
  }
  const long long half = static_cast<long long>(std::ceil(domain.rho * resolution)) + 1;
  return (2 * half + 1) * (2 * half + 1) * m;
}

}  // namespace

GammaReport gamma_experiment(const PeriodicStructure& structure, const IntegrandPtr& L,
                             const Eigen::MatrixXd& xi, const CellDomain& domain,
                             const std::vector<int>& t_list, int elements_per_period,
                             double lhom_ref, double lhom_err, const SolverParams& params,
                             TaskPool& pool) {
  if (!L) fail(ErrorCode::InvalidConfig, "integrand must be set");
  if (elements_per_period < 8)
    fail(ErrorCode::InvalidConfig, "elements per period must be >= 8, got " +
                                       std::to_string(elements_per_period));
  if (t_list.size() < 3) fail(ErrorCode::InvalidConfig, "t list needs at least 3 entries");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (t_list[i] < 1) fail(ErrorCode::InvalidConfig, "t must be >= 1");
    if (i > 0 && t_list[i] <= t_list[i - 1])
      fail(ErrorCode::InvalidConfig, "t list must be strictly increasing");
  }
  if (!(lhom_err >= 0.0))
    fail(ErrorCode::InvalidConfig, "reference error estimate must be >= 0");
  const int m = L->info().m;
  if (xi.rows() != m || xi.cols() != structure.dim)
    fail(ErrorCode::DimensionMismatch, "xi must be " + std::to_string(m) + "x" +
                                           std::to_string(structure.dim));

  const long long cap = (structure.kind == StructureKind::Euclidean && structure.dim == 2)
                            ? kDofCap2D
                            : kDofCapOther;
  if (structure.kind == StructureKind::Euclidean) {
    for (const int t : t_list) {
      const int res = elements_per_period * t;
      const long long bound = euclidean_dof_bound(structure, domain, res, m);
      if (bound > cap)
        fail(ErrorCode::ProblemTooLarge, "t=" + std::to_string(t) + " needs about " +
                                             std::to_string(bound) + " DOFs, cap " +
                                             std::to_string(cap));
    }
  }

  GammaReport report;
  report.lhom_ref = lhom_ref;
  report.lhom_err = lhom_err;
  report.entries.resize(t_list.size());

  std::vector<std::function<void()>> tasks;
  tasks.reserve(t_list.size());
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    GammaEntry& entry = report.entries[i];
    entry.t = t_list[i];
    entry.resolution = elements_per_period * t_list[i];
    tasks.push_back([&structure, &L, &xi, &domain, &entry, m, cap, params, lhom_ref, i] {
      const DofSpace space = discretize_cell(structure, domain, entry.resolution, m);
      if (space.n_dofs > cap)
        fail(ErrorCode::ProblemTooLarge, "t=" + std::to_string(entry.t) + " has " +
                                             std::to_string(space.n_dofs) + " DOFs, cap " +
                                             std::to_string(cap));
      const IntegrandPtr Lt = rescale_integrand(L, static_cast<double>(entry.t));
      SolverParams p = params;
      p.seed = mix_seed(params.seed, static_cast<std::uint64_t>(i));
      const SolveOutcome out = solve_cell_problem(space, *Lt, xi, p);
      entry.e_t = out.value;
      entry.status = out.status;
      entry.deviation = std::abs(out.value - lhom_ref);
    });
  }
  pool.run(tasks);

  const GammaEntry& last = report.entries.back();
  report.final_deviation = last.deviation;
  report.final_pass =
      last.deviation <= std::max(0.02 * std::abs(lhom_ref), lhom_err);

  report.monotone_tol = std::max(lhom_err, 1e-9 * (1.0 + std::abs(lhom_ref)));
  report.monotone_pass = true;
  const std::size_t n = report.entries.size();
  for (std::size_t i = n - 3; i + 1 < n; ++i) {
    if (report.entries[i + 1].deviation > report.entries[i].deviation + report.monotone_tol)
      report.monotone_pass = false;
  }
  report.pass = report.final_pass && report.monotone_pass;
  return report;
}

std::string gamma_table_csv(const GammaReport& report) {
  CsvWriter csv;
  csv.row({"t", "resolution", "e_t", "deviation", "status"});
  for (const GammaEntry& e : report.entries) {
    csv.row({std::to_string(e.t), std::to_string(e.resolution), format_double(e.e_t),
             format_double(e.deviation), to_string(e.status)});
  }
  return csv.str();
}

std::string gamma_plot_data(const GammaReport& report) {
  std::ostringstream out;
  for (const GammaEntry& e : report.entries)
    out << e.t << " " << format_double(e.deviation) << "\n";
  return out.str();
}

}  // namespace cellhom

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellhom/cellsolver.hpp"
#include "cellhom/integrand.hpp"
#include "cellhom/structure.hpp"
#include "cellhom/taskpool.hpp"

namespace cellhom {

struct GammaEntry {
  int t = 0;
  int resolution = 0;  // elements per unit length used for this t
  double e_t = 0.0;
  double deviation = 0.0;
  SolveStatus status = SolveStatus::Converged;
};

struct GammaReport {
  std::vector<GammaEntry> entries;
  double lhom_ref = 0.0;
  double lhom_err = 0.0;
  double final_deviation = 0.0;
  double monotone_tol = 0.0;
  bool final_pass = false;
  bool monotone_pass = false;
  bool pass = false;
};

// Minimizes the mean energy of the t-rescaled integrand over u = xi*x + w with
// w vanishing on the domain boundary, for each t in the schedule. The mesh is
// refined with t (elements_per_period elements per oscillation period, >= 8)
// so the oscillating coefficient stays resolved. The report compares each
// minimum against the homogenized reference: pass requires the final deviation
// within max(2% relative, lhom_err) and the last three deviations
// nonincreasing within a small slack. Problems whose DOF count exceeds the
// dimension-dependent cap are rejected with problem-too-large.
GammaReport gamma_experiment(const PeriodicStructure& structure, const IntegrandPtr& L,
                             const Eigen::MatrixXd& xi, const CellDomain& domain,
                             const std::vector<int>& t_list, int elements_per_period,
                             double lhom_ref, double lhom_err, const SolverParams& params,
                             TaskPool& pool);

// Report rows as RFC-4180 CSV: t, resolution, e_t, deviation, status.
std::string gamma_table_csv(const GammaReport& report);

// Two-column plot data (t and deviation per line), suitable for log-log axes.
std::string gamma_plot_data(const GammaReport& report);

}  // namespace cellhom

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellhom/cellsolver.hpp"
#include "cellhom/integrand.hpp"
#include "cellhom/structure.hpp"
#include "cellhom/taskpool.hpp"

namespace cellhom {

// One solved cell problem: effective energy s for (xi, k, resolution) plus the
// zero-competitor upper bound w0. Failed rows keep their error code and leave
// the table intact.
struct HomogRow {
  int xi_index = 0;
  int k = 1;
  int resolution = 0;
  double s = 0.0;
  double w0 = 0.0;
  SolveStatus status = SolveStatus::Converged;
  bool failed = false;
  std::string error;

  bool usable() const { return !failed && std::isfinite(s); }
};

// Per-xi aggregate: best k at the finest resolution, with an error estimate
// combining the resolution gap and the k-truncation gap additively.
struct HomogSummary {
  int xi_index = 0;
  Eigen::MatrixXd xi;
  bool valid = false;
  double lhom = 0.0;
  double error_estimate = 0.0;
  double res_gap = 0.0;
  double k_gap = 0.0;
  int k_star = 0;
  double w0_bound = 0.0;
};

struct HomogResult {
  std::string structure_id;
  std::string integrand_id;
  std::uint64_t seed = 0;
  std::vector<Eigen::MatrixXd> xi_list;
  std::vector<int> k_list;
  std::vector<int> resolutions;
  std::vector<HomogRow> rows;  // ordered by (xi, k, resolution), resolution fastest
  std::vector<HomogSummary> summaries;
  bool any_failed = false;

  std::size_t row_index(std::size_t xi_pos, std::size_t k_pos, std::size_t res_pos) const {
    return (xi_pos * k_list.size() + k_pos) * resolutions.size() + res_pos;
  }
  const HomogRow& row_at(std::size_t xi_pos, std::size_t k_pos, std::size_t res_pos) const {
    return rows[row_index(xi_pos, k_pos, res_pos)];
  }
};

// Solves the cell problem on the k-scaled cell for every (xi, k, resolution)
// combination. Rows run as independent tasks with seeds derived from the row
// index, so results do not depend on pool size. Solver errors are recorded on
// the affected row; the remaining table is still produced.
HomogResult compute_lhom(const PeriodicStructure& structure, const IntegrandPtr& L,
                         const std::vector<Eigen::MatrixXd>& xi_list,
                         const std::vector<int>& k_list,
                         const std::vector<int>& resolutions,
                         const SolverParams& params, TaskPool& pool);

struct SubaddPair {
  int xi_index = 0;
  int k = 0;
  int ik = 0;
  double s_k = 0.0;
  double s_ik = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct ZeroBoundCheck {
  int xi_index = 0;
  int k = 0;
  int resolution = 0;
  double s = 0.0;
  double w0 = 0.0;
  bool pass = false;
};

struct SubaddReport {
  std::vector<SubaddPair> pairs;
  std::vector<ZeroBoundCheck> zero_bound;
  bool all_pass() const;
};

// Checks s_{ik} <= s_k + tol for every divisible pair (k, ik), i >= 2, present
// in the table (finest resolution), with tol = 2x the larger resolution gap of
// the pair plus a small absolute floor; also checks s <= w0 on every usable
// row. Throws insufficient-pairs when the k list admits no divisible pair.
SubaddReport check_subadditivity(const HomogResult& table);

struct PeriodicReport {
  std::vector<int> t_list;
  std::vector<double> values;
  int tail_start = 0;
  double tail_mean = 0.0;
  double tail_spread = 0.0;
  bool pass = false;
};

// Evaluates the ball cell-problem value for the t-rescaled integrand over the
// given schedule, using one fixed resolution (elements per unit length) and
// one seed so every t solves a structurally identical discrete problem; for
// x-independent integrands the values coincide bitwise and the spread is
// exactly zero. Pass criterion: spread of the trailing half <= 5% of its mean.
PeriodicReport periodic_limit_check(const PeriodicStructure& structure, const IntegrandPtr& L,
                                    const Vec2& x, double rho, const Eigen::MatrixXd& xi,
                                    const std::vector<int>& t_list, int resolution,
                                    const SolverParams& params);

struct PiecewiseComponent {
  PeriodicStructure structure;
  IntegrandPtr integrand;
  double weight = 1.0;
  // Optional replacement for the shared xi list (needed when this component's
  // gradient shape differs, e.g. a graph component inside a 1D mix). Must have
  // the same length as the shared list when present.
  std::vector<Eigen::MatrixXd> xi_override;
};

struct PiecewiseResult {
  std::vector<HomogResult> per_component;
  std::vector<double> weights;
  std::vector<double> aggregate;  // one weighted sum per xi index
  bool any_failed = false;
};

// Runs compute_lhom per component with identical solver parameters and forms
// the weighted sum of the per-component values, index by index.
PiecewiseResult compute_lhom_piecewise(const std::vector<PiecewiseComponent>& components,
                                       const std::vector<Eigen::MatrixXd>& shared_xi,
                                       const std::vector<int>& k_list,
                                       const std::vector<int>& resolutions,
                                       const SolverParams& params, TaskPool& pool);

// Scalar sample grid {-2, -1.5, ..., 2} used when no xi list is given and the
// gradient is a single scalar.
std::vector<Eigen::MatrixXd> default_xi_grid();

// Table as RFC-4180 CSV: xi components, k, resolution, s, w0, status.
std::string homog_table_csv(const HomogResult& table);

}  // namespace cellhom

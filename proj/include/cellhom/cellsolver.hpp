#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cellhom/fespace.hpp"
#include "cellhom/integrand.hpp"
#include "cellhom/structure.hpp"

namespace cellhom {

struct SolverParams {
  int max_iterations = 5000;
  double grad_tol = 1e-9;  // relative to the start's gradient norm
  int multistart = 8;
  std::uint64_t seed = 1;
  double perturbation = 0.5;  // restart noise factor
  int memory = 12;            // quasi-Newton history length

  // auto: one Newton step via a sparse factorization when the integrand is
  // quadratic in xi, multistart descent otherwise
  enum class Method { Auto, Descent, Direct } method = Method::Auto;
};

enum class SolveStatus { Converged, MaxIter, Degenerate };

const char* to_string(SolveStatus s);

struct SolveOutcome {
  double value = 0.0;  // best mean energy
  double w0_value = 0.0;  // mean energy of the zero competitor
  Eigen::VectorXd argmin;
  std::vector<double> start_values;
  int iterations = 0;
  double grad_norm = 0.0;
  SolveStatus status = SolveStatus::Converged;
};

// Minimize the mean energy over the zero-boundary subspace.
SolveOutcome solve_cell_problem(const DofSpace& space, const Integrand& L,
                                const Eigen::MatrixXd& xi, const SolverParams& params);

// Direct route for integrands quadratic in xi: assemble the (constant)
// Hessian and solve the normal equations once. Independent of the descent
// path; used as its cross-check.
SolveOutcome solve_cell_problem_direct(const DofSpace& space, const Integrand& L,
                                       const Eigen::MatrixXd& xi);

// Ball cell-problem value H(x, rho, xi) on the metric ball.
double hmu_ball(const PeriodicStructure& s, const Integrand& L, const Vec2& x, double rho,
                const Eigen::MatrixXd& xi, int resolution, const SolverParams& params);

struct QcResult {
  std::vector<double> rhos;
  std::vector<int> resolutions;
  std::vector<double> values;
  double extrapolated = 0.0;   // last (smallest-rho) entry
  double stabilization = 0.0;  // |last - second to last|
};

// Ball values along a shrinking rho schedule with a fixed element count per
// rho; the limit estimate is the final entry.
QcResult quasiconvexify(const PeriodicStructure& s, const Integrand& L, const Vec2& x,
                        const Eigen::MatrixXd& xi, const std::vector<double>& rho_schedule,
                        int elements_per_rho, const SolverParams& params);

}  // namespace cellhom

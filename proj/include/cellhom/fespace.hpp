#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cellhom/integrand.hpp"
#include "cellhom/structure.hpp"

namespace cellhom {

// Piecewise-linear discretization of the zero-boundary Sobolev space on a
// cell domain. DOFs are blocked by component: w[c * n_nodes + node].
struct DofSpace {
  StructureKind kind = StructureKind::Euclidean;
  int dim = 1;         // N
  int m = 1;           // target dimension
  CellDomain domain;
  int resolution = 2;  // elements per unit length

  int n_nodes = 0;
  int n_dofs = 0;      // m * n_nodes
  std::vector<Vec2> node_pos;
  std::vector<char> node_boundary;
  std::vector<int> interior;  // scalar node indices with free DOFs
  double h_min = 0.0;

  int grad_cols = 1;   // N (euclidean) or 1 (graph: directional derivative)
  int n_qp = 0;
  std::vector<EvalPoint> qp;
  Eigen::VectorXd qw;  // mu-weights; sum equals measure
  double measure = 0.0;

  // (n_qp * grad_cols) x n_nodes; row q*grad_cols + d holds component d of
  // the discrete gradient at quadrature point q. Row sums are exactly zero.
  Eigen::SparseMatrix<double, Eigen::RowMajor> grad;

  int n_interior_dofs() const { return static_cast<int>(interior.size()) * m; }
};

DofSpace discretize_cell(const PeriodicStructure& s, const CellDomain& domain, int resolution,
                         int m);

// Mean energy (1/mu) sum_q w_q L(y_q, xi_eff + grad w) where xi_eff is xi at
// euclidean points and xi * tangent at graph points. w entries on boundary
// DOFs are treated as zero.
double energy(const DofSpace& space, const Integrand& L, const Eigen::MatrixXd& xi,
              const Eigen::VectorXd& w);

// Same, also filling the mean-energy gradient (zero on boundary DOFs).
double energy_and_gradient(const DofSpace& space, const Integrand& L, const Eigen::MatrixXd& xi,
                           const Eigen::VectorXd& w, Eigen::VectorXd& grad_out);

// Diagnostic mesh table (CSV body): node id, coordinates, boundary flag.
std::string mesh_table_csv(const DofSpace& space);

}  // namespace cellhom

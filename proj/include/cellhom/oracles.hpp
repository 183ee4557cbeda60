#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellhom/integrand.hpp"

namespace cellhom {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussLegendre gauss_legendre(int n);

// Composite Gauss-Legendre integral of f over [a, b] with `panels` equal
// subintervals of `nodes` points each.
double integrate(const std::function<double(double)>& f, double a, double b, int nodes,
                 int panels = 1);

// (Integral of 1/a over [0,1])^-1 — the effective coefficient of a 1D
// oscillating quadratic energy a(y) xi^2.
double harmonic_mean_integral(const std::function<double(double)>& a, int nodes = 48,
                              int panels = 32);

// Effective coefficient for a(y) = 2 + sin(2*pi*y).
double harmonic_sine_ahom();

// Effective coefficient for a two-phase half/half profile: 2 a1 a2 / (a1+a2).
double harmonic_two_phase(double a1, double a2);

// A laminate layered along the first axis mixes harmonically across the
// layers and arithmetically along them.
struct LaminateMeans {
  double harmonic = 0.0;
  double arithmetic = 0.0;
};
LaminateMeans laminate_means(double a1, double a2);

// Effective quadratic energy of the square lattice with unit edge weights:
// (xi_1^2 + xi_2^2)/2 after cell normalization.
double square_lattice_quadratic(double xi1, double xi2);

// Convex envelope of the double well (xi^2-1)^2: zero on [-1,1], the well
// itself outside.
double double_well_envelope(double xi);

// Lower convex envelope of sampled points (xs strictly increasing), evaluated
// at q by linear interpolation along the hull. q must lie within [xs.front(),
// xs.back()].
double convex_envelope_at(const std::vector<double>& xs, const std::vector<double>& ys,
                          double q);

// Nodal values of a two-slope zero-boundary competitor on a uniform 1D mesh of
// n elements of width h: per-element slopes alternate between -1 and +1
// (relative slopes -1-xi and 1-xi) so the mean gradient is xi and the profile
// returns to zero at the last node. Requires n*(1+xi)/2 to be an integer.
std::vector<double> sawtooth_profile(int n, double h, double xi);

// Closed-form reference value for a named oracle at the given gradient.
// Throws unknown-catalog-id for unknown names and missing-parameter when the
// oracle needs coefficients that are absent.
double oracle_value(const std::string& id, const ParamMap& params, const Eigen::MatrixXd& xi);

}  // namespace cellhom

#include "cellhom/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cellhom/error.hpp"
#include "cellhom/numeric.hpp"

namespace cellhom {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) fail(ErrorCode::InvalidConfig, "quadrature order must be >= 1");
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

double integrate(const std::function<double(double)>& f, double a, double b, int nodes,
                 int panels) {
  if (panels < 1) fail(ErrorCode::InvalidConfig, "panel count must be >= 1");
  const GaussLegendre gl = gauss_legendre(nodes);
  const double hp = (b - a) / panels;
  KahanSum sum;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * hp;
    const double mid = lo + 0.5 * hp;
    for (int q = 0; q < nodes; ++q)
      sum.add(0.5 * hp * gl.weights[q] * f(mid + 0.5 * hp * gl.nodes[q]));
  }
  return sum.value();
}

double harmonic_mean_integral(const std::function<double(double)>& a, int nodes, int panels) {
  const double inv = integrate([&a](double y) { return 1.0 / a(y); }, 0.0, 1.0, nodes, panels);
  return 1.0 / inv;
}

double harmonic_sine_ahom() {
  return harmonic_mean_integral([](double y) { return 2.0 + std::sin(2.0 * M_PI * y); });
}

double harmonic_two_phase(double a1, double a2) { return 2.0 * a1 * a2 / (a1 + a2); }

LaminateMeans laminate_means(double a1, double a2) {
  LaminateMeans m;
  m.harmonic = harmonic_two_phase(a1, a2);
  m.arithmetic = 0.5 * (a1 + a2);
  return m;
}

double square_lattice_quadratic(double xi1, double xi2) {
  return 0.5 * (xi1 * xi1 + xi2 * xi2);
}

double double_well_envelope(double xi) {
  if (std::abs(xi) <= 1.0) return 0.0;
  const double s = xi * xi - 1.0;
  return s * s;
}

double convex_envelope_at(const std::vector<double>& xs, const std::vector<double>& ys,
                          double q) {
  if (xs.size() < 2 || xs.size() != ys.size())
    fail(ErrorCode::InvalidConfig, "envelope needs at least two samples");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      fail(ErrorCode::InvalidConfig, "envelope samples must be strictly increasing in x");
  if (q < xs.front() || q > xs.back())
    fail(ErrorCode::InvalidConfig, "envelope query outside sampled range");

  // Lower hull, monotone-chain style: pop while the previous segment turns
  // clockwise or straight relative to the new point.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull[hull.size() - 1];
      const double cross =
          (xs[b] - xs[a]) * (ys[i] - ys[a]) - (xs[i] - xs[a]) * (ys[b] - ys[a]);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }

  for (std::size_t seg = 0; seg + 1 < hull.size(); ++seg) {
    const std::size_t a = hull[seg];
    const std::size_t b = hull[seg + 1];
    if (q <= xs[b] || seg + 2 == hull.size()) {
      const double t = (q - xs[a]) / (xs[b] - xs[a]);
      return ys[a] + t * (ys[b] - ys[a]);
    }
  }
  return ys[hull.back()];
}

std::vector<double> sawtooth_profile(int n, double h, double xi) {
  if (n < 1) fail(ErrorCode::InvalidConfig, "sawtooth needs at least one element");
  if (!(h > 0.0)) fail(ErrorCode::InvalidConfig, "element width must be positive");
  const double a_exact = 0.5 * (1.0 + xi) * n;
  const long long a = std::llround(a_exact);
  if (std::abs(a_exact - static_cast<double>(a)) > 1e-9 || a < 0 || a > n)
    fail(ErrorCode::InvalidConfig, "slope counts for xi do not divide the mesh");

  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  long long remaining_hi = a;
  long long remaining_lo = n - a;
  for (int i = 0; i < n; ++i) {
    const bool take_hi = remaining_lo == 0 || (remaining_hi > 0 && w[i] <= 0.0);
    const double slope = take_hi ? (1.0 - xi) : (-1.0 - xi);
    if (take_hi)
      --remaining_hi;
    else
      --remaining_lo;
    w[i + 1] = w[i] + slope * h;
  }
  w[n] = 0.0;  // boundary node; the digitization lands there up to rounding
  return w;
}

double oracle_value(const std::string& id, const ParamMap& params, const Eigen::MatrixXd& xi) {
  auto scalar = [&xi]() { return xi(0, 0); };
  if (id == "harmonic-sine") {
    const double s = scalar();
    return harmonic_sine_ahom() * s * s;
  }
  if (id == "piecewise-harmonic") {
    const double s = scalar();
    return harmonic_two_phase(params.get_num("a1"), params.get_num("a2")) * s * s;
  }
  if (id == "laminate") {
    if (xi.size() < 2) fail(ErrorCode::DimensionMismatch, "laminate oracle needs a 2D gradient");
    const LaminateMeans m = laminate_means(params.get_num("a1"), params.get_num("a2"));
    return m.harmonic * xi(0, 0) * xi(0, 0) + m.arithmetic * xi(0, 1) * xi(0, 1);
  }
  if (id == "square-lattice") {
    if (xi.size() < 2)
      fail(ErrorCode::DimensionMismatch, "square-lattice oracle needs a 2D gradient");
    return square_lattice_quadratic(xi(0, 0), xi(0, 1));
  }
  if (id == "double-well-envelope") return double_well_envelope(scalar());
  if (id == "constant-power") {
    const double a0 = params.get_num("a0", 1.0);
    const double p = params.get_num("p", 2.0);
    return a0 * std::pow(std::abs(scalar()), p);
  }
  fail(ErrorCode::UnknownCatalogId, "unknown oracle id '" + id + "'");
}

}  // namespace cellhom

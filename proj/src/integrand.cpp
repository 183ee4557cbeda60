#include "cellhom/integrand.hpp"

#include <cmath>
#include <limits>

namespace cellhom {

double ParamMap::get_num(const std::string& name) const {
  auto it = num.find(name);
  if (it == num.end()) fail(ErrorCode::MissingParameter, "integrand parameter '" + name + "'");
  return it->second;
}

double ParamMap::get_num(const std::string& name, double fallback) const {
  auto it = num.find(name);
  return it == num.end() ? fallback : it->second;
}

std::string ParamMap::get_str(const std::string& name, const std::string& fallback) const {
  auto it = str.find(name);
  return it == str.end() ? fallback : it->second;
}

namespace {

double frac(double v) { return v - std::floor(v); }

// |xi|^(p-2) xi, continuous at 0 for p > 1
void power_deriv(const Eigen::MatrixXd& xi, double p, double coeff, Eigen::MatrixXd& dxi) {
  const double n = xi.norm();
  if (n == 0.0) {
    dxi.setZero();
    return;
  }
  dxi = (coeff * p * std::pow(n, p - 2.0)) * xi;
}

// L(x, xi) = a(x_1) |xi|^p with a scalar coefficient profile
class CoefficientPower final : public Integrand {
 public:
  enum class Profile { Sine, Piecewise, Constant };

  CoefficientPower(const std::string& id, Profile profile, double p, int N, double a1, double a2) {
    profile_ = profile;
    a1_ = a1;
    a2_ = a2;
    info_.id = id;
    info_.p = p;
    info_.m = 1;
    info_.N = N;
    const double lo = profile == Profile::Sine ? 1.0 : std::min(a1, a2);
    const double hi = profile == Profile::Sine ? 3.0 : std::max(a1, a2);
    info_.alpha = lo;
    info_.beta = hi;
    info_.periodic = true;
    info_.quadratic = p == 2.0;
  }

  double coeff(double y) const {
    switch (profile_) {
      case Profile::Sine:
        return 2.0 + std::sin(2.0 * M_PI * y);
      case Profile::Piecewise:
        return frac(y) < 0.5 ? a1_ : a2_;
      case Profile::Constant:
        return a1_;
    }
    return a1_;
  }

  double eval(const EvalPoint& pt, const Eigen::MatrixXd& xi) const override {
    return coeff(pt.x[0]) * std::pow(xi.norm(), info_.p);
  }

  double eval_and_deriv(const EvalPoint& pt, const Eigen::MatrixXd& xi,
                        Eigen::MatrixXd& dxi) const override {
    const double a = coeff(pt.x[0]);
    power_deriv(xi, info_.p, a, dxi);
    return a * std::pow(xi.norm(), info_.p);
  }

 private:
  Profile profile_;
  double a1_;
  double a2_;
};

// laminate: a(y_1)|xi|^2 with a piecewise constant on half-cells, N=2
class Laminate final : public Integrand {
 public:
  Laminate(double a1, double a2) : a1_(a1), a2_(a2) {
    info_.id = "laminate_2d";
    info_.p = 2.0;
    info_.m = 1;
    info_.N = 2;
    info_.alpha = std::min(a1, a2);
    info_.beta = std::max(a1, a2);
    info_.quadratic = true;
  }

  double coeff(const Vec2& x) const { return frac(x[0]) < 0.5 ? a1_ : a2_; }

  double eval(const EvalPoint& pt, const Eigen::MatrixXd& xi) const override {
    return coeff(pt.x) * xi.squaredNorm();
  }
  double eval_and_deriv(const EvalPoint& pt, const Eigen::MatrixXd& xi,
                        Eigen::MatrixXd& dxi) const override {
    const double a = coeff(pt.x);
    dxi = (2.0 * a) * xi;
    return a * xi.squaredNorm();
  }

 private:
  double a1_;
  double a2_;
};

class Checkerboard final : public Integrand {
 public:
  Checkerboard(double a1, double a2) : a1_(a1), a2_(a2) {
    info_.id = "checkerboard_2d";
    info_.p = 2.0;
    info_.m = 1;
    info_.N = 2;
    info_.alpha = std::min(a1, a2);
    info_.beta = std::max(a1, a2);
    info_.quadratic = true;
  }

  double coeff(const Vec2& x) const {
    return (frac(x[0]) < 0.5) == (frac(x[1]) < 0.5) ? a1_ : a2_;
  }

  double eval(const EvalPoint& pt, const Eigen::MatrixXd& xi) const override {
    return coeff(pt.x) * xi.squaredNorm();
  }
  double eval_and_deriv(const EvalPoint& pt, const Eigen::MatrixXd& xi,
                        Eigen::MatrixXd& dxi) const override {
    const double a = coeff(pt.x);
    dxi = (2.0 * a) * xi;
    return a * xi.squaredNorm();
  }

 private:
  double a1_;
  double a2_;
};

// (|xi|^2 - 1)^2: the two wells break coercivity (alpha = 0)
class DoubleWell final : public Integrand {
 public:
  DoubleWell() {
    info_.id = "double_well_1d";
    info_.p = 4.0;
    info_.m = 1;
    info_.N = 1;
    info_.alpha = 0.0;
    info_.beta = 2.0;
    info_.coercivity_warning = true;
  }

  double eval(const EvalPoint&, const Eigen::MatrixXd& xi) const override {
    const double s = xi.squaredNorm() - 1.0;
    return s * s;
  }
  double eval_and_deriv(const EvalPoint&, const Eigen::MatrixXd& xi,
                        Eigen::MatrixXd& dxi) const override {
    const double s = xi.squaredNorm() - 1.0;
    dxi = (4.0 * s) * xi;
    return s * s;
  }
};

// quadratic edge energy |xi_dir|^2 on graphs; xi arrives already projected
// onto the edge direction (m x 1)
class GraphEdgeQuadratic final : public Integrand {
 public:
  explicit GraphEdgeQuadratic(int N) {
    info_.id = "graph_edge_quadratic";
    info_.p = 2.0;
    info_.m = 1;
    info_.N = N;
    info_.alpha = 1.0;
    info_.beta = 1.0;
    info_.quadratic = true;
    info_.graph_only = true;
  }

  double eval(const EvalPoint&, const Eigen::MatrixXd& xi) const override {
    return xi.squaredNorm();
  }
  double eval_and_deriv(const EvalPoint&, const Eigen::MatrixXd& xi,
                        Eigen::MatrixXd& dxi) const override {
    dxi = 2.0 * xi;
    return xi.squaredNorm();
  }
};

class Rescaled final : public Integrand {
 public:
  Rescaled(IntegrandPtr base, double t) : base_(std::move(base)), t_(t) {
    info_ = base_->info();
    info_.id += "@t=" + std::to_string(t);
  }

  double eval(const EvalPoint& pt, const Eigen::MatrixXd& xi) const override {
    EvalPoint q = pt;
    q.x = LatticeAction::scale(t_, pt.x);
    return base_->eval(q, xi);
  }
  double eval_and_deriv(const EvalPoint& pt, const Eigen::MatrixXd& xi,
                        Eigen::MatrixXd& dxi) const override {
    EvalPoint q = pt;
    q.x = LatticeAction::scale(t_, pt.x);
    return base_->eval_and_deriv(q, xi, dxi);
  }

 private:
  IntegrandPtr base_;
  double t_;
};

}  // namespace

IntegrandPtr make_integrand(const std::string& catalog_id, const ParamMap& params) {
  if (catalog_id == "p_dirichlet_coeff") {
    const double p = params.get_num("p", 2.0);
    if (!(p > 1.0)) fail(ErrorCode::InvalidConfig, "growth exponent p must exceed 1");
    const std::string profile = params.get_str("profile", "sine");
    const int N = static_cast<int>(params.get_num("dim", 1.0));
    if (N != 1 && N != 2)
      fail(ErrorCode::UnsupportedDimension, "p_dirichlet_coeff supports dim 1 or 2");
    if (profile == "sine")
      return std::make_shared<CoefficientPower>(catalog_id, CoefficientPower::Profile::Sine, p,
                                                N, 0, 0);
    if (profile == "piecewise") {
      const double a1 = params.get_num("a1");
      const double a2 = params.get_num("a2");
      if (!(a1 > 0) || !(a2 > 0))
        fail(ErrorCode::InvalidConfig, "piecewise coefficients must be positive");
      return std::make_shared<CoefficientPower>(catalog_id, CoefficientPower::Profile::Piecewise,
                                                p, N, a1, a2);
    }
    if (profile == "constant") {
      const double a0 = params.get_num("a0", 1.0);
      if (!(a0 > 0)) fail(ErrorCode::InvalidConfig, "constant coefficient must be positive");
      return std::make_shared<CoefficientPower>(catalog_id, CoefficientPower::Profile::Constant,
                                                p, N, a0, a0);
    }
    fail(ErrorCode::MissingParameter,
         "p_dirichlet_coeff profile must be sine, piecewise or constant");
  }
  if (catalog_id == "laminate_2d")
    return std::make_shared<Laminate>(params.get_num("a1"), params.get_num("a2"));
  if (catalog_id == "checkerboard_2d")
    return std::make_shared<Checkerboard>(params.get_num("a1"), params.get_num("a2"));
  if (catalog_id == "double_well_1d") return std::make_shared<DoubleWell>();
  if (catalog_id == "graph_edge_quadratic")
    return std::make_shared<GraphEdgeQuadratic>(static_cast<int>(params.get_num("dim", 2.0)));
  fail(ErrorCode::UnknownCatalogId, "no integrand '" + catalog_id + "' in the catalog");
}

IntegrandPtr rescale_integrand(IntegrandPtr base, double t) {
  if (!(t > 0)) fail(ErrorCode::NonpositiveScale, "rescaling needs t > 0");
  if (t == 1.0) return base;
  return std::make_shared<Rescaled>(std::move(base), t);
}

EvalPoint sample_eval_point(const PeriodicStructure& s, Rng& rng) {
  EvalPoint pt;
  if (s.kind == StructureKind::Euclidean) {
    pt.x[0] = rng.uniform(-2, 2);
    if (s.dim == 2) pt.x[1] = rng.uniform(-2, 2);
    return pt;
  }
  const std::size_t ei = static_cast<std::size_t>(rng.uniform01() * double(s.edges.size()));
  const GraphEdge& e = s.edges[std::min(ei, s.edges.size() - 1)];
  const LatticeVec z{static_cast<int>(rng.uniform(-2, 3)),
                     s.dim == 2 ? static_cast<int>(rng.uniform(-2, 3)) : 0};
  const Vec2 a = s.action.translate(s.vertices[e.from], z);
  const Vec2 b = s.action.translate(s.vertices[e.to], z);
  const double u = rng.uniform(0.05, 0.95);
  pt.x = a + u * (b - a);
  pt.tangent = (b - a) / e.length;
  pt.on_edge = true;
  return pt;
}

GrowthReport validate_growth(const Integrand& L, const PeriodicStructure& s, int sample_count,
                             std::uint64_t seed) {
  if (sample_count < 1) fail(ErrorCode::InvalidConfig, "growth validation needs samples");
  GrowthReport rep;
  rep.coercivity_warning = L.info().coercivity_warning;
  rep.alpha_hat = std::numeric_limits<double>::infinity();
  rep.beta_hat = 0.0;
  Rng rng(seed);
  const int m = L.info().m;
  const int gc = s.is_graph() ? 1 : L.info().N;
  Eigen::MatrixXd xi(m, gc);
  for (int i = 0; i < sample_count; ++i) {
    const EvalPoint pt = sample_eval_point(s, rng);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < gc; ++c) xi(r, c) = rng.uniform(-3, 3);
    const double v = L.eval(pt, xi);
    if (v < 0) rep.nonnegative = false;
    const double np = std::pow(xi.norm(), L.info().p);
    if (np > 1e-12) rep.alpha_hat = std::min(rep.alpha_hat, v / np);
    rep.beta_hat = std::max(rep.beta_hat, v / (1.0 + np));
  }
  rep.alpha_violated = rep.alpha_hat < L.info().alpha - 1e-9 && !rep.coercivity_warning;
  rep.beta_violated = rep.beta_hat > L.info().beta + 1e-9;
  return rep;
}

}  // namespace cellhom

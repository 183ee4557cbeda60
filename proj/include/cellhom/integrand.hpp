#pragma once

#include <map>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "cellhom/rng.hpp"
#include "cellhom/structure.hpp"

namespace cellhom {

// Where an integrand is evaluated. Euclidean quadrature points carry only a
// position; graph quadrature points sit on an edge and carry the chord
// direction (chord / metric length), of which the first N components matter.
struct EvalPoint {
  Vec2 x = Vec2::Zero();
  Vec2 tangent = Vec2::Zero();
  bool on_edge = false;
};

// Density L(x, xi) with p-growth metadata. xi is m x N at euclidean points
// and the m x 1 directional gradient at graph edge points.
class Integrand {
 public:
  struct Info {
    std::string id;
    double p = 2.0;
    int m = 1;
    int N = 1;
    double alpha = 0.0;  // declared lower growth constant
    double beta = 1.0;   // declared upper growth constant
    bool periodic = true;
    bool coercivity_warning = false;  // alpha == 0
    bool quadratic = false;           // quadratic in xi (direct solve applies)
    bool graph_only = false;
  };

  virtual ~Integrand() = default;
  const Info& info() const { return info_; }

  virtual double eval(const EvalPoint& pt, const Eigen::MatrixXd& xi) const = 0;
  // returns the value; dxi must be presized to xi's shape
  virtual double eval_and_deriv(const EvalPoint& pt, const Eigen::MatrixXd& xi,
                                Eigen::MatrixXd& dxi) const = 0;

 protected:
  Info info_;
};

using IntegrandPtr = std::shared_ptr<const Integrand>;

struct ParamMap {
  std::map<std::string, double> num;
  std::map<std::string, std::string> str;

  double get_num(const std::string& name) const;
  double get_num(const std::string& name, double fallback) const;
  std::string get_str(const std::string& name, const std::string& fallback) const;
};

// Catalog ids: p_dirichlet_coeff (profiles: sine, piecewise, constant),
// laminate_2d, checkerboard_2d, double_well_1d, graph_edge_quadratic.
IntegrandPtr make_integrand(const std::string& catalog_id, const ParamMap& params);

// L_t(x, xi) = L(h_t(x), xi)
IntegrandPtr rescale_integrand(IntegrandPtr base, double t);

struct GrowthReport {
  double alpha_hat = 0.0;  // empirical min of L / |xi|^p
  double beta_hat = 0.0;   // empirical max of L / (1 + |xi|^p)
  bool alpha_violated = false;
  bool beta_violated = false;
  bool coercivity_warning = false;
  bool nonnegative = true;
  bool pass() const { return !alpha_violated && !beta_violated && nonnegative; }
};

GrowthReport validate_growth(const Integrand& L, const PeriodicStructure& s, int sample_count,
                             std::uint64_t seed);

// Seeded evaluation points for samplers and tests: uniform in a few cell
// periods (euclidean) or uniform on edge copies (graphs).
EvalPoint sample_eval_point(const PeriodicStructure& s, Rng& rng);

}  // namespace cellhom

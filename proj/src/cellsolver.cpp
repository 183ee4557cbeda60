#include "cellhom/cellsolver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "cellhom/rng.hpp"

namespace cellhom {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

struct StartResult {
  double value = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd w;
  int iterations = 0;
  double grad_norm = 0.0;
  SolveStatus status = SolveStatus::Degenerate;
};

// L-BFGS with Armijo backtracking (quadratic-interpolation step refinement)
// over the interior DOFs.
StartResult descend(const DofSpace& sp, const Integrand& L, const Eigen::MatrixXd& xi,
                    Eigen::VectorXd w, const SolverParams& prm) {
  StartResult res;
  const int n = sp.n_dofs;
  Eigen::VectorXd g(n), g_new(n), w_new(n), d(n);
  double f = energy_and_gradient(sp, L, xi, w, g);
  if (!std::isfinite(f) || !g.allFinite()) return res;

  const double g0_norm = g.norm();
  const double tol = prm.grad_tol * std::max(1.0, g0_norm);

  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> RhoInv;
  double gamma = 1.0;

  int it = 0;
  res.status = SolveStatus::MaxIter;
  for (; it < prm.max_iterations; ++it) {
    const double gn = g.norm();
    if (gn <= tol || gn <= 1e-14 * (1.0 + std::abs(f))) {
      res.status = SolveStatus::Converged;
      break;
    }

    // two-loop recursion
    d = -g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = S[i].dot(d) / RhoInv[i];
      d -= alpha[i] * Y[i];
    }
    d *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = Y[i].dot(d) / RhoInv[i];
      d += (alpha[i] - beta) * S[i];
    }
    double slope = g.dot(d);
    if (!(slope < -1e-14 * gn * d.norm())) {  // not a descent direction: reset
      d = -g;
      slope = -gn * gn;
      S.clear();
      Y.clear();
      RhoInv.clear();
      gamma = 1.0;
    }

    double step = S.empty() ? 1.0 / (1.0 + gn) : 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      w_new = w + step * d;
      f_new = energy_and_gradient(sp, L, xi, w_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      // quadratic fit through f, slope, f_new; clamp to a sane window
      double fit = -0.5 * slope * step * step / (f_new - f - slope * step);
      if (!std::isfinite(fit) || fit < 0.1 * step || fit > 0.5 * step) fit = 0.5 * step;
      step = fit;
    }
    if (!accepted) {
      // the line search hit floating-point resolution; call it converged only
      // if the gradient is genuinely small
      res.status = g.norm() <= std::max(tol, 1e-6 * std::max(1.0, g0_norm))
                       ? SolveStatus::Converged
                       : SolveStatus::MaxIter;
      break;
    }

    Eigen::VectorXd s_vec = w_new - w;
    Eigen::VectorXd y_vec = g_new - g;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-14 * s_vec.norm() * y_vec.norm()) {
      S.push_back(std::move(s_vec));
      Y.push_back(std::move(y_vec));
      RhoInv.push_back(sy);
      gamma = sy / Y.back().squaredNorm();
      if (static_cast<int>(S.size()) > prm.memory) {
        S.pop_front();
        Y.pop_front();
        RhoInv.pop_front();
      }
    }
    w.swap(w_new);
    g.swap(g_new);
    f = f_new;
  }

  res.value = f;
  res.w = std::move(w);
  res.iterations = it;
  res.grad_norm = g.norm() / std::max(1.0, g0_norm);
  return res;
}

}  // namespace

SolveOutcome solve_cell_problem_direct(const DofSpace& sp, const Integrand& L,
                                       const Eigen::MatrixXd& xi) {
  if (!L.info().quadratic)
    fail(ErrorCode::InvalidConfig, "direct solve needs an integrand quadratic in xi");

  SolveOutcome out;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sp.n_dofs);
  out.w0_value = energy(sp, L, xi, zero);

  const int m = sp.m;
  const int gc = sp.grad_cols;
  const int nn = sp.n_nodes;
  const int nb = m * gc;  // per-point gradient block size

  if (sp.n_interior_dofs() == 0) {
    out.value = out.w0_value;
    out.argmin = zero;
    out.start_values = {out.value};
    out.iterations = 0;
    out.status = SolveStatus::Converged;
    return out;
  }

  // map scalar nodes to interior unknown indices
  std::vector<int> iidx(nn, -1);
  for (std::size_t i = 0; i < sp.interior.size(); ++i) iidx[sp.interior[i]] = static_cast<int>(i);
  const int ni = static_cast<int>(sp.interior.size());
  const int nunk = m * ni;

  // per-point Hessian blocks by forward differences of the analytic
  // derivative (exact: the derivative is affine in xi for quadratic L)
  Eigen::MatrixXd xi_eff(m, gc), dxi0(m, gc), dxi1(m, gc), H_pt(nb, nb);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nunk);
  std::vector<Eigen::Triplet<double>> trips;
  const auto col_entries = [&](int q, int d) {
    return Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator(sp.grad,
                                                                       q * gc + d);
  };

  const bool graph = sp.kind == StructureKind::Graph;
  for (int q = 0; q < sp.n_qp; ++q) {
    if (graph) {
      for (int r = 0; r < m; ++r) {
        double dir = 0;
        for (int dd = 0; dd < sp.dim; ++dd) dir += xi(r, dd) * sp.qp[q].tangent[dd];
        xi_eff(r, 0) = dir;
      }
    } else {
      xi_eff = xi;
    }
    L.eval_and_deriv(sp.qp[q], xi_eff, dxi0);
    for (int c = 0; c < m; ++c)
      for (int d = 0; d < gc; ++d) {
        const double saved = xi_eff(c, d);
        xi_eff(c, d) = saved + 1.0;
        L.eval_and_deriv(sp.qp[q], xi_eff, dxi1);
        xi_eff(c, d) = saved;
        for (int r = 0; r < m; ++r)
          for (int e = 0; e < gc; ++e) H_pt(r * gc + e, c * gc + d) = dxi1(r, e) - dxi0(r, e);
      }

    const double wq = sp.qw[q];
    for (int c = 0; c < m; ++c)
      for (int d = 0; d < gc; ++d) {
        for (auto itc = col_entries(q, d); itc; ++itc) {
          const int ic = iidx[itc.col()];
          if (ic < 0) continue;
          const double gv = itc.value();
          b[c * ni + ic] += wq * dxi0(c, d) * gv;
          for (int r = 0; r < m; ++r)
            for (int e = 0; e < gc; ++e) {
              const double hval = H_pt(r * gc + e, c * gc + d);
              if (hval == 0.0) continue;
              for (auto itr = col_entries(q, e); itr; ++itr) {
                const int ir = iidx[itr.col()];
                if (ir < 0) continue;
                trips.emplace_back(r * ni + ir, c * ni + ic, wq * hval * itr.value() * gv);
              }
            }
        }
      }
  }

  Eigen::SparseMatrix<double> H(nunk, nunk);
  H.setFromTriplets(trips.begin(), trips.end());
  H.makeCompressed();

  Eigen::VectorXd u;
  if (nunk <= 120000) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
    if (ldlt.info() != Eigen::Success)
      fail(ErrorCode::InvalidConfig, "direct solve factorization failed (singular system)");
    u = ldlt.solve(-b);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-13);
    cg.setMaxIterations(20000);
    cg.compute(H);
    u = cg.solve(-b);
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(sp.n_dofs);
  for (int c = 0; c < m; ++c)
    for (int i = 0; i < ni; ++i) w[c * nn + sp.interior[i]] = u[c * ni + i];

  Eigen::VectorXd g;
  const double f = energy_and_gradient(sp, L, xi, w, g);
  out.iterations = 1;
  out.grad_norm = g.norm();
  if (std::isfinite(f) && f <= out.w0_value) {
    out.value = f;
    out.argmin = std::move(w);
    out.status = SolveStatus::Converged;
  } else {  // keep the zero competitor if the solve went sideways
    out.value = out.w0_value;
    out.argmin = zero;
    out.status = std::isfinite(f) ? SolveStatus::Converged : SolveStatus::Degenerate;
  }
  out.start_values = {out.value};
  return out;
}

SolveOutcome solve_cell_problem(const DofSpace& sp, const Integrand& L,
                                const Eigen::MatrixXd& xi, const SolverParams& params) {
  if (params.multistart < 1) fail(ErrorCode::InvalidConfig, "multistart count must be >= 1");
  if (!(params.grad_tol > 0)) fail(ErrorCode::InvalidConfig, "gradient tolerance must be > 0");

  if (params.method == SolverParams::Method::Direct ||
      (params.method == SolverParams::Method::Auto && L.info().quadratic))
    return solve_cell_problem_direct(sp, L, xi);

  SolveOutcome out;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sp.n_dofs);
  out.w0_value = energy(sp, L, xi, zero);

  const int nn = sp.n_nodes;
  const double amp = params.perturbation * (1.0 + xi.norm()) * sp.h_min;

  int best = -1;
  std::vector<StartResult> results;
  results.reserve(static_cast<std::size_t>(params.multistart));
  for (int j = 0; j < params.multistart; ++j) {
    Eigen::VectorXd w0 = zero;
    if (j > 0) {
      Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(j)));
      for (int c = 0; c < sp.m; ++c)
        for (int i : sp.interior) w0[c * nn + i] = amp * rng.uniform(-1.0, 1.0);
    }
    results.push_back(descend(sp, L, xi, std::move(w0), params));
    const StartResult& r = results.back();
    out.start_values.push_back(r.value);
    if (r.status != SolveStatus::Degenerate &&
        (best < 0 || r.value < results[static_cast<std::size_t>(best)].value))
      best = j;
  }

  if (best < 0) {
    out.status = SolveStatus::Degenerate;
    out.value = out.w0_value;
    out.argmin = zero;
    return out;
  }
  StartResult& br = results[static_cast<std::size_t>(best)];
  out.value = br.value;
  out.argmin = std::move(br.w);
  out.iterations = br.iterations;
  out.grad_norm = br.grad_norm;
  out.status = br.status;
  if (out.w0_value < out.value) {  // never worse than the zero competitor
    out.value = out.w0_value;
    out.argmin = zero;
  }
  return out;
}

double hmu_ball(const PeriodicStructure& s, const Integrand& L, const Vec2& x, double rho,
                const Eigen::MatrixXd& xi, int resolution, const SolverParams& params) {
  if (!(rho > 0)) fail(ErrorCode::NonpositiveScale, "ball radius must be positive");
  const DofSpace sp = discretize_cell(s, CellDomain::ball(x, rho), resolution, L.info().m);
  return solve_cell_problem(sp, L, xi, params).value;
}

QcResult quasiconvexify(const PeriodicStructure& s, const Integrand& L, const Vec2& x,
                        const Eigen::MatrixXd& xi, const std::vector<double>& rho_schedule,
                        int elements_per_rho, const SolverParams& params) {
  if (rho_schedule.size() < 3)
    fail(ErrorCode::InvalidConfig, "rho schedule needs at least 3 entries");
  for (std::size_t i = 0; i + 1 < rho_schedule.size(); ++i)
    if (!(rho_schedule[i] > rho_schedule[i + 1]) || !(rho_schedule[i + 1] > 0))
      fail(ErrorCode::InvalidConfig, "rho schedule must be strictly decreasing and positive");

  QcResult res;
  res.rhos = rho_schedule;
  for (double rho : rho_schedule) {
    const int resolution =
        std::max<int>(2, static_cast<int>(std::llround(elements_per_rho / rho)));
    res.resolutions.push_back(resolution);
    res.values.push_back(hmu_ball(s, L, x, rho, xi, resolution, params));
  }
  res.extrapolated = res.values.back();
  res.stabilization = std::abs(res.values.back() - res.values[res.values.size() - 2]);
  return res;
}

}  // namespace cellhom

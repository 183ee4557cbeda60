#include "cellhom/homog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>

#include "cellhom/csv.hpp"
#include "cellhom/error.hpp"
#include "cellhom/fespace.hpp"
#include "cellhom/numeric.hpp"
#include "cellhom/rng.hpp"

namespace cellhom {

namespace {

void validate_grid_inputs(const std::vector<int>& k_list, const std::vector<int>& resolutions) {
  if (k_list.empty()) fail(ErrorCode::InvalidConfig, "k list must be nonempty");
  std::set<int> seen;
  for (int k : k_list) {
    if (k < 1) fail(ErrorCode::InvalidConfig, "k must be >= 1, got " + std::to_string(k));
    if (!seen.insert(k).second)
      fail(ErrorCode::InvalidConfig, "duplicate k value " + std::to_string(k));
  }
  if (resolutions.empty()) fail(ErrorCode::InvalidConfig, "resolution list must be nonempty");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 2)
      fail(ErrorCode::ResolutionTooSmall,
           "resolution must be >= 2, got " + std::to_string(resolutions[i]));
    if (i > 0 && resolutions[i] <= resolutions[i - 1])
      fail(ErrorCode::InvalidConfig, "resolutions must be strictly increasing");
  }
}

void validate_xi_shapes(const PeriodicStructure& structure, const Integrand& L,
                        const std::vector<Eigen::MatrixXd>& xi_list) {
  if (xi_list.empty()) fail(ErrorCode::InvalidConfig, "xi list must be nonempty");
  const int m = L.info().m;
  for (const auto& xi : xi_list) {
    if (xi.rows() != m || xi.cols() != structure.dim)
      fail(ErrorCode::DimensionMismatch,
           "xi must be " + std::to_string(m) + "x" + std::to_string(structure.dim) + ", got " +
               std::to_string(xi.rows()) + "x" + std::to_string(xi.cols()));
  }
}

// Resolution gap |s(k, finest) - s(k, second finest)| for one (xi, k) column;
// zero when only one resolution was computed or a needed row is unusable.
double resolution_gap(const HomogResult& t, std::size_t xi_pos, std::size_t k_pos) {
  const std::size_t nr = t.resolutions.size();
  if (nr < 2) return 0.0;
  const HomogRow& fine = t.row_at(xi_pos, k_pos, nr - 1);
  const HomogRow& prev = t.row_at(xi_pos, k_pos, nr - 2);
  if (!fine.usable() || !prev.usable()) return 0.0;
  return std::abs(fine.s - prev.s);
}

void build_summaries(HomogResult& t) {
  const std::size_t nk = t.k_list.size();
  const std::size_t nr = t.resolutions.size();
  t.summaries.clear();
  t.summaries.reserve(t.xi_list.size());
  for (std::size_t xi_pos = 0; xi_pos < t.xi_list.size(); ++xi_pos) {
    HomogSummary sum;
    sum.xi_index = static_cast<int>(xi_pos);
    sum.xi = t.xi_list[xi_pos];

    std::size_t best_pos = nk;
    for (std::size_t kp = 0; kp < nk; ++kp) {
      const HomogRow& r = t.row_at(xi_pos, kp, nr - 1);
      if (!r.usable()) continue;
      if (best_pos == nk || r.s < t.row_at(xi_pos, best_pos, nr - 1).s) best_pos = kp;
    }
    if (best_pos == nk) {
      t.summaries.push_back(sum);  // nothing usable at the finest resolution
      continue;
    }

    const HomogRow& best = t.row_at(xi_pos, best_pos, nr - 1);
    sum.valid = true;
    sum.k_star = best.k;
    sum.lhom = best.s;
    sum.w0_bound = best.w0;
    sum.res_gap = resolution_gap(t, xi_pos, best_pos);

    // k-truncation gap: prefer the doubled cell, then the halved one, then the
    // nearest other k with a usable row.
    auto usable_gap = [&](int k_other, double& out) {
      for (std::size_t kp = 0; kp < nk; ++kp) {
        if (t.k_list[kp] != k_other) continue;
        const HomogRow& r = t.row_at(xi_pos, kp, nr - 1);
        if (!r.usable()) return false;
        out = std::abs(best.s - r.s);
        return true;
      }
      return false;
    };
    double gap = 0.0;
    bool found = usable_gap(2 * best.k, gap);
    if (!found && best.k % 2 == 0) found = usable_gap(best.k / 2, gap);
    if (!found) {
      int nearest = 0;
      long best_dist = std::numeric_limits<long>::max();
      for (std::size_t kp = 0; kp < nk; ++kp) {
        const int k_other = t.k_list[kp];
        if (k_other == best.k || !t.row_at(xi_pos, kp, nr - 1).usable()) continue;
        const long dist = std::labs(static_cast<long>(k_other) - best.k);
        if (dist < best_dist) {
          best_dist = dist;
          nearest = k_other;
        }
      }
      if (nearest != 0) found = usable_gap(nearest, gap);
    }
    sum.k_gap = found ? gap : 0.0;
    sum.error_estimate = sum.res_gap + sum.k_gap;
    t.summaries.push_back(sum);
  }
}

}  // namespace

HomogResult compute_lhom(const PeriodicStructure& structure, const IntegrandPtr& L,
                         const std::vector<Eigen::MatrixXd>& xi_list,
                         const std::vector<int>& k_list, const std::vector<int>& resolutions,
                         const SolverParams& params, TaskPool& pool) {
  if (!L) fail(ErrorCode::InvalidConfig, "integrand must be set");
  validate_grid_inputs(k_list, resolutions);
  validate_xi_shapes(structure, *L, xi_list);

  HomogResult result;
  result.structure_id = structure.describe();
  result.integrand_id = L->info().id;
  result.seed = params.seed;
  result.xi_list = xi_list;
  result.k_list = k_list;
  result.resolutions = resolutions;
  result.rows.resize(xi_list.size() * k_list.size() * resolutions.size());

  const int m = L->info().m;
  std::vector<std::function<void()>> tasks;
  tasks.reserve(result.rows.size());
  for (std::size_t xi_pos = 0; xi_pos < xi_list.size(); ++xi_pos) {
    for (std::size_t kp = 0; kp < k_list.size(); ++kp) {
      for (std::size_t rp = 0; rp < resolutions.size(); ++rp) {
        const std::size_t idx = result.row_index(xi_pos, kp, rp);
        HomogRow& row = result.rows[idx];
        row.xi_index = static_cast<int>(xi_pos);
        row.k = k_list[kp];
        row.resolution = resolutions[rp];
        tasks.push_back([&structure, &L, &result, &row, m, xi_pos, idx, params] {
          try {
            const DofSpace space =
                discretize_cell(structure, CellDomain::scaled_cell(row.k), row.resolution, m);
            SolverParams row_params = params;
            row_params.seed = mix_seed(params.seed, static_cast<std::uint64_t>(idx));
            const SolveOutcome out =
                solve_cell_problem(space, *L, result.xi_list[xi_pos], row_params);
            row.s = out.value;
            row.w0 = out.w0_value;
            row.status = out.status;
          } catch (const Error& e) {
            row.failed = true;
            row.error = to_string(e.code());
          } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
          }
        });
      }
    }
  }
  pool.run(tasks);

  for (const HomogRow& row : result.rows)
    if (row.failed) result.any_failed = true;
  build_summaries(result);
  return result;
}

bool SubaddReport::all_pass() const {
  for (const auto& p : pairs)
    if (!p.pass) return false;
  for (const auto& z : zero_bound)
    if (!z.pass) return false;
  return true;
}

SubaddReport check_subadditivity(const HomogResult& table) {
  const std::size_t nk = table.k_list.size();
  const std::size_t nr = table.resolutions.size();
  if (nr == 0 || nk == 0) fail(ErrorCode::InvalidConfig, "table is empty");

  bool any_pair = false;
  for (std::size_t a = 0; a < nk && !any_pair; ++a)
    for (std::size_t b = 0; b < nk && !any_pair; ++b)
      if (table.k_list[b] >= 2 * table.k_list[a] && table.k_list[b] % table.k_list[a] == 0)
        any_pair = true;
  if (!any_pair)
    fail(ErrorCode::InsufficientPairs, "k list contains no (k, i*k) pair with i >= 2");

  SubaddReport report;
  for (std::size_t xi_pos = 0; xi_pos < table.xi_list.size(); ++xi_pos) {
    for (std::size_t a = 0; a < nk; ++a) {
      for (std::size_t b = 0; b < nk; ++b) {
        const int ka = table.k_list[a];
        const int kb = table.k_list[b];
        if (kb < 2 * ka || kb % ka != 0) continue;
        const HomogRow& ra = table.row_at(xi_pos, a, nr - 1);
        const HomogRow& rb = table.row_at(xi_pos, b, nr - 1);
        if (!ra.usable() || !rb.usable()) continue;
        SubaddPair pair;
        pair.xi_index = static_cast<int>(xi_pos);
        pair.k = ka;
        pair.ik = kb;
        pair.s_k = ra.s;
        pair.s_ik = rb.s;
        pair.tol = 2.0 * std::max(resolution_gap(table, xi_pos, a),
                                  resolution_gap(table, xi_pos, b)) +
                   1e-12;
        pair.pass = pair.s_ik <= pair.s_k + pair.tol;
        report.pairs.push_back(pair);
      }
    }
  }

  for (const HomogRow& row : table.rows) {
    if (!row.usable()) continue;
    ZeroBoundCheck check;
    check.xi_index = row.xi_index;
    check.k = row.k;
    check.resolution = row.resolution;
    check.s = row.s;
    check.w0 = row.w0;
    check.pass = row.s <= row.w0 + 1e-12;
    report.zero_bound.push_back(check);
  }
  return report;
}

PeriodicReport periodic_limit_check(const PeriodicStructure& structure, const IntegrandPtr& L,
                                    const Vec2& x, double rho, const Eigen::MatrixXd& xi,
                                    const std::vector<int>& t_list, int resolution,
                                    const SolverParams& params) {
  if (!L) fail(ErrorCode::InvalidConfig, "integrand must be set");
  if (t_list.size() < 3) fail(ErrorCode::InvalidConfig, "t list needs at least 3 entries");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (t_list[i] < 1) fail(ErrorCode::InvalidConfig, "t must be >= 1");
    if (i > 0 && t_list[i] <= t_list[i - 1])
      fail(ErrorCode::InvalidConfig, "t list must be strictly increasing");
  }

  PeriodicReport report;
  report.t_list = t_list;
  report.values.reserve(t_list.size());
  // Same ball, resolution, and seed for every t: only the integrand is
  // rescaled, so an x-independent L yields bitwise-equal values.
  for (const int t : t_list) {
    const IntegrandPtr Lt = rescale_integrand(L, static_cast<double>(t));
    report.values.push_back(hmu_ball(structure, *Lt, x, rho, xi, resolution, params));
  }

  const std::size_t n = report.values.size();
  report.tail_start = static_cast<int>(n / 2);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  KahanSum mean_sum;
  std::size_t count = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    lo = std::min(lo, report.values[i]);
    hi = std::max(hi, report.values[i]);
    mean_sum.add(report.values[i]);
    ++count;
  }
  report.tail_mean = mean_sum.value() / static_cast<double>(count);
  report.tail_spread = hi - lo;
  report.pass = report.tail_spread <= 0.05 * report.tail_mean;
  return report;
}

PiecewiseResult compute_lhom_piecewise(const std::vector<PiecewiseComponent>& components,
                                       const std::vector<Eigen::MatrixXd>& shared_xi,
                                       const std::vector<int>& k_list,
                                       const std::vector<int>& resolutions,
                                       const SolverParams& params, TaskPool& pool) {
  if (components.empty()) fail(ErrorCode::InvalidConfig, "components must be nonempty");
  std::size_t n_xi = shared_xi.size();
  for (const auto& comp : components) {
    if (!(comp.weight >= 0.0) || !std::isfinite(comp.weight))
      fail(ErrorCode::InvalidConfig, "component weight must be finite and >= 0");
    if (!comp.xi_override.empty()) {
      if (n_xi == 0) n_xi = comp.xi_override.size();
      if (comp.xi_override.size() != n_xi)
        fail(ErrorCode::InvalidConfig, "component xi lists must all have the same length");
    }
  }
  if (n_xi == 0) fail(ErrorCode::InvalidConfig, "xi list must be nonempty");
  for (const auto& comp : components)
    if (comp.xi_override.empty() && shared_xi.size() != n_xi)
      fail(ErrorCode::InvalidConfig, "component without xi override needs the shared xi list");

  PiecewiseResult result;
  result.per_component.reserve(components.size());
  for (const auto& comp : components) {
    const std::vector<Eigen::MatrixXd>& xi =
        comp.xi_override.empty() ? shared_xi : comp.xi_override;
    result.per_component.push_back(
        compute_lhom(comp.structure, comp.integrand, xi, k_list, resolutions, params, pool));
    result.weights.push_back(comp.weight);
    if (result.per_component.back().any_failed) result.any_failed = true;
  }

  result.aggregate.assign(n_xi, 0.0);
  for (std::size_t j = 0; j < n_xi; ++j) {
    KahanSum sum;
    bool ok = true;
    for (std::size_t i = 0; i < components.size(); ++i) {
      const HomogSummary& s = result.per_component[i].summaries[j];
      if (!s.valid) {
        ok = false;
        break;
      }
      sum.add(result.weights[i] * s.lhom);
    }
    if (!ok) {
      result.aggregate[j] = std::numeric_limits<double>::quiet_NaN();
      result.any_failed = true;
    } else {
      result.aggregate[j] = sum.value();
    }
  }
  return result;
}

std::vector<Eigen::MatrixXd> default_xi_grid() {
  std::vector<Eigen::MatrixXd> grid;
  grid.reserve(9);
  for (int i = -4; i <= 4; ++i) {
    Eigen::MatrixXd xi(1, 1);
    xi(0, 0) = 0.5 * static_cast<double>(i);
    grid.push_back(xi);
  }
  return grid;
}

std::string homog_table_csv(const HomogResult& table) {
  CsvWriter csv;
  std::vector<std::string> header;
  const Eigen::Index m = table.xi_list.empty() ? 1 : table.xi_list.front().rows();
  const Eigen::Index n = table.xi_list.empty() ? 1 : table.xi_list.front().cols();
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      std::string name = "xi";
      if (m > 1) name += "_" + std::to_string(r);
      name += "_" + std::to_string(c);
      header.push_back(name);
    }
  header.insert(header.end(), {"k", "resolution", "s", "w0", "status"});
  csv.row(header);

  for (const HomogRow& row : table.rows) {
    std::vector<std::string> cells;
    const Eigen::MatrixXd& xi = table.xi_list[static_cast<std::size_t>(row.xi_index)];
    for (Eigen::Index r = 0; r < xi.rows(); ++r)
      for (Eigen::Index c = 0; c < xi.cols(); ++c) cells.push_back(format_double(xi(r, c)));
    cells.push_back(std::to_string(row.k));
    cells.push_back(std::to_string(row.resolution));
    if (row.failed) {
      cells.push_back("");
      cells.push_back("");
      cells.push_back("failed:" + row.error);
    } else {
      cells.push_back(format_double(row.s));
      cells.push_back(format_double(row.w0));
      cells.push_back(to_string(row.status));
    }
    csv.row(cells);
  }
  return csv.str();
}

}  // namespace cellhom

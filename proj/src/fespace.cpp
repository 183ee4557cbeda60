#include "cellhom/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>
#include <vector>

#include "cellhom/csv.hpp"
#include "cellhom/numeric.hpp"

namespace cellhom {

namespace {

using Triplet = Eigen::Triplet<double>;

void finalize(DofSpace& sp, std::vector<Triplet>& trips) {
  sp.n_dofs = sp.m * sp.n_nodes;
  sp.n_qp = static_cast<int>(sp.qp.size());
  sp.grad.resize(sp.n_qp * sp.grad_cols, sp.n_nodes);
  sp.grad.setFromTriplets(trips.begin(), trips.end());
  sp.grad.makeCompressed();
  KahanSum ks;
  for (int q = 0; q < sp.n_qp; ++q) ks.add(sp.qw[q]);
  sp.measure = ks.value();
  for (int i = 0; i < sp.n_nodes; ++i)
    if (!sp.node_boundary[i]) sp.interior.push_back(i);
}

// uniform interval [x0, x0 + n*h] with midpoint quadrature
void build_interval(DofSpace& sp, double x0, int n, double h, double invh) {
  sp.grad_cols = 1;
  sp.n_nodes = n + 1;
  sp.node_pos.resize(sp.n_nodes, Vec2::Zero());
  sp.node_boundary.assign(sp.n_nodes, 0);
  sp.node_boundary[0] = sp.node_boundary[n] = 1;
  for (int i = 0; i <= n; ++i) sp.node_pos[i][0] = x0 + i * h;
  sp.h_min = h;

  sp.qp.resize(n);
  sp.qw.resize(n);
  std::vector<Triplet> trips;
  trips.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    sp.qp[i].x = Vec2(x0 + (i + 0.5) * h, 0.0);
    sp.qw[i] = h;
    trips.emplace_back(i, i, -invh);
    trips.emplace_back(i, i + 1, invh);
  }
  finalize(sp, trips);
}

// structured triangulated n x n grid of square cells with side h; keep
// decides which triangles belong to the domain (nullptr: all)
template <typename Keep>
void build_grid_2d(DofSpace& sp, const Vec2& corner, int n, double h, double invh,
                   const Keep& keep) {
  sp.grad_cols = 2;
  const int stride = n + 1;
  const auto nid = [&](int ix, int iy) { return iy * stride + ix; };

  std::vector<int> kept_count(static_cast<std::size_t>(stride) * stride, 0);
  struct Tri {
    int apex, bx, by;  // gradient: ((bx-apex)/h, (by-apex)/h) times sgn
    double sgn;
    Vec2 centroid;
  };
  std::vector<Tri> tris;
  tris.reserve(static_cast<std::size_t>(2) * n * n);

  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 lower_c(corner[0] + (ix + 1.0 / 3.0) * h, corner[1] + (iy + 1.0 / 3.0) * h);
      const Vec2 upper_c(corner[0] + (ix + 2.0 / 3.0) * h, corner[1] + (iy + 2.0 / 3.0) * h);
      // lower: right angle at (ix,iy); dx pairs it with (ix+1,iy), dy with (ix,iy+1)
      if (keep(lower_c))
        tris.push_back({nid(ix, iy), nid(ix + 1, iy), nid(ix, iy + 1), 1.0, lower_c});
      // upper: right angle at (ix+1,iy+1); pairs flipped, so the sign flips
      if (keep(upper_c))
        tris.push_back({nid(ix + 1, iy + 1), nid(ix, iy + 1), nid(ix + 1, iy), -1.0, upper_c});
    }
  for (const auto& t : tris) {
    ++kept_count[t.apex];
    ++kept_count[t.bx];
    ++kept_count[t.by];
  }

  // compact node numbering over touched nodes
  std::vector<int> remap(kept_count.size(), -1);
  int nn = 0;
  for (std::size_t i = 0; i < kept_count.size(); ++i)
    if (kept_count[i] > 0) remap[i] = nn++;
  sp.n_nodes = nn;
  sp.node_pos.resize(nn);
  sp.node_boundary.assign(nn, 0);
  for (std::size_t i = 0; i < kept_count.size(); ++i) {
    if (remap[i] < 0) continue;
    const int ix = static_cast<int>(i) % stride;
    const int iy = static_cast<int>(i) / stride;
    sp.node_pos[remap[i]] = Vec2(corner[0] + ix * h, corner[1] + iy * h);
    // a node with all 6 incident grid triangles kept is interior
    sp.node_boundary[remap[i]] = kept_count[i] == 6 ? 0 : 1;
  }
  sp.h_min = h;

  const double wq = 0.5 * h * h;
  sp.qp.resize(tris.size());
  sp.qw.resize(static_cast<Eigen::Index>(tris.size()));
  std::vector<Triplet> trips;
  trips.reserve(4 * tris.size());
  for (std::size_t q = 0; q < tris.size(); ++q) {
    const Tri& t = tris[q];
    sp.qp[q].x = t.centroid;
    sp.qw[static_cast<Eigen::Index>(q)] = wq;
    const int row = static_cast<int>(q) * 2;
    const double s = t.sgn * invh;
    trips.emplace_back(row, remap[t.bx], s);
    trips.emplace_back(row, remap[t.apex], -s);
    trips.emplace_back(row + 1, remap[t.by], s);
    trips.emplace_back(row + 1, remap[t.apex], -s);
  }
  finalize(sp, trips);
}

struct SegmentedEdge {
  int node_a = 0;          // dof node index, piece start
  int node_b = 0;          // piece end
  Vec2 pos_a, pos_b;
  double metric_len = 0.0;
  double weight = 0.0;
  Vec2 tangent = Vec2::Zero();
};

// shared subdivision of mixed junction/internal-node edge pieces
void emit_segments(DofSpace& sp, const std::vector<SegmentedEdge>& pieces, int resolution,
                   std::vector<Triplet>& trips) {
  std::vector<double> weights;
  sp.h_min = std::numeric_limits<double>::max();
  for (const auto& pc : pieces) {
    const int ns = std::max<int>(1, static_cast<int>(std::llround(pc.metric_len * resolution)));
    const double hseg = pc.metric_len / ns;
    const double invh = 1.0 / hseg;
    sp.h_min = std::min(sp.h_min, hseg);
    int prev = pc.node_a;
    for (int i = 0; i < ns; ++i) {
      int next;
      if (i == ns - 1) {
        next = pc.node_b;
      } else {
        next = sp.n_nodes++;
        sp.node_pos.push_back(pc.pos_a + ((i + 1.0) / ns) * (pc.pos_b - pc.pos_a));
        sp.node_boundary.push_back(0);
      }
      EvalPoint q;
      q.x = pc.pos_a + ((i + 0.5) / ns) * (pc.pos_b - pc.pos_a);
      q.tangent = pc.tangent;
      q.on_edge = true;
      const int row = static_cast<int>(sp.qp.size());
      sp.qp.push_back(q);
      weights.push_back(pc.weight * hseg);
      trips.emplace_back(row, prev, -invh);
      trips.emplace_back(row, next, invh);
      prev = next;
    }
  }
  sp.qw = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                            static_cast<Eigen::Index>(weights.size()));
}

void build_graph_cell(DofSpace& sp, const PeriodicStructure& s, const CellDomain& dom,
                      int resolution) {
  const SupercellGraph g = build_supercell_graph(s, dom.k, dom.offset);
  sp.grad_cols = 1;
  sp.n_nodes = static_cast<int>(g.nodes.size());
  sp.node_pos.resize(sp.n_nodes);
  sp.node_boundary.resize(sp.n_nodes);
  for (int i = 0; i < sp.n_nodes; ++i) {
    sp.node_pos[i] = g.nodes[i].pos;
    sp.node_boundary[i] = g.nodes[i].boundary ? 1 : 0;
  }
  std::vector<SegmentedEdge> pieces;
  pieces.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    SegmentedEdge pc;
    pc.node_a = e.a;
    pc.node_b = e.b;
    pc.pos_a = g.nodes[e.a].pos;
    pc.pos_b = g.nodes[e.b].pos;
    pc.metric_len = e.length;
    pc.weight = e.weight;
    pc.tangent = e.tangent;
    pieces.push_back(pc);
  }
  std::vector<Triplet> trips;
  emit_segments(sp, pieces, resolution, trips);
  finalize(sp, trips);
}

void build_graph_ball(DofSpace& sp, const PeriodicStructure& s, const CellDomain& dom,
                      int resolution) {
  const Vec2 x = dom.center;
  const double rho = dom.rho;

  // local patch of the infinite graph around the ball
  std::map<int, std::pair<int, LatticeVec>> canon;
  for (const auto& id : s.identifications) canon[id.vertex] = {id.partner, id.shift};
  const auto canonical = [&](int v, LatticeVec z) {
    auto it = canon.find(v);
    if (it == canon.end()) return std::pair<int, LatticeVec>{v, z};
    LatticeVec zz = z;
    for (int d = 0; d < 2; ++d) zz[d] += it->second.second[d];
    return std::pair<int, LatticeVec>{it->second.first, zz};
  };

  const int margin = static_cast<int>(std::ceil(rho)) + 2;
  using Key = std::tuple<int, int, int>;
  std::map<Key, int> jindex;  // local junction index
  std::vector<Vec2> jpos;
  const auto jnode = [&](int v, const LatticeVec& z) {
    const auto c = canonical(v, z);
    const Key key{c.first, c.second[0], c.second[1]};
    auto it = jindex.find(key);
    if (it != jindex.end()) return it->second;
    const int idx = static_cast<int>(jpos.size());
    jindex[key] = idx;
    jpos.push_back(s.action.translate(s.vertices[c.first], c.second));
    return idx;
  };

  struct LocalEdge {
    int u, v;
    Vec2 pa, pb;
    double len, weight;
  };
  std::vector<LocalEdge> local;
  const int cx = static_cast<int>(std::floor(x[0]));
  const int cy = s.dim == 2 ? static_cast<int>(std::floor(x[1])) : 0;
  const int ylo = s.dim == 2 ? cy - margin : 0;
  const int yhi = s.dim == 2 ? cy + margin : 0;
  for (int zy = ylo; zy <= yhi; ++zy)
    for (int zx = cx - margin; zx <= cx + margin; ++zx) {
      const LatticeVec z{zx, s.dim == 2 ? zy : 0};
      for (const auto& e : s.edges) {
        LocalEdge le;
        le.u = jnode(e.from, z);
        le.v = jnode(e.to, z);
        le.pa = s.action.translate(s.vertices[e.from], z);
        le.pb = s.action.translate(s.vertices[e.to], z);
        le.len = e.length;
        le.weight = e.weight;
        local.push_back(le);
      }
    }

  // locate the center on the patch
  int best_edge = -1;
  double best_dist = std::numeric_limits<double>::max(), best_s = 0;
  for (std::size_t i = 0; i < local.size(); ++i) {
    const Vec2 d = local[i].pb - local[i].pa;
    const double dd = d.squaredNorm();
    const double u = dd > 0 ? std::clamp((x - local[i].pa).dot(d) / dd, 0.0, 1.0) : 0.0;
    const double dist = (x - (local[i].pa + u * d)).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best_edge = static_cast<int>(i);
      best_s = u;
    }
  }
  if (best_edge < 0 || best_dist > 1e-9)
    fail(ErrorCode::BallOutsideRegion, "ball center does not lie on the graph");

  // splice the center in as a node
  int center;
  if (best_s < 1e-12) {
    center = local[best_edge].u;
  } else if (best_s > 1.0 - 1e-12) {
    center = local[best_edge].v;
  } else {
    center = static_cast<int>(jpos.size());
    jpos.push_back(local[best_edge].pa + best_s * (local[best_edge].pb - local[best_edge].pa));
    const LocalEdge e = local[best_edge];
    local[best_edge] = LocalEdge{e.u, center, e.pa, jpos[center], best_s * e.len, e.weight};
    local.push_back(LocalEdge{center, e.v, jpos[center], e.pb, (1.0 - best_s) * e.len, e.weight});
  }

  // shortest path distances from the center
  std::vector<std::vector<std::pair<int, double>>> adj(jpos.size());
  for (const auto& e : local) {
    adj[e.u].push_back({e.v, e.len});
    adj[e.v].push_back({e.u, e.len});
  }
  std::vector<double> dist(jpos.size(), std::numeric_limits<double>::max());
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  dist[center] = 0;
  pq.push({0.0, center});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, len] : adj[u])
      if (d + len < dist[v]) {
        dist[v] = d + len;
        pq.push({dist[v], v});
      }
  }

  // assemble covered pieces; cut nodes sit exactly at path distance rho
  sp.grad_cols = 1;
  sp.n_nodes = 0;
  std::vector<int> dof_of(jpos.size(), -1);
  const auto dof_node = [&](int local_idx) {
    if (dof_of[local_idx] < 0) {
      dof_of[local_idx] = sp.n_nodes++;
      sp.node_pos.push_back(jpos[local_idx]);
      sp.node_boundary.push_back(0);
    }
    return dof_of[local_idx];
  };
  const auto cut_node = [&](const Vec2& pos) {
    const int idx = sp.n_nodes++;
    sp.node_pos.push_back(pos);
    sp.node_boundary.push_back(1);
    return idx;
  };

  std::vector<SegmentedEdge> pieces;
  for (const auto& e : local) {
    const double du = dist[e.u], dv = dist[e.v];
    if (du >= rho && dv >= rho) continue;
    const Vec2 chord = e.pb - e.pa;
    if (du + dv + e.len < 2.0 * rho) {
      SegmentedEdge pc;
      pc.node_a = dof_node(e.u);
      pc.node_b = dof_node(e.v);
      pc.pos_a = e.pa;
      pc.pos_b = e.pb;
      pc.metric_len = e.len;
      pc.weight = e.weight;
      pc.tangent = chord / e.len;
      pieces.push_back(pc);
      continue;
    }
    if (du < rho) {
      const double tau = std::min(rho - du, e.len);
      SegmentedEdge pc;
      pc.node_a = dof_node(e.u);
      pc.pos_a = e.pa;
      pc.pos_b = e.pa + (tau / e.len) * chord;
      pc.node_b = cut_node(pc.pos_b);
      pc.metric_len = tau;
      pc.weight = e.weight;
      pc.tangent = chord / e.len;
      if (tau > 0) pieces.push_back(pc);
    }
    if (dv < rho) {
      const double tau = std::min(rho - dv, e.len);
      SegmentedEdge pc;
      pc.node_b = dof_node(e.v);
      pc.pos_b = e.pb;
      pc.pos_a = e.pb - (tau / e.len) * chord;
      pc.node_a = cut_node(pc.pos_a);
      pc.metric_len = tau;
      pc.weight = e.weight;
      pc.tangent = chord / e.len;
      if (tau > 0) pieces.push_back(pc);
    }
  }
  if (pieces.empty())
    fail(ErrorCode::BallOutsideRegion, "ball radius too small to contain any graph piece");

  std::vector<Triplet> trips;
  emit_segments(sp, pieces, resolution, trips);
  finalize(sp, trips);
}

}  // namespace

DofSpace discretize_cell(const PeriodicStructure& s, const CellDomain& domain, int resolution,
                         int m) {
  if (resolution < 2)
    fail(ErrorCode::ResolutionTooSmall,
         "resolution " + std::to_string(resolution) + " (need at least 2 elements per unit)");
  if (m < 1) fail(ErrorCode::InvalidConfig, "target dimension m must be at least 1");

  DofSpace sp;
  sp.kind = s.kind;
  sp.dim = s.dim;
  sp.m = m;
  sp.domain = domain;
  sp.resolution = resolution;

  if (s.kind == StructureKind::Graph) {
    if (domain.type == CellDomain::Type::ScaledCell)
      build_graph_cell(sp, s, domain, resolution);
    else
      build_graph_ball(sp, s, domain, resolution);
    return sp;
  }

  if (domain.type == CellDomain::Type::ScaledCell) {
    if (domain.k < 1) fail(ErrorCode::InvalidConfig, "cell scale k must be at least 1");
    const double h = 1.0 / resolution;
    const double invh = resolution;
    const int n = domain.k * resolution;
    if (s.dim == 1) {
      build_interval(sp, domain.offset[0], n, h, invh);
    } else {
      build_grid_2d(sp, Vec2(domain.offset[0], domain.offset[1]), n, h, invh,
                    [](const Vec2&) { return true; });
    }
    return sp;
  }

  if (!(domain.rho > 0)) fail(ErrorCode::InvalidConfig, "ball radius must be positive");
  if (s.dim == 1) {
    const int n = std::max<int>(2, static_cast<int>(std::llround(2.0 * domain.rho * resolution)));
    const double h = 2.0 * domain.rho / n;
    build_interval(sp, domain.center[0] - domain.rho, n, h, 1.0 / h);
  } else {
    const double h = 1.0 / resolution;
    const int half = static_cast<int>(std::ceil(domain.rho * resolution)) + 1;
    const Vec2 corner = domain.center - Vec2(half * h, half * h);
    const Vec2 c = domain.center;
    const double r2 = domain.rho * domain.rho;
    build_grid_2d(sp, corner, 2 * half, h, 1.0 / h,
                  [&](const Vec2& centroid) { return (centroid - c).squaredNorm() < r2; });
    if (sp.n_qp == 0)
      fail(ErrorCode::BallOutsideRegion, "ball contains no elements at this resolution");
  }
  return sp;
}

namespace {

double energy_impl(const DofSpace& sp, const Integrand& L, const Eigen::MatrixXd& xi,
                   const Eigen::VectorXd& w, Eigen::VectorXd* grad_out) {
  const int m = sp.m;
  if (xi.rows() != m || xi.cols() != sp.dim)
    fail(ErrorCode::DimensionMismatch,
         "xi must be " + std::to_string(m) + "x" + std::to_string(sp.dim));
  if (w.size() != sp.n_dofs)
    fail(ErrorCode::DimensionMismatch, "DOF vector length " + std::to_string(w.size()) +
                                           ", space has " + std::to_string(sp.n_dofs));
  if (L.info().m != m)
    fail(ErrorCode::DimensionMismatch, "integrand target dimension mismatch");

  const int gc = sp.grad_cols;
  const int nn = sp.n_nodes;

  // boundary DOFs are pinned to zero
  Eigen::VectorXd weff = w;
  for (int c = 0; c < m; ++c)
    for (int i = 0; i < nn; ++i)
      if (sp.node_boundary[i]) weff[c * nn + i] = 0.0;

  Eigen::MatrixXd gq(sp.n_qp * gc, m);
  for (int c = 0; c < m; ++c) gq.col(c) = sp.grad * weff.segment(c * nn, nn);

  Eigen::MatrixXd xi_eff(m, gc), dxi(m, gc);
  Eigen::MatrixXd D;
  if (grad_out) D.resize(sp.n_qp * gc, m);

  const bool graph = sp.kind == StructureKind::Graph;
  KahanSum ks;
  for (int q = 0; q < sp.n_qp; ++q) {
    if (graph) {
      for (int r = 0; r < m; ++r) {
        double dir = 0;
        for (int d = 0; d < sp.dim; ++d) dir += xi(r, d) * sp.qp[q].tangent[d];
        xi_eff(r, 0) = dir + gq(q, r);
      }
    } else {
      for (int r = 0; r < m; ++r)
        for (int d = 0; d < gc; ++d) xi_eff(r, d) = xi(r, d) + gq(q * gc + d, r);
    }
    double v;
    if (grad_out) {
      v = L.eval_and_deriv(sp.qp[q], xi_eff, dxi);
      for (int r = 0; r < m; ++r)
        for (int d = 0; d < gc; ++d) D(q * gc + d, r) = sp.qw[q] * dxi(r, d);
    } else {
      v = L.eval(sp.qp[q], xi_eff);
    }
    ks.add(sp.qw[q] * v);
  }

  if (grad_out) {
    grad_out->resize(sp.n_dofs);
    const double inv_mu = 1.0 / sp.measure;
    for (int c = 0; c < m; ++c) {
      grad_out->segment(c * nn, nn) = inv_mu * (sp.grad.transpose() * D.col(c));
      for (int i = 0; i < nn; ++i)
        if (sp.node_boundary[i]) (*grad_out)[c * nn + i] = 0.0;
    }
  }
  return ks.value() / sp.measure;
}

}  // namespace

double energy(const DofSpace& space, const Integrand& L, const Eigen::MatrixXd& xi,
              const Eigen::VectorXd& w) {
  return energy_impl(space, L, xi, w, nullptr);
}

double energy_and_gradient(const DofSpace& space, const Integrand& L, const Eigen::MatrixXd& xi,
                           const Eigen::VectorXd& w, Eigen::VectorXd& grad_out) {
  return energy_impl(space, L, xi, w, &grad_out);
}

std::string mesh_table_csv(const DofSpace& space) {
  CsvWriter csv;
  csv.row({"node", "x", "y", "boundary"});
  for (int i = 0; i < space.n_nodes; ++i)
    csv.row({std::to_string(i), format_double(space.node_pos[i][0]),
             format_double(space.node_pos[i][1]), space.node_boundary[i] ? "1" : "0"});
  return csv.str();
}

}  // namespace cellhom

#include "cellhom/structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cellhom/numeric.hpp"
#include "cellhom/rng.hpp"

namespace cellhom {

namespace {

// Parameter interval of {s in [0,1] : a + s*(b-a) inside the open region},
// empty as {1,0}. Regions are convex, so one interval suffices.
struct ParamInterval {
  double lo = 1.0;
  double hi = 0.0;
  double len() const { return std::max(0.0, hi - lo); }
};

ParamInterval clip_halfspaces(const Vec2& a, const Vec2& d, int naxes, const double* lo,
                              const double* hi) {
  ParamInterval iv{0.0, 1.0};
  for (int ax = 0; ax < naxes; ++ax) {
    const double p = a[ax], v = d[ax];
    if (std::abs(v) < 1e-300) {
      if (!(p > lo[ax] && p < hi[ax])) return {1.0, 0.0};
      continue;
    }
    double s0 = (lo[ax] - p) / v;
    double s1 = (hi[ax] - p) / v;
    if (s0 > s1) std::swap(s0, s1);
    iv.lo = std::max(iv.lo, s0);
    iv.hi = std::min(iv.hi, s1);
    if (iv.lo >= iv.hi) return {1.0, 0.0};
  }
  return iv;
}

ParamInterval clip_ball(const Vec2& a, const Vec2& d, int naxes, const Vec2& c, double r) {
  // |a + s d - c|^2 < r^2 over the first naxes coordinates
  double qa = 0, qb = 0, qc = -r * r;
  for (int ax = 0; ax < naxes; ++ax) {
    const double e = a[ax] - c[ax];
    qa += d[ax] * d[ax];
    qb += 2.0 * e * d[ax];
    qc += e * e;
  }
  if (qa < 1e-300) return qc < 0 ? ParamInterval{0.0, 1.0} : ParamInterval{1.0, 0.0};
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc <= 0) return {1.0, 0.0};
  const double sq = std::sqrt(disc);
  ParamInterval iv;
  iv.lo = std::max(0.0, (-qb - sq) / (2.0 * qa));
  iv.hi = std::min(1.0, (-qb + sq) / (2.0 * qa));
  return iv;
}

ParamInterval clip_region(const Vec2& a, const Vec2& b, int naxes, const Region& A, double t) {
  const Vec2 d = b - a;
  if (A.type == Region::Type::Cube) {
    double lo[2], hi[2];
    for (int ax = 0; ax < 2; ++ax) {
      lo[ax] = t * A.corner[ax];
      hi[ax] = t * (A.corner[ax] + A.side);
    }
    return clip_halfspaces(a, d, naxes, lo, hi);
  }
  return clip_ball(a, d, naxes, t * A.center, t * A.radius);
}

void region_bounds(const Region& A, double t, int naxes, double* lo, double* hi) {
  for (int ax = 0; ax < naxes; ++ax) {
    if (A.type == Region::Type::Cube) {
      lo[ax] = t * A.corner[ax];
      hi[ax] = t * (A.corner[ax] + A.side);
    } else {
      lo[ax] = t * (A.center[ax] - A.radius);
      hi[ax] = t * (A.center[ax] + A.radius);
    }
  }
}

}  // namespace

double PeriodicStructure::cell_measure() const {
  if (kind == StructureKind::Euclidean) return 1.0;
  KahanSum sum;
  for (const auto& e : edges) sum.add(e.length * e.weight);
  return sum.value();
}

double PeriodicStructure::supercell_measure(int k) const {
  if (kind == StructureKind::Euclidean) {
    double m = 1.0;
    for (int d = 0; d < dim; ++d) m *= k;
    return m;
  }
  LatticeVec lo{0, 0};
  LatticeVec hi{k - 1, dim == 2 ? k - 1 : 0};
  KahanSum sum;
  for (const auto& pe : enumerate_edges(*this, lo, hi)) sum.add(pe.length * pe.weight);
  return sum.value();
}

std::string PeriodicStructure::describe() const {
  std::ostringstream os;
  if (kind == StructureKind::Euclidean) {
    os << "euclidean N=" << dim;
  } else {
    os << "graph N=" << dim << " vertices=" << vertices.size() << " edges=" << edges.size()
       << " identifications=" << identifications.size();
  }
  return os.str();
}

PeriodicStructure build_euclidean(int dim) {
  if (dim != 1 && dim != 2)
    fail(ErrorCode::UnsupportedDimension, "euclidean dimension must be 1 or 2, got " +
                                              std::to_string(dim));
  PeriodicStructure s;
  s.kind = StructureKind::Euclidean;
  s.dim = dim;
  s.action.dim = dim;
  return s;
}

PeriodicStructure build_periodic_graph(const GraphSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2)
    fail(ErrorCode::UnsupportedDimension, "graph lattice rank must be 1 or 2, got " +
                                              std::to_string(spec.dim));
  if (spec.edges.empty() || spec.vertices.empty())
    fail(ErrorCode::EmptyGraph, "graph needs at least one vertex and one edge");

  const int nv = static_cast<int>(spec.vertices.size());
  for (const auto& e : spec.edges) {
    if (e.from < 0 || e.from >= nv || e.to < 0 || e.to >= nv)
      fail(ErrorCode::DanglingIdentification,
           "edge references missing vertex " + std::to_string(e.from < 0 || e.from >= nv ? e.from : e.to));
    if (!(e.length > 0.0) || !(e.weight > 0.0))
      fail(ErrorCode::NonpositiveLengthOrWeight,
           "edge " + std::to_string(e.from) + "-" + std::to_string(e.to) +
               " needs positive length and weight");
  }

  PeriodicStructure s;
  s.kind = StructureKind::Graph;
  s.dim = spec.dim;
  s.action.dim = spec.dim;
  s.vertices = spec.vertices;
  s.edges = spec.edges;
  s.identifications = spec.identifications;

  std::set<int> sources;
  for (const auto& id : s.identifications) {
    if (id.vertex < 0 || id.vertex >= nv || id.partner < 0 || id.partner >= nv)
      fail(ErrorCode::DanglingIdentification, "identification references missing vertex");
    if (id.vertex == id.partner)
      fail(ErrorCode::DanglingIdentification,
           "vertex " + std::to_string(id.vertex) + " identified with itself");
    if (!sources.insert(id.vertex).second)
      fail(ErrorCode::DanglingIdentification,
           "vertex " + std::to_string(id.vertex) + " identified twice");
    if (s.dim == 1 && id.shift[1] != 0)
      fail(ErrorCode::DanglingIdentification, "identification shift has rank > lattice rank");
  }
  for (const auto& id : s.identifications) {
    if (sources.count(id.partner))
      fail(ErrorCode::DanglingIdentification,
           "identification chain: partner " + std::to_string(id.partner) +
               " is itself identified away");
    const Vec2 expect = s.action.translate(s.vertices[id.partner], id.shift);
    if ((s.vertices[id.vertex] - expect).norm() > 1e-9)
      fail(ErrorCode::DanglingIdentification,
           "identification of vertex " + std::to_string(id.vertex) +
               " is geometrically inconsistent with its partner");
  }

  KahanSum total;
  for (const auto& e : s.edges) total.add(e.length * e.weight);
  s.normalization = 1.0 / total.value();
  for (auto& e : s.edges) e.weight *= s.normalization;
  return s;
}

std::vector<LatticeVec> mesh_decomposition(const PeriodicStructure& s, int i, int k) {
  if (i < 1 || k < 1)
    fail(ErrorCode::InvalidConfig, "mesh decomposition needs i, k >= 1");
  std::vector<LatticeVec> out;
  if (s.dim == 1) {
    out.reserve(i);
    for (int a = 0; a < i; ++a) out.push_back({k * a, 0});
  } else {
    out.reserve(static_cast<std::size_t>(i) * i);
    for (int b = 0; b < i; ++b)
      for (int a = 0; a < i; ++a) out.push_back({k * a, k * b});
  }
  return out;
}

double measure_in_region(const PeriodicStructure& s, const Region& A, double t) {
  if (s.kind == StructureKind::Euclidean) {
    if (A.type == Region::Type::Cube) {
      double m = 1.0;
      for (int d = 0; d < s.dim; ++d) m *= t * A.side;
      return m;
    }
    const double r = t * A.radius;
    return s.dim == 1 ? 2.0 * r : M_PI * r * r;
  }

  double lo[2] = {0, 0}, hi[2] = {0, 0};
  region_bounds(A, t, s.dim, lo, hi);
  Vec2 cell_lo = s.vertices.front(), cell_hi = s.vertices.front();
  for (const auto& v : s.vertices) {
    cell_lo = cell_lo.cwiseMin(v);
    cell_hi = cell_hi.cwiseMax(v);
  }
  LatticeVec zlo{0, 0}, zhi{0, 0};
  for (int d = 0; d < s.dim; ++d) {
    zlo[d] = static_cast<int>(std::floor(lo[d] - cell_hi[d])) - 1;
    zhi[d] = static_cast<int>(std::ceil(hi[d] - cell_lo[d])) + 1;
  }
  KahanSum sum;
  for (const auto& pe : enumerate_edges(s, zlo, zhi)) {
    const ParamInterval iv = clip_region(pe.a, pe.b, s.dim, A, t);
    if (iv.len() > 0) sum.add(iv.len() * pe.length * pe.weight);
  }
  return sum.value();
}

LatticeCover lattice_cover(const PeriodicStructure& s, const Region& A, double t, int k) {
  if (!(t > 0) || k < 1)
    fail(ErrorCode::InvalidConfig, "lattice cover needs t > 0 and k >= 1");
  const int N = s.dim;
  double lo[2] = {0, 0}, hi[2] = {0, 0};
  region_bounds(A, t, N, lo, hi);

  LatticeCover cover;
  LatticeVec zlo{0, 0}, zhi{0, 0};
  for (int d = 0; d < N; ++d) {
    zlo[d] = k * (static_cast<int>(std::floor(lo[d] / k)) - 1);
    zhi[d] = k * (static_cast<int>(std::ceil(hi[d] / k)) + 1);
  }

  const auto cube_inner = [&](const LatticeVec& z) {
    for (int d = 0; d < N; ++d)
      if (!(z[d] > lo[d] && z[d] + k <= hi[d])) return false;
    return true;
  };
  const auto cube_outer = [&](const LatticeVec& z) {
    for (int d = 0; d < N; ++d)
      if (!(z[d] + k > lo[d] && z[d] < hi[d])) return false;
    return true;
  };
  const Vec2 c = t * A.center;
  const double r = t * A.radius;
  // A half-open cell [z, z+k)^N sits inside the open ball iff the attained
  // corner z is strictly inside and every other closed-cube corner is within
  // the closed ball.
  const auto ball_inner = [&](const LatticeVec& z) {
    const int corners = N == 1 ? 2 : 4;
    for (int m = 0; m < corners; ++m) {
      Vec2 v = Vec2::Zero();
      for (int d = 0; d < N; ++d) v[d] = z[d] + ((m >> d) & 1 ? k : 0);
      double dist2 = 0;
      for (int d = 0; d < N; ++d) dist2 += (v[d] - c[d]) * (v[d] - c[d]);
      if (m == 0 ? !(dist2 < r * r) : !(dist2 <= r * r)) return false;
    }
    return true;
  };
  const auto ball_outer = [&](const LatticeVec& z) {
    double dist2 = 0;
    for (int d = 0; d < N; ++d) {
      const double g = std::max({0.0, z[d] - c[d], c[d] - (z[d] + k)});
      dist2 += g * g;
    }
    return dist2 < r * r;
  };

  const bool is_cube = A.type == Region::Type::Cube;
  const auto visit = [&](const LatticeVec& z) {
    if (!(is_cube ? cube_outer(z) : ball_outer(z))) return;
    cover.outer.push_back(z);
    if (is_cube ? cube_inner(z) : ball_inner(z)) cover.inner.push_back(z);
  };
  if (N == 1) {
    for (int zx = zlo[0]; zx <= zhi[0]; zx += k) visit({zx, 0});
  } else {
    for (int zy = zlo[1]; zy <= zhi[1]; zy += k)
      for (int zx = zlo[0]; zx <= zhi[0]; zx += k) visit({zx, zy});
  }

  const double cellm = s.supercell_measure(k);
  cover.inner_measure = cellm * static_cast<double>(cover.inner.size());
  cover.outer_measure = cellm * static_cast<double>(cover.outer.size());
  cover.region_measure = measure_in_region(s, A, t);
  cover.gap_ratio = (cover.outer_measure - cover.inner_measure) / cover.region_measure;
  return cover;
}

std::vector<PlacedEdge> enumerate_edges(const PeriodicStructure& s, const LatticeVec& lo,
                                        const LatticeVec& hi) {
  std::vector<PlacedEdge> out;
  const int y0 = s.dim == 2 ? lo[1] : 0;
  const int y1 = s.dim == 2 ? hi[1] : 0;
  for (int zy = y0; zy <= y1; ++zy)
    for (int zx = lo[0]; zx <= hi[0]; ++zx) {
      const LatticeVec z{zx, zy};
      for (const auto& e : s.edges) {
        PlacedEdge pe;
        pe.a = s.action.translate(s.vertices[e.from], z);
        pe.b = s.action.translate(s.vertices[e.to], z);
        pe.length = e.length;
        pe.weight = e.weight;
        out.push_back(pe);
      }
    }
  return out;
}

SupercellGraph build_supercell_graph(const PeriodicStructure& s, int k, LatticeVec offset) {
  if (s.kind != StructureKind::Graph)
    fail(ErrorCode::InvalidConfig, "supercell graph assembly needs a graph structure");
  if (k < 1) fail(ErrorCode::InvalidConfig, "supercell window needs k >= 1");

  // canonical node = (vertex, copy) after one identification hop
  std::map<int, std::pair<int, LatticeVec>> canon;  // source vertex -> (partner, shift)
  for (const auto& id : s.identifications) canon[id.vertex] = {id.partner, id.shift};
  const auto canonical = [&](int v, LatticeVec z) {
    auto it = canon.find(v);
    if (it == canon.end()) return std::pair<int, LatticeVec>{v, z};
    LatticeVec zz = z;
    for (int d = 0; d < 2; ++d) zz[d] += it->second.second[d];
    return std::pair<int, LatticeVec>{it->second.first, zz};
  };

  using Key = std::tuple<int, int, int>;  // (vertex, zx, zy), ordered
  const auto key_of = [](const std::pair<int, LatticeVec>& c) {
    return Key{c.first, c.second[0], c.second[1]};
  };

  std::set<Key> inside, touched_outside;
  const int ylo = s.dim == 2 ? offset[1] - 1 : 0;
  const int yhi = s.dim == 2 ? offset[1] + k : 0;
  for (int zy = ylo; zy <= yhi; ++zy)
    for (int zx = offset[0] - 1; zx <= offset[0] + k; ++zx) {
      const bool in_window = zx >= offset[0] && zx < offset[0] + k &&
                             (s.dim == 1 || (zy >= offset[1] && zy < offset[1] + k));
      const LatticeVec z{zx, s.dim == 2 ? zy : 0};
      for (const auto& e : s.edges) {
        const Key ka = key_of(canonical(e.from, z));
        const Key kb = key_of(canonical(e.to, z));
        if (in_window) {
          inside.insert(ka);
          inside.insert(kb);
        } else {
          touched_outside.insert(ka);
          touched_outside.insert(kb);
        }
      }
    }

  SupercellGraph g;
  std::map<Key, int> index;
  for (const auto& kk : inside) {
    const int idx = static_cast<int>(g.nodes.size());
    index[kk] = idx;
    SupercellGraph::Node n;
    n.pos = s.action.translate(s.vertices[std::get<0>(kk)],
                               {std::get<1>(kk), std::get<2>(kk)});
    n.boundary = touched_outside.count(kk) > 0;
    g.nodes.push_back(n);
  }

  for (int zy = offset[1]; zy < offset[1] + (s.dim == 2 ? k : 1); ++zy)
    for (int zx = offset[0]; zx < offset[0] + k; ++zx) {
      const LatticeVec z{zx, s.dim == 2 ? zy : 0};
      for (const auto& e : s.edges) {
        SupercellGraph::Edge ge;
        ge.a = index.at(key_of(canonical(e.from, z)));
        ge.b = index.at(key_of(canonical(e.to, z)));
        ge.length = e.length;
        ge.weight = e.weight;
        ge.tangent = (g.nodes[ge.b].pos - g.nodes[ge.a].pos) / e.length;
        g.edges.push_back(ge);
      }
    }
  return g;
}

ValidationReport validate_structure(const PeriodicStructure& s, std::uint64_t seed) {
  ValidationReport rep;
  Rng rng(seed);
  std::ostringstream os;

  {
    const double m = s.cell_measure();
    ValidationEntry e;
    e.check = "cell-measure-unit";
    e.pass = std::abs(m - 1.0) <= 1e-12;
    os.str("");
    os << "mu(U) = " << m;
    e.detail = os.str();
    rep.entries.push_back(e);
  }

  {
    double worst = 0.0;
    for (int i = 0; i < 32; ++i) {
      Vec2 x(rng.uniform(-3, 3), s.dim == 2 ? rng.uniform(-3, 3) : 0.0);
      worst = std::max(worst, (LatticeAction::scale(1.0, x) - x).norm());
    }
    ValidationEntry e;
    e.check = "scaling-identity-at-one";
    e.pass = worst <= 1e-12;
    os.str("");
    os << "max |h_1(x) - x| = " << worst;
    e.detail = os.str();
    rep.entries.push_back(e);
  }

  {
    const double scales[4] = {0.5, 2.0, 3.0, 1.7};
    double worst = 0.0;
    for (double a : scales)
      for (double b : scales)
        for (int i = 0; i < 8; ++i) {
          Vec2 x(rng.uniform(-2, 2), s.dim == 2 ? rng.uniform(-2, 2) : 0.0);
          const Vec2 lhs = LatticeAction::scale(a, LatticeAction::scale(b, x));
          const Vec2 rhs = LatticeAction::scale(a * b, x);
          worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
        }
    ValidationEntry e;
    e.check = "scaling-composition";
    e.pass = worst <= 1e-12;
    os.str("");
    os << "max rel |h_a(h_b(x)) - h_ab(x)| = " << worst;
    e.detail = os.str();
    rep.entries.push_back(e);
  }

  {
    double worst = 0.0;
    for (int i = 0; i < 12; ++i) {
      Region cube = Region::cube(
          Vec2(rng.uniform(-1, 1), s.dim == 2 ? rng.uniform(-1, 1) : 0.0),
          rng.uniform(0.3, 1.6));
      const LatticeVec g{static_cast<int>(rng.uniform(-3, 4)),
                         s.dim == 2 ? static_cast<int>(rng.uniform(-3, 4)) : 0};
      Region moved = cube;
      for (int d = 0; d < s.dim; ++d) moved.corner[d] += g[d];
      const double m0 = measure_in_region(s, cube, 1.0);
      const double m1 = measure_in_region(s, moved, 1.0);
      worst = std::max(worst, std::abs(m0 - m1) / std::max(1.0, std::abs(m0)));
    }
    ValidationEntry e;
    e.check = "translation-invariance";
    e.pass = worst <= 1e-12;
    os.str("");
    os << "max rel |mu(E+g) - mu(E)| = " << worst;
    e.detail = os.str();
    rep.entries.push_back(e);
  }

  {
    double worst = 0.0;
    for (int a = 2; a <= 4; ++a)
      for (int b = 2; b <= 4; ++b) {
        const double lhs = s.supercell_measure(a * b);
        const double rhs = s.supercell_measure(a) * s.supercell_measure(b);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
    ValidationEntry e;
    e.check = "measure-multiplicativity";
    e.pass = worst <= 1e-12;
    os.str("");
    os << "max rel |mu(h_ab(U)) - mu(h_a(U)) mu(h_b(U))| = " << worst;
    e.detail = os.str();
    rep.entries.push_back(e);
  }

  return rep;
}

}  // namespace cellhom

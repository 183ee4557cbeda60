#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellhom/error.hpp"

namespace cellhom {

using Vec2 = Eigen::Vector2d;
using LatticeVec = std::array<int, 2>;

// Scaling family h_t: dilation by t about the origin in cell coordinates.
// h_1 = id and h_s(h_t(x)) = h_{st}(x) hold to machine precision.
struct LatticeAction {
  int dim = 1;  // lattice rank N (1 or 2)
  std::array<Vec2, 2> generators{Vec2(1, 0), Vec2(0, 1)};

  static Vec2 scale(double t, const Vec2& x) { return t * x; }

  Vec2 translate(const Vec2& x, const LatticeVec& g) const {
    Vec2 y = x;
    for (int d = 0; d < dim; ++d) y += static_cast<double>(g[d]) * generators[d];
    return y;
  }
};

enum class StructureKind { Euclidean, Graph };

struct GraphEdge {
  int from = 0;
  int to = 0;
  double length = 0.0;
  double weight = 0.0;  // per unit length; normalized so mu(U) = 1
};

// Boundary vertex glued onto a lattice-translated partner: the point
// vertices[vertex] is the same structure point as vertices[partner] + shift.
// The pairing is an involution: partners are not themselves sources.
struct GraphIdentification {
  int vertex = 0;
  int partner = 0;
  LatticeVec shift{0, 0};
};

struct PeriodicStructure {
  StructureKind kind = StructureKind::Euclidean;
  int dim = 1;  // N
  LatticeAction action;

  // graph data (unused for euclidean structures)
  std::vector<Vec2> vertices;
  std::vector<GraphEdge> edges;
  std::vector<GraphIdentification> identifications;
  double normalization = 1.0;  // factor applied to raw weights

  bool is_graph() const { return kind == StructureKind::Graph; }

  // mu(U); 1 after normalization
  double cell_measure() const;
  // mu(h_k(U)) = k^N * mu(U), computed by enumerating period copies for
  // graphs (not assumed)
  double supercell_measure(int k) const;

  std::string describe() const;
};

// Raw (unnormalized) graph description, as read from the JSON schema.
struct GraphSpec {
  int dim = 2;
  std::vector<Vec2> vertices;
  std::vector<GraphEdge> edges;  // weight = raw weight, pre-normalization
  std::vector<GraphIdentification> identifications;
};

PeriodicStructure build_euclidean(int dim);
PeriodicStructure build_periodic_graph(const GraphSpec& spec);

// Cell problem domains: the scaled cell g + h_k(U), or the open metric ball
// Q_rho(x) (intrinsic path distance on graphs).
struct CellDomain {
  enum class Type { ScaledCell, Ball };
  Type type = Type::ScaledCell;
  int k = 1;
  LatticeVec offset{0, 0};  // lattice translation g of the scaled cell
  Vec2 center = Vec2::Zero();
  double rho = 0.0;

  static CellDomain scaled_cell(int k, LatticeVec offset = {0, 0}) {
    CellDomain d;
    d.type = Type::ScaledCell;
    d.k = k;
    d.offset = offset;
    return d;
  }
  static CellDomain ball(const Vec2& center, double rho) {
    CellDomain d;
    d.type = Type::Ball;
    d.center = center;
    d.rho = rho;
    return d;
  }
};

// Open region in cell coordinates for lattice covers.
struct Region {
  enum class Type { Cube, Ball };
  Type type = Type::Cube;
  Vec2 corner = Vec2::Zero();  // cube (corner, corner+side)^N, open
  double side = 0.0;
  Vec2 center = Vec2::Zero();  // open ball
  double radius = 0.0;

  static Region cube(const Vec2& corner, double side) {
    Region r;
    r.type = Type::Cube;
    r.corner = corner;
    r.side = side;
    return r;
  }
  static Region ball(const Vec2& center, double radius) {
    Region r;
    r.type = Type::Ball;
    r.center = center;
    r.radius = radius;
    return r;
  }
};

// Translations g with {g + h_k(U)} disjoint and tiling h_{ik}(U); card = i^N.
std::vector<LatticeVec> mesh_decomposition(const PeriodicStructure& s, int i, int k);

struct LatticeCover {
  std::vector<LatticeVec> inner;  // z in kZ^N with z + kU contained in tA
  std::vector<LatticeVec> outer;  // z in kZ^N with (z + kU) meeting tA
  double inner_measure = 0.0;
  double outer_measure = 0.0;
  double region_measure = 0.0;  // mu(h_t(A))
  double gap_ratio = 0.0;       // (outer - inner measure) / region measure
};

LatticeCover lattice_cover(const PeriodicStructure& s, const Region& A, double t, int k);

// mu of the structure inside the scaled region h_t(A); exact edge clipping
// for graphs.
double measure_in_region(const PeriodicStructure& s, const Region& A, double t);

struct ValidationEntry {
  std::string check;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

ValidationReport validate_structure(const PeriodicStructure& s, std::uint64_t seed = 7);

// --- supercell assembly (shared with fespace) ------------------------------

// The window of k^N translated period copies of the cell graph, with
// junctions glued through the identification map. Nodes on the window
// boundary (a lattice coordinate equal to 0 or k, where the infinite
// structure continues) are flagged.
struct SupercellGraph {
  struct Node {
    Vec2 pos;
    bool boundary = false;
  };
  struct Edge {
    int a = 0;
    int b = 0;
    double length = 0.0;
    double weight = 0.0;
    Vec2 tangent = Vec2::Zero();  // chord / metric length
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;
};

SupercellGraph build_supercell_graph(const PeriodicStructure& s, int k,
                                     LatticeVec offset = {0, 0});

// All edges of the infinite graph with a copy index in [lo, hi]^N (used for
// clipping and ball construction). Each entry is a positioned copy of a cell
// edge.
struct PlacedEdge {
  Vec2 a;
  Vec2 b;
  double length = 0.0;
  double weight = 0.0;
};
std::vector<PlacedEdge> enumerate_edges(const PeriodicStructure& s, const LatticeVec& lo,
                                        const LatticeVec& hi);

}  // namespace cellhom

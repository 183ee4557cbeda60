#include "cellhom/fixtures.hpp"

#include <map>

#include "cellhom/error.hpp"

namespace cellhom {

namespace {

const std::map<std::string, std::string>& fixture_table() {
  static const std::map<std::string, std::string> table = {
      {"cell-double-well",
       R"fixture({
  "command": "cell",
  "check_tol": 0.05,
  "domain": {"type": "ball", "center": [0.0], "rho": 0.5},
  "integrand": {"id": "double_well_1d", "params": {}},
  "oracle": {"id": "double-well-envelope"},
  "resolution": 256,
  "seed": 1,
  "solver": {"max_iterations": 20000, "multistart": 12, "perturbation": 1.0},
  "structure": {"type": "euclidean", "dim": 1},
  "xi": [0.0]
}
)fixture"},
      {"cover-disk",
       R"fixture({
  "command": "cover",
  "k": 1,
  "region": {"type": "ball", "center": [0.0, 0.0], "radius": 1.0},
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 2},
  "t_list": [8, 16, 32, 64]
}
)fixture"},
      {"double-well-1d",
       R"fixture({
  "command": "homogenize",
  "check_tol": 0.05,
  "integrand": {"id": "double_well_1d", "params": {}},
  "k_list": [1, 2, 4],
  "oracle": {"id": "double-well-envelope"},
  "resolutions": [128, 256],
  "seed": 1,
  "solver": {"max_iterations": 20000, "multistart": 12, "perturbation": 1.0},
  "structure": {"type": "euclidean", "dim": 1},
  "xi": [0.0, 1.0, 2.0]
}
)fixture"},
      {"gamma-harmonic-1d",
       R"fixture({
  "command": "gamma",
  "domain": {"type": "cell", "k": 1},
  "elements_per_period": 16,
  "integrand": {"id": "p_dirichlet_coeff", "params": {"profile": "sine"}},
  "k_list": [1, 2],
  "resolutions": [128, 256],
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 1},
  "t_list": [4, 8, 16],
  "xi": [1.0]
}
)fixture"},
      {"harmonic-1d",
       R"fixture({
  "command": "homogenize",
  "check_tol": 0.01,
  "integrand": {"id": "p_dirichlet_coeff", "params": {"profile": "sine"}},
  "k_list": [1, 2],
  "oracle": {"id": "harmonic-sine"},
  "resolutions": [128, 256],
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 1},
  "xi": [1.0]
}
)fixture"},
      {"laminate-2d",
       R"fixture({
  "command": "homogenize",
  "check_tol": 0.02,
  "integrand": {"id": "laminate_2d", "params": {"a1": 1.0, "a2": 3.0}},
  "k_list": [1, 2, 4, 8],
  "oracle": {"id": "laminate"},
  "resolutions": [32, 64],
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 2},
  "xi": [[1.0, 0.0], [0.0, 1.0]]
}
)fixture"},
      {"periodic-constant-1d",
       R"fixture({
  "command": "periodic-check",
  "integrand": {"id": "p_dirichlet_coeff", "params": {"a0": 2.0, "profile": "constant"}},
  "resolution": 64,
  "rho": 0.7,
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 1},
  "t_list": [8, 16, 32],
  "x": [0.3],
  "xi": [1.0]
}
)fixture"},
      {"periodic-harmonic-1d",
       R"fixture({
  "command": "periodic-check",
  "integrand": {"id": "p_dirichlet_coeff", "params": {"profile": "sine"}},
  "resolution": 256,
  "rho": 1.0,
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 1},
  "t_list": [8, 16, 32],
  "x": [0.5],
  "xi": [1.0]
}
)fixture"},
      {"periodic-laminate-2d",
       R"fixture({
  "command": "periodic-check",
  "integrand": {"id": "laminate_2d", "params": {"a1": 1.0, "a2": 3.0}},
  "resolution": 256,
  "rho": 0.5,
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 2},
  "t_list": [8, 16, 32],
  "x": [0.25, 0.0],
  "xi": [[1.0, 0.0]]
}
)fixture"},
      {"piecewise-1d",
       R"fixture({
  "command": "homogenize",
  "check_tol": 0.005,
  "integrand": {"id": "p_dirichlet_coeff", "params": {"a1": 1.0, "a2": 3.0, "profile": "piecewise"}},
  "k_list": [1, 2, 4],
  "oracle": {"id": "piecewise-harmonic"},
  "resolutions": [128, 256],
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 1},
  "xi": [1.0]
}
)fixture"},
      {"piecewise-mix",
       R"fixture({
  "command": "homogenize-piecewise",
  "check_tol": 0.01,
  "components": [
    {
      "integrand": {"id": "p_dirichlet_coeff", "params": {"a0": 2.0, "profile": "constant"}},
      "structure": {"type": "euclidean", "dim": 1},
      "weight": 0.5,
      "xi": [1.0]
    },
    {
      "integrand": {"id": "graph_edge_quadratic", "params": {}},
      "structure": {
        "type": "graph",
        "dim": 2,
        "edges": [[0, 1, 1.0, 1.0], [0, 2, 1.0, 1.0]],
        "identifications": [[1, 0, [1, 0]], [2, 0, [0, 1]]],
        "vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
      },
      "weight": 0.5,
      "xi": [[1.0, 0.0]]
    }
  ],
  "expected": [1.25],
  "k_list": [1, 2],
  "resolutions": [64, 128],
  "seed": 1
}
)fixture"},
      {"quasiconvex-double-well",
       R"fixture({
  "command": "quasiconvexify",
  "check_tol": 0.05,
  "elements_per_rho": 256,
  "integrand": {"id": "double_well_1d", "params": {}},
  "oracle": {"id": "double-well-envelope"},
  "rho_list": [0.5, 0.25, 0.125],
  "seed": 1,
  "solver": {"max_iterations": 20000, "multistart": 12, "perturbation": 1.0},
  "structure": {"type": "euclidean", "dim": 1},
  "x": [0.0],
  "xi": [0.0]
}
)fixture"},
      {"square-lattice",
       R"fixture({
  "command": "homogenize",
  "check_tol": 1e-06,
  "integrand": {"id": "graph_edge_quadratic", "params": {}},
  "k_list": [1, 2],
  "oracle": {"id": "square-lattice"},
  "resolutions": [2, 4],
  "seed": 1,
  "structure": {
    "type": "graph",
    "dim": 2,
    "edges": [[0, 1, 1.0, 1.0], [0, 2, 1.0, 1.0]],
    "identifications": [[1, 0, [1, 0]], [2, 0, [0, 1]]],
    "vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
  },
  "xi": [[1.0, 1.0]]
}
)fixture"},
      {"subadd-harmonic-1d",
       R"fixture({
  "command": "subadd-check",
  "integrand": {"id": "p_dirichlet_coeff", "params": {"profile": "sine"}},
  "k_list": [1, 2, 4],
  "resolutions": [128, 256],
  "seed": 1,
  "structure": {"type": "euclidean", "dim": 1},
  "xi": [1.0]
}
)fixture"},
      {"validate-euclid-2d",
       R"fixture({
  "command": "validate",
  "integrand": {"id": "laminate_2d", "params": {"a1": 1.0, "a2": 3.0}},
  "seed": 7,
  "structure": {"type": "euclidean", "dim": 2}
}
)fixture"},
      {"validate-square-lattice",
       R"fixture({
  "command": "validate",
  "integrand": {"id": "graph_edge_quadratic", "params": {}},
  "seed": 7,
  "structure": {
    "type": "graph",
    "dim": 2,
    "edges": [[0, 1, 1.0, 1.0], [0, 2, 1.0, 1.0]],
    "identifications": [[1, 0, [1, 0]], [2, 0, [0, 1]]],
    "vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
  }
}
)fixture"},
  };
  return table;
}
}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : fixture_table()) names.push_back(name);
  return names;
}

const std::string& fixture_json(const std::string& name) {
  const auto& table = fixture_table();
  const auto it = table.find(name);
  if (it == table.end()) fail(ErrorCode::UnknownCatalogId, "unknown fixture '" + name + "'");
  return it->second;
}

}  // namespace cellhom

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sklab/geometry/boundary.hpp"

namespace sklab::mapping {

// Mixed boundary-value problem for one flattening-map component on the
// box-with-graph-bottom domain, posed in Gamma coordinates: the grid is
// uniform over [-1,1]^{d-1} x [0,1] and a flattened-grid node (xhat, z)
// is the original point (xhat, z + Phi(xhat)). Harmonicity of h becomes
// div(A grad v) = 0 with A = [[I, -grad Phi], [-grad Phi^T, 1+|grad Phi|^2]],
// whose natural boundary condition on z = 0 is exactly the oblique
// (conormal) condition of the original Neumann data.
enum class GraphBC { neumann, dirichlet };

struct MixedBVP {
    geom::BoundaryFunction phi;
    int d = 3;        // ambient dimension, 2 or 3
    int nxy = 65;     // nodes per horizontal axis
    int nz = 65;      // nodes in z
    double solve_tol = 1e-10;
    int max_iters = 20000;
    // default: components 0..d-2 get the zero-conormal graph condition and
    // component d-1 gets value 0 there (the flattening-map problems)
    std::optional<GraphBC> graph_bc;
    // default Dirichlet data is the original coordinate x_component
    std::function<double(const Vec&)> dirichlet_data;

    MixedBVP(geom::BoundaryFunction boundary, int dim, int nodes_xy,
             int nodes_z);

    double hx() const { return 2.0 / (nxy - 1); }
    double hz() const { return 1.0 / (nz - 1); }
    std::size_t node_count() const;
};

enum class FaceClass { interior, dirichlet, graph_face };

// Priority: any node on a side or top face is Dirichlet; remaining z = 0
// nodes form the graph face.
FaceClass classify_node(const MixedBVP& bvp, int i, int j, int k);

struct GridSolution {
    int component = 0;
    int d = 3, nxy = 0, nz = 0;
    std::vector<double> values;  // one per node, x fastest then y then z
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
    double rhs_norm = 0.0;
    // max |row residual| over free graph-face nodes: the discrete (weak)
    // conormal derivative left by the solve
    double graph_flux_residual_max = 0.0;
    std::vector<double> residual_history;  // recorded every 25 iterations
};

GridSolution solve_component(const MixedBVP& bvp, int component);

// Dirichlet data at a pinned node: dirichlet_data override when set, the
// original coordinate x_component on outer faces otherwise, and 0 on a
// Dirichlet graph face (the h_d problem).
double boundary_value(const MixedBVP& bvp, int component, int i, int j, int k);

}  // namespace sklab::mapping

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topopt/types.hpp"

namespace topopt {

// Structured grid of bilinear quads. Nodes are numbered lexicographically
// (x fastest), elements likewise. Element connectivity is counterclockwise
// starting at the lower-left node.
struct GridMesh {
    int nx = 0, ny = 0;      // element counts per axis
    double lx = 0.0, ly = 0.0;
    double hx = 0.0, hy = 0.0;

    int n_nodes() const { return (nx + 1) * (ny + 1); }
    int n_elems() const { return nx * ny; }
    int n_dofs() const { return 2 * n_nodes(); }

    int node_id(int i, int j) const { return i + j * (nx + 1); }
    Vec2 node_coords(int n) const {
        int i = n % (nx + 1), j = n / (nx + 1);
        return {i * hx, j * hy};
    }
    std::array<int, 4> elem_nodes(int e) const {
        int ex = e % nx, ey = e / nx;
        int n0 = node_id(ex, ey);
        return {n0, n0 + 1, n0 + nx + 2, n0 + nx + 1};
    }
    Vec2 elem_centroid(int e) const {
        int ex = e % nx, ey = e / nx;
        return {(ex + 0.5) * hx, (ey + 0.5) * hy};
    }
    double elem_area() const { return hx * hy; }
    double h_min() const { return hx < hy ? hx : hy; }
    double h_max() const { return hx > hy ? hx : hy; }
};

GridMesh build_grid(int nx, int ny, double lx, double ly);

// One Gauss point of the 2x2 rule: shape values, physical shape gradients,
// and the physical integration weight (w * detJ, constant on a uniform grid).
struct QuadraturePoint {
    Vec2 ref;                    // (xi, eta)
    std::array<double, 4> N;
    std::array<Vec2, 4> B;       // dN/dx, dN/dy per node
    double weight;
};

// Shape values / reference-coordinate gradients of the bilinear quad at (xi, eta).
std::array<double, 4> shape_values(const Vec2& ref);
std::array<Vec2, 4> shape_ref_gradients(const Vec2& ref);

// The four Gauss points for any element of the (uniform) mesh.
std::array<QuadraturePoint, 4> shape_gradients(const GridMesh& mesh);

struct DirichletBC {
    int node = 0;
    int comp = 0;       // 0 = x, 1 = y
    double value = 0.0;
};

struct NodalLoad {
    int node = 0;
    int comp = 0;
    double value = 0.0;
};

// Supports, loads, and the frozen (non-designable) node set of a problem.
struct BoundaryConditionSet {
    std::vector<DirichletBC> dirichlet;
    std::vector<NodalLoad> loads;
    std::vector<uint8_t> frozen;   // per node, 1 = non-designable

    // Assembles the full-length load vector (2 dofs per node).
    Eigen::VectorXd load_vector(const GridMesh& mesh) const;
};

// Full <-> free dof numbering with Dirichlet dofs removed. Prescribed values
// are stored per full dof and embedded into the state vector before assembly,
// so reduced residuals need no right-hand-side correction.
struct DofMap {
    int n_full = 0;
    std::vector<int> full_to_free;   // -1 for constrained dofs
    std::vector<int> free_to_full;
    std::vector<double> fixed_value; // per full dof, 0 where free

    int n_free() const { return static_cast<int>(free_to_full.size()); }

    Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;
    Eigen::VectorXd expand(const Eigen::VectorXd& free_vals) const;
    // Writes prescribed values into a full-length state vector.
    void impose(Eigen::VectorXd& u_full) const;
};

// Validates and numbers the constraints. Duplicate (node, comp) entries with
// conflicting values are rejected; loaded or fully-fixed nodes missing from
// the frozen set are rejected (single-component rollers are exempt).
DofMap apply_boundary_conditions(const GridMesh& mesh, const BoundaryConditionSet& bcs);

} // namespace topopt

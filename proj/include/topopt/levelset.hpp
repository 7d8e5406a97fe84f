#pragma once

#include "topopt/assembly.hpp"
#include "topopt/grid.hpp"

namespace topopt {

// Nodal level-set field on the analysis grid. Material occupies {phi >= 0}.
// Sign convention for boundary motion: speed V > 0 moves the boundary inward
// (material removal), matching phi_t + V |grad phi| = 0.
struct LevelSetField {
    int nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    Eigen::VectorXd phi;
    std::vector<uint8_t> frozen;   // nodal, non-designable nodes keep phi >= floor_value
    double floor_value = 0.0;

    int n_nodes() const { return (nx + 1) * (ny + 1); }
    int id(int i, int j) const { return i + j * (nx + 1); }
};

// Seed hole: circle (radius r) or axis-aligned rectangle (half extents).
struct Hole {
    bool rect = false;
    Vec2 center = Vec2::Zero();
    double r = 0.0;
    Vec2 half = Vec2::Zero();
};

// Signed distance to the initial design: material everywhere except inside
// the holes, exact distances for circles. Holes overlapping non-designable
// nodes are rejected; frozen nodes are floored to keep a material margin.
LevelSetField initialize_design(const GridMesh& mesh, const std::vector<Hole>& holes,
                                const std::vector<uint8_t>& frozen);

struct BoundaryPoint {
    Vec2 x = Vec2::Zero();
    double length = 0.0;    // half the sum of the incident segment lengths
    Vec2 normal = Vec2::Zero();   // unit, material -> void
    bool designable = true;
};

struct BoundarySegment {
    int a = 0, b = 0;       // point indices
};

struct BoundaryDiscretization {
    std::vector<BoundaryPoint> points;
    std::vector<BoundarySegment> segments;

    bool empty() const { return points.empty(); }
};

// Marching-squares contour of {phi = 0}. Ambiguous (saddle) cells are
// resolved by the sign of the cell-center average. All-void fields are
// rejected; all-material fields yield an empty set.
BoundaryDiscretization extract_boundary(const LevelSetField& f, const GridMesh& mesh);

// Exact per-element material area fractions of the linearly interpolated
// contour (polygon clipping, consistent with the marching-squares topology).
DensityField compute_area_fractions(const LevelSetField& f, const GridMesh& mesh);

// Copies each boundary point's speed to the grid nodes of a narrow band
// (nearest-boundary-point assignment); zero outside the band and at frozen nodes.
Eigen::VectorXd extend_velocity(const LevelSetField& f, const GridMesh& mesh,
                                const BoundaryDiscretization& boundary,
                                const Eigen::VectorXd& point_speeds);

// One forward-Euler step of phi_t + V |grad phi| = 0 with first-order upwind
// differences. Rejects steps violating dt * max|V| <= cfl * h. Frozen nodes
// are not updated.
LevelSetField advect(const LevelSetField& f, const GridMesh& mesh, const Eigen::VectorXd& speed,
                     double dt, double cfl = 0.3);

// Rebuilds phi as a signed distance to the current zero contour: exact
// point-to-polyline distances inside the narrow band, fast marching beyond.
// An all-material field becomes the distance to the domain frame.
LevelSetField reinitialize(const LevelSetField& f, const GridMesh& mesh);

struct MoveLimits {
    Eigen::VectorXd zmin, zmax;   // per boundary point, zmin <= 0 <= zmax
};

// CFL-limited move bounds per boundary point; the inward bound is additionally
// capped by the distance to the nearest frozen node so the boundary cannot
// cross the non-designable set.
MoveLimits compute_move_limits(const LevelSetField& f, const GridMesh& mesh,
                               const BoundaryDiscretization& boundary, double cfl);

} // namespace topopt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "topopt/levelset.hpp"

using namespace topopt;

namespace {

LevelSetField disk_field(const GridMesh& mesh, const Vec2& c, double r) {
    LevelSetField f;
    f.nx = mesh.nx;
    f.ny = mesh.ny;
    f.hx = mesh.hx;
    f.hy = mesh.hy;
    f.frozen.assign(mesh.n_nodes(), 0);
    f.floor_value = 0.5 * mesh.h_min();
    f.phi.resize(mesh.n_nodes());
    for (int n = 0; n < mesh.n_nodes(); ++n)
        f.phi[n] = r - (mesh.node_coords(n) - c).norm();   // material disk
    return f;
}

double material_area(const GridMesh& mesh, const DensityField& rho) {
    double a = 0.0;
    for (double v : rho) a += v * mesh.elem_area();
    return a;
}

} // namespace

TEST_CASE("initialization: no holes gives the frame distance and a solid field") {
    GridMesh mesh = build_grid(20, 10, 2.0, 1.0);
    LevelSetField f = initialize_design(mesh, {}, {});
    for (int j = 0; j <= 10; ++j)
        for (int i = 0; i <= 20; ++i) {
            Vec2 p = mesh.node_coords(f.id(i, j));
            double expect = std::min(std::min(p.x(), 2.0 - p.x()), std::min(p.y(), 1.0 - p.y()));
            CHECK(f.phi[f.id(i, j)] == doctest::Approx(expect).epsilon(1e-12));
        }
    DensityField rho = compute_area_fractions(f, mesh);
    for (double v : rho) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("initialization: circular hole is an exact signed distance") {
    GridMesh mesh = build_grid(40, 40, 1.0, 1.0);
    Hole h;
    h.center = Vec2(0.5, 0.5);
    h.r = 0.2;
    LevelSetField f = initialize_design(mesh, {h}, {});
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        Vec2 p = mesh.node_coords(n);
        double frame = std::min(std::min(p.x(), 1.0 - p.x()), std::min(p.y(), 1.0 - p.y()));
        double expect = std::min(frame, (p - h.center).norm() - h.r);
        CHECK(f.phi[n] == doctest::Approx(expect).epsilon(1e-12));
    }

    double area = material_area(mesh, compute_area_fractions(f, mesh));
    double exact = 1.0 - M_PI * h.r * h.r;
    CHECK(std::abs(area - exact) <= 0.01 * exact);
}

TEST_CASE("initialization: holes must not swallow non-designable nodes") {
    GridMesh mesh = build_grid(10, 10, 1.0, 1.0);
    std::vector<uint8_t> frozen(mesh.n_nodes(), 0);
    frozen[mesh.node_id(5, 5)] = 1;
    Hole h;
    h.center = Vec2(0.5, 0.5);
    h.r = 0.1;
    CHECK_THROWS_AS(initialize_design(mesh, {h}, frozen), std::invalid_argument);

    // A frozen node on the frame is fine; it gets floored to a material margin.
    std::vector<uint8_t> edge(mesh.n_nodes(), 0);
    edge[mesh.node_id(0, 5)] = 1;
    LevelSetField f = initialize_design(mesh, {h}, edge);
    CHECK(f.phi[mesh.node_id(0, 5)] == doctest::Approx(f.floor_value));
}

TEST_CASE("area fractions of a straight cut are exact") {
    GridMesh mesh = build_grid(8, 8, 1.0, 1.0);
    LevelSetField f = disk_field(mesh, Vec2(0, 0), 0);
    for (int n = 0; n < mesh.n_nodes(); ++n)
        f.phi[n] = mesh.node_coords(n).y() - 0.37;   // material above the line
    DensityField rho = compute_area_fractions(f, mesh);
    CHECK(material_area(mesh, rho) == doctest::Approx(1.0 - 0.37).epsilon(1e-12));
    // Row containing the cut: each element is filled to the same fraction.
    int row = 2;   // y in [0.25, 0.375]
    double frac = (0.375 - 0.37) / 0.125;
    for (int i = 0; i < 8; ++i) CHECK(rho[row * 8 + i] == doctest::Approx(frac).epsilon(1e-12));
}

TEST_CASE("saddle cells follow the center average") {
    GridMesh mesh = build_grid(1, 1, 1.0, 1.0);
    LevelSetField f = disk_field(mesh, Vec2(0, 0), 0);

    // Balanced saddle (nodes in lexicographic order: LL, LR, UL, UR): center
    // average zero counts as material, so the material connects the positive
    // diagonal and only the corner triangles around the negative nodes are
    // void.
    f.phi << 1.0, -1.0, -1.0, 1.0;
    DensityField rho = compute_area_fractions(f, mesh);
    CHECK(rho[0] == doctest::Approx(0.75).epsilon(1e-12));
    BoundaryDiscretization bd = extract_boundary(f, mesh);
    CHECK(bd.points.size() == 4);
    CHECK(bd.segments.size() == 2);

    // Negative center average: the positive corners stay disconnected and
    // only their crossing triangles (legs at a quarter of the edge) remain.
    f.phi << 1.0, -3.0, -3.0, 1.0;
    rho = compute_area_fractions(f, mesh);
    CHECK(rho[0] == doctest::Approx(2.0 * 0.5 * 0.25 * 0.25).epsilon(1e-12));
}

TEST_CASE("void and solid degenerate fields") {
    GridMesh mesh = build_grid(4, 4, 1.0, 1.0);
    LevelSetField f = disk_field(mesh, Vec2(0.5, 0.5), 0.2);
    for (int n = 0; n < mesh.n_nodes(); ++n) f.phi[n] = -1.0;
    CHECK_THROWS_AS(extract_boundary(f, mesh), std::invalid_argument);
    for (int n = 0; n < mesh.n_nodes(); ++n) f.phi[n] = 1.0;
    CHECK(extract_boundary(f, mesh).empty());
}

TEST_CASE("contour of a disk: positions, normals, lengths") {
    GridMesh mesh = build_grid(80, 80, 1.0, 1.0);
    // Slightly off-lattice center so no node lands exactly on the contour
    // (an exact hit degenerates the two adjacent segments to zero length).
    Vec2 c(0.5 + 1.0 / 240.0, 0.5 + 1.0 / 560.0);
    double r = 0.25;
    LevelSetField f = disk_field(mesh, c, r);
    BoundaryDiscretization bd = extract_boundary(f, mesh);
    REQUIRE(!bd.empty());

    double total_len = 0.0;
    for (const auto& p : bd.points) {
        CHECK(std::abs((p.x - c).norm() - r) <= 0.15 * mesh.h_min());
        // Material is inside, so the material-to-void normal points outward.
        Vec2 radial = (p.x - c).normalized();
        CHECK(p.normal.dot(radial) > 0.99);
        CHECK(p.normal.norm() == doctest::Approx(1.0));
        CHECK(p.length > 0.0);
        total_len += p.length;
    }
    CHECK(std::abs(total_len - 2.0 * M_PI * r) <= 0.02 * 2.0 * M_PI * r);

    // A closed contour uses every point in exactly two segments.
    std::vector<int> uses(bd.points.size(), 0);
    for (const auto& s : bd.segments) {
        uses[s.a] += 1;
        uses[s.b] += 1;
    }
    for (int u : uses) CHECK(u == 2);
}

TEST_CASE("uniform inward speed shrinks a disk at the predicted rate") {
    GridMesh mesh = build_grid(80, 80, 1.0, 1.0);
    Vec2 c(0.5, 0.5);
    double r = 0.25;
    LevelSetField f = disk_field(mesh, c, r);
    BoundaryDiscretization bd = extract_boundary(f, mesh);

    Eigen::VectorXd speeds = Eigen::VectorXd::Ones(bd.points.size());
    Eigen::VectorXd v = extend_velocity(f, mesh, bd, speeds);
    double dt = 0.3 * mesh.h_min();

    double area0 = material_area(mesh, compute_area_fractions(f, mesh));
    LevelSetField g = advect(f, mesh, v, dt);
    double area1 = material_area(mesh, compute_area_fractions(g, mesh));

    double predicted = -2.0 * M_PI * r * dt;
    CHECK(std::abs((area1 - area0) - predicted) <= 0.05 * std::abs(predicted));

    // Too large a step for the same speed field is rejected.
    CHECK_THROWS_AS(advect(f, mesh, v, 10.0 * dt), std::invalid_argument);
}

TEST_CASE("velocity extension is banded and zero at frozen nodes") {
    GridMesh mesh = build_grid(40, 40, 1.0, 1.0);
    Vec2 c(0.5, 0.5);
    LevelSetField f = disk_field(mesh, c, 0.2);
    int far_node = f.id(0, 0);
    int frozen_node = f.id(20, 28);   // just outside the disk, inside the band
    f.frozen[frozen_node] = 1;
    BoundaryDiscretization bd = extract_boundary(f, mesh);
    Eigen::VectorXd speeds = Eigen::VectorXd::Constant(bd.points.size(), 2.5);
    Eigen::VectorXd v = extend_velocity(f, mesh, bd, speeds);

    CHECK(v[far_node] == 0.0);
    CHECK(v[frozen_node] == 0.0);
    // Nodes adjacent to the contour carry the boundary speed.
    int near_node = f.id(20, 28 - 1);
    CHECK(v[near_node] == doctest::Approx(2.5));
}

TEST_CASE("reinitialization is idempotent on a signed distance field") {
    GridMesh mesh = build_grid(80, 80, 1.0, 1.0);
    Vec2 c(0.5, 0.5);
    double r = 0.25;
    LevelSetField f = disk_field(mesh, c, r);
    LevelSetField g = reinitialize(f, mesh);
    double band = 6.0 * mesh.h_max();
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        if (std::abs(f.phi[n]) < band)
            CHECK(std::abs(g.phi[n] - f.phi[n]) <= 0.05 * mesh.h_min());
        else
            CHECK(std::abs(g.phi[n] - f.phi[n]) <= 0.05 * std::abs(f.phi[n]) + 0.1 * mesh.h_min());
    }
}

TEST_CASE("reinitialization rebuilds distances from a distorted field") {
    GridMesh mesh = build_grid(80, 80, 1.0, 1.0);
    Vec2 c(0.5, 0.5);
    double r = 0.25;
    LevelSetField f = disk_field(mesh, c, r);
    for (int n = 0; n < mesh.n_nodes(); ++n) f.phi[n] *= 3.0;   // same zero set, wrong slopes
    LevelSetField g = reinitialize(f, mesh);
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        double exact = r - (mesh.node_coords(n) - c).norm();
        CHECK(std::abs(g.phi[n] - exact) <= 0.05 * std::abs(exact) + 0.1 * mesh.h_min());
    }
}

TEST_CASE("all-material field reinitializes to the frame distance") {
    GridMesh mesh = build_grid(10, 6, 1.0, 0.6);
    LevelSetField f = disk_field(mesh, Vec2(0, 0), 0);
    for (int n = 0; n < mesh.n_nodes(); ++n) f.phi[n] = 7.0;
    LevelSetField g = reinitialize(f, mesh);
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        Vec2 p = mesh.node_coords(n);
        double expect = std::min(std::min(p.x(), 1.0 - p.x()), std::min(p.y(), 0.6 - p.y()));
        CHECK(g.phi[n] == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("frozen nodes keep their material margin through updates") {
    GridMesh mesh = build_grid(40, 40, 1.0, 1.0);
    Vec2 c(0.5, 0.5);
    LevelSetField f = disk_field(mesh, c, 0.22);
    int anchor = f.id(20, 11);   // just inside the disk edge
    f.frozen[anchor] = 1;
    f.phi[anchor] = std::max(f.phi[anchor], f.floor_value);

    BoundaryDiscretization bd = extract_boundary(f, mesh);
    Eigen::VectorXd v =
        extend_velocity(f, mesh, bd, Eigen::VectorXd::Ones(bd.points.size()));
    LevelSetField g = advect(f, mesh, v, 0.3 * mesh.h_min());
    CHECK(g.phi[anchor] == f.phi[anchor]);   // frozen nodes are not advected

    LevelSetField h = reinitialize(g, mesh);
    CHECK(h.phi[anchor] >= f.floor_value);
}

TEST_CASE("move limits cap travel and protect the frozen set") {
    GridMesh mesh = build_grid(40, 40, 1.0, 1.0);
    Vec2 c(0.5, 0.5);
    double r = 0.2;
    LevelSetField f = disk_field(mesh, c, r);
    // Freeze a node just inside the contour, a fraction of a cell away.
    int guard = f.id(20, 13);   // (0.5, 0.325), depth r - 0.175 = 0.025 = h
    f.frozen[guard] = 1;
    BoundaryDiscretization bd = extract_boundary(f, mesh);
    MoveLimits lim = compute_move_limits(f, mesh, bd, 0.3);

    double cap = 0.3 * mesh.h_min();
    Vec2 guard_pos = mesh.node_coords(guard);
    for (int k = 0; k < static_cast<int>(bd.points.size()); ++k) {
        CHECK(lim.zmin[k] == doctest::Approx(-cap));
        CHECK(lim.zmax[k] <= cap + 1e-12);
        CHECK(lim.zmax[k] >= 0.0);
        CHECK(lim.zmax[k] <= (bd.points[k].x - guard_pos).norm() + 1e-12);
    }
}

TEST_CASE("boundary points near frozen nodes are not designable") {
    GridMesh mesh = build_grid(40, 40, 1.0, 1.0);
    Vec2 c(0.5, 0.5);
    LevelSetField f = disk_field(mesh, c, 0.2);
    int pinned = f.id(20, 12);   // (0.5, 0.3), on the contour
    f.frozen[pinned] = 1;
    f.phi[pinned] = std::max(f.phi[pinned], f.floor_value);
    BoundaryDiscretization bd = extract_boundary(f, mesh);

    Vec2 pin_pos = mesh.node_coords(pinned);
    bool found_fixed = false, found_free = false;
    for (const auto& p : bd.points) {
        double d = (p.x - pin_pos).norm();
        if (d <= mesh.h_max() && !p.designable) found_fixed = true;
        if (d > 4.0 * mesh.h_max() && p.designable) found_free = true;
    }
    CHECK(found_fixed);
    CHECK(found_free);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "topopt/grid.hpp"

using namespace topopt;

TEST_CASE("grid numbering and geometry") {
    GridMesh m = build_grid(4, 3, 2.0, 1.5);
    CHECK(m.hx == doctest::Approx(0.5));
    CHECK(m.hy == doctest::Approx(0.5));
    CHECK(m.n_nodes() == 20);
    CHECK(m.n_elems() == 12);
    CHECK(m.n_dofs() == 40);

    CHECK(m.node_id(0, 0) == 0);
    CHECK(m.node_id(4, 0) == 4);
    CHECK(m.node_id(0, 1) == 5);
    Vec2 p = m.node_coords(m.node_id(3, 2));
    CHECK(p.x() == doctest::Approx(1.5));
    CHECK(p.y() == doctest::Approx(1.0));

    // Element (1, 1): counterclockwise from its lower-left node.
    auto n = m.elem_nodes(1 + 1 * 4);
    CHECK(n[0] == m.node_id(1, 1));
    CHECK(n[1] == m.node_id(2, 1));
    CHECK(n[2] == m.node_id(2, 2));
    CHECK(n[3] == m.node_id(1, 2));

    Vec2 c = m.elem_centroid(5);
    CHECK(c.x() == doctest::Approx(0.75));
    CHECK(c.y() == doctest::Approx(0.75));

    CHECK_THROWS_AS(build_grid(0, 3, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(4, 3, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("quadrature integrates bilinear fields exactly") {
    GridMesh m = build_grid(5, 4, 1.0, 2.0);
    auto quad = shape_gradients(m);

    double wsum = 0.0;
    for (const auto& qp : quad) wsum += qp.weight;
    CHECK(wsum == doctest::Approx(m.hx * m.hy));

    // Partition of unity and vanishing gradient sum at every point.
    for (const auto& qp : quad) {
        double ns = 0.0;
        Vec2 bs = Vec2::Zero();
        for (int a = 0; a < 4; ++a) {
            ns += qp.N[a];
            bs += qp.B[a];
        }
        CHECK(ns == doctest::Approx(1.0));
        CHECK(bs.norm() == doctest::Approx(0.0).epsilon(1e-14));
    }

    // Gradient of f = 2 + 3x - y + 0.7xy recovered exactly at each point.
    auto f = [](double x, double y) { return 2.0 + 3.0 * x - y + 0.7 * x * y; };
    Vec2 corners[4] = {{0, 0}, {m.hx, 0}, {m.hx, m.hy}, {0, m.hy}};
    for (const auto& qp : quad) {
        double gx = 0.0, gy = 0.0, x = 0.0, y = 0.0;
        for (int a = 0; a < 4; ++a) {
            double fa = f(corners[a].x(), corners[a].y());
            gx += fa * qp.B[a].x();
            gy += fa * qp.B[a].y();
            x += qp.N[a] * corners[a].x();
            y += qp.N[a] * corners[a].y();
        }
        CHECK(gx == doctest::Approx(3.0 + 0.7 * y));
        CHECK(gy == doctest::Approx(-1.0 + 0.7 * x));
    }
}

TEST_CASE("dof map reduce, expand, impose") {
    GridMesh m = build_grid(2, 2, 1.0, 1.0);
    BoundaryConditionSet bcs;
    bcs.frozen.assign(m.n_nodes(), 0);
    bcs.frozen[0] = 1;
    bcs.dirichlet.push_back({0, 0, 0.1});
    bcs.dirichlet.push_back({0, 1, -0.2});
    bcs.dirichlet.push_back({4, 0, 0.0});
    DofMap map = apply_boundary_conditions(m, bcs);

    CHECK(map.n_full == 18);
    CHECK(map.n_free() == 15);
    CHECK(map.full_to_free[0] == -1);
    CHECK(map.full_to_free[1] == -1);
    CHECK(map.full_to_free[8] == -1);

    Eigen::VectorXd full = Eigen::VectorXd::LinSpaced(18, 1.0, 18.0);
    Eigen::VectorXd red = map.reduce(full);
    CHECK(red.size() == 15);
    Eigen::VectorXd back = map.expand(red);
    for (int d = 0; d < 18; ++d) {
        if (map.full_to_free[d] >= 0) CHECK(back[d] == full[d]);
    }
    CHECK(back[0] == doctest::Approx(0.1));
    CHECK(back[1] == doctest::Approx(-0.2));

    Eigen::VectorXd u = Eigen::VectorXd::Constant(18, 9.0);
    map.impose(u);
    CHECK(u[0] == doctest::Approx(0.1));
    CHECK(u[1] == doctest::Approx(-0.2));
    CHECK(u[8] == doctest::Approx(0.0));
    CHECK(u[2] == doctest::Approx(9.0));
}

TEST_CASE("boundary condition validation") {
    GridMesh m = build_grid(2, 2, 1.0, 1.0);

    // Conflicting duplicate values rejected, consistent ones tolerated.
    BoundaryConditionSet conflict;
    conflict.frozen.assign(m.n_nodes(), 1);
    conflict.dirichlet.push_back({0, 0, 0.0});
    conflict.dirichlet.push_back({0, 0, 1.0});
    CHECK_THROWS_AS(apply_boundary_conditions(m, conflict), std::invalid_argument);

    BoundaryConditionSet dup;
    dup.frozen.assign(m.n_nodes(), 1);
    dup.dirichlet.push_back({0, 0, 0.5});
    dup.dirichlet.push_back({0, 0, 0.5});
    CHECK(apply_boundary_conditions(m, dup).n_free() == 17);

    // Loads and full supports anchor material, so they must be frozen.
    BoundaryConditionSet loaded;
    loaded.frozen.assign(m.n_nodes(), 0);
    loaded.loads.push_back({3, 1, 1.0});
    CHECK_THROWS_AS(apply_boundary_conditions(m, loaded), std::invalid_argument);
    loaded.frozen[3] = 1;
    CHECK_NOTHROW(apply_boundary_conditions(m, loaded));

    BoundaryConditionSet clamped;
    clamped.frozen.assign(m.n_nodes(), 0);
    clamped.dirichlet.push_back({2, 0, 0.0});
    clamped.dirichlet.push_back({2, 1, 0.0});
    CHECK_THROWS_AS(apply_boundary_conditions(m, clamped), std::invalid_argument);

    // A single-component roller is not a material anchor.
    BoundaryConditionSet roller;
    roller.frozen.assign(m.n_nodes(), 0);
    roller.dirichlet.push_back({2, 0, 0.0});
    CHECK_NOTHROW(apply_boundary_conditions(m, roller));

    BoundaryConditionSet range;
    range.dirichlet.push_back({99, 0, 0.0});
    CHECK_THROWS_AS(apply_boundary_conditions(m, range), std::invalid_argument);
}

TEST_CASE("load vector accumulates duplicate entries") {
    GridMesh m = build_grid(2, 1, 1.0, 1.0);
    BoundaryConditionSet bcs;
    bcs.loads.push_back({1, 1, 0.25});
    bcs.loads.push_back({1, 1, 0.5});
    bcs.loads.push_back({2, 0, -1.0});
    Eigen::VectorXd f = bcs.load_vector(m);
    CHECK(f[2 * 1 + 1] == doctest::Approx(0.75));
    CHECK(f[2 * 2 + 0] == doctest::Approx(-1.0));
    CHECK(f.cwiseAbs().sum() == doctest::Approx(1.75));

    BoundaryConditionSet bad;
    bad.loads.push_back({99, 0, 1.0});
    CHECK_THROWS_AS(bad.load_vector(m), std::invalid_argument);
}

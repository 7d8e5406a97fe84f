#include "topopt/grid.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace topopt {

GridMesh build_grid(int nx, int ny, double lx, double ly) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_grid: element counts must be >= 1");
    if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("build_grid: domain lengths must be positive");
    GridMesh m;
    m.nx = nx;
    m.ny = ny;
    m.lx = lx;
    m.ly = ly;
    m.hx = lx / nx;
    m.hy = ly / ny;
    return m;
}

std::array<double, 4> shape_values(const Vec2& ref) {
    double xi = ref.x(), eta = ref.y();
    return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
            0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
}

std::array<Vec2, 4> shape_ref_gradients(const Vec2& ref) {
    double xi = ref.x(), eta = ref.y();
    return {Vec2{-0.25 * (1 - eta), -0.25 * (1 - xi)},
            Vec2{0.25 * (1 - eta), -0.25 * (1 + xi)},
            Vec2{0.25 * (1 + eta), 0.25 * (1 + xi)},
            Vec2{-0.25 * (1 + eta), 0.25 * (1 - xi)}};
}

std::array<QuadraturePoint, 4> shape_gradients(const GridMesh& mesh) {
    const double g = 1.0 / std::sqrt(3.0);
    const std::array<Vec2, 4> pts = {Vec2{-g, -g}, Vec2{g, -g}, Vec2{g, g}, Vec2{-g, g}};
    // Uniform axis-aligned grid: J = diag(hx/2, hy/2) everywhere.
    const double jx = 2.0 / mesh.hx, jy = 2.0 / mesh.hy;
    const double w = (mesh.hx / 2.0) * (mesh.hy / 2.0);
    std::array<QuadraturePoint, 4> out;
    for (int q = 0; q < 4; ++q) {
        QuadraturePoint qp;
        qp.ref = pts[q];
        qp.N = shape_values(pts[q]);
        auto dref = shape_ref_gradients(pts[q]);
        for (int a = 0; a < 4; ++a) qp.B[a] = Vec2{dref[a].x() * jx, dref[a].y() * jy};
        qp.weight = w;
        out[q] = qp;
    }
    return out;
}

Eigen::VectorXd BoundaryConditionSet::load_vector(const GridMesh& mesh) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.n_dofs());
    for (const auto& l : loads) {
        if (l.node < 0 || l.node >= mesh.n_nodes() || l.comp < 0 || l.comp > 1)
            throw std::invalid_argument("load entry out of range");
        f[2 * l.node + l.comp] += l.value;
    }
    return f;
}

Eigen::VectorXd DofMap::reduce(const Eigen::VectorXd& full) const {
    Eigen::VectorXd r(n_free());
    for (int k = 0; k < n_free(); ++k) r[k] = full[free_to_full[k]];
    return r;
}

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& free_vals) const {
    Eigen::VectorXd full(n_full);
    for (int d = 0; d < n_full; ++d) full[d] = fixed_value[d];
    for (int k = 0; k < n_free(); ++k) full[free_to_full[k]] = free_vals[k];
    return full;
}

void DofMap::impose(Eigen::VectorXd& u_full) const {
    for (int d = 0; d < n_full; ++d)
        if (full_to_free[d] < 0) u_full[d] = fixed_value[d];
}

DofMap apply_boundary_conditions(const GridMesh& mesh, const BoundaryConditionSet& bcs) {
    if (!bcs.frozen.empty() && static_cast<int>(bcs.frozen.size()) != mesh.n_nodes())
        throw std::invalid_argument("frozen mask size mismatch");

    DofMap map;
    map.n_full = mesh.n_dofs();
    map.full_to_free.assign(map.n_full, 0);
    map.fixed_value.assign(map.n_full, 0.0);

    std::map<int, double> prescribed;
    std::map<int, int> fixed_comp_count;
    for (const auto& bc : bcs.dirichlet) {
        if (bc.node < 0 || bc.node >= mesh.n_nodes() || bc.comp < 0 || bc.comp > 1)
            throw std::invalid_argument("dirichlet entry out of range");
        int dof = 2 * bc.node + bc.comp;
        auto it = prescribed.find(dof);
        if (it != prescribed.end()) {
            if (it->second != bc.value) {
                std::ostringstream os;
                os << "conflicting dirichlet values at node " << bc.node << " comp " << bc.comp;
                throw std::invalid_argument(os.str());
            }
            continue;
        }
        prescribed[dof] = bc.value;
        fixed_comp_count[bc.node] += 1;
    }

    auto is_frozen = [&](int node) {
        return !bcs.frozen.empty() && bcs.frozen[node] != 0;
    };
    // Loads and full supports anchor material; they must be non-designable.
    for (const auto& l : bcs.loads)
        if (l.value != 0.0 && !is_frozen(l.node)) {
            std::ostringstream os;
            os << "loaded node " << l.node << " must be in the non-designable set";
            throw std::invalid_argument(os.str());
        }
    for (const auto& [node, cnt] : fixed_comp_count)
        if (cnt >= 2 && !is_frozen(node)) {
            std::ostringstream os;
            os << "fully supported node " << node << " must be in the non-designable set";
            throw std::invalid_argument(os.str());
        }

    for (const auto& [dof, val] : prescribed) {
        map.full_to_free[dof] = -1;
        map.fixed_value[dof] = val;
    }
    for (int d = 0; d < map.n_full; ++d) {
        if (map.full_to_free[d] == 0) {
            map.full_to_free[d] = static_cast<int>(map.free_to_full.size());
            map.free_to_full.push_back(d);
        }
    }
    return map;
}

} // namespace topopt

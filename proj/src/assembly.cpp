#include "topopt/assembly.hpp"

#include "topopt/parallel.hpp"

namespace topopt {

namespace {

Vec8 gather(const Eigen::VectorXd& u, const std::array<int, 4>& nodes) {
    Vec8 v;
    for (int a = 0; a < 4; ++a) {
        v[2 * a] = u[2 * nodes[a]];
        v[2 * a + 1] = u[2 * nodes[a] + 1];
    }
    return v;
}

} // namespace

GlobalSystem assemble(const GridMesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u_full,
                      const ThermalField& alpha_dt, const DensityField& rho,
                      const MaterialParams& mat, bool want_tangent) {
    int ne = mesh.n_elems();
    if (static_cast<int>(alpha_dt.size()) != ne) throw std::invalid_argument("assemble: thermal field size mismatch");
    if (static_cast<int>(rho.size()) != ne) throw std::invalid_argument("assemble: density field size mismatch");
    if (u_full.size() != mesh.n_dofs()) throw std::invalid_argument("assemble: state size mismatch");

    auto quad = shape_gradients(mesh);
    Mat8 k_lin = linear_element_stiffness(quad, mat);

    std::vector<ElementQuantities> eq(ne);
    parallel_for(ne, [&](int e) {
        Vec8 ue = gather(u_full, mesh.elem_nodes(e));
        double gamma = heaviside_projection(rho[e], mat.beta, mat.rho0);
        Mat2 Fth = thermal_gradient(alpha_dt[e]);
        eq[e] = interpolated_element_energy(quad, ue, gamma, Fth, mat, k_lin, want_tangent);
        ersatz_scale(eq[e], rho[e], mat.weak_factor);
    });

    GlobalSystem sys;
    sys.fint = Eigen::VectorXd::Zero(mesh.n_dofs());
    std::vector<Eigen::Triplet<double>> trips;
    if (want_tangent) trips.reserve(static_cast<size_t>(ne) * 64);

    for (int e = 0; e < ne; ++e) {
        auto nodes = mesh.elem_nodes(e);
        sys.energy += eq[e].energy;
        int dof[8];
        for (int a = 0; a < 4; ++a) {
            dof[2 * a] = 2 * nodes[a];
            dof[2 * a + 1] = 2 * nodes[a] + 1;
        }
        for (int i = 0; i < 8; ++i) sys.fint[dof[i]] += eq[e].force[i];
        if (!want_tangent) continue;
        for (int i = 0; i < 8; ++i) {
            int fi = dofs.full_to_free[dof[i]];
            if (fi < 0) continue;
            for (int j = 0; j < 8; ++j) {
                int fj = dofs.full_to_free[dof[j]];
                if (fj >= 0) trips.emplace_back(fi, fj, eq[e].stiffness(i, j));
            }
        }
    }
    if (want_tangent) {
        sys.K.resize(dofs.n_free(), dofs.n_free());
        sys.K.setFromTriplets(trips.begin(), trips.end());
    }
    return sys;
}

SpMat assemble_linear(const GridMesh& mesh, const DofMap& dofs, const DensityField& rho,
                      const MaterialParams& mat) {
    auto quad = shape_gradients(mesh);
    Mat8 k_lin = linear_element_stiffness(quad, mat);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(mesh.n_elems()) * 64);
    for (int e = 0; e < mesh.n_elems(); ++e) {
        auto nodes = mesh.elem_nodes(e);
        double s = rho[e] > mat.weak_factor ? rho[e] : mat.weak_factor;
        int dof[8];
        for (int a = 0; a < 4; ++a) {
            dof[2 * a] = 2 * nodes[a];
            dof[2 * a + 1] = 2 * nodes[a] + 1;
        }
        for (int i = 0; i < 8; ++i) {
            int fi = dofs.full_to_free[dof[i]];
            if (fi < 0) continue;
            for (int j = 0; j < 8; ++j) {
                int fj = dofs.full_to_free[dof[j]];
                if (fj >= 0) trips.emplace_back(fi, fj, s * k_lin(i, j));
            }
        }
    }
    SpMat K(dofs.n_free(), dofs.n_free());
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

} // namespace topopt

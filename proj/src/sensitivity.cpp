#include "topopt/sensitivity.hpp"

#include <cmath>
#include <limits>

#include "topopt/parallel.hpp"

namespace topopt {

namespace {

Eigen::VectorXd scatter_free(const DofMap& dofs, const Eigen::VectorXd& free_vals) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(dofs.n_full);
    for (int k = 0; k < dofs.n_free(); ++k) full[dofs.free_to_full[k]] = free_vals[k];
    return full;
}

} // namespace

AdjointState solve_adjoint_load_control(const FinalTangent& tangent, const DofMap& dofs,
                                        const Eigen::VectorXd& f_full) {
    if (f_full.size() != dofs.n_full)
        throw std::invalid_argument("solve_adjoint_load_control: load vector size mismatch");
    AdjointState adj;
    Eigen::VectorXd rhs = -dofs.reduce(f_full);
    adj.q = scatter_free(dofs, tangent.solve(rhs));
    return adj;
}

AdjointState solve_adjoint_displacement_control(const FinalTangent& tangent, const DofMap& dofs,
                                                const Eigen::VectorXd& fref_full, double u_p,
                                                int control_dof) {
    if (fref_full.size() != dofs.n_full)
        throw std::invalid_argument("solve_adjoint_displacement_control: load vector size mismatch");
    if (control_dof < 0 || control_dof >= dofs.n_full || dofs.full_to_free[control_dof] < 0)
        throw std::invalid_argument("solve_adjoint_displacement_control: invalid control dof");

    AdjointState adj;
    Eigen::VectorXd fr = dofs.reduce(fref_full);
    Eigen::VectorXd w = tangent.solve(fr);
    double denom = fr.dot(w);
    double b = -u_p * fref_full[control_dof];   // -u_ctrl^T fref
    adj.xi = denom != 0.0 ? -b / denom : 0.0;
    adj.q = scatter_free(dofs, Eigen::VectorXd(-adj.xi * w));
    return adj;
}

BoundarySensitivities boundary_sensitivities(const GridMesh& mesh, const Eigen::VectorXd& u_full,
                                             const Eigen::VectorXd& q_full,
                                             const ThermalField& alpha_dt, const DensityField& rho,
                                             const BoundaryDiscretization& boundary,
                                             const MaterialParams& mat) {
    if (u_full.size() != mesh.n_dofs() || q_full.size() != mesh.n_dofs())
        throw std::invalid_argument("boundary_sensitivities: state vector size mismatch");
    if (static_cast<int>(alpha_dt.size()) != mesh.n_elems() ||
        static_cast<int>(rho.size()) != mesh.n_elems())
        throw std::invalid_argument("boundary_sensitivities: field size mismatch");

    // Gauss-point samples of -(P : grad q) over solid-enough elements.
    auto quad = shape_gradients(mesh);
    std::vector<Vec2> gp_x;
    std::vector<double> gp_s;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        if (rho[e] <= 0.1) continue;
        auto nodes = mesh.elem_nodes(e);
        Mat2 Fth = thermal_gradient(alpha_dt[e]);
        Vec2 c = mesh.elem_centroid(e);
        for (const auto& qp : quad) {
            Mat2 F = Mat2::Identity();
            Mat2 gq = Mat2::Zero();
            for (int a = 0; a < 4; ++a) {
                Vec2 ua(u_full[2 * nodes[a]], u_full[2 * nodes[a] + 1]);
                Vec2 qa(q_full[2 * nodes[a]], q_full[2 * nodes[a] + 1]);
                F += ua * qp.B[a].transpose();
                gq += qa * qp.B[a].transpose();
            }
            MaterialPointState st = mechanical_response(F, Fth, mat);
            gp_x.emplace_back(c.x() + 0.5 * qp.ref.x() * mesh.hx,
                              c.y() + 0.5 * qp.ref.y() * mesh.hy);
            gp_s.push_back(-(st.P.array() * gq.array()).sum());
        }
    }

    int np = static_cast<int>(boundary.points.size());
    BoundarySensitivities out;
    out.S_c = Eigen::VectorXd::Zero(np);
    out.S_g = Eigen::VectorXd::Constant(np, -1.0);
    if (gp_x.empty()) return out;

    double h = mesh.h_max();
    parallel_for(np, [&](int j) {
        const BoundaryPoint& bp = boundary.points[j];
        if (!bp.designable) return;

        std::vector<int> picks;
        for (double radius : {2.0 * h, 3.0 * h}) {
            for (size_t k = 0; k < gp_x.size(); ++k)
                if ((gp_x[k] - bp.x).norm() <= radius) picks.push_back(static_cast<int>(k));
            if (!picks.empty()) break;
        }
        if (picks.empty()) {
            int best = 0;
            double bd = std::numeric_limits<double>::max();
            for (size_t k = 0; k < gp_x.size(); ++k) {
                double d = (gp_x[k] - bp.x).squaredNorm();
                if (d < bd) { bd = d; best = static_cast<int>(k); }
            }
            out.S_c[j] = gp_s[best];
            return;
        }

        // Inverse-distance weighted plane fit evaluated at the point; the
        // weighted mean is the fallback when the fit is underdetermined.
        double mean_num = 0.0, mean_den = 0.0;
        Mat3 A = Mat3::Zero();
        Eigen::Vector3d rhs_fit = Eigen::Vector3d::Zero();
        for (int k : picks) {
            Vec2 d = (gp_x[k] - bp.x) / h;
            double wgt = 1.0 / std::max(d.norm(), 1e-3);
            mean_num += wgt * gp_s[k];
            mean_den += wgt;
            Eigen::Vector3d basis(1.0, d.x(), d.y());
            A += wgt * basis * basis.transpose();
            rhs_fit += wgt * gp_s[k] * basis;
        }
        if (picks.size() >= 3) {
            Eigen::FullPivLU<Mat3> lu(A);
            if (lu.isInvertible()) {
                out.S_c[j] = lu.solve(rhs_fit)[0];
                return;
            }
        }
        out.S_c[j] = mean_num / mean_den;
    });
    return out;
}

} // namespace topopt

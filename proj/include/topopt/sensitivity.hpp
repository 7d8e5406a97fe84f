#pragma once

#include "topopt/equilibrium.hpp"
#include "topopt/levelset.hpp"

namespace topopt {

// Adjoint solution for one analysis case. q lives on the full dof vector and
// is zero at Dirichlet dofs; xi is the bordered-system multiplier used by the
// displacement-controlled variant.
struct AdjointState {
    Eigen::VectorXd q;
    double xi = 0.0;
};

// Load control: K q = -f on the free dofs, a single back-substitution on the
// tangent factorization retained by the equilibrium solve.
AdjointState solve_adjoint_load_control(const FinalTangent& tangent, const DofMap& dofs,
                                        const Eigen::VectorXd& f_full);

// Displacement control: [[K, fref], [fref^T, 0]] (q, xi) = (0, -u_ctrl^T fref)
// with u_ctrl^T fref = u_p * fref[control_dof], solved by block elimination
// (one extra back-substitution).
AdjointState solve_adjoint_displacement_control(const FinalTangent& tangent, const DofMap& dofs,
                                                const Eigen::VectorXd& fref_full, double u_p,
                                                int control_dof);

// Shape-derivative densities at the boundary points: S_c for the objective,
// S_g for the volume (constant -1 under the inward-positive speed convention).
struct BoundarySensitivities {
    Eigen::VectorXd S_c;
    Eigen::VectorXd S_g;
};

// Evaluates -(P : grad q) at the Gauss points of elements with rho > 0.1 and
// maps that field onto each boundary point by inverse-distance weighted least
// squares over a radius of 2 element sizes (widened to 3, then the nearest
// point alone). Non-designable points get S_c = 0.
BoundarySensitivities boundary_sensitivities(const GridMesh& mesh, const Eigen::VectorXd& u_full,
                                             const Eigen::VectorXd& q_full,
                                             const ThermalField& alpha_dt, const DensityField& rho,
                                             const BoundaryDiscretization& boundary,
                                             const MaterialParams& mat);

} // namespace topopt

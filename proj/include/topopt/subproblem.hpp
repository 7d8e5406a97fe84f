#pragma once

#include "topopt/types.hpp"

namespace topopt {

// Linearized boundary-move subproblem over the designable boundary points:
// minimize sum S_c l m subject to sum S_g l m <= -g_target, with per-point
// moves m = clamp(a_move * dhat(lambda_g), zmin, zmax) along the normalized
// search direction dhat_j = (l S_c + lambda_g l S_g)_j / ||.||.
struct SubproblemInput {
    Eigen::VectorXd S_c, S_g, length, zmin, zmax;
    double g_target = 0.0;   // required constraint decrease, area units, >= 0
};

struct SubproblemResult {
    Eigen::VectorXd moves;          // per point, within [zmin, zmax]
    double a_move = 0.0;
    double lambda_g = 0.0;
    bool clamped_target = false;    // g_target exceeded what the limits allow
    double constraint_change = 0.0; // sum S_g l m at the solution
    double objective_change = 0.0;  // sum S_c l m at the solution
};

// Exact 1D solve in a_move per multiplier (piecewise-linear breakpoint walk),
// outer scan with refinement over lambda_g. An unattainable g_target is
// clamped to the feasible maximum and flagged.
SubproblemResult solve_subproblem(const SubproblemInput& in);

} // namespace topopt

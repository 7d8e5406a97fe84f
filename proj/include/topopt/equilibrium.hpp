#pragma once

#include <memory>
#include <optional>

#include <Eigen/SparseLU>

#include "topopt/assembly.hpp"

namespace topopt {

enum class ControlMode { Load, Displacement };

// One loading condition. In load control `f` is the target mechanical load;
// in displacement control it is the fixed reference load whose multiplier
// theta becomes an unknown while `control_dof` is driven to u_p.
struct LoadCase {
    ControlMode mode = ControlMode::Load;
    Eigen::VectorXd f;
    ThermalField alpha_dt;
    int control_dof = -1;   // full dof index (displacement mode)
    double u_p = 0.0;
    double weight = 1.0;    // multi-case combination weight
};

struct SolverControls {
    double residual_tol = 1e-6;   // relative to the external load scale
    int max_newton_iters = 20;
    double n_desired = 4.0;       // target Newton iterations per increment
    double adapt_exponent = 0.5;
    double min_increment = 1e-9;  // floor before the intermediate-equilibrium fallback
    double increment_cold = 0.1;
    double increment_warm = 1.0;  // warm starts try the full target first
};

// Next increment size after a converged increment that took `iters_used` iterations.
double adapt_increment(double current, int iters_used, const SolverControls& c);

// Factorized tangent at a converged state, retained for adjoint solves.
// Falls back to a diagonal shift of 1e-8 * ||K||_inf when singular.
struct FinalTangent {
    SpMat K;
    Eigen::SparseLU<SpMat> lu;
    bool regularized = false;
    double shift = 0.0;

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu.solve(rhs); }
};

std::shared_ptr<FinalTangent> factorize_tangent(SpMat K);

struct EquilibriumResult {
    Eigen::VectorXd u;            // full-length, Dirichlet values imposed
    double factor = 0.0;          // attained fraction of the target (load or u_p)
    double theta = 0.0;           // displacement-control load multiplier
    bool converged = false;       // full target reached
    bool intermediate = false;    // stopped at the last converged state short of the target
    int increments = 0;
    int newton_iters = 0;
    std::vector<double> residual_history;   // norms of the final increment
    double tolerance = 0.0;       // effective absolute tolerance
    std::shared_ptr<FinalTangent> tangent;
};

// Incremental Newton solve with adaptive load/displacement stepping. A warm
// start attempts the full target directly and falls back to a cold
// incremental run from zero on divergence. Never throws on non-convergence:
// the last converged state is returned with `intermediate` set.
EquilibriumResult solve_equilibrium(const GridMesh& mesh, const DofMap& dofs, const LoadCase& lc,
                                    const DensityField& rho, const MaterialParams& mat,
                                    const SolverControls& controls,
                                    const Eigen::VectorXd* warm_u = nullptr, double warm_theta = 0.0);

} // namespace topopt

#pragma once

#include <functional>

#include "topopt/equilibrium.hpp"
#include "topopt/levelset.hpp"
#include "topopt/sensitivity.hpp"
#include "topopt/subproblem.hpp"

namespace topopt {

// A complete analysis-and-design problem on one grid. Multiple cases share
// the supports and the volume constraint; their objectives and sensitivities
// combine through the case weights.
struct Problem {
    GridMesh mesh;
    BoundaryConditionSet bcs;
    DofMap dofs;
    std::vector<LoadCase> cases;
    MaterialParams material;
    SolverControls solver;
    double volume_target = 0.0;   // area units
};

struct OptimizerSettings {
    int max_iterations = 500;
    double cfl = 0.3;
    double constraint_cap = 0.01;   // max volume decrease per iteration, fraction of domain
    double objective_rtol = 1e-4;   // stopping rule over the trailing window
    double volume_rtol = 0.01;
    int convergence_window = 5;
};

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;
    double volume = 0.0;
    int newton_increments = 0;
    int newton_iters = 0;
    bool intermediate = false;
    double wall_seconds = 0.0;
};

struct OptimizationResult {
    LevelSetField design;
    DensityField densities;
    std::vector<IterationRecord> history;
    bool converged = false;
    bool aborted = false;           // analysis failed beyond recovery
    int intermediate_events = 0;
};

// Scheduled constraint decrease for one iteration: the excess over the target,
// capped in both directions so the linearization stays valid. A negative value
// widens the subproblem's feasible set to allow growth back up to the target
// after discretization losses; it never forces growth by itself.
double constraint_target(double current_volume, double target_volume, double domain_area,
                         double max_step = 0.01);

// Stopping rule: a full trailing window whose relative objective spread is
// below tolerance while the volume constraint is met.
bool check_convergence(const std::vector<IterationRecord>& history, double volume_target,
                       const OptimizerSettings& settings);

// Equilibrium and objective of a fixed density field (no design update); used
// for cross-evaluating designs under other loadings.
struct DesignEvaluation {
    double objective = 0.0;
    std::vector<EquilibriumResult> cases;
};
DesignEvaluation evaluate_design(const Problem& problem, const DensityField& rho);

// Per-iteration observer: called after the analysis with the fields the
// recorded objective was computed on.
using IterationObserver =
    std::function<void(const IterationRecord&, const LevelSetField&, const DensityField&)>;

OptimizationResult run_optimization(const Problem& problem, const LevelSetField& initial,
                                    const OptimizerSettings& settings,
                                    const IterationObserver& observer = {});

} // namespace topopt

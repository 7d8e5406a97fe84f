#include "topopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace topopt {

namespace {

double case_objective(const LoadCase& lc, const EquilibriumResult& r) {
    if (lc.mode == ControlMode::Load) return r.u.dot(lc.f);
    return -r.theta * (r.factor * lc.u_p) * lc.f[lc.control_dof];
}

double material_volume(const GridMesh& mesh, const DensityField& rho) {
    double v = 0.0;
    for (double r : rho) v += r;
    return v * mesh.elem_area();
}

// Length-weighted Laplacian smoothing of a per-point field along the contour
// polylines. The extrapolated stress samples carry point-level noise that the
// subproblem would otherwise exploit as false contrast; non-designable points
// neither move nor bleed their pinned values into the average.
Eigen::VectorXd smooth_along_boundary(const Eigen::VectorXd& field,
                                      const BoundaryDiscretization& boundary, int passes) {
    int np = static_cast<int>(boundary.points.size());
    std::vector<std::vector<int>> nbr(np);
    for (const BoundarySegment& s : boundary.segments) {
        if (s.a == s.b) continue;
        nbr[s.a].push_back(s.b);
        nbr[s.b].push_back(s.a);
    }
    Eigen::VectorXd cur = field;
    Eigen::VectorXd next = field;
    for (int p = 0; p < passes; ++p) {
        for (int j = 0; j < np; ++j) {
            if (!boundary.points[j].designable) continue;
            double wsum = 0.0, acc = 0.0;
            for (int k : nbr[j]) {
                if (!boundary.points[k].designable) continue;
                double w = boundary.points[k].length;
                wsum += w;
                acc += w * cur[k];
            }
            if (wsum > 0.0) next[j] = 0.5 * cur[j] + 0.5 * acc / wsum;
        }
        cur = next;
    }
    return cur;
}

} // namespace

double constraint_target(double current_volume, double target_volume, double domain_area,
                         double max_step) {
    double excess = current_volume - target_volume;
    double cap = max_step * domain_area;
    return std::clamp(excess, -cap, cap);
}

bool check_convergence(const std::vector<IterationRecord>& history, double volume_target,
                       const OptimizerSettings& settings) {
    int w = settings.convergence_window;
    if (static_cast<int>(history.size()) < w) return false;
    const IterationRecord& last = history.back();
    if (last.volume > volume_target * (1.0 + settings.volume_rtol)) return false;
    double max_diff = 0.0;
    for (int k = 0; k < w; ++k)
        max_diff = std::max(max_diff,
                            std::abs(history[history.size() - 1 - k].objective - last.objective));
    return max_diff <= settings.objective_rtol * std::abs(last.objective);
}

DesignEvaluation evaluate_design(const Problem& problem, const DensityField& rho) {
    DesignEvaluation ev;
    for (const auto& lc : problem.cases) {
        EquilibriumResult r = solve_equilibrium(problem.mesh, problem.dofs, lc, rho,
                                                problem.material, problem.solver);
        ev.objective += lc.weight * case_objective(lc, r);
        ev.cases.push_back(std::move(r));
    }
    return ev;
}

OptimizationResult run_optimization(const Problem& problem, const LevelSetField& initial,
                                    const OptimizerSettings& settings,
                                    const IterationObserver& observer) {
    const GridMesh& mesh = problem.mesh;
    double domain_area = mesh.lx * mesh.ly;
    int n_cases = static_cast<int>(problem.cases.size());

    OptimizationResult out;
    out.design = initial;
    std::vector<Eigen::VectorXd> warm_u(n_cases);
    std::vector<double> warm_theta(n_cases, 0.0);
    std::vector<uint8_t> warm_ready(n_cases, 0);

    // Trust scale on the move limits, adapted from how well the linearized
    // objective change of the previous design update predicted the measured
    // one. Keeps the step inside the region where the model is honest.
    double trust = 1.0;
    double predicted_dc = 0.0;
    double prev_objective = 0.0;
    bool have_prediction = false;

    // Step acceptance state. A design update whose measured objective change
    // is far worse than the prediction is reverted and retried with smaller
    // move limits; the saved copies below describe the last applied update.
    double step_limit = 1.0;
    int rejections = 0;
    LevelSetField saved_design = initial;
    SubproblemInput saved_sp;
    BoundaryDiscretization saved_boundary;
    std::vector<int> saved_designable;
    double saved_base = 1.0;

    for (int iter = 1; iter <= settings.max_iterations; ++iter) {
        auto t0 = std::chrono::steady_clock::now();
        out.densities = compute_area_fractions(out.design, mesh);

        IterationRecord rec;
        rec.iter = iter;
        rec.volume = material_volume(mesh, out.densities);

        std::vector<EquilibriumResult> results;
        results.reserve(n_cases);
        try {
            for (int k = 0; k < n_cases; ++k) {
                results.push_back(solve_equilibrium(
                    mesh, problem.dofs, problem.cases[k], out.densities, problem.material,
                    problem.solver, warm_ready[k] ? &warm_u[k] : nullptr, warm_theta[k]));
                warm_u[k] = results.back().u;
                warm_theta[k] = results.back().theta;
                warm_ready[k] = 1;
            }
        } catch (const std::exception&) {
            out.aborted = true;
            break;
        }

        for (int k = 0; k < n_cases; ++k) {
            rec.objective += problem.cases[k].weight * case_objective(problem.cases[k], results[k]);
            rec.newton_increments += results[k].increments;
            rec.newton_iters += results[k].newton_iters;
            rec.intermediate = rec.intermediate || results[k].intermediate;
        }
        if (rec.intermediate) ++out.intermediate_events;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.history.push_back(rec);
        if (observer) observer(rec, out.design, out.densities);

        if (check_convergence(out.history, problem.volume_target, settings)) {
            out.converged = true;
            break;
        }
        if (iter == settings.max_iterations) break;

        if (have_prediction) {
            double scale = std::max(std::abs(predicted_dc),
                                    1e-6 * std::max(std::abs(rec.objective), 1e-300));
            double excess = (rec.objective - prev_objective) - predicted_dc;
            if (excess > 0.75 * scale) trust = std::max(0.05, 0.5 * trust);
            else if (excess < 0.3 * scale) trust = std::min(1.0, 1.6 * trust);
        }
        prev_objective = rec.objective;

        BoundaryDiscretization boundary = extract_boundary(out.design, mesh);
        if (boundary.empty()) break;   // nothing left to move

        Eigen::VectorXd S_c = Eigen::VectorXd::Zero(boundary.points.size());
        for (int k = 0; k < n_cases; ++k) {
            const LoadCase& lc = problem.cases[k];
            AdjointState adj =
                lc.mode == ControlMode::Load
                    ? solve_adjoint_load_control(*results[k].tangent, problem.dofs, lc.f)
                    : solve_adjoint_displacement_control(*results[k].tangent, problem.dofs, lc.f,
                                                         results[k].factor * lc.u_p,
                                                         lc.control_dof);
            BoundarySensitivities bs =
                boundary_sensitivities(mesh, results[k].u, adj.q, lc.alpha_dt, out.densities,
                                       boundary, problem.material);
            S_c += lc.weight * bs.S_c;
        }
        S_c = smooth_along_boundary(S_c, boundary, 2);

        std::vector<int> designable;
        for (size_t j = 0; j < boundary.points.size(); ++j)
            if (boundary.points[j].designable && boundary.points[j].length > 0.0)
                designable.push_back(static_cast<int>(j));
        if (designable.empty()) break;

        MoveLimits limits = compute_move_limits(out.design, mesh, boundary, settings.cfl);
        double g_target =
            constraint_target(rec.volume, problem.volume_target, domain_area, settings.constraint_cap);

        // The volume model is exact linear geometry, so the box must stay big
        // enough for the scheduled volume change even when the objective model
        // has earned little trust; 1.5x leaves capacity for objective trades.
        double cap_removal = 0.0, cap_growth = 0.0;
        for (int j : designable) {
            cap_removal += boundary.points[j].length * std::max(limits.zmax[j], 0.0);
            cap_growth += boundary.points[j].length * std::max(-limits.zmin[j], 0.0);
        }
        double cap_dir = g_target >= 0.0 ? cap_removal : cap_growth;
        double box_scale = trust;
        if (cap_dir > 0.0)
            box_scale = std::max(box_scale, std::min(1.0, 1.5 * std::abs(g_target) / cap_dir));

        SubproblemInput sp;
        int nd = static_cast<int>(designable.size());
        sp.S_c.resize(nd);
        sp.S_g = Eigen::VectorXd::Constant(nd, -1.0);
        sp.length.resize(nd);
        sp.zmin.resize(nd);
        sp.zmax.resize(nd);
        for (int i = 0; i < nd; ++i) {
            int j = designable[i];
            sp.S_c[i] = S_c[j];
            sp.length[i] = boundary.points[j].length;
            sp.zmin[i] = box_scale * limits.zmin[j];
            sp.zmax[i] = box_scale * limits.zmax[j];
        }
        sp.g_target = g_target;

        SubproblemResult sub = solve_subproblem(sp);
        predicted_dc = sub.objective_change;
        have_prediction = true;
        Eigen::VectorXd speeds = Eigen::VectorXd::Zero(boundary.points.size());
        for (int i = 0; i < nd; ++i) speeds[designable[i]] = sub.moves[i];

        Eigen::VectorXd nodal = extend_velocity(out.design, mesh, boundary, speeds);
        out.design = advect(out.design, mesh, nodal, 1.0, settings.cfl);
        out.design = reinitialize(out.design, mesh);
    }

    out.densities = compute_area_fractions(out.design, mesh);
    return out;
}

} // namespace topopt

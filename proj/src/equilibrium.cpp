#include "topopt/equilibrium.hpp"

#include <cmath>

namespace topopt {

double adapt_increment(double current, int iters_used, const SolverControls& c) {
    int n = iters_used < 1 ? 1 : iters_used;
    double next = current * std::pow(c.n_desired / n, c.adapt_exponent);
    return next > 1.0 ? 1.0 : next;
}

std::shared_ptr<FinalTangent> factorize_tangent(SpMat K) {
    auto t = std::make_shared<FinalTangent>();
    t->K = std::move(K);
    t->lu.compute(t->K);
    if (t->lu.info() != Eigen::Success) {
        double norm = 0.0;
        for (int k = 0; k < t->K.outerSize(); ++k) {
            double row = 0.0;
            for (SpMat::InnerIterator it(t->K, k); it; ++it) row += std::abs(it.value());
            norm = std::max(norm, row);
        }
        t->shift = 1e-8 * (norm > 0.0 ? norm : 1.0);
        SpMat shifted = t->K;
        SpMat ident(t->K.rows(), t->K.cols());
        ident.setIdentity();
        shifted += t->shift * ident;
        t->lu.compute(shifted);
        t->regularized = true;
        if (t->lu.info() != Eigen::Success)
            throw std::runtime_error("tangent factorization failed even after regularization");
    }
    return t;
}

namespace {

struct StepOutcome {
    bool ok = false;
    Eigen::VectorXd u;
    double theta = 0.0;
    int iters = 0;
    std::vector<double> residuals;
    std::shared_ptr<FinalTangent> tangent;
};

// Newton iteration at a fixed fraction of the target. Load control solves
// K du = -(f_int - t f); displacement control adds the load multiplier as an
// unknown and enforces the controlled dof through a bordered system reduced
// by block elimination (two solves per iteration with the same factorization).
// Failure modes (divergence, singular tangent, inverted element, iteration
// budget) all return ok = false for the increment controller to handle.
StepOutcome newton_at(const GridMesh& mesh, const DofMap& dofs, const LoadCase& lc,
                      const DensityField& rho, const MaterialParams& mat, const SolverControls& controls,
                      Eigen::VectorXd u, double theta, double t, int max_iters) {
    StepOutcome out;
    Eigen::VectorXd f_free = dofs.reduce(lc.f);
    int ctrl_free = -1;
    if (lc.mode == ControlMode::Displacement) {
        ctrl_free = dofs.full_to_free[lc.control_dof];
        u[lc.control_dof] = t * lc.u_p;
    }
    double load_scale = lc.f.size() ? lc.f.cwiseAbs().maxCoeff() : 0.0;

    // Proportional loading: the thermal strain ramps with the same factor as
    // the mechanical load. Applying it in full from the first increment can
    // put the start of the ramp past a thermal buckling point that the full
    // load path walks through gradually.
    std::vector<double> adt(lc.alpha_dt.size());
    for (size_t e = 0; e < adt.size(); ++e) adt[e] = t * lc.alpha_dt[e];

    int growth = 0;
    double prev_norm = -1.0;
    for (int it = 0; it <= max_iters; ++it) {
        GlobalSystem sys;
        try {
            sys = assemble(mesh, dofs, u, adt, rho, mat, true);
        } catch (const InvertedElementError&) {
            return out;
        }
        Eigen::VectorXd r = dofs.reduce(sys.fint);
        if (lc.mode == ControlMode::Load) r -= t * f_free;
        else r -= theta * f_free;

        double rn = r.size() ? r.norm() : 0.0;
        if (!std::isfinite(rn)) return out;
        out.residuals.push_back(rn);

        double scale = load_scale;
        if (lc.mode == ControlMode::Displacement) scale *= std::max(1.0, std::abs(theta));
        double tol = controls.residual_tol * (scale > 0.0 ? scale : 1.0);
        if (rn <= tol) {
            out.ok = true;
            out.u = u;
            out.theta = theta;
            out.iters = it;
            out.tangent = factorize_tangent(std::move(sys.K));
            return out;
        }
        if (it == max_iters) return out;
        if (prev_norm >= 0.0) {
            growth = rn > prev_norm ? growth + 1 : 0;
            if (growth >= 3) return out;
        }
        prev_norm = rn;

        Eigen::SparseLU<SpMat> lu(sys.K);
        if (lu.info() != Eigen::Success) return out;
        Eigen::VectorXd du;
        if (lc.mode == ControlMode::Load) {
            du = lu.solve(-r);
        } else {
            Eigen::VectorXd a = lu.solve(-r);
            Eigen::VectorXd b = lu.solve(f_free);
            double denom = b[ctrl_free];
            if (denom == 0.0 || !std::isfinite(denom)) return out;
            double dtheta = -a[ctrl_free] / denom;
            du = a + dtheta * b;
            theta += dtheta;
        }
        if (!du.allFinite()) return out;
        for (int k = 0; k < dofs.n_free(); ++k) u[dofs.free_to_full[k]] += du[k];
    }
    return out;
}

} // namespace

EquilibriumResult solve_equilibrium(const GridMesh& mesh, const DofMap& dofs, const LoadCase& lc,
                                    const DensityField& rho, const MaterialParams& mat,
                                    const SolverControls& controls,
                                    const Eigen::VectorXd* warm_u, double warm_theta) {
    if (lc.f.size() != mesh.n_dofs()) throw std::invalid_argument("load case vector size mismatch");
    if (lc.mode == ControlMode::Displacement) {
        if (lc.control_dof < 0 || lc.control_dof >= mesh.n_dofs())
            throw std::invalid_argument("controlled dof out of range");
        if (dofs.full_to_free[lc.control_dof] < 0)
            throw std::invalid_argument("controlled dof is constrained");
        if (lc.f[lc.control_dof] == 0.0)
            throw std::invalid_argument("reference load must act on the controlled dof");
    }

    EquilibriumResult res;
    double load_scale = lc.f.size() ? lc.f.cwiseAbs().maxCoeff() : 0.0;
    res.tolerance = controls.residual_tol * (load_scale > 0.0 ? load_scale : 1.0);

    Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.n_dofs());
    dofs.impose(u);
    double theta = 0.0;
    double t = 0.0;
    double dt = controls.increment_cold;
    StepOutcome last_good;
    last_good.u = u;

    if (warm_u && warm_u->size() == mesh.n_dofs()) {
        Eigen::VectorXd u0 = *warm_u;
        dofs.impose(u0);
        double t_warm = std::min(controls.increment_warm, 1.0);
        StepOutcome warm = newton_at(mesh, dofs, lc, rho, mat, controls, u0, warm_theta,
                                     t_warm, controls.max_newton_iters);
        ++res.increments;
        res.newton_iters += warm.iters;
        if (warm.ok) {
            if (t_warm >= 1.0) {
                res.u = warm.u;
                res.theta = warm.theta;
                res.factor = 1.0;
                res.converged = true;
                res.residual_history = warm.residuals;
                res.tangent = warm.tangent;
                return res;
            }
            // Unusual override (warm increment < 1): continue stepping from here.
            u = warm.u;
            theta = warm.theta;
            t = t_warm;
            dt = adapt_increment(dt, warm.iters, controls);
            last_good = std::move(warm);
        }
        // Warm failure: reset to zero and walk up incrementally.
    }

    while (t < 1.0) {
        double t_try = std::min(t + dt, 1.0);
        StepOutcome step = newton_at(mesh, dofs, lc, rho, mat, controls, u, theta, t_try,
                                     controls.max_newton_iters);
        ++res.increments;
        res.newton_iters += step.iters;
        if (step.ok) {
            u = step.u;
            theta = step.theta;
            t = t_try;
            dt = adapt_increment(dt, step.iters, controls);
            last_good = std::move(step);
        } else {
            dt *= 0.5;
            if (dt <= controls.min_increment) break;
        }
    }

    res.u = last_good.u;
    res.theta = last_good.theta;
    res.factor = t;
    res.converged = t >= 1.0;
    res.intermediate = !res.converged;
    res.residual_history = last_good.residuals;
    res.tangent = last_good.tangent;
    if (!res.tangent) {
        // Nothing converged (t = 0): factorize at the initial state, with the
        // thermal strain at the same zero factor, so the caller still has an
        // operator for sensitivities.
        std::vector<double> adt0(lc.alpha_dt.size(), 0.0);
        GlobalSystem sys = assemble(mesh, dofs, res.u, adt0, rho, mat, true);
        res.tangent = factorize_tangent(std::move(sys.K));
    }
    return res;
}

} // namespace topopt

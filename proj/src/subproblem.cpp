#include "topopt/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace topopt {

namespace {

struct InnerBest {
    bool feasible = false;
    double objective = std::numeric_limits<double>::max();
    double alpha = 0.0;
    double constraint = std::numeric_limits<double>::max();
};

// Exact minimizer over a_move for a fixed multiplier. The clamped moves are
// piecewise linear in a_move, so the objective and constraint are piecewise
// linear too; it suffices to examine the saturation breakpoints, the
// feasibility crossings, and a_move = 0.
InnerBest solve_inner(const Eigen::VectorXd& s, const Eigen::VectorXd& g,
                      const Eigen::VectorXd& zmin, const Eigen::VectorXd& zmax,
                      const Eigen::VectorXd& d, double target_c, double tol_feas,
                      double tol_obj) {
    int n = static_cast<int>(s.size());
    struct Event {
        double alpha;
        int point;
        bool enter;   // into the linear range (false = leaving it)
    };
    std::vector<Event> events;
    events.reserve(2 * n);

    double oc = 0.0, cc = 0.0;
    for (int j = 0; j < n; ++j) {
        if (std::abs(d[j]) < 1e-14) continue;   // direction too small to move the point
        double r1 = zmin[j] / d[j], r2 = zmax[j] / d[j];
        double lo = std::min(r1, r2), hi = std::max(r1, r2);
        double m_lo = d[j] > 0 ? zmin[j] : zmax[j];
        if (lo == hi) continue;                 // zero-width box, m stays 0
        oc += s[j] * m_lo;
        cc += g[j] * m_lo;
        events.push_back({lo, j, true});
        events.push_back({hi, j, false});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        if (a.enter != b.enter) return a.enter;
        return a.point < b.point;
    });

    InnerBest best;
    auto offer = [&](double alpha, double obj, double con) {
        if (con > target_c + tol_feas) {
            if (con < best.constraint && !best.feasible) {
                best.constraint = con;
                best.objective = obj;
                best.alpha = alpha;
            }
            return;
        }
        bool better = !best.feasible || obj < best.objective - tol_obj;
        bool tie = best.feasible && std::abs(obj - best.objective) <= tol_obj &&
                   std::abs(alpha) < std::abs(best.alpha);
        if (better || tie) {
            best.feasible = true;
            best.objective = obj;
            best.alpha = alpha;
            best.constraint = con;
        }
    };

    double om = 0.0, cm = 0.0;
    if (events.empty()) {
        offer(0.0, oc, cc);
        return best;
    }
    double prev = events.front().alpha;
    offer(prev, oc + om * prev, cc + cm * prev);

    size_t k = 0;
    while (k < events.size()) {
        // Apply all events at this alpha, then examine the segment to the next.
        double here = events[k].alpha;
        while (k < events.size() && events[k].alpha == here) {
            const Event& ev = events[k];
            int j = ev.point;
            if (ev.enter) {
                double m_lo = d[j] > 0 ? zmin[j] : zmax[j];
                oc -= s[j] * m_lo;
                cc -= g[j] * m_lo;
                om += s[j] * d[j];
                cm += g[j] * d[j];
            } else {
                om -= s[j] * d[j];
                cm -= g[j] * d[j];
                double m_hi = d[j] > 0 ? zmax[j] : zmin[j];
                oc += s[j] * m_hi;
                cc += g[j] * m_hi;
            }
            ++k;
        }
        double next = k < events.size() ? events[k].alpha : here;
        offer(here, oc + om * here, cc + cm * here);
        if (next > here) {
            offer(next, oc + om * next, cc + cm * next);
            if (here < 0.0 && 0.0 < next) offer(0.0, oc, cc);
            if (cm != 0.0) {
                double cross = (target_c - cc) / cm;
                if (cross > here && cross < next)
                    offer(cross, oc + om * cross, cc + cm * cross);
            }
        }
    }
    return best;
}

} // namespace

SubproblemResult solve_subproblem(const SubproblemInput& in) {
    int n = static_cast<int>(in.S_c.size());
    if (in.S_g.size() != n || in.length.size() != n || in.zmin.size() != n || in.zmax.size() != n)
        throw std::invalid_argument("solve_subproblem: input arrays differ in length");
    SubproblemResult res;
    res.moves = Eigen::VectorXd::Zero(n);
    if (n == 0) return res;
    for (int j = 0; j < n; ++j) {
        if (!(in.length[j] > 0.0))
            throw std::invalid_argument("solve_subproblem: lengths must be positive");
        if (!(in.zmin[j] <= 0.0 && 0.0 <= in.zmax[j]))
            throw std::invalid_argument("solve_subproblem: limits must bracket zero");
    }

    Eigen::VectorXd s_raw = in.S_c.cwiseProduct(in.length);
    Eigen::VectorXd g = in.S_g.cwiseProduct(in.length);

    // The multiplier scan walks a fixed grid, so the objective row is
    // normalized by its largest ratio against the constraint row. That
    // places the balance multiplier near unity at any load scale; the
    // scaling leaves the selected direction unchanged.
    double ratio_max = 0.0;
    for (int j = 0; j < n; ++j)
        if (g[j] != 0.0) ratio_max = std::max(ratio_max, std::abs(s_raw[j] / g[j]));
    double s_unit = ratio_max > 0.0 ? ratio_max : 1.0;
    Eigen::VectorXd s = s_raw / s_unit;

    // Most achievable constraint decrease inside the move box.
    double c_box_min = 0.0;
    for (int j = 0; j < n; ++j)
        c_box_min += std::min(g[j] * in.zmin[j], g[j] * in.zmax[j]);
    double g_eff = in.g_target;
    if (g_eff > -c_box_min) {
        g_eff = -c_box_min;
        res.clamped_target = true;
    }
    double target_c = -g_eff;
    double scale_c = 1e-30, scale_o = 1e-30;
    for (int j = 0; j < n; ++j) {
        double m = std::max(-in.zmin[j], in.zmax[j]);
        scale_c += std::abs(g[j]) * m;
        scale_o += std::abs(s[j]) * m;
    }
    double tol_feas = 1e-3 * std::abs(g_eff) + 1e-13 * scale_c;
    double tol_obj = 1e-12 * scale_o;

    double lambda_max = 1.0 + 2.0 * ratio_max / s_unit;

    bool found = false;
    double best_obj = std::numeric_limits<double>::max();
    double best_alpha = 0.0, best_lambda = 0.0;
    double fallback_con = std::numeric_limits<double>::max();
    double fallback_alpha = 0.0, fallback_lambda = 0.0;

    auto try_lambda = [&](double lambda) {
        Eigen::VectorXd dir = s + lambda * g;
        double norm = dir.norm();
        Eigen::VectorXd d = norm > 1e-300 ? Eigen::VectorXd(dir / norm)
                                          : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
        InnerBest ib = solve_inner(s, g, in.zmin, in.zmax, d, target_c, tol_feas, tol_obj);
        if (ib.feasible) {
            if (!found || ib.objective < best_obj - tol_obj) {
                found = true;
                best_obj = ib.objective;
                best_alpha = ib.alpha;
                best_lambda = lambda;
            }
        } else if (ib.constraint < fallback_con) {
            fallback_con = ib.constraint;
            fallback_alpha = ib.alpha;
            fallback_lambda = lambda;
        }
    };

    int n_coarse = 201;
    for (int i = 0; i < n_coarse; ++i)
        try_lambda(lambda_max * i / (n_coarse - 1));
    double window = lambda_max / (n_coarse - 1);
    for (int round = 0; round < 3; ++round) {
        double center = found ? best_lambda : fallback_lambda;
        double left = std::max(0.0, center - window);
        double right = std::min(lambda_max, center + window);
        int n_fine = 41;
        for (int i = 0; i < n_fine; ++i)
            try_lambda(left + (right - left) * i / (n_fine - 1));
        window = (right - left) / (n_fine - 1);
    }

    double alpha = found ? best_alpha : fallback_alpha;
    double lambda = found ? best_lambda : fallback_lambda;
    res.a_move = alpha;
    res.lambda_g = lambda * s_unit;
    Eigen::VectorXd dir = s + lambda * g;
    double norm = dir.norm();
    for (int j = 0; j < n; ++j) {
        double dj = norm > 1e-300 ? dir[j] / norm : 0.0;
        res.moves[j] = std::clamp(alpha * dj, in.zmin[j], in.zmax[j]);
    }
    res.constraint_change = g.dot(res.moves);
    res.objective_change = s_raw.dot(res.moves);
    return res;
}

} // namespace topopt

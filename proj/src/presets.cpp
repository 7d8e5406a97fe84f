#include "topopt/presets.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace topopt {

namespace {

const std::vector<std::string> kPresets = {"biclamped", "square", "uniaxial", "cantilever"};

const std::vector<std::string> kKeys = {
    "preset", "nx", "ny", "lx", "ly", "volume_fraction", "control",
    "fm", "fref_total", "up", "fy_ratio", "load_cases",
    "alpha_dt_mode", "alpha_dt", "alpha_dt_bottom", "alpha_dt_top",
    "holes_x", "holes_y", "hole_r",
    "load_spread", "pin_length", "imperfection", "clamp_dist",
    "lambda", "mu", "weak_factor", "beta", "rho0",
    "residual_tol", "max_newton_iters", "n_desired", "adapt_exponent",
    "min_increment", "increment_cold", "increment_warm",
    "max_iterations", "cfl", "constraint_cap", "objective_rtol", "volume_rtol",
    "convergence_window", "snapshot_every", "mirror_x", "out",
};

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

std::string join(const std::vector<std::string>& items) {
    std::ostringstream out;
    for (size_t i = 0; i < items.size(); ++i) out << (i ? ", " : "") << items[i];
    return out.str();
}

void base_defaults(Config& c) {
    c.set_double("lambda", 1.0);
    c.set_double("mu", 0.4);
    c.set_double("weak_factor", 1e-6);
    c.set_double("beta", 500.0);
    c.set_double("rho0", 0.01);
    c.set_double("residual_tol", 1e-6);
    c.set_int("max_newton_iters", 20);
    c.set_double("n_desired", 4.0);
    c.set_double("adapt_exponent", 0.5);
    c.set_double("min_increment", 1e-9);
    c.set_double("increment_cold", 0.1);
    c.set_double("increment_warm", 1.0);
    c.set_int("max_iterations", 500);
    c.set_double("cfl", 0.3);
    c.set_double("constraint_cap", 0.01);
    c.set_double("objective_rtol", 1e-4);
    c.set_double("volume_rtol", 0.01);
    c.set_int("convergence_window", 5);
    c.set_int("snapshot_every", 10);
    c.set("out", "out");
    c.set_bool("mirror_x", false);
    c.set("alpha_dt_mode", "uniform");
    c.set_double("alpha_dt", 0.0);
    c.set_double("alpha_dt_bottom", 0.0);
    c.set_double("alpha_dt_top", 0.01);
    c.set_double("fm", 1e-3);
    c.set_double("fref_total", 1.0);
    c.set_double("up", 0.1);
    c.set_double("fy_ratio", 0.01);
    c.set_int("load_cases", 1);
    c.set_int("load_spread", 3);
    c.set_double("pin_length", 0.3);
    c.set_double("imperfection", 0.025);
    c.set_double("clamp_dist", 0.5);
}

// Per-element thermal strain field; `flip` mirrors the gradient for the
// second case of the two-case mode.
ThermalField thermal_field(const GridMesh& mesh, const Config& cfg, bool flip) {
    std::string mode = cfg.get_string("alpha_dt_mode");
    ThermalField field(mesh.n_elems(), 0.0);
    if (mode == "uniform") {
        double v = cfg.get_double("alpha_dt");
        std::fill(field.begin(), field.end(), v);
        return field;
    }
    if (mode == "linear_y" || mode == "two_case") {
        double bottom = cfg.get_double("alpha_dt_bottom");
        double top = cfg.get_double("alpha_dt_top");
        if (flip) std::swap(bottom, top);
        for (int e = 0; e < mesh.n_elems(); ++e) {
            double t = mesh.elem_centroid(e).y() / mesh.ly;
            field[e] = bottom + (top - bottom) * t;
        }
        return field;
    }
    fail("alpha_dt_mode must be one of: uniform, linear_y, two_case");
}

std::vector<Hole> hole_grid(const Config& cfg, double lx, double ly) {
    int hx = cfg.get_int("holes_x"), hy = cfg.get_int("holes_y");
    double r = cfg.get_double("hole_r");
    require(hx >= 0 && hy >= 0, "holes_x and holes_y must be non-negative");
    require(r >= 0.0, "hole_r must be non-negative");
    std::vector<Hole> holes;
    if (r == 0.0 || hx == 0 || hy == 0) return holes;
    for (int j = 0; j < hy; ++j)
        for (int i = 0; i < hx; ++i) {
            Hole h;
            h.center = Vec2((i + 0.5) * lx / hx, (j + 0.5) * ly / hy);
            h.r = r;
            holes.push_back(h);
        }
    return holes;
}

void clamp_node(BoundaryConditionSet& bcs, int node) {
    bcs.dirichlet.push_back({node, 0, 0.0});
    bcs.dirichlet.push_back({node, 1, 0.0});
    bcs.frozen[node] = 1;
}

MaterialParams material_from(const Config& cfg) {
    MaterialParams m;
    m.lambda = cfg.get_double("lambda");
    m.mu = cfg.get_double("mu");
    m.weak_factor = cfg.get_double("weak_factor");
    m.beta = cfg.get_double("beta");
    m.rho0 = cfg.get_double("rho0");
    require(m.mu > 0.0, "mu must be positive");
    require(m.weak_factor > 0.0 && m.weak_factor < 1.0, "weak_factor must lie in (0, 1)");
    return m;
}

SolverControls solver_from(const Config& cfg) {
    SolverControls s;
    s.residual_tol = cfg.get_double("residual_tol");
    s.max_newton_iters = cfg.get_int("max_newton_iters");
    s.n_desired = cfg.get_double("n_desired");
    s.adapt_exponent = cfg.get_double("adapt_exponent");
    s.min_increment = cfg.get_double("min_increment");
    s.increment_cold = cfg.get_double("increment_cold");
    s.increment_warm = cfg.get_double("increment_warm");
    require(s.residual_tol > 0.0, "residual_tol must be positive");
    require(s.max_newton_iters >= 1, "max_newton_iters must be at least 1");
    return s;
}

OptimizerSettings settings_from(const Config& cfg) {
    OptimizerSettings s;
    s.max_iterations = cfg.get_int("max_iterations");
    s.cfl = cfg.get_double("cfl");
    s.constraint_cap = cfg.get_double("constraint_cap");
    s.objective_rtol = cfg.get_double("objective_rtol");
    s.volume_rtol = cfg.get_double("volume_rtol");
    s.convergence_window = cfg.get_int("convergence_window");
    require(s.max_iterations >= 1, "max_iterations must be at least 1");
    require(s.cfl > 0.0 && s.cfl <= 0.5, "cfl must lie in (0, 0.5]");
    require(s.constraint_cap > 0.0, "constraint_cap must be positive");
    require(s.convergence_window >= 2, "convergence_window must be at least 2");
    return s;
}

// Consistent nodal loads of a constant line traction over [a, b] on a
// vertical boundary edge column of nodes.
void distribute_traction(const GridMesh& mesh, int node_i, double a, double b, double q_total,
                         int comp, BoundaryConditionSet& bcs) {
    double q = q_total / (b - a);
    for (int j = 0; j < mesh.ny; ++j) {
        double y0 = j * mesh.hy, y1 = y0 + mesh.hy;
        double s0 = std::max(a, y0), s1 = std::min(b, y1);
        if (s1 <= s0) continue;
        int n0 = mesh.node_id(node_i, j), n1 = mesh.node_id(node_i, j + 1);
        double w0 = ((y1 - s0) * (y1 - s0) - (y1 - s1) * (y1 - s1)) / (2.0 * mesh.hy);
        double w1 = ((s1 - y0) * (s1 - y0) - (s0 - y0) * (s0 - y0)) / (2.0 * mesh.hy);
        bcs.loads.push_back({n0, comp, q * w0});
        bcs.loads.push_back({n1, comp, q * w1});
        bcs.frozen[n0] = 1;
        bcs.frozen[n1] = 1;
    }
}

void check_even(int v, const std::string& name) {
    require(v % 2 == 0, name + " must be even so the control/load node sits on the midline");
}

struct Pieces {
    BoundaryConditionSet bcs;
    std::vector<LoadCase> mech_cases;   // thermal field filled in later
    std::vector<Hole> holes;
    bool mirror_x = false;
};

Pieces build_biclamped(const GridMesh& mesh, const Config& cfg) {
    require(cfg.get_string("control") == "load", "biclamped uses control = load");
    Pieces p;
    p.bcs.frozen.assign(mesh.n_nodes(), 0);
    p.mirror_x = true;

    // Symmetry rollers on the midspan edge, full clamp on the outer edge.
    for (int j = 0; j <= mesh.ny; ++j) {
        p.bcs.dirichlet.push_back({mesh.node_id(0, j), 0, 0.0});
        clamp_node(p.bcs, mesh.node_id(mesh.nx, j));
    }

    // Center load smeared along the bottom edge; the symmetry node carries
    // half of its full-model share.
    int spread = cfg.get_int("load_spread");
    require(spread >= 1 && spread <= mesh.nx, "load_spread out of range");
    double fm = cfg.get_double("fm");
    int n_full = 2 * spread - 1;
    for (int i = 0; i < spread; ++i) {
        int node = mesh.node_id(i, 0);
        double share = fm / n_full * (i == 0 ? 0.5 : 1.0);
        p.bcs.loads.push_back({node, 1, share});
        p.bcs.frozen[node] = 1;
    }

    LoadCase lc;
    lc.mode = ControlMode::Load;
    lc.f = p.bcs.load_vector(mesh);
    p.mech_cases.push_back(lc);
    p.holes = hole_grid(cfg, mesh.lx, mesh.ly);
    return p;
}

Pieces build_square(const GridMesh& mesh, const Config& cfg) {
    require(cfg.get_string("control") == "load", "square uses control = load");
    check_even(mesh.nx, "nx");
    check_even(mesh.ny, "ny");
    Pieces p;
    p.bcs.frozen.assign(mesh.n_nodes(), 0);

    // Clamps along the boundary within clamp_dist of each corner.
    double cd = cfg.get_double("clamp_dist");
    require(cd > 0.0 && cd < std::min(mesh.lx, mesh.ly), "clamp_dist out of range");
    std::set<int> clamped;
    auto corner_near = [&](const Vec2& x) {
        Vec2 corners[4] = {{0, 0}, {mesh.lx, 0}, {0, mesh.ly}, {mesh.lx, mesh.ly}};
        for (const auto& c : corners)
            if ((x - c).norm() <= cd + 1e-12) return true;
        return false;
    };
    for (int j = 0; j <= mesh.ny; ++j)
        for (int i = 0; i <= mesh.nx; ++i) {
            if (i != 0 && i != mesh.nx && j != 0 && j != mesh.ny) continue;
            int node = mesh.node_id(i, j);
            if (corner_near(mesh.node_coords(node)) && !clamped.count(node)) {
                clamp_node(p.bcs, node);
                clamped.insert(node);
            }
        }

    // Central point load smeared over an odd number of nodes along x.
    int spread = cfg.get_int("load_spread");
    require(spread >= 1 && spread % 2 == 1, "load_spread must be odd for the square preset");
    require(spread < mesh.nx, "load_spread out of range");
    double fm = cfg.get_double("fm");
    int ci = mesh.nx / 2, cj = mesh.ny / 2;
    for (int k = -(spread / 2); k <= spread / 2; ++k) {
        int node = mesh.node_id(ci + k, cj);
        p.bcs.loads.push_back({node, 1, fm / spread});
        p.bcs.frozen[node] = 1;
    }

    LoadCase lc;
    lc.mode = ControlMode::Load;
    lc.f = p.bcs.load_vector(mesh);
    p.mech_cases.push_back(lc);
    p.holes = hole_grid(cfg, mesh.lx, mesh.ly);
    return p;
}

Pieces build_uniaxial(const GridMesh& mesh, const Config& cfg) {
    require(cfg.get_string("control") == "displacement", "uniaxial uses control = displacement");
    check_even(mesh.ny, "ny");
    Pieces p;
    p.bcs.frozen.assign(mesh.n_nodes(), 0);

    double pin = cfg.get_double("pin_length");
    require(pin > 0.0 && pin < mesh.ly, "pin_length out of range");
    double y0 = 0.5 * (mesh.ly - pin), y1 = 0.5 * (mesh.ly + pin);
    for (int j = 0; j <= mesh.ny; ++j) {
        double y = j * mesh.hy;
        if (y >= y0 - 1e-12 && y <= y1 + 1e-12) clamp_node(p.bcs, mesh.node_id(0, j));
    }

    // Reference compression band on the right edge, shifted upward by the
    // imperfection to break the buckling symmetry.
    double shift = cfg.get_double("imperfection");
    double total = cfg.get_double("fref_total");
    require(total > 0.0, "fref_total must be positive");
    double a = y0 + shift, b = y1 + shift;
    require(b <= mesh.ly + 1e-12, "imperfection pushes the load band off the domain");
    distribute_traction(mesh, mesh.nx, a, b, -total, 0, p.bcs);

    double up = cfg.get_double("up");
    require(up != 0.0, "up must be nonzero");
    LoadCase lc;
    lc.mode = ControlMode::Displacement;
    lc.control_dof = 2 * mesh.node_id(mesh.nx, mesh.ny / 2);
    lc.u_p = -up;   // compression toward the pinned edge
    lc.f = p.bcs.load_vector(mesh);
    require(lc.f[lc.control_dof] != 0.0,
            "reference load vanishes at the control node; widen pin_length or reduce imperfection");
    p.mech_cases.push_back(lc);
    p.holes = hole_grid(cfg, mesh.lx, mesh.ly);
    return p;
}

Pieces build_cantilever(const GridMesh& mesh, const Config& cfg) {
    require(cfg.get_string("control") == "displacement", "cantilever uses control = displacement");
    check_even(mesh.ny, "ny");
    Pieces p;
    p.bcs.frozen.assign(mesh.n_nodes(), 0);

    for (int j = 0; j <= mesh.ny; ++j) clamp_node(p.bcs, mesh.node_id(0, j));

    double total = cfg.get_double("fref_total");
    double ratio = cfg.get_double("fy_ratio");
    require(total > 0.0, "fref_total must be positive");
    int n_cases = cfg.get_int("load_cases");
    require(n_cases == 1 || n_cases == 2, "load_cases must be 1 or 2");
    int node = mesh.node_id(mesh.nx, mesh.ny / 2);
    p.bcs.frozen[node] = 1;
    double up = cfg.get_double("up");
    require(up != 0.0, "up must be nonzero");

    // Axial compression plus a transverse component; the two-case variant
    // splits the transverse direction into a +y and a -y case. The vectors
    // differ per case, so they are built here rather than from bcs.loads.
    for (int k = 0; k < n_cases; ++k) {
        double sy = (n_cases == 1) ? -1.0 : (k == 0 ? 1.0 : -1.0);
        LoadCase lc;
        lc.mode = ControlMode::Displacement;
        lc.control_dof = 2 * node;
        lc.u_p = -up;
        lc.weight = 1.0 / n_cases;
        lc.f = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
        lc.f[2 * node] = -total;
        lc.f[2 * node + 1] = sy * ratio * total;
        p.mech_cases.push_back(lc);
    }
    p.holes = hole_grid(cfg, mesh.lx, mesh.ly);
    return p;
}

} // namespace

const std::vector<std::string>& preset_names() { return kPresets; }
const std::vector<std::string>& known_keys() { return kKeys; }

Config preset_config(const std::string& name) {
    Config c;
    base_defaults(c);
    c.set("preset", name);
    if (name == "biclamped") {
        c.set_int("nx", 160);
        c.set_int("ny", 40);
        c.set_double("lx", 4.0);
        c.set_double("ly", 1.0);
        c.set_double("volume_fraction", 0.3);
        c.set("control", "load");
        c.set_double("fm", 1e-3);
        c.set_int("holes_x", 3);
        c.set_int("holes_y", 2);
        c.set_double("hole_r", 0.15);
        c.set_bool("mirror_x", true);
        c.set_int("load_spread", 3);
    } else if (name == "square") {
        c.set_int("nx", 100);
        c.set_int("ny", 100);
        c.set_double("lx", 2.0);
        c.set_double("ly", 2.0);
        c.set_double("volume_fraction", 0.3);
        c.set("control", "load");
        c.set_double("fm", -1.0);
        c.set_int("holes_x", 4);
        c.set_int("holes_y", 4);
        c.set_double("hole_r", 0.12);
        c.set_int("load_spread", 5);
    } else if (name == "uniaxial") {
        c.set_int("nx", 400);
        c.set_int("ny", 80);
        c.set_double("lx", 5.0);
        c.set_double("ly", 1.0);
        c.set_double("volume_fraction", 0.5);
        c.set("control", "displacement");
        c.set_double("up", 0.1);
        c.set_int("holes_x", 6);
        c.set_int("holes_y", 1);
        c.set_double("hole_r", 0.15);
    } else if (name == "cantilever") {
        c.set_int("nx", 160);
        c.set_int("ny", 80);
        c.set_double("lx", 2.0);
        c.set_double("ly", 1.0);
        c.set_double("volume_fraction", 0.3);
        c.set("control", "displacement");
        c.set_double("up", 0.05);
        c.set_int("holes_x", 4);
        c.set_int("holes_y", 2);
        c.set_double("hole_r", 0.12);
    } else {
        fail("unknown preset '" + name + "'; valid presets: " + join(kPresets));
    }
    return c;
}

PresetProblem build_problem(const Config& cfg) {
    std::set<std::string> valid(kKeys.begin(), kKeys.end());
    for (const auto& k : cfg.keys())
        if (!valid.count(k))
            fail("unknown key '" + k + "'; valid keys: " + join(kKeys));
    require(cfg.has("preset"), "missing key 'preset'; valid presets: " + join(kPresets));
    std::string name = cfg.get_string("preset");
    require(std::find(kPresets.begin(), kPresets.end(), name) != kPresets.end(),
            "unknown preset '" + name + "'; valid presets: " + join(kPresets));

    int nx = cfg.get_int("nx"), ny = cfg.get_int("ny");
    double lx = cfg.get_double("lx"), ly = cfg.get_double("ly");
    require(nx >= 4 && ny >= 4, "nx and ny must be at least 4");
    GridMesh mesh = build_grid(nx, ny, lx, ly);

    double vf = cfg.get_double("volume_fraction");
    require(vf > 0.0 && vf < 1.0, "volume_fraction must lie in (0, 1)");

    Pieces p;
    if (name == "biclamped") p = build_biclamped(mesh, cfg);
    else if (name == "square") p = build_square(mesh, cfg);
    else if (name == "uniaxial") p = build_uniaxial(mesh, cfg);
    else p = build_cantilever(mesh, cfg);

    PresetProblem job;
    job.problem.mesh = mesh;
    job.problem.bcs = p.bcs;
    job.problem.dofs = apply_boundary_conditions(mesh, p.bcs);
    job.problem.material = material_from(cfg);
    job.problem.solver = solver_from(cfg);
    job.problem.volume_target = vf * lx * ly;
    job.settings = settings_from(cfg);
    job.mirror_x = cfg.get_bool("mirror_x");
    job.snapshot_every = cfg.get_int("snapshot_every");
    require(job.snapshot_every >= 1, "snapshot_every must be at least 1");

    // Combine the mechanical cases with the thermal mode. The two-case mode
    // pairs every mechanical case with both gradient directions at half
    // weight, mirroring the multiple-load-case treatment.
    std::string tmode = cfg.get_string("alpha_dt_mode");
    int n_thermal = tmode == "two_case" ? 2 : 1;
    for (const auto& mc : p.mech_cases) {
        for (int t = 0; t < n_thermal; ++t) {
            LoadCase lc = mc;
            lc.alpha_dt = thermal_field(mesh, cfg, t == 1);
            lc.weight = mc.weight / n_thermal;
            job.problem.cases.push_back(lc);
        }
    }

    job.initial = initialize_design(mesh, p.holes, p.bcs.frozen);
    job.resolved = cfg;
    return job;
}

} // namespace topopt

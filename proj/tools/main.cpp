#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "topopt/outputs.hpp"
#include "topopt/presets.hpp"

namespace fs = std::filesystem;
using namespace topopt;

namespace {

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
    return out;
}

// Free-form `--key value` (or `--key=value`) overrides; hyphens in key names
// normalize to underscores so `--alpha-dt` and `--alpha_dt` both work. Key
// validity is checked later against the full configuration.
Config parse_overrides(const std::vector<std::string>& args) {
    Config o;
    for (size_t i = 0; i < args.size(); ++i) {
        std::string t = args[i];
        if (t.rfind("--", 0) != 0)
            throw std::invalid_argument("unexpected argument '" + t +
                                        "'; overrides take the form --key value");
        t = t.substr(2);
        std::string value;
        auto eq = t.find('=');
        if (eq != std::string::npos) {
            value = t.substr(eq + 1);
            t = t.substr(0, eq);
        } else if (i + 1 < args.size()) {
            value = args[++i];
        } else {
            throw std::invalid_argument("override '--" + t + "' is missing a value");
        }
        if (t.empty()) throw std::invalid_argument("empty override key");
        std::replace(t.begin(), t.end(), '-', '_');
        o.set(t, value);
    }
    return o;
}

// Layer the three input sources: preset defaults under the config file under
// the command-line overrides. Explicit preset names must agree.
Config assemble_config(const std::string& preset_flag, const std::string& config_file,
                       const Config& overrides) {
    Config file_cfg;
    if (!config_file.empty()) file_cfg = Config::load(config_file);

    std::string preset = preset_flag;
    for (const Config* src : {&overrides, static_cast<const Config*>(&file_cfg)}) {
        if (!src->has("preset")) continue;
        std::string p = src->get_string("preset");
        if (preset.empty()) preset = p;
        else if (p != preset)
            throw std::invalid_argument("conflicting presets '" + preset + "' and '" + p + "'");
    }

    Config cfg;
    if (!preset.empty()) cfg = preset_config(preset);
    cfg.merge(file_cfg);
    cfg.merge(overrides);
    if (!preset.empty()) cfg.set("preset", preset);
    return cfg;
}

std::string snapshot_path(const fs::path& dir, int iter) {
    char name[32];
    std::snprintf(name, sizeof name, "design_%04d.vtk", iter);
    return (dir / name).string();
}

int cmd_run(const std::string& preset_flag, const std::string& config_file,
            const std::string& out_flag, const std::vector<std::string>& extras) {
    Config overrides = parse_overrides(extras);
    if (!out_flag.empty()) overrides.set("out", out_flag);
    Config cfg = assemble_config(preset_flag, config_file, overrides);
    PresetProblem job = build_problem(cfg);

    fs::path out(job.resolved.get_string("out"));
    fs::create_directories(out);
    write_config_resolved((out / "config.resolved").string(), job.resolved,
                          {"resolved configuration; rerun with: topopt run --config config.resolved",
                           "hole keys parameterize the initial layout and are approximations"});

    int cadence = job.snapshot_every;
    int last_snapshot = -1;
    auto observer = [&](const IterationRecord& r, const LevelSetField& phi,
                        const DensityField& rho) {
        std::printf("iter %4d  objective %.8e  volume %.6f  newton %d/%d%s\n", r.iter, r.objective,
                    r.volume, r.newton_increments, r.newton_iters,
                    r.intermediate ? "  [intermediate]" : "");
        std::fflush(stdout);
        if (r.iter % cadence == 0) {
            write_vtk_snapshot(snapshot_path(out, r.iter), phi, rho);
            last_snapshot = r.iter;
        }
    };

    OptimizationResult res =
        run_optimization(job.problem, job.initial, job.settings, observer);

    write_history_csv((out / "history.csv").string(), res.history);
    if (!res.history.empty() && res.history.back().iter != last_snapshot)
        write_vtk_snapshot(snapshot_path(out, res.history.back().iter), res.design, res.densities);
    try {
        write_final_svg((out / "final.svg").string(),
                        extract_boundary(res.design, job.problem.mesh), job.problem.mesh,
                        job.mirror_x);
    } catch (const std::exception& e) {
        std::cerr << "note: final contour not drawn: " << e.what() << "\n";
    }

    if (res.aborted) {
        std::cerr << "error: equilibrium analysis failed; partial results are in " << out << "\n";
        return 1;
    }
    std::printf("%s after %zu iterations (%d intermediate-equilibrium events); outputs in %s\n",
                res.converged ? "converged" : "stopped at the iteration limit", res.history.size(),
                res.intermediate_events, out.string().c_str());
    return 0;
}

int cmd_validate(const std::string& config_file) {
    Config cfg = assemble_config("", config_file, Config());
    PresetProblem job = build_problem(cfg);
    const GridMesh& m = job.problem.mesh;
    std::printf("configuration OK\n");
    std::printf("  preset          %s\n", job.resolved.get_string("preset").c_str());
    std::printf("  mesh            %d x %d (%d elements)\n", m.nx, m.ny, m.n_elems());
    std::printf("  load cases      %zu\n", job.problem.cases.size());
    std::printf("  volume target   %.6g of %.6g\n", job.problem.volume_target, m.lx * m.ly);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-set topology optimization of thermoelastic structures at finite strain"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an optimization job");
    std::string preset, config_file, out_dir;
    run->add_option("--preset", preset,
                    "Named benchmark preset (" + join_names(preset_names()) + ")");
    run->add_option("--config", config_file, "Key = value configuration file");
    run->add_option("--out", out_dir, "Output directory (overrides the 'out' key)");
    run->allow_extras();

    auto* validate = app.add_subcommand("validate", "Check a configuration without running");
    std::string validate_file;
    validate->add_option("--config", validate_file, "Configuration file to check")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(preset, config_file, out_dir, run->remaining());
        return cmd_validate(validate_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

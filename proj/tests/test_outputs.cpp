#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/stat.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "topopt/outputs.hpp"
#include "topopt/presets.hpp"

using namespace topopt;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool exists(const std::string& path) {
    struct stat st;
    return ::stat(path.c_str(), &st) == 0;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::string fresh_dir(const char* name) {
    std::string dir = std::string("/tmp/topopt_outputs_") + name;
    int rc = std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    REQUIRE(rc == 0);
    return dir;
}

int run_cli(const std::string& args, const std::string& log) {
    std::string cmd = std::string(TOPOPT_BIN) + " " + args + " > " + log + " 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("history csv prints the fixed header and roundtrips its doubles") {
    std::string dir = fresh_dir("csv");
    std::vector<IterationRecord> hist(2);
    hist[0].iter = 1;
    hist[0].objective = 1.0 / 3.0;
    hist[0].volume = 0.123456789012345678;
    hist[0].newton_increments = 4;
    hist[0].newton_iters = 11;
    hist[0].intermediate = false;
    hist[1].iter = 2;
    hist[1].objective = -2.5e-7;
    hist[1].volume = 3.7;
    hist[1].newton_increments = 1;
    hist[1].newton_iters = 2;
    hist[1].intermediate = true;

    std::string path = dir + "/history.csv";
    write_history_csv(path, hist);
    auto lines = lines_of(slurp(path));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "iter,objective,volume,newton_increments,newton_iters,intermediate_flag");

    int iter, ninc, nit, flag;
    double obj, vol;
    REQUIRE(std::sscanf(lines[1].c_str(), "%d,%lf,%lf,%d,%d,%d", &iter, &obj, &vol, &ninc, &nit,
                        &flag) == 6);
    CHECK(iter == 1);
    CHECK(obj == 1.0 / 3.0);
    CHECK(vol == 0.123456789012345678);
    CHECK(ninc == 4);
    CHECK(nit == 11);
    CHECK(flag == 0);
    REQUIRE(std::sscanf(lines[2].c_str(), "%d,%lf,%lf,%d,%d,%d", &iter, &obj, &vol, &ninc, &nit,
                        &flag) == 6);
    CHECK(obj == -2.5e-7);
    CHECK(flag == 1);
    CHECK(!exists(path + ".partial"));
}

TEST_CASE("vtk snapshot carries nodal phi and per-cell rho") {
    std::string dir = fresh_dir("vtk");
    GridMesh mesh = build_grid(3, 2, 1.5, 1.0);
    LevelSetField f = initialize_design(mesh, {}, std::vector<uint8_t>(mesh.n_nodes(), 0));
    DensityField rho(mesh.n_elems(), 1.0);
    std::string path = dir + "/snap.vtk";
    write_vtk_snapshot(path, f, rho);

    auto lines = lines_of(slurp(path));
    REQUIRE(lines.size() >= 10);
    CHECK(lines[0] == "# vtk DataFile Version 3.0");
    CHECK(lines[2] == "ASCII");
    CHECK(lines[3] == "DATASET STRUCTURED_POINTS");
    CHECK(lines[4] == "DIMENSIONS 4 3 1");
    CHECK(lines[5] == "ORIGIN 0 0 0");
    CHECK(lines[6].substr(0, 8) == "SPACING ");
    CHECK(lines[7] == "POINT_DATA 12");
    CHECK(lines[8] == "SCALARS phi double");
    CHECK(lines[9] == "LOOKUP_TABLE default");
    // 12 phi values, then the cell block with 6 rho values of a solid field.
    size_t i = 10;
    for (int n = 0; n < mesh.n_nodes(); ++n, ++i)
        CHECK(std::strtod(lines[i].c_str(), nullptr) == doctest::Approx(f.phi[n]).epsilon(1e-8));
    CHECK(lines[i++] == "CELL_DATA 6");
    CHECK(lines[i++] == "SCALARS rho double");
    CHECK(lines[i++] == "LOOKUP_TABLE default");
    for (int e = 0; e < mesh.n_elems(); ++e, ++i) CHECK(std::strtod(lines[i].c_str(), nullptr) == 1.0);
    CHECK(i == lines.size());

    DensityField wrong(mesh.n_elems() + 1, 1.0);
    CHECK_THROWS(write_vtk_snapshot(dir + "/bad.vtk", f, wrong));
}

TEST_CASE("svg mirror doubles the segments and extends the view box") {
    std::string dir = fresh_dir("svg");
    GridMesh mesh = build_grid(8, 8, 1.0, 1.0);
    std::vector<Hole> holes(1);
    holes[0].center = Vec2(0.5, 0.5);
    holes[0].r = 0.3;
    LevelSetField f = initialize_design(mesh, holes, std::vector<uint8_t>(mesh.n_nodes(), 0));
    BoundaryDiscretization b = extract_boundary(f, mesh);
    REQUIRE(!b.segments.empty());

    write_final_svg(dir + "/plain.svg", b, mesh, false);
    write_final_svg(dir + "/mirrored.svg", b, mesh, true);
    std::string plain = slurp(dir + "/plain.svg");
    std::string mirrored = slurp(dir + "/mirrored.svg");
    CHECK(plain.find("<svg") != std::string::npos);

    auto count = [](const std::string& text, const std::string& needle) {
        size_t n = 0;
        for (size_t pos = text.find(needle); pos != std::string::npos;
             pos = text.find(needle, pos + 1))
            ++n;
        return n;
    };
    CHECK(count(plain, "<line") == b.segments.size());
    CHECK(count(mirrored, "<line") == 2 * b.segments.size());
}

TEST_CASE("resolved config parses back exactly, notes included") {
    std::string dir = fresh_dir("resolved");
    Config cfg = preset_config("cantilever");
    std::string path = dir + "/config.resolved";
    write_config_resolved(path, cfg, {"first note", "second note"});
    std::string text = slurp(path);
    CHECK(text.substr(0, 13) == "# first note\n");
    Config back = Config::parse(text);
    CHECK(back.format() == cfg.format());
}

TEST_CASE("writers fail loudly on an unwritable path and never leave partials") {
    std::vector<IterationRecord> hist(1);
    std::string path = "/tmp/topopt_outputs_missing_dir/sub/history.csv";
    CHECK_THROWS_AS(write_history_csv(path, hist), std::runtime_error);
    CHECK(!exists(path));
}

TEST_CASE("cli run honors the snapshot cadence and reruns bit-identically") {
    std::string dir = fresh_dir("cli");
    std::string out1 = dir + "/out1", out2 = dir + "/out2";
    std::string base = "run --preset biclamped --nx 24 --ny 8 --max-iterations 12 "
                       "--snapshot-every 5 --holes-x 2 --holes-y 1";
    int rc = run_cli(base + " --out " + out1, dir + "/run1.log");
    CHECK(rc == 0);

    CHECK(exists(out1 + "/config.resolved"));
    CHECK(exists(out1 + "/history.csv"));
    CHECK(exists(out1 + "/final.svg"));
    CHECK(exists(out1 + "/design_0005.vtk"));
    CHECK(exists(out1 + "/design_0010.vtk"));
    CHECK(exists(out1 + "/design_0012.vtk"));
    CHECK(!exists(out1 + "/design_0001.vtk"));
    CHECK(!exists(out1 + "/design_0011.vtk"));

    auto hist_lines = lines_of(slurp(out1 + "/history.csv"));
    CHECK(hist_lines.size() == 13);

    // The resolved echo validates and reruns to the same history bytes.
    rc = run_cli("validate --config " + out1 + "/config.resolved", dir + "/validate.log");
    CHECK(rc == 0);
    rc = run_cli("run --config " + out1 + "/config.resolved --out " + out2, dir + "/run2.log");
    CHECK(rc == 0);
    CHECK(slurp(out2 + "/history.csv") == slurp(out1 + "/history.csv"));

    // Unknown keys bounce with a config error.
    rc = run_cli("run --preset biclamped --not-a-key 3 --out " + dir + "/out3",
                 dir + "/run3.log");
    CHECK(rc == 2);
}

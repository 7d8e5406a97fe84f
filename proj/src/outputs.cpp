#include "topopt/outputs.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace topopt {

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& body) {
    std::string tmp = path + ".partial";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << body;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
    out.close();
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "'");
}

} // namespace

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history) {
    std::ostringstream out;
    out << "iter,objective,volume,newton_increments,newton_iters,intermediate_flag\n";
    for (const auto& r : history)
        out << r.iter << ',' << g17(r.objective) << ',' << g17(r.volume) << ','
            << r.newton_increments << ',' << r.newton_iters << ',' << (r.intermediate ? 1 : 0)
            << '\n';
    atomic_write(path, out.str());
}

void write_vtk_snapshot(const std::string& path, const LevelSetField& phi,
                        const DensityField& rho) {
    if (static_cast<int>(rho.size()) != phi.nx * phi.ny)
        throw std::invalid_argument("density field does not match the level-set grid");
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n";
    out << "design snapshot\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << phi.nx + 1 << ' ' << phi.ny + 1 << " 1\n";
    out << "ORIGIN 0 0 0\n";
    out << "SPACING " << g9(phi.hx) << ' ' << g9(phi.hy) << " 1\n";
    out << "POINT_DATA " << phi.n_nodes() << "\n";
    out << "SCALARS phi double\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : phi.phi) out << g9(v) << '\n';
    out << "CELL_DATA " << phi.nx * phi.ny << "\n";
    out << "SCALARS rho double\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : rho) out << g9(v) << '\n';
    atomic_write(path, out.str());
}

void write_final_svg(const std::string& path, const BoundaryDiscretization& boundary,
                     const GridMesh& mesh, bool mirror_x) {
    double x0 = mirror_x ? -mesh.lx : 0.0;
    double width = mirror_x ? 2.0 * mesh.lx : mesh.lx;
    double sw = 0.004 * std::max(width, mesh.ly);
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << g9(x0) << " 0 " << g9(width)
        << ' ' << g9(mesh.ly) << "\">\n";
    out << "<rect x=\"" << g9(x0) << "\" y=\"0\" width=\"" << g9(width) << "\" height=\""
        << g9(mesh.ly) << "\" fill=\"white\" stroke=\"none\"/>\n";
    out << "<g stroke=\"black\" stroke-width=\"" << g9(sw)
        << "\" stroke-linecap=\"round\" fill=\"none\">\n";
    auto emit = [&](double ax, double ay, double bx, double by) {
        out << "<line x1=\"" << g9(ax) << "\" y1=\"" << g9(mesh.ly - ay) << "\" x2=\"" << g9(bx)
            << "\" y2=\"" << g9(mesh.ly - by) << "\"/>\n";
    };
    for (const auto& s : boundary.segments) {
        const Vec2& a = boundary.points[s.a].x;
        const Vec2& b = boundary.points[s.b].x;
        emit(a.x(), a.y(), b.x(), b.y());
        if (mirror_x) emit(-a.x(), a.y(), -b.x(), b.y());
    }
    out << "</g>\n</svg>\n";
    atomic_write(path, out.str());
}

void write_config_resolved(const std::string& path, const Config& cfg,
                           const std::vector<std::string>& notes) {
    std::ostringstream out;
    for (const auto& n : notes) out << "# " << n << '\n';
    out << cfg.format();
    atomic_write(path, out.str());
}

} // namespace topopt

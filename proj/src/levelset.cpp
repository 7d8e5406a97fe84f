#include "topopt/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace topopt {

namespace {

constexpr double kBandElements = 6.0;   // narrow band width in elements

double frame_distance(const GridMesh& mesh, const Vec2& p) {
    return std::min(std::min(p.x(), mesh.lx - p.x()), std::min(p.y(), mesh.ly - p.y()));
}

double hole_sdf(const Hole& h, const Vec2& p) {
    if (!h.rect) return (p - h.center).norm() - h.r;
    Vec2 d = (p - h.center).cwiseAbs() - h.half;
    Vec2 dpos = d.cwiseMax(0.0);
    return dpos.norm() + std::min(std::max(d.x(), d.y()), 0.0);
}

bool material(double phi) { return phi >= 0.0; }

// Crossing parameter along an edge from phi_a to phi_b (signs differ).
double crossing_t(double a, double b) {
    double t = a / (a - b);
    return std::clamp(t, 0.0, 1.0);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.squaredNorm();
    if (len2 <= 0.0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double polygon_area(const std::vector<Vec2>& poly) {
    double s = 0.0;
    int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        s += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(s);
}

} // namespace

LevelSetField initialize_design(const GridMesh& mesh, const std::vector<Hole>& holes,
                                const std::vector<uint8_t>& frozen) {
    if (!frozen.empty() && static_cast<int>(frozen.size()) != mesh.n_nodes())
        throw std::invalid_argument("initialize_design: frozen mask size mismatch");
    LevelSetField f;
    f.nx = mesh.nx;
    f.ny = mesh.ny;
    f.hx = mesh.hx;
    f.hy = mesh.hy;
    f.frozen = frozen.empty() ? std::vector<uint8_t>(mesh.n_nodes(), 0) : frozen;
    f.floor_value = 0.5 * mesh.h_min();
    f.phi.resize(mesh.n_nodes());

    for (int n = 0; n < mesh.n_nodes(); ++n) {
        Vec2 p = mesh.node_coords(n);
        double v = frame_distance(mesh, p);
        for (const auto& h : holes) v = std::min(v, hole_sdf(h, p));
        f.phi[n] = v;
    }
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        if (!f.frozen[n]) continue;
        Vec2 p = mesh.node_coords(n);
        for (const auto& h : holes)
            if (hole_sdf(h, p) <= 0.0)
                throw std::invalid_argument("initialize_design: hole overlaps a non-designable node");
        f.phi[n] = std::max(f.phi[n], f.floor_value);
    }
    return f;
}

BoundaryDiscretization extract_boundary(const LevelSetField& f, const GridMesh& mesh) {
    bool any_material = false;
    for (int n = 0; n < f.phi.size(); ++n)
        if (material(f.phi[n])) { any_material = true; break; }
    if (!any_material) throw std::invalid_argument("extract_boundary: field is entirely void");

    BoundaryDiscretization bd;
    // Edge key -> point index; horizontal edges keyed 2*node, vertical 2*node+1
    // where node is the left/bottom endpoint.
    std::map<long long, int> edge_point;

    // Nodal gradient of phi (central differences, one-sided at the frame) for
    // order-independent normals.
    int nxn = f.nx + 1, nyn = f.ny + 1;
    std::vector<Vec2> grad(static_cast<size_t>(nxn) * nyn);
    for (int j = 0; j < nyn; ++j)
        for (int i = 0; i < nxn; ++i) {
            int n = f.id(i, j);
            int il = std::max(i - 1, 0), ir = std::min(i + 1, f.nx);
            int jl = std::max(j - 1, 0), jr = std::min(j + 1, f.ny);
            grad[n].x() = (f.phi[f.id(ir, j)] - f.phi[f.id(il, j)]) / ((ir - il) * f.hx);
            grad[n].y() = (f.phi[f.id(i, jr)] - f.phi[f.id(i, jl)]) / ((jr - jl) * f.hy);
        }

    auto point_on_edge = [&](int i, int j, bool horizontal) -> int {
        long long key = 2LL * f.id(i, j) + (horizontal ? 0 : 1);
        auto it = edge_point.find(key);
        if (it != edge_point.end()) return it->second;
        int na = f.id(i, j);
        int nb = horizontal ? f.id(i + 1, j) : f.id(i, j + 1);
        double t = crossing_t(f.phi[na], f.phi[nb]);
        Vec2 pa = mesh.node_coords(na), pb = mesh.node_coords(nb);
        BoundaryPoint bp;
        bp.x = pa + t * (pb - pa);
        // Bilinear interpolation of the nodal gradient along the edge.
        Vec2 g = (1.0 - t) * grad[na] + t * grad[nb];
        double gn = g.norm();
        bp.normal = gn > 1e-14 ? Vec2(-g / gn) : Vec2(0.0, 0.0);
        int idx = static_cast<int>(bd.points.size());
        bd.points.push_back(bp);
        edge_point[key] = idx;
        return idx;
    };

    for (int ey = 0; ey < f.ny; ++ey) {
        for (int ex = 0; ex < f.nx; ++ex) {
            double pbl = f.phi[f.id(ex, ey)], pbr = f.phi[f.id(ex + 1, ey)];
            double ptr = f.phi[f.id(ex + 1, ey + 1)], ptl = f.phi[f.id(ex, ey + 1)];
            bool mbl = material(pbl), mbr = material(pbr), mtr = material(ptr), mtl = material(ptl);
            int mcount = mbl + mbr + mtr + mtl;
            if (mcount == 0 || mcount == 4) continue;

            // Cell-local edges: 0 bottom, 1 right, 2 top, 3 left.
            int pt[4] = {-1, -1, -1, -1};
            if (mbl != mbr) pt[0] = point_on_edge(ex, ey, true);
            if (mbr != mtr) pt[1] = point_on_edge(ex + 1, ey, false);
            if (mtl != mtr) pt[2] = point_on_edge(ex, ey + 1, true);
            if (mbl != mtl) pt[3] = point_on_edge(ex, ey, false);

            int crossed = (pt[0] >= 0) + (pt[1] >= 0) + (pt[2] >= 0) + (pt[3] >= 0);
            if (crossed == 2) {
                int a = -1, b = -1;
                for (int k = 0; k < 4; ++k)
                    if (pt[k] >= 0) (a < 0 ? a : b) = pt[k];
                bd.segments.push_back({a, b});
            } else if (crossed == 4) {
                // Saddle: the phase matching the center average connects through
                // the middle, so segments wrap the two corners of the other phase.
                double center = 0.25 * (pbl + pbr + ptr + ptl);
                bool center_material = material(center);
                bool corner_mat[4] = {mbl, mbr, mtr, mtl};
                const int adj[4][2] = {{0, 3}, {0, 1}, {1, 2}, {2, 3}};   // corner -> edges
                for (int c = 0; c < 4; ++c) {
                    if (corner_mat[c] == center_material) continue;
                    bd.segments.push_back({pt[adj[c][0]], pt[adj[c][1]]});
                }
            }
        }
    }

    for (const auto& s : bd.segments) {
        double len = (bd.points[s.a].x - bd.points[s.b].x).norm();
        bd.points[s.a].length += 0.5 * len;
        bd.points[s.b].length += 0.5 * len;
    }

    // Non-designable boundary points: within an element size of a frozen node.
    std::vector<Vec2> frozen_xy;
    for (int n = 0; n < mesh.n_nodes(); ++n)
        if (f.frozen[n]) frozen_xy.push_back(mesh.node_coords(n));
    double reach = mesh.h_max();
    for (auto& p : bd.points) {
        p.designable = true;
        for (const auto& q : frozen_xy)
            if ((p.x - q).norm() <= reach) { p.designable = false; break; }
    }
    return bd;
}

DensityField compute_area_fractions(const LevelSetField& f, const GridMesh& mesh) {
    DensityField rho(mesh.n_elems(), 0.0);
    double cell_area = mesh.hx * mesh.hy;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        int ex = e % f.nx, ey = e / f.nx;
        double phi_c[4] = {f.phi[f.id(ex, ey)], f.phi[f.id(ex + 1, ey)],
                           f.phi[f.id(ex + 1, ey + 1)], f.phi[f.id(ex, ey + 1)]};
        Vec2 xy[4] = {Vec2(ex * f.hx, ey * f.hy), Vec2((ex + 1) * f.hx, ey * f.hy),
                      Vec2((ex + 1) * f.hx, (ey + 1) * f.hy), Vec2(ex * f.hx, (ey + 1) * f.hy)};
        bool m[4];
        int mcount = 0;
        for (int k = 0; k < 4; ++k) mcount += (m[k] = material(phi_c[k]));
        if (mcount == 4) { rho[e] = 1.0; continue; }
        if (mcount == 0) { rho[e] = 0.0; continue; }

        int crossed = 0;
        Vec2 cross[4];
        bool has_cross[4] = {false, false, false, false};
        for (int k = 0; k < 4; ++k) {
            int k2 = (k + 1) % 4;
            if (m[k] != m[k2]) {
                double t = crossing_t(phi_c[k], phi_c[k2]);
                cross[k] = xy[k] + t * (xy[k2] - xy[k]);
                has_cross[k] = true;
                ++crossed;
            }
        }

        double area = 0.0;
        double center = 0.25 * (phi_c[0] + phi_c[1] + phi_c[2] + phi_c[3]);
        if (crossed == 4 && !material(center)) {
            // Disconnected material corners: two triangles.
            for (int k = 0; k < 4; ++k) {
                if (!m[k]) continue;
                int prev = (k + 3) % 4;
                std::vector<Vec2> tri = {cross[prev], xy[k], cross[k]};
                area += polygon_area(tri);
            }
        } else {
            std::vector<Vec2> poly;
            for (int k = 0; k < 4; ++k) {
                if (m[k]) poly.push_back(xy[k]);
                if (has_cross[k]) poly.push_back(cross[k]);
            }
            area = polygon_area(poly);
        }
        rho[e] = std::clamp(area / cell_area, 0.0, 1.0);
    }
    return rho;
}

Eigen::VectorXd extend_velocity(const LevelSetField& f, const GridMesh& mesh,
                                const BoundaryDiscretization& boundary,
                                const Eigen::VectorXd& point_speeds) {
    if (point_speeds.size() != static_cast<Eigen::Index>(boundary.points.size()))
        throw std::invalid_argument("extend_velocity: speed count mismatch");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.n_nodes());
    if (boundary.points.empty()) return v;
    double band = kBandElements * mesh.h_max();
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        if (f.frozen[n] || std::abs(f.phi[n]) > band) continue;
        Vec2 p = mesh.node_coords(n);
        double best = std::numeric_limits<double>::max();
        int best_j = 0;
        for (size_t j = 0; j < boundary.points.size(); ++j) {
            double d = (boundary.points[j].x - p).squaredNorm();
            if (d < best) { best = d; best_j = static_cast<int>(j); }
        }
        v[n] = point_speeds[best_j];
    }
    return v;
}

LevelSetField advect(const LevelSetField& f, const GridMesh& mesh, const Eigen::VectorXd& speed,
                     double dt, double cfl) {
    if (speed.size() != f.phi.size()) throw std::invalid_argument("advect: speed field size mismatch");
    double vmax = speed.size() ? speed.cwiseAbs().maxCoeff() : 0.0;
    if (dt * vmax > cfl * mesh.h_min() * (1.0 + 1e-9))
        throw std::invalid_argument("advect: CFL limit violated; split the step");

    LevelSetField out = f;
    for (int j = 0; j <= f.ny; ++j) {
        for (int i = 0; i <= f.nx; ++i) {
            int n = f.id(i, j);
            if (f.frozen[n]) continue;
            double V = speed[n];
            if (V == 0.0) continue;
            double dmx = i > 0 ? (f.phi[n] - f.phi[f.id(i - 1, j)]) / f.hx : 0.0;
            double dpx = i < f.nx ? (f.phi[f.id(i + 1, j)] - f.phi[n]) / f.hx : 0.0;
            double dmy = j > 0 ? (f.phi[n] - f.phi[f.id(i, j - 1)]) / f.hy : 0.0;
            double dpy = j < f.ny ? (f.phi[f.id(i, j + 1)] - f.phi[n]) / f.hy : 0.0;
            double g;
            if (V > 0.0) {
                double a = std::max(dmx, 0.0), b = std::min(dpx, 0.0);
                double c = std::max(dmy, 0.0), d = std::min(dpy, 0.0);
                g = std::sqrt(a * a + b * b + c * c + d * d);
            } else {
                double a = std::min(dmx, 0.0), b = std::max(dpx, 0.0);
                double c = std::min(dmy, 0.0), d = std::max(dpy, 0.0);
                g = std::sqrt(a * a + b * b + c * c + d * d);
            }
            out.phi[n] = f.phi[n] - dt * V * g;
        }
    }
    return out;
}

LevelSetField reinitialize(const LevelSetField& f, const GridMesh& mesh) {
    LevelSetField out = f;
    bool any_neg = false, any_pos = false;
    for (int n = 0; n < f.phi.size(); ++n) (f.phi[n] < 0.0 ? any_neg : any_pos) = true;

    if (!any_neg || !any_pos) {
        double sign = any_pos ? 1.0 : -1.0;
        for (int n = 0; n < mesh.n_nodes(); ++n)
            out.phi[n] = sign * frame_distance(mesh, mesh.node_coords(n));
        for (int n = 0; n < mesh.n_nodes(); ++n)
            if (out.frozen[n]) out.phi[n] = std::max(out.phi[n], out.floor_value);
        return out;
    }

    BoundaryDiscretization bd = extract_boundary(f, mesh);
    if (bd.segments.empty()) return out;   // degenerate: signs but no resolvable contour

    double band = kBandElements * mesh.h_max();
    int nn = mesh.n_nodes();
    std::vector<uint8_t> accepted(nn, 0);
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(nn, std::numeric_limits<double>::max());

    // Nodes of cut cells must seed the march; band nodes get exact distances.
    std::vector<uint8_t> needs_exact(nn, 0);
    for (int ey = 0; ey < f.ny; ++ey)
        for (int ex = 0; ex < f.nx; ++ex) {
            bool mm[4] = {material(f.phi[f.id(ex, ey)]), material(f.phi[f.id(ex + 1, ey)]),
                          material(f.phi[f.id(ex + 1, ey + 1)]), material(f.phi[f.id(ex, ey + 1)])};
            if (mm[0] == mm[1] && mm[1] == mm[2] && mm[2] == mm[3]) continue;
            needs_exact[f.id(ex, ey)] = needs_exact[f.id(ex + 1, ey)] = 1;
            needs_exact[f.id(ex + 1, ey + 1)] = needs_exact[f.id(ex, ey + 1)] = 1;
        }
    for (int n = 0; n < nn; ++n)
        if (std::abs(f.phi[n]) <= band) needs_exact[n] = 1;

    for (int n = 0; n < nn; ++n) {
        if (!needs_exact[n]) continue;
        Vec2 p = mesh.node_coords(n);
        double best = std::numeric_limits<double>::max();
        for (const auto& s : bd.segments)
            best = std::min(best, point_segment_distance(p, bd.points[s.a].x, bd.points[s.b].x));
        dist[n] = best;
        accepted[n] = 1;
    }

    // Fast marching outside the band, per sign so the two sides stay independent.
    auto side = [&](int n) { return material(f.phi[n]); };
    for (int pass = 0; pass < 2; ++pass) {
        bool want = pass == 0;
        using Entry = std::pair<double, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        std::vector<uint8_t> done(nn, 0);

        auto update = [&](int i, int j) -> double {
            int n = f.id(i, j);
            double ax = std::numeric_limits<double>::max();
            double ay = std::numeric_limits<double>::max();
            if (i > 0 && done[f.id(i - 1, j)]) ax = std::min(ax, dist[f.id(i - 1, j)]);
            if (i < f.nx && done[f.id(i + 1, j)]) ax = std::min(ax, dist[f.id(i + 1, j)]);
            if (j > 0 && done[f.id(i, j - 1)]) ay = std::min(ay, dist[f.id(i, j - 1)]);
            if (j < f.ny && done[f.id(i, j + 1)]) ay = std::min(ay, dist[f.id(i, j + 1)]);
            bool hx_ok = ax != std::numeric_limits<double>::max();
            bool hy_ok = ay != std::numeric_limits<double>::max();
            if (hx_ok && hy_ok) {
                double A = 1.0 / (f.hx * f.hx) + 1.0 / (f.hy * f.hy);
                double B = -2.0 * (ax / (f.hx * f.hx) + ay / (f.hy * f.hy));
                double C = ax * ax / (f.hx * f.hx) + ay * ay / (f.hy * f.hy) - 1.0;
                double disc = B * B - 4.0 * A * C;
                if (disc >= 0.0) {
                    double d = (-B + std::sqrt(disc)) / (2.0 * A);
                    if (d >= std::max(ax, ay)) return d;
                }
                // Degenerate: use the closer axis alone.
                if (ax < ay) hy_ok = false;
                else hx_ok = false;
            }
            if (hx_ok) return ax + f.hx;
            if (hy_ok) return ay + f.hy;
            return std::numeric_limits<double>::max();
        };

        for (int n = 0; n < nn; ++n)
            if (accepted[n] && side(n) == want) {
                done[n] = 1;
                heap.emplace(dist[n], n);
            }
        while (!heap.empty()) {
            auto [d, n] = heap.top();
            heap.pop();
            if (d > dist[n]) continue;
            done[n] = 1;
            int i = n % (f.nx + 1), j = n / (f.nx + 1);
            const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                int ii = i + di[k], jj = j + dj[k];
                if (ii < 0 || ii > f.nx || jj < 0 || jj > f.ny) continue;
                int nb = f.id(ii, jj);
                if (accepted[nb] || side(nb) != want || done[nb]) continue;
                double nd = update(ii, jj);
                if (nd < dist[nb]) {
                    dist[nb] = nd;
                    heap.emplace(nd, nb);
                }
            }
        }
    }

    for (int n = 0; n < nn; ++n) {
        double d = dist[n] == std::numeric_limits<double>::max() ? band : dist[n];
        out.phi[n] = side(n) ? d : -d;
    }
    for (int n = 0; n < nn; ++n)
        if (out.frozen[n]) out.phi[n] = std::max(out.phi[n], out.floor_value);
    return out;
}

MoveLimits compute_move_limits(const LevelSetField& f, const GridMesh& mesh,
                               const BoundaryDiscretization& boundary, double cfl) {
    int np = static_cast<int>(boundary.points.size());
    MoveLimits ml;
    ml.zmin.resize(np);
    ml.zmax.resize(np);
    double zcfl = cfl * mesh.h_min();
    std::vector<Vec2> frozen_xy;
    for (int n = 0; n < mesh.n_nodes(); ++n)
        if (f.frozen[n]) frozen_xy.push_back(mesh.node_coords(n));
    for (int j = 0; j < np; ++j) {
        double cap = zcfl;
        for (const auto& q : frozen_xy)
            cap = std::min(cap, (boundary.points[j].x - q).norm());
        ml.zmax[j] = std::max(cap, 0.0);
        ml.zmin[j] = -zcfl;
    }
    return ml;
}

} // namespace topopt

#pragma once

#include <string>
#include <vector>

#include "topopt/config.hpp"
#include "topopt/optimizer.hpp"

namespace topopt {

// Every writer stages the full body to "<path>.partial" and renames it into
// place on success, so an interrupted run never leaves a truncated file under
// the final name; the stale .partial marks the failure.

// One row per optimizer iteration. Floating-point columns carry 17
// significant digits, so parsing them back reproduces the recorded doubles.
void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history);

// Legacy ASCII VTK (version 3.0) structured-points snapshot: nodal phi as
// POINT_DATA, per-element rho as CELL_DATA.
void write_vtk_snapshot(const std::string& path, const LevelSetField& phi,
                        const DensityField& rho);

// Zero-contour plot of the final design. A half model (mirror_x) is drawn
// together with its reflection about x = 0.
void write_final_svg(const std::string& path, const BoundaryDiscretization& boundary,
                     const GridMesh& mesh, bool mirror_x);

// Echo of every parameter the run actually used, preceded by the given
// comment lines; the file parses back into an identical configuration.
void write_config_resolved(const std::string& path, const Config& cfg,
                           const std::vector<std::string>& notes = {});

} // namespace topopt

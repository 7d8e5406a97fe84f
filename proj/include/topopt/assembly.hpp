#pragma once

#include <optional>

#include "topopt/element.hpp"

namespace topopt {

// Per-element thermal loading, piecewise constant.
using ThermalField = std::vector<double>;   // alpha*dT per element
using DensityField = std::vector<double>;   // area fraction per element

struct GlobalSystem {
    double energy = 0.0;
    Eigen::VectorXd fint;   // full-length internal force
    SpMat K;                // tangent on free dofs (built when requested)
};

// Assembles energy, internal force, and (optionally) the reduced tangent at
// state u_full. Element contributions are scaled by the energy interpolation
// and the ersatz density floor. Deterministic for any thread count.
GlobalSystem assemble(const GridMesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u_full,
                      const ThermalField& alpha_dt, const DensityField& rho,
                      const MaterialParams& mat, bool want_tangent);

// Linear-elastic reduced stiffness with the same density scaling (reference
// path for tests and the small-strain limit).
SpMat assemble_linear(const GridMesh& mesh, const DofMap& dofs, const DensityField& rho,
                      const MaterialParams& mat);

} // namespace topopt

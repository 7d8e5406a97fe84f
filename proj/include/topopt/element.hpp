#pragma once

#include "topopt/grid.hpp"
#include "topopt/material.hpp"

namespace topopt {

// Energy, nodal force, and stiffness of one element (8 dofs, ordered
// [n0x n0y n1x n1y n2x n2y n3x n3y]).
struct ElementQuantities {
    double energy = 0.0;
    Vec8 force = Vec8::Zero();
    Mat8 stiffness = Mat8::Zero();
};

// Plane-strain linear-elastic element stiffness for the fictitious energy
// W^L = 1/2 eps : C^L : eps (no thermal strain). Constant over the mesh.
Mat8 linear_element_stiffness(const std::array<QuadraturePoint, 4>& quad, const MaterialParams& mat);

// Hyperelastic element quantities at nodal displacement v (thermal gradient
// applied), integrated with the 2x2 rule.
ElementQuantities hyperelastic_element(const std::array<QuadraturePoint, 4>& quad, const Vec8& v,
                                       const Mat2& Fth, const MaterialParams& mat, bool want_stiffness);

// Energy-interpolated element response:
//   What(u) = W(gamma u) - W^L(gamma u) + W^L(u)
// computed as W(gamma u) + (1 - gamma^2) W^L(u) so the fictitious terms cancel
// exactly at gamma = 1. Derivatives are exact in u.
ElementQuantities interpolated_element_energy(const std::array<QuadraturePoint, 4>& quad, const Vec8& u,
                                              double gamma, const Mat2& Fth, const MaterialParams& mat,
                                              const Mat8& k_linear, bool want_stiffness);

// Ersatz scaling: multiplies all quantities by max(rho_e, weak_factor).
void ersatz_scale(ElementQuantities& q, double rho_e, double weak_factor);

} // namespace topopt

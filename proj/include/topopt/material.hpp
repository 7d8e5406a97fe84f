#pragma once

#include "topopt/types.hpp"

namespace topopt {

struct MaterialParams {
    double lambda = 1.0;        // Lame parameters of the compressible neo-Hookean solid
    double mu = 0.4;
    double weak_factor = 1e-6;  // ersatz floor for void elements
    double beta = 500.0;        // Heaviside projection sharpness
    double rho0 = 0.01;         // Heaviside projection threshold
};

// State at one quadrature point for a given total F and thermal F^th.
// The deformation splits multiplicatively, F = F^m F^th, and the stored
// energy is a plane-strain compressible neo-Hookean function of F^m with a
// unit out-of-plane mechanical stretch:
//   W = lambda/2 ln(J)^2 + mu/2 (tr C + 1 - 3) - mu ln(J),  J = det F^m.
struct MaterialPointState {
    Mat2 F;
    Mat2 Fth;
    Mat2 Fm;
    double J = 1.0;     // det(F^m)
    double W = 0.0;     // energy density (per undeformed volume)
    Mat2 P;             // total first Piola-Kirchhoff stress, dW/dF
    Mat2 Sm;            // second PK stress on the intermediate configuration
    Mat3 C_voigt;       // d S^m / d E^m in Voigt order [11, 22, 12]
};

// Isotropic thermal deformation (1 + a dT) I. Rejects a dT <= -1.
Mat2 thermal_gradient(double alpha_dT);

// Energy, stresses, and tangent moduli at one point. Throws
// InvertedElementError when det(F^m) <= 0.
MaterialPointState mechanical_response(const Mat2& F, const Mat2& Fth, const MaterialParams& mat);

// Smoothed Heaviside projection of a density in [0, 1]; gamma(0) = 0 and
// gamma(1) = 1 exactly.
double heaviside_projection(double rho, double beta, double rho0);

} // namespace topopt

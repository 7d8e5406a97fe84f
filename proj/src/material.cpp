#include "topopt/material.hpp"

#include <cmath>

namespace topopt {

Mat2 thermal_gradient(double alpha_dT) {
    if (alpha_dT <= -1.0)
        throw std::invalid_argument("thermal_gradient: alpha*dT <= -1 inverts the thermal stretch");
    return (1.0 + alpha_dT) * Mat2::Identity();
}

MaterialPointState mechanical_response(const Mat2& F, const Mat2& Fth, const MaterialParams& mat) {
    MaterialPointState s;
    s.F = F;
    s.Fth = Fth;
    Mat2 G = Fth.inverse();
    s.Fm = F * G;
    s.J = s.Fm.determinant();
    if (!(s.J > 0.0)) throw InvertedElementError("mechanical response: det(F^m) <= 0");

    Mat2 C = s.Fm.transpose() * s.Fm;
    Mat2 Ci = C.inverse();
    double lnJ = std::log(s.J);
    double la = mat.lambda, mu = mat.mu;

    s.W = 0.5 * la * lnJ * lnJ + 0.5 * mu * (C.trace() + 1.0 - 3.0) - mu * lnJ;
    s.Sm = la * lnJ * Ci + mu * (Mat2::Identity() - Ci);
    // P = dW/dF via the chain rule through F^m = F (F^th)^-1.
    s.P = (s.Fm * s.Sm) * G.transpose();

    // dS/dE = lambda Ci x Ci + (mu - lambda lnJ)(Ci_ik Ci_jl + Ci_il Ci_jk),
    // reduced to the in-plane Voigt block [11, 22, 12].
    const int vi[3] = {0, 1, 0};
    const int vj[3] = {0, 1, 1};
    double c = mu - la * lnJ;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            int i = vi[a], j = vj[a], k = vi[b], l = vj[b];
            s.C_voigt(a, b) = la * Ci(i, j) * Ci(k, l) + c * (Ci(i, k) * Ci(j, l) + Ci(i, l) * Ci(j, k));
        }
    }
    return s;
}

double heaviside_projection(double rho, double beta, double rho0) {
    double n = std::tanh(beta * rho0) + std::tanh(beta * (rho - rho0));
    double d = std::tanh(beta * rho0) + std::tanh(beta * (1.0 - rho0));
    return n / d;
}

} // namespace topopt

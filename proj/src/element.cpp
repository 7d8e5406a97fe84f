#include "topopt/element.hpp"

namespace topopt {

Mat8 linear_element_stiffness(const std::array<QuadraturePoint, 4>& quad, const MaterialParams& mat) {
    Mat3 C = Mat3::Zero();
    C(0, 0) = C(1, 1) = mat.lambda + 2.0 * mat.mu;
    C(0, 1) = C(1, 0) = mat.lambda;
    C(2, 2) = mat.mu;
    Mat8 K = Mat8::Zero();
    for (const auto& qp : quad) {
        Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
        for (int a = 0; a < 4; ++a) {
            B(0, 2 * a) = qp.B[a].x();
            B(1, 2 * a + 1) = qp.B[a].y();
            B(2, 2 * a) = qp.B[a].y();
            B(2, 2 * a + 1) = qp.B[a].x();
        }
        K += qp.weight * B.transpose() * C * B;
    }
    return K;
}

ElementQuantities hyperelastic_element(const std::array<QuadraturePoint, 4>& quad, const Vec8& v,
                                       const Mat2& Fth, const MaterialParams& mat, bool want_stiffness) {
    ElementQuantities out;
    Mat2 G = Fth.inverse();
    for (const auto& qp : quad) {
        Mat2 F = Mat2::Identity();
        for (int a = 0; a < 4; ++a) {
            F(0, 0) += v[2 * a] * qp.B[a].x();
            F(0, 1) += v[2 * a] * qp.B[a].y();
            F(1, 0) += v[2 * a + 1] * qp.B[a].x();
            F(1, 1) += v[2 * a + 1] * qp.B[a].y();
        }
        MaterialPointState st = mechanical_response(F, Fth, mat);
        out.energy += qp.weight * st.W;
        for (int a = 0; a < 4; ++a) {
            out.force[2 * a] += qp.weight * (st.P(0, 0) * qp.B[a].x() + st.P(0, 1) * qp.B[a].y());
            out.force[2 * a + 1] += qp.weight * (st.P(1, 0) * qp.B[a].x() + st.P(1, 1) * qp.B[a].y());
        }
        if (!want_stiffness) continue;

        // Thermally mapped nodal gradients g^a = G^T B^a.
        std::array<Vec2, 4> g;
        for (int a = 0; a < 4; ++a) g[a] = G.transpose() * qp.B[a];
        // Voigt rows e[(a,i)] of the material operator: sym(g_l Fm_im).
        Eigen::Matrix<double, 8, 3> e;
        for (int a = 0; a < 4; ++a) {
            for (int i = 0; i < 2; ++i) {
                double e11 = g[a].x() * st.Fm(i, 0);
                double e22 = g[a].y() * st.Fm(i, 1);
                double e12 = 0.5 * (g[a].x() * st.Fm(i, 1) + g[a].y() * st.Fm(i, 0));
                e.row(2 * a + i) << e11, e22, 2.0 * e12;
            }
        }
        Mat8 Km = qp.weight * e * st.C_voigt * e.transpose();
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double geo = qp.weight * g[a].dot(st.Sm * g[b]);
                Km(2 * a, 2 * b) += geo;
                Km(2 * a + 1, 2 * b + 1) += geo;
            }
        out.stiffness += Km;
    }
    return out;
}

ElementQuantities interpolated_element_energy(const std::array<QuadraturePoint, 4>& quad, const Vec8& u,
                                              double gamma, const Mat2& Fth, const MaterialParams& mat,
                                              const Mat8& k_linear, bool want_stiffness) {
    Vec8 v = gamma * u;
    ElementQuantities nl = hyperelastic_element(quad, v, Fth, mat, want_stiffness);
    ElementQuantities out;
    double lin = 1.0 - gamma * gamma;
    out.energy = nl.energy + lin * (0.5 * u.dot(k_linear * u));
    out.force = gamma * nl.force + lin * (k_linear * u);
    if (want_stiffness) out.stiffness = gamma * gamma * nl.stiffness + lin * k_linear;
    return out;
}

void ersatz_scale(ElementQuantities& q, double rho_e, double weak_factor) {
    double s = rho_e > weak_factor ? rho_e : weak_factor;
    q.energy *= s;
    q.force *= s;
    q.stiffness *= s;
}

} // namespace topopt

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>

namespace topopt {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using SpMat = Eigen::SparseMatrix<double>;

// Thrown when det(F^m) <= 0 at a quadrature point; the increment controller
// treats it like a failed Newton increment and halves the step.
struct InvertedElementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace topopt

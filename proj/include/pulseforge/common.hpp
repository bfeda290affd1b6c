#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace pulseforge {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// thrown when the derivative of the principal log branch is undefined
// (an eigenvalue gap of the argument sits at the 2*pi wraparound)
struct DegenerateBranchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// exp(z) - 1 without cancellation for small |z|
inline Complex expm1c(Complex z) {
  const double x = z.real(), y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

}  // namespace pulseforge

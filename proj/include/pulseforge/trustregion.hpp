#pragma once

#include "pulseforge/common.hpp"

namespace pulseforge {

inline constexpr double kRadiusMin = 1e-12;
inline constexpr double kRadiusMax = 1e6;

struct SubproblemSolution {
  RVector p;
  double lambda = 0.0;      // multiplier, <= 0, zero iff interior
  double model_value = 0.0; // quadratic model at p (for newton_step: ||Jp+L||^2)
  bool on_boundary = false;
};

// minimize x^T A x + 2 g^T x over ||x|| <= r for symmetric PSD A
SubproblemSolution solve_tr_subproblem(const RMatrix& a, const RVector& g,
                                       double r);

// minimize ||J p + L||^2 over ||p|| <= r; underdetermined systems (more
// parameters than residual coordinates) are reduced to residual space via
// p = J^T y before solving
SubproblemSolution newton_step(const RMatrix& j, const RVector& l, double r);

struct RadiusState {
  double r = 1.0;
  double last_ratio = 0.0;  // model_decrease / |actual_decrease|
  bool accepted = false;
};

// accept iff the true squared error decreased; adapt r so the relative model
// error (model_decrease/actual_decrease - 1) tracks the 0.2..0.3 band:
// below the band the model is still trustworthy (r doubles), above it r
// halves, rejected steps quarter r; r clamps to [kRadiusMin, kRadiusMax]
RadiusState adapt_radius(const RadiusState& state, double model_decrease,
                         double actual_decrease);

}  // namespace pulseforge

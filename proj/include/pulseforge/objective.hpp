#pragma once

#include "pulseforge/propagation.hpp"

namespace pulseforge {

// matrix-log residual of the synthesis problem at the endpoint propagator
struct Residual {
  RVector coords;    // projected su coordinates of log(V^+ U(T))
  CMatrix w;         // V^+ U(T)
  EigenFrame frame;  // frame of w, reused by the Jacobian
  bool branch_tie = false;  // an eigenphase sat within 1e-12 of +pi

  double geodesic_error() const { return coords.norm(); }
};

Residual residual(const TargetSpec& target, const PropagationResult& prop);

// phase-invariant Hilbert-Schmidt gate error sqrt((1 - |tr(V^+ U)|/N)/2)
double gate_error_hs(const CMatrix& u, const CMatrix& v);

struct JacobianData {
  RMatrix j;  // residual_dim x (R*K), columns control-major by (r, k)
  Residual res;
};

enum class JacobianMethod { Auto, ClosedForm, Quadrature };

// derivative of the residual coordinates with respect to every pulse
// parameter; ClosedForm requires a pwc propagation (frames present)
JacobianData jacobian(const ControlSystem& sys, const PulseBasis& basis,
                      const RVector& a, const TargetSpec& target,
                      const PropagationResult& prop,
                      JacobianMethod method = JacobianMethod::Auto);

// norm of the minimum-norm parameter move that cancels the residual to first
// order; +infinity when the residual has a component outside the range of J
double ill_conditioning(const RMatrix& j, const RVector& coords);
double ill_conditioning(const JacobianData& jd);

}  // namespace pulseforge

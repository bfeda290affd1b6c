#pragma once

#include <vector>

#include "pulseforge/model.hpp"

namespace pulseforge {

// eigendecomposition of one constant step Hamiltonian (real spectrum)
struct StepFrame {
  RVector values;
  CMatrix vectors;
};

struct PropagationResult {
  RVector times;                    // S+1 uniform grid points on [0, T]
  std::vector<CMatrix> step;        // S per-step propagators
  std::vector<CMatrix> cumulative;  // S+1 products, cumulative[0] = I
  std::vector<CMatrix> midpoint;    // S interpolated midpoint propagators
  std::vector<StepFrame> frames;    // per-step Hamiltonian frames (pwc mode)

  int steps() const { return int(step.size()); }
  const CMatrix& final_propagator() const { return cumulative.back(); }
};

// exact stepping for a piecewise-constant pulse, one step per interval
PropagationResult propagate_pwc(const ControlSystem& sys, const PulseBasis& basis,
                                const RVector& a);

// fourth-order commutator-corrected exponential stepping with S uniform steps
PropagationResult propagate_magnus4(const ControlSystem& sys,
                                    const PulseBasis& basis, const RVector& a,
                                    int S);

// propagate with the scheme implied by the basis: exact stepping for
// piecewise-constant pulses, otherwise magnus stepping with S = 4K
PropagationResult propagate(const ControlSystem& sys, const PulseBasis& basis,
                            const RVector& a);

// cubic two-point interpolation of the propagator at the step midpoint from
// endpoint values and endpoint Hamiltonians (no extra exponentials)
CMatrix midpoint_interpolate(const CMatrix& u0, const CMatrix& h0,
                             const CMatrix& u1, const CMatrix& h1, double h);

// composite quadrature with nodes at step endpoints and midpoints, weights
// h*(1/6, 2/3, 1/6); exact for cubics
template <class F>
double composite_lobatto(F&& f, double a, double b, int steps) {
  if (steps < 1) throw std::invalid_argument("composite_lobatto: steps >= 1");
  const double h = (b - a) / steps;
  double acc = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double t0 = a + s * h;
    acc += h * (f(t0) / 6.0 + 2.0 * f(t0 + 0.5 * h) / 3.0 + f(t0 + h) / 6.0);
  }
  return acc;
}

namespace detail {

// exponential of an anti-Hermitian matrix via the Hermitian eigenproblem
CMatrix exp_antihermitian(const CMatrix& omega);

// magnus stepping driven by an arbitrary Hamiltonian evaluator on [0, T];
// at_node(t) samples interior quadrature nodes, at_edge(t, interior) samples
// step endpoints (the hint marks which side of a jump the step owns)
template <class HNode, class HEdge>
PropagationResult magnus4_general(HNode&& at_node, HEdge&& at_edge,
                                  Eigen::Index n, double T, int S) {
  if (S < 1) throw std::invalid_argument("magnus4_general: S >= 1 required");
  const double h = T / S;
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const Complex mi(0, -1);

  PropagationResult out;
  out.times = RVector::NullaryExpr(
      S + 1, [&](Eigen::Index s) { return T * double(s) / S; });
  out.step.reserve(S);
  out.midpoint.reserve(S);
  out.cumulative.reserve(S + 1);
  out.cumulative.push_back(CMatrix::Identity(n, n));

  for (int s = 0; s < S; ++s) {
    const double t0 = T * double(s) / S;
    const double t1 = T * double(s + 1) / S;
    const CMatrix a1 = mi * at_node(t0 + c1 * h);
    const CMatrix a2 = mi * at_node(t0 + c2 * h);
    const CMatrix omega = (h / 2.0) * (a1 + a2) +
                          (std::sqrt(3.0) * h * h / 12.0) * (a2 * a1 - a1 * a2);
    out.step.push_back(exp_antihermitian(omega));
    const CMatrix h0 = at_edge(t0, t1);
    const CMatrix h1 = at_edge(t1, t0);
    const CMatrix next = out.step.back() * out.cumulative.back();
    out.midpoint.push_back(
        midpoint_interpolate(out.cumulative.back(), h0, next, h1, h));
    out.cumulative.push_back(next);
  }
  return out;
}

template <class HNode>
PropagationResult magnus4_general(HNode&& at_node, Eigen::Index n, double T,
                                  int S) {
  return magnus4_general(
      at_node, [&](double t, double) { return at_node(t); }, n, T, S);
}

}  // namespace detail

}  // namespace pulseforge

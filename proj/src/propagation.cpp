#include "pulseforge/propagation.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace pulseforge {

namespace {

CMatrix hamiltonian_at(const ControlSystem& sys, const PulseBasis& basis,
                       const RVector& a, double t) {
  const RVector f = synthesize(basis, a, t);
  CMatrix h = sys.h0;
  for (std::size_t r = 0; r < sys.controls.size(); ++r)
    h += f[Eigen::Index(r)] * sys.controls[r];
  return h;
}

// step-endpoint evaluation: piecewise-constant pulses jump exactly at the
// grid, so move the time slightly into the owning step before sampling
double into_step(const PulseBasis& basis, double t, double interior) {
  if (basis.kind() != BasisKind::PiecewiseConstant) return t;
  const double delta = 1e-9 * basis.horizon() / basis.size();
  return interior > t ? t + delta : t - delta;
}

}  // namespace

namespace detail {

CMatrix exp_antihermitian(const CMatrix& omega) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(Complex(0, 1) * omega);
  const CVector phase =
      (Complex(0, -1) * es.eigenvalues()).array().exp().matrix();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

PropagationResult propagate_pwc(const ControlSystem& sys,
                                const PulseBasis& basis, const RVector& a) {
  if (basis.kind() != BasisKind::PiecewiseConstant)
    throw std::invalid_argument("propagate_pwc: piecewise-constant basis required");
  const int K = basis.size();
  const Eigen::Index R = sys.num_controls();
  if (a.size() != R * K)
    throw std::invalid_argument("propagate_pwc: coefficient length mismatch");
  const Eigen::Index n = sys.dim();
  const double T = basis.horizon();
  const double h = T / K;

  PropagationResult out;
  out.times = RVector::NullaryExpr(
      K + 1, [&](Eigen::Index s) { return T * double(s) / K; });
  out.step.reserve(K);
  out.midpoint.reserve(K);
  out.frames.reserve(K);
  out.cumulative.reserve(K + 1);
  out.cumulative.push_back(CMatrix::Identity(n, n));

  for (int k = 0; k < K; ++k) {
    CMatrix hk = sys.h0;
    for (Eigen::Index r = 0; r < R; ++r) hk += a[r * K + k] * sys.controls[r];
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hk);
    const RVector& mu = es.eigenvalues();
    const CMatrix& lam = es.eigenvectors();
    const CVector full = (Complex(0, -h) * mu).array().exp().matrix();
    const CVector half = (Complex(0, -0.5 * h) * mu).array().exp().matrix();
    out.step.push_back(lam * full.asDiagonal() * lam.adjoint());
    out.midpoint.push_back(lam * half.asDiagonal() * lam.adjoint() *
                           out.cumulative.back());
    out.cumulative.push_back(out.step.back() * out.cumulative.back());
    out.frames.push_back({mu, lam});
  }
  return out;
}

PropagationResult propagate_magnus4(const ControlSystem& sys,
                                    const PulseBasis& basis, const RVector& a,
                                    int S) {
  if (S < 1) throw std::invalid_argument("propagate_magnus4: S >= 1 required");
  return detail::magnus4_general(
      [&](double t) { return hamiltonian_at(sys, basis, a, t); },
      [&](double t, double interior) {
        return hamiltonian_at(sys, basis, a, into_step(basis, t, interior));
      },
      sys.dim(), basis.horizon(), S);
}

PropagationResult propagate(const ControlSystem& sys, const PulseBasis& basis,
                            const RVector& a) {
  if (basis.kind() == BasisKind::PiecewiseConstant)
    return propagate_pwc(sys, basis, a);
  return propagate_magnus4(sys, basis, a, 4 * basis.size());
}

CMatrix midpoint_interpolate(const CMatrix& u0, const CMatrix& h0,
                             const CMatrix& u1, const CMatrix& h1, double h) {
  const Complex mi(0, -1);
  return 0.5 * (u0 + u1) + (h / 8.0) * (mi * h0 * u0 - mi * h1 * u1);
}

}  // namespace pulseforge

#include "pulseforge/objective.hpp"

#include <Eigen/Eigenvalues>
#include <limits>
#include <stdexcept>

namespace pulseforge {

namespace {

// one-sided basis sampling at quadrature-step endpoints: piecewise-constant
// pulses jump exactly on the grid, so nudge the time into the owning step
double into_step(const PulseBasis& basis, double t, double interior) {
  if (basis.kind() != BasisKind::PiecewiseConstant) return t;
  const double delta = 1e-9 * basis.horizon() / basis.size();
  return interior > t ? t + delta : t - delta;
}

RVector column_from_integral(const TargetSpec& target, const Residual& res,
                             const CMatrix& integral) {
  const CMatrix d = detail::dlog_premultiplied(res.frame, integral);
  return target.project(su_project(AntiHermitian(d)));
}

// exact per-interval interaction-picture integrals in the step eigenframe
RMatrix jacobian_closed_form(const ControlSystem& sys, const PulseBasis& basis,
                             const TargetSpec& target,
                             const PropagationResult& prop,
                             const Residual& res) {
  const int K = basis.size();
  const Eigen::Index R = sys.num_controls();
  const Eigen::Index n = sys.dim();
  const double h = basis.horizon() / K;
  const Complex mi(0, -1);

  RMatrix j(target.residual_dim(), Eigen::Index(R) * K);
  for (int k = 0; k < K; ++k) {
    const StepFrame& f = prop.frames[std::size_t(k)];
    const CMatrix gtilde = gamma_matrix(mi * h * f.values.cast<Complex>());
    const CMatrix phi = f.vectors.adjoint() * prop.cumulative[std::size_t(k)];
    for (Eigen::Index r = 0; r < R; ++r) {
      const CMatrix g = f.vectors.adjoint() * (mi * sys.controls[r]) * f.vectors;
      const CMatrix inner = h * gtilde.cwiseProduct(g);
      j.col(r * K + k) =
          column_from_integral(target, res, phi.adjoint() * inner * phi);
    }
  }
  return j;
}

// composite three-point quadrature of the interaction-picture integrand over
// the propagation grid, endpoint evaluations shared between adjacent steps
RMatrix jacobian_quadrature(const ControlSystem& sys, const PulseBasis& basis,
                            const TargetSpec& target,
                            const PropagationResult& prop, const Residual& res) {
  const int K = basis.size();
  const Eigen::Index R = sys.num_controls();
  const Eigen::Index n = sys.dim();
  const int S = prop.steps();
  const double h = basis.horizon() / S;
  const Complex mi(0, -1);

  const std::size_t nr = std::size_t(R);
  std::vector<CMatrix> acc(nr * K, CMatrix::Zero(n, n));
  std::vector<CMatrix> g_left(nr), g_mid(nr), g_right(nr);
  auto conjugate = [&](const CMatrix& u, std::vector<CMatrix>& dst) {
    for (Eigen::Index r = 0; r < R; ++r)
      dst[std::size_t(r)] = u.adjoint() * (mi * sys.controls[r]) * u;
  };

  conjugate(prop.cumulative[0], g_left);
  for (int s = 0; s < S; ++s) {
    const double t0 = prop.times[s];
    const double t1 = prop.times[s + 1];
    const double tm = 0.5 * (t0 + t1);
    conjugate(prop.midpoint[std::size_t(s)], g_mid);
    conjugate(prop.cumulative[std::size_t(s) + 1], g_right);
    for (int k = 0; k < K; ++k) {
      const double bl = basis.eval(k, into_step(basis, t0, t1));
      const double bm = basis.eval(k, tm);
      const double br = basis.eval(k, into_step(basis, t1, t0));
      if (bl == 0.0 && bm == 0.0 && br == 0.0) continue;
      for (Eigen::Index r = 0; r < R; ++r)
        acc[std::size_t(r * K + k)] +=
            h * ((bl / 6.0) * g_left[std::size_t(r)] +
                 (2.0 * bm / 3.0) * g_mid[std::size_t(r)] +
                 (br / 6.0) * g_right[std::size_t(r)]);
    }
    std::swap(g_left, g_right);
  }

  RMatrix j(target.residual_dim(), Eigen::Index(R) * K);
  for (Eigen::Index c = 0; c < j.cols(); ++c)
    j.col(c) = column_from_integral(target, res, acc[std::size_t(c)]);
  return j;
}

}  // namespace

Residual residual(const TargetSpec& target, const PropagationResult& prop) {
  const CMatrix w =
      target.gate().matrix().adjoint() * prop.final_propagator();
  auto lf = matrix_log_unitary(UnitaryMatrix(w));
  Residual out;
  out.w = w;
  out.frame = std::move(lf.second);
  out.coords = target.project(su_project(lf.first));
  const RVector phases = detail::frame_phases(out.frame);
  out.branch_tie = ((phases.array() - kPi).abs() < 1e-12).any() ||
                   ((phases.array() + kPi).abs() < 1e-12).any();
  return out;
}

double gate_error_hs(const CMatrix& u, const CMatrix& v) {
  if (u.rows() != u.cols() || u.rows() != v.rows() || v.rows() != v.cols())
    throw std::invalid_argument("gate_error_hs: square same-size inputs required");
  const double overlap =
      std::abs((v.adjoint() * u).trace()) / double(u.rows());
  return std::sqrt(std::max(0.0, (1.0 - overlap) / 2.0));
}

JacobianData jacobian(const ControlSystem& sys, const PulseBasis& basis,
                      const RVector& a, const TargetSpec& target,
                      const PropagationResult& prop, JacobianMethod method) {
  const int K = basis.size();
  const Eigen::Index R = sys.num_controls();
  if (a.size() != R * K)
    throw std::invalid_argument("jacobian: coefficient length mismatch");
  if (target.gate().dim() != sys.dim())
    throw std::invalid_argument("jacobian: target dimension mismatch");

  const bool pwc_exact = basis.kind() == BasisKind::PiecewiseConstant &&
                         int(prop.frames.size()) == K && prop.steps() == K;
  if (method == JacobianMethod::Auto)
    method = pwc_exact ? JacobianMethod::ClosedForm : JacobianMethod::Quadrature;
  if (method == JacobianMethod::ClosedForm && !pwc_exact)
    throw std::invalid_argument(
        "jacobian: closed form needs an exact piecewise-constant propagation");

  JacobianData out{RMatrix(), residual(target, prop)};
  out.j = method == JacobianMethod::ClosedForm
              ? jacobian_closed_form(sys, basis, target, prop, out.res)
              : jacobian_quadrature(sys, basis, target, prop, out.res);
  return out;
}

double ill_conditioning(const RMatrix& j, const RVector& coords) {
  const Eigen::Index m = j.rows();
  if (coords.size() != m)
    throw std::invalid_argument("ill_conditioning: residual length mismatch");
  const double lnorm = coords.norm();
  if (lnorm == 0.0) return 0.0;

  const RMatrix jjt = j * j.transpose();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(jjt);
  const double floor = 1e-14 * jjt.trace() / double(m);
  const RVector y = es.eigenvectors().transpose() * coords;

  double acc = 0.0, outside = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (es.eigenvalues()[i] > floor)
      acc += y[i] * y[i] / es.eigenvalues()[i];
    else
      outside += y[i] * y[i];
  }
  if (std::sqrt(outside) > 1e-6 * lnorm)
    return std::numeric_limits<double>::infinity();
  return std::sqrt(acc);
}

double ill_conditioning(const JacobianData& jd) {
  return ill_conditioning(jd.j, jd.res.coords);
}

}  // namespace pulseforge

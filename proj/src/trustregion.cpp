#include "pulseforge/trustregion.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pulseforge {

namespace {

struct CoreSolution {
  RVector x;  // eigenbasis coordinates
  double lambda = 0.0;
  bool on_boundary = false;
};

double null_cut(const RVector& d) {
  return 1e-12 * std::max(d.maxCoeff(), 0.0);
}

// trust-region subproblem for a diagonal PSD quadratic: minimize
// x^T diag(d) x + 2 g^T x over ||x|| <= r
CoreSolution tr_core(const RVector& d, const RVector& g, double r) {
  const Eigen::Index n = d.size();
  const double cut = null_cut(d);
  const double gnorm = g.norm();

  // interior candidate: the pseudoinverse stationary point
  RVector x0 = RVector::Zero(n);
  double gnull_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d[i] > cut)
      x0[i] = -g[i] / d[i];
    else
      gnull_sq += g[i] * g[i];
  }
  const double x0norm = x0.norm();
  if (std::sqrt(gnull_sq) <= 1e-12 * gnorm && x0norm <= r)
    return {x0, 0.0, x0norm >= r * (1.0 - 1e-12)};

  // boundary: lambda < 0 with ||x_lambda|| = r, x_lambda = -(d - lambda)^-1 g
  auto norm_at = [&](double lambda) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi = g[i] / (d[i] - lambda);
      acc += xi * xi;
    }
    return std::sqrt(acc);
  };
  double lo = -(gnorm / r + d.maxCoeff());  // ||x(lo)|| <= r
  double hi = 0.0;
  double lambda = lo;
  double s = norm_at(lambda);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(s - r) <= 1e-12 * r) break;
    if (s < r)
      lo = lambda;
    else
      hi = lambda;
    // newton update on 1/s - 1/r
    double d3 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      d3 += g[i] * g[i] / std::pow(d[i] - lambda, 3);
    const double phi = 1.0 / s - 1.0 / r;
    const double dphi = -d3 / (s * s * s);
    double next = dphi != 0.0 ? lambda - phi / dphi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lambda = next;
    s = norm_at(lambda);
  }
  RVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = -g[i] / (d[i] - lambda);
  // defensive: if the norm equation saturated short of the boundary (exact
  // hard case), top up along a null direction
  const double xnorm = x.norm();
  if (xnorm < r * (1.0 - 1e-8)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d[i] <= cut) {
        x[i] += std::sqrt(r * r - xnorm * xnorm);
        break;
      }
    }
  }
  return {x, lambda, true};
}

}  // namespace

SubproblemSolution solve_tr_subproblem(const RMatrix& a, const RVector& g,
                                       double r) {
  if (r <= 0.0) throw std::invalid_argument("solve_tr_subproblem: r > 0 required");
  if (a.rows() != a.cols() || a.rows() != g.size())
    throw std::invalid_argument("solve_tr_subproblem: dimension mismatch");

  const RMatrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym);
  RVector d = es.eigenvalues();
  if (d.minCoeff() < -1e-10 * std::max(1e-300, sym.norm()))
    throw std::invalid_argument("solve_tr_subproblem: matrix is not PSD");
  d = d.cwiseMax(0.0);

  const RVector ghat = es.eigenvectors().transpose() * g;
  CoreSolution core = tr_core(d, ghat, r);

  SubproblemSolution out;
  out.p = es.eigenvectors() * core.x;
  out.lambda = core.lambda;
  out.on_boundary = core.on_boundary;
  out.model_value = core.x.dot(d.cwiseProduct(core.x)) + 2.0 * ghat.dot(core.x);
  return out;
}

SubproblemSolution newton_step(const RMatrix& j, const RVector& l, double r) {
  if (r <= 0.0) throw std::invalid_argument("newton_step: r > 0 required");
  if (j.rows() != l.size())
    throw std::invalid_argument("newton_step: residual length mismatch");
  const Eigen::Index m = j.rows();
  const Eigen::Index big = j.cols();
  if (j.norm() == 0.0 && l.norm() > 0.0)
    throw std::domain_error("newton_step: zero jacobian with nonzero residual");

  if (m >= big) {
    SubproblemSolution out =
        solve_tr_subproblem(j.transpose() * j, j.transpose() * l, r);
    out.model_value = (j * out.p + l).squaredNorm();
    return out;
  }

  // underdetermined: solve in residual space with p = J^T y; the square root
  // of JJ^T appears only as per-eigenvalue scalars
  const RMatrix mm = j * j.transpose();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(mm);
  const RVector d = es.eigenvalues().cwiseMax(0.0);
  const RVector lhat = es.eigenvectors().transpose() * l;
  const RVector ghat = d.cwiseSqrt().cwiseProduct(lhat);
  CoreSolution core = tr_core(d, ghat, r);

  // y = -(JJ^T - lambda I)^-1 L restricted to the numerical range
  const double cut = null_cut(d);
  RVector yhat = RVector::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i)
    if (d[i] > cut) yhat[i] = -lhat[i] / (d[i] - core.lambda);

  SubproblemSolution out;
  out.p = j.transpose() * (es.eigenvectors() * yhat);
  out.lambda = core.lambda;
  out.on_boundary = core.on_boundary;
  out.model_value = (j * out.p + l).squaredNorm();
  return out;
}

RadiusState adapt_radius(const RadiusState& state, double model_decrease,
                         double actual_decrease) {
  RadiusState out = state;
  const double denom = std::abs(actual_decrease);
  out.last_ratio = denom > 0.0
                       ? model_decrease / denom
                       : std::numeric_limits<double>::infinity();
  if (actual_decrease <= 0.0) {
    out.accepted = false;
    out.r = state.r / 4.0;
  } else {
    out.accepted = true;
    const double err = out.last_ratio - 1.0;  // relative model error
    if (err < 0.2)
      out.r = state.r * 2.0;
    else if (err > 0.3)
      out.r = state.r / 2.0;
  }
  out.r = std::clamp(out.r, kRadiusMin, kRadiusMax);
  return out;
}

}  // namespace pulseforge

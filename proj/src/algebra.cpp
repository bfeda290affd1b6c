#include "pulseforge/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <numeric>
#include <vector>

namespace pulseforge {

AntiHermitian::AntiHermitian(const CMatrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("AntiHermitian: square matrix required");
  m_ = 0.5 * (a - a.adjoint().eval());
}

UnitaryMatrix::UnitaryMatrix(const CMatrix& u) : m_(u) {
  if (u.rows() != u.cols() || u.rows() < 1)
    throw std::invalid_argument("UnitaryMatrix: square matrix required");
  const double defect =
      (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
  if (!(defect <= 1e-10 * std::sqrt(double(u.rows()))))
    throw std::invalid_argument("UnitaryMatrix: input is not unitary");
}

namespace {

double principal_phase(Complex ev) {
  double th = std::arg(ev);
  if (th <= -kPi) th = kPi;  // branch convention: phase in (-pi, pi]
  return th;
}

// union-find grouping of eigenvalues closer than tol, then re-orthonormalize
// the columns of each group (guards frame unitarity for clustered spectra)
void reorthonormalize_clusters(const CVector& vals, CMatrix& vecs, double tol) {
  const Eigen::Index n = vals.size();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(vals[i] - vals[j]) < tol) parent[find(j)] = find(i);

  for (Eigen::Index root = 0; root < n; ++root) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
      if (find(i) == root) members.push_back(i);
    if (members.size() < 2) continue;
    CMatrix sub(vecs.rows(), members.size());
    for (size_t c = 0; c < members.size(); ++c) sub.col(c) = vecs.col(members[c]);
    Eigen::HouseholderQR<CMatrix> qr(sub);
    CMatrix q = qr.householderQ() * CMatrix::Identity(vecs.rows(), members.size());
    for (size_t c = 0; c < members.size(); ++c) vecs.col(members[c]) = q.col(c);
  }
}

}  // namespace

std::pair<AntiHermitian, EigenFrame> matrix_log_unitary(const UnitaryMatrix& w) {
  const CMatrix& W = w.matrix();
  const Eigen::Index n = W.rows();

  // Schur of a normal matrix: triangular factor is diagonal, Q is unitary
  Eigen::ComplexSchur<CMatrix> schur(W);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("matrix_log_unitary: Schur decomposition failed");

  EigenFrame frame;
  frame.values = schur.matrixT().diagonal();
  frame.vectors = schur.matrixU();
  reorthonormalize_clusters(frame.values, frame.vectors, 1e-8);

  CVector logvals(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double th = principal_phase(frame.values[j]);
    frame.values[j] = std::polar(1.0, th);  // snap to the unit circle
    logvals[j] = Complex(0.0, th);
  }
  CMatrix a = frame.vectors * logvals.asDiagonal() * frame.vectors.adjoint();
  return {AntiHermitian(a), std::move(frame)};
}

namespace {

Complex gamma_scalar(Complex z) {
  if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 6.0;
  return expm1c(z) / z;
}

}  // namespace

CMatrix gamma_matrix(const CVector& eigvals) {
  const Eigen::Index n = eigvals.size();
  CMatrix g(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      g(r, s) = (r == s) ? Complex(1.0, 0.0) : gamma_scalar(eigvals[s] - eigvals[r]);
    }
  }
  return g;
}

EigenFrame antihermitian_frame(const AntiHermitian& a) {
  // iA is Hermitian; its real eigenvalues mu give the spectrum -i*mu of A
  Eigen::SelfAdjointEigenSolver<CMatrix> es(Complex(0, 1) * a.matrix());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("antihermitian_frame: eigendecomposition failed");
  EigenFrame f;
  f.vectors = es.eigenvectors();
  f.values = (Complex(0, -1) * es.eigenvalues().cast<Complex>()).eval();
  return f;
}

CMatrix frame_exp(const EigenFrame& f) {
  return f.vectors * f.values.array().exp().matrix().asDiagonal() *
         f.vectors.adjoint();
}

CMatrix dexp(const AntiHermitian& a, const AntiHermitian& d) {
  const EigenFrame f = antihermitian_frame(a);
  const CMatrix g = gamma_matrix(f.values);
  const CMatrix dt = f.vectors.adjoint() * d.matrix() * f.vectors;
  const CMatrix core = f.vectors * g.cwiseProduct(dt) * f.vectors.adjoint();
  return frame_exp(f) * core;
}

namespace detail {

RVector frame_phases(const EigenFrame& frame) {
  RVector th(frame.values.size());
  for (Eigen::Index j = 0; j < th.size(); ++j)
    th[j] = principal_phase(frame.values[j]);
  return th;
}

CMatrix dlog_premultiplied(const EigenFrame& frame, const CMatrix& wdag_b) {
  const RVector th = frame_phases(frame);
  CVector logvals(th.size());
  for (Eigen::Index j = 0; j < th.size(); ++j) logvals[j] = Complex(0.0, th[j]);
  const CMatrix g = gamma_matrix(logvals);
  if (g.cwiseAbs().minCoeff() < 1e-12)
    throw DegenerateBranchError(
        "dlog: eigenvalue gap of the log argument at the branch wraparound");
  const CMatrix bt = frame.vectors.adjoint() * wdag_b * frame.vectors;
  return frame.vectors * bt.cwiseQuotient(g) * frame.vectors.adjoint();
}

}  // namespace detail

CMatrix dlog(const UnitaryMatrix& w, const EigenFrame& frame, const CMatrix& b) {
  return detail::dlog_premultiplied(frame, w.matrix().adjoint() * b);
}

RVector su_project(const AntiHermitian& a) {
  const CMatrix& A = a.matrix();
  const Eigen::Index n = A.rows();
  if (n < 2) throw std::invalid_argument("su_project: dimension must be >= 2");

  RVector v(n * n - 1);
  Eigen::Index idx = 0;
  const double rt2 = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      v[idx++] = rt2 * A(j, k).real();
      v[idx++] = rt2 * A(j, k).imag();
    }
  }
  // imaginary diagonal relative to its mean, in the normalized-difference
  // basis (e1-e2, e1+e2-2e3, ...) of the hyperplane orthogonal to all-ones
  const double mean = A.diagonal().imag().mean();
  RVector y = A.diagonal().imag().array() - mean;
  double prefix = 0.0;
  for (Eigen::Index d = 1; d < n; ++d) {
    prefix += y[d - 1];
    v[idx++] = (prefix - double(d) * y[d]) / std::sqrt(double(d) * double(d + 1));
  }
  return v;
}

AntiHermitian su_embed(const RVector& v) {
  const double nf = std::sqrt(double(v.size()) + 1.0);
  const Eigen::Index n = Eigen::Index(std::lround(nf));
  if (n < 2 || n * n - 1 != v.size())
    throw std::invalid_argument("su_embed: length must be N^2-1 for integer N >= 2");

  CMatrix A = CMatrix::Zero(n, n);
  Eigen::Index idx = 0;
  const double rt2 = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const Complex e(v[idx] / rt2, v[idx + 1] / rt2);
      idx += 2;
      A(j, k) = e;
      A(k, j) = -std::conj(e);
    }
  }
  RVector y = RVector::Zero(n);
  for (Eigen::Index d = 1; d < n; ++d) {
    const double w = v[idx++] / std::sqrt(double(d) * double(d + 1));
    for (Eigen::Index i = 0; i < d; ++i) y[i] += w;
    y[d] -= double(d) * w;
  }
  for (Eigen::Index j = 0; j < n; ++j) A(j, j) = Complex(0.0, y[j]);
  return AntiHermitian(A);
}

}  // namespace pulseforge

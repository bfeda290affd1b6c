#pragma once

#include <utility>

#include "pulseforge/common.hpp"

namespace pulseforge {

// anti-Hermitian matrix; construction projects the input onto (A - A^+)/2
class AntiHermitian {
 public:
  explicit AntiHermitian(const CMatrix& a);
  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  CMatrix m_;
};

// unitary matrix; construction rejects inputs with ||U^+ U - I||_F > 1e-10 sqrt(N)
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(const CMatrix& u);
  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  CMatrix m_;
};

// spectral frame of a normal matrix: values[j] belongs to column j of vectors
struct EigenFrame {
  CVector values;
  CMatrix vectors;
};

// principal logarithm of a unitary: anti-Hermitian A with exp(A) = W and
// every eigenvalue phase in (-pi, pi]; also returns the frame of W
std::pair<AntiHermitian, EigenFrame> matrix_log_unitary(const UnitaryMatrix& w);

// gamma(z) = (exp(z) - 1)/z applied to all pairwise eigenvalue gaps,
// entry (r, s) = gamma(ev[s] - ev[r]); gamma(0) = 1
CMatrix gamma_matrix(const CVector& eigvals);

// derivative of the matrix exponential at A in direction D
CMatrix dexp(const AntiHermitian& a, const AntiHermitian& d);

// derivative of the principal log at W applied to a tangent direction B;
// frame must be the frame of W as returned by matrix_log_unitary
CMatrix dlog(const UnitaryMatrix& w, const EigenFrame& frame, const CMatrix& b);

// isometric coordinates of the traceless part of an anti-Hermitian matrix:
// sqrt(2) Re/Im of the strictly upper triangle, then N-1 normalized-difference
// combinations of the imaginary diagonal (orthogonal to the all-ones vector)
RVector su_project(const AntiHermitian& a);

// right inverse of su_project: traceless anti-Hermitian from coordinates
AntiHermitian su_embed(const RVector& v);

// eigendecomposition of an anti-Hermitian matrix (values on the imaginary axis)
EigenFrame antihermitian_frame(const AntiHermitian& a);

// reassemble exp from a spectral frame: V diag(exp(values)) V^+
CMatrix frame_exp(const EigenFrame& f);

namespace detail {
// dlog variant taking W^+ B directly (saves a product when W^+ B is known)
CMatrix dlog_premultiplied(const EigenFrame& frame, const CMatrix& wdag_b);
// principal-branch phases of the frame values, in (-pi, pi]
RVector frame_phases(const EigenFrame& frame);
}  // namespace detail

}  // namespace pulseforge

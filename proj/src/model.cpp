#include "pulseforge/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace pulseforge {

// ---- pulse bases ----

namespace {

// orthonormal Hermite functions h_0..h_{count-1} at x via the stable
// two-term recurrence h_{j+1} = x sqrt(2/(j+1)) h_j - sqrt(j/(j+1)) h_{j-1}
void hermite_all(int count, double x, RVector& out) {
  out.resize(count);
  double prev = 0.0;
  double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  for (int j = 0; j < count; ++j) {
    out[j] = cur;
    const double next =
        x * std::sqrt(2.0 / (j + 1)) * cur - std::sqrt(double(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
}

// largest value any of the first K functions attains on [xb, infinity),
// sampled densely (the bound is attained at xb once xb clears the last
// classical turning point)
double tail_max(int K, double xb) {
  const int samples = 1000;
  const double width = 8.0;
  RVector h;
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = xb + width * double(i) / double(samples - 1);
    hermite_all(K, x, h);
    best = std::max(best, h.cwiseAbs().maxCoeff());
  }
  return best;
}

}  // namespace

PulseBasis PulseBasis::piecewise_constant(int K, double T) {
  if (K < 1 || !(T > 0.0))
    throw std::invalid_argument("PulseBasis: K >= 1 and T > 0 required");
  PulseBasis b;
  b.kind_ = BasisKind::PiecewiseConstant;
  b.K_ = K;
  b.T_ = T;
  b.gram_ = (T / K) * RMatrix::Identity(K, K);
  return b;
}

PulseBasis PulseBasis::hermite(int K, double T) {
  if (K < 1 || !(T > 0.0))
    throw std::invalid_argument("PulseBasis: K >= 1 and T > 0 required");
  PulseBasis b;
  b.kind_ = BasisKind::Hermite;
  b.K_ = K;
  b.T_ = T;

  // calibrate the joint scale about T/2 so the largest tail value outside
  // (0, T) is 1e-8; bisection on the scaled boundary coordinate T/(2s)
  const double target = 1e-8;
  double lo = std::sqrt(2.0 * K + 1.0);  // tail still large here
  double hi = lo + 30.0;                 // tail far below target here
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail_max(K, mid) > target ? lo : hi) = mid;
  }
  const double xb = 0.5 * (lo + hi);
  b.scale_ = T / (2.0 * xb);

  // Gram on [0, T] by Gauss-Legendre, doubling nodes until stable
  auto gram_at = [&](int nodes) {
    RVector x, w;
    gauss_legendre(nodes, 0.0, T, x, w);
    RMatrix vals(nodes, K);
    RVector h;
    for (int i = 0; i < nodes; ++i) {
      hermite_all(K, (x[i] - T / 2.0) / b.scale_, h);
      vals.row(i) = h.transpose();
    }
    RMatrix g = vals.transpose() * w.asDiagonal() * vals;
    return RMatrix(0.5 * (g + g.transpose().eval()));
  };
  int nodes = 4 * K + 16;
  RMatrix g = gram_at(nodes);
  for (int round = 0; round < 8; ++round) {
    nodes *= 2;
    RMatrix g2 = gram_at(nodes);
    const bool done = (g2 - g).norm() <= 1e-12 * g2.norm();
    g = std::move(g2);
    if (done) break;
  }
  b.gram_ = std::move(g);
  return b;
}

double PulseBasis::eval(int k, double t) const {
  if (k < 0 || k >= K_)
    throw std::invalid_argument("PulseBasis: basis index out of range");
  if (kind_ == BasisKind::PiecewiseConstant) {
    const double h = T_ / K_;
    return (t > k * h && t <= (k + 1) * h) ? 1.0 : 0.0;
  }
  RVector h;
  hermite_all(k + 1, (t - T_ / 2.0) / scale_, h);
  return h[k];
}

void gauss_legendre(int n, double a, double b, RVector& nodes, RVector& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  nodes.resize(n);
  weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = 0.5 * (b - a) * (-x) + 0.5 * (a + b);
    nodes[n - 1 - i] = 0.5 * (b - a) * x + 0.5 * (a + b);
    weights[i] = 0.5 * (b - a) * wgt;
    weights[n - 1 - i] = weights[i];
  }
}

// ---- control systems ----

ControlSystem make_control_system(CMatrix h0, std::vector<CMatrix> controls) {
  const Eigen::Index n = h0.rows();
  if (n < 2 || h0.cols() != n)
    throw std::invalid_argument("ControlSystem: drift must be square, dim >= 2");
  if (controls.empty())
    throw std::invalid_argument("ControlSystem: at least one control required");
  auto check_hermitian = [n](const CMatrix& h, const char* what) {
    if (h.rows() != n || h.cols() != n)
      throw std::invalid_argument(std::string("ControlSystem: ") + what +
                                  " has mismatched dimensions");
    const double scale = std::max(1.0, h.norm());
    if ((h - h.adjoint().eval()).norm() > 1e-12 * scale)
      throw std::invalid_argument(std::string("ControlSystem: ") + what +
                                  " is not Hermitian");
  };
  check_hermitian(h0, "drift");
  for (const auto& hc : controls) check_hermitian(hc, "control");
  return ControlSystem{std::move(h0), std::move(controls)};
}

// ---- spin-chain presets ----

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix pauli(char which) {
  CMatrix s(2, 2);
  switch (which) {
    case 'x': s << 0, 1, 1, 0; break;
    case 'y': s << 0, Complex(0, -1), Complex(0, 1), 0; break;
    default:  s << 1, 0, 0, -1; break;
  }
  return s;
}

// single-site operator on site n (1-based) of a q-qubit register
CMatrix site_op(int q, int n, const CMatrix& s) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int m = 1; m <= q; ++m) out = kron(out, m == n ? s : CMatrix::Identity(2, 2));
  return out;
}

CMatrix two_site_op(int q, int n, const CMatrix& s) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int m = 1; m <= q; ++m)
    out = kron(out, (m == n || m == n + 1) ? s : CMatrix::Identity(2, 2));
  return out;
}

}  // namespace

UnitaryMatrix qft_gate(Eigen::Index n) {
  CMatrix f(n, n);
  const double norm = 1.0 / std::sqrt(double(n));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      f(j, k) = norm * std::polar(1.0, 2.0 * kPi * double(j) * double(k) / double(n));
  return UnitaryMatrix(f);
}

ProblemSpec build_ising_qft_problem(int qubits, int K, double T) {
  if (qubits < 1) throw std::invalid_argument("ising preset: qubits >= 1");
  const Eigen::Index n = Eigen::Index(1) << qubits;
  CMatrix h0 = CMatrix::Zero(n, n);
  for (int m = 1; m < qubits; ++m) h0 += two_site_op(qubits, m, pauli('z'));
  for (int m = 1; m <= qubits; ++m)
    h0 -= double(m + 2) * site_op(qubits, m, pauli('z'));
  CMatrix hx = CMatrix::Zero(n, n), hy = CMatrix::Zero(n, n);
  for (int m = 1; m <= qubits; ++m) {
    hx += site_op(qubits, m, pauli('x'));
    hy += site_op(qubits, m, pauli('y'));
  }
  ProblemSpec prob{"ising-qft",
                   make_control_system(std::move(h0), {std::move(hx), std::move(hy)}),
                   PulseBasis::piecewise_constant(K, T),
                   TargetSpec::full(qft_gate(n)),
                   1e-4,
                   std::nullopt};
  return prob;
}

ProblemSpec build_heisenberg_tgate_problem(UnitaryMatrix target, int qubits,
                                           int K, double T) {
  if (qubits < 1) throw std::invalid_argument("heisenberg preset: qubits >= 1");
  const Eigen::Index n = Eigen::Index(1) << qubits;
  if (target.dim() != n)
    throw std::invalid_argument("heisenberg preset: target dimension mismatch");
  CMatrix h0 = CMatrix::Zero(n, n);
  for (int m = 1; m < qubits; ++m) {
    h0 += two_site_op(qubits, m, pauli('x'));
    h0 += two_site_op(qubits, m, pauli('y'));
    h0 += two_site_op(qubits, m, pauli('z'));
  }
  for (int m = 1; m <= qubits; ++m) h0 += 10.0 * site_op(qubits, m, pauli('x'));
  CMatrix hz1 = site_op(qubits, 1, pauli('z'));
  ProblemSpec prob{"heisenberg-t",
                   make_control_system(std::move(h0), {std::move(hz1)}),
                   PulseBasis::piecewise_constant(K, T),
                   TargetSpec::full(std::move(target)),
                   1e-4,
                   std::nullopt};
  return prob;
}

// ---- target projectors ----

TargetSpec TargetSpec::full(UnitaryMatrix v) { return TargetSpec(std::move(v)); }

TargetSpec TargetSpec::subsystem(const UnitaryMatrix& w_sys, int env_dim) {
  if (env_dim < 1) throw std::invalid_argument("TargetSpec: env_dim >= 1");
  const Eigen::Index sys = w_sys.dim();
  TargetSpec t(UnitaryMatrix(kron(w_sys.matrix(), CMatrix::Identity(env_dim, env_dim))));
  t.projector_ = TargetProjector::Subsystem;
  t.env_dim_ = env_dim;
  const Eigen::Index n = t.v_.dim();
  const Eigen::Index removed = Eigen::Index(env_dim) * env_dim - 1;
  if (removed == 0) return t;

  // orthonormal coordinates of the identity (x) su(env) directions
  RMatrix c(n * n - 1, removed);
  const double scale = 1.0 / std::sqrt(double(sys));
  for (Eigen::Index j = 0; j < removed; ++j) {
    RVector e = RVector::Zero(removed);
    e[j] = 1.0;
    const CMatrix x = su_embed(e).matrix();
    c.col(j) = su_project(AntiHermitian(scale * kron(CMatrix::Identity(sys, sys), x)));
  }
  // complete to a full orthonormal basis; the trailing columns span the kept
  // directions
  Eigen::HouseholderQR<RMatrix> qr(c);
  RMatrix q = qr.householderQ() * RMatrix::Identity(n * n - 1, n * n - 1);
  t.complement_ = q.rightCols(n * n - 1 - removed);
  return t;
}

Eigen::Index TargetSpec::residual_dim() const {
  const Eigen::Index n = v_.dim();
  if (projector_ == TargetProjector::FullSu) return n * n - 1;
  return n * n - 1 - (Eigen::Index(env_dim_) * env_dim_ - 1);
}

RVector TargetSpec::project(const RVector& full_coords) const {
  const Eigen::Index n = v_.dim();
  if (full_coords.size() != n * n - 1)
    throw std::invalid_argument("TargetSpec: coordinate length mismatch");
  if (projector_ == TargetProjector::FullSu || complement_.size() == 0)
    return full_coords;
  return complement_.transpose() * full_coords;
}

// ---- parameter vectors ----

Eigen::Index infer_num_controls(const PulseBasis& basis, const RVector& a) {
  const Eigen::Index K = basis.size();
  if (a.size() < 1 || a.size() % K != 0)
    throw std::invalid_argument("parameter vector length must be a multiple of K");
  return a.size() / K;
}

RVector synthesize(const PulseBasis& basis, const RVector& a, double t) {
  const Eigen::Index R = infer_num_controls(basis, a);
  const Eigen::Index K = basis.size();
  RVector f = RVector::Zero(R);
  if (basis.kind() == BasisKind::PiecewiseConstant) {
    const double h = basis.horizon() / double(K);
    const Eigen::Index k = Eigen::Index(std::ceil(t / h)) - 1;
    if (k < 0 || k >= K) return f;
    for (Eigen::Index r = 0; r < R; ++r) f[r] = a[r * K + k];
    return f;
  }
  RVector b(K);
  for (Eigen::Index k = 0; k < K; ++k) b[k] = basis.eval(int(k), t);
  for (Eigen::Index r = 0; r < R; ++r) f[r] = a.segment(r * K, K).dot(b);
  return f;
}

double pulse_norm(const PulseBasis& basis, const RVector& a) {
  const Eigen::Index R = infer_num_controls(basis, a);
  const Eigen::Index K = basis.size();
  double acc = 0.0;
  for (Eigen::Index r = 0; r < R; ++r) {
    const auto seg = a.segment(r * K, K);
    acc += seg.dot(basis.gram() * seg);
  }
  return std::sqrt(std::max(0.0, acc));
}

RVector random_pulse(const PulseBasis& basis, int num_controls, double rho,
                     std::uint64_t seed) {
  if (num_controls < 1)
    throw std::invalid_argument("random_pulse: at least one control");
  if (!(rho >= 0.0)) throw std::invalid_argument("random_pulse: rho >= 0");
  const Eigen::Index m = Eigen::Index(num_controls) * basis.size();
  if (rho == 0.0) return RVector::Zero(m);

  // explicit Box-Muller on the mt19937_64 stream keeps draws bit-stable
  // across standard library implementations
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return (double(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  };
  RVector g(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u1 = uniform(), u2 = uniform();
    g[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  const double norm = pulse_norm(basis, g);
  if (norm == 0.0) throw std::runtime_error("random_pulse: degenerate draw");
  return (rho / norm) * g;
}

}  // namespace pulseforge

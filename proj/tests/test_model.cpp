#include "doctest.h"
#include "helpers.hpp"
#include "pulseforge/model.hpp"

#include <random>

using namespace pulseforge;

namespace {

CMatrix kron2(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix sx() { CMatrix s(2, 2); s << 0, 1, 1, 0; return s; }
CMatrix sy() { CMatrix s(2, 2); s << 0, Complex(0, -1), Complex(0, 1), 0; return s; }
CMatrix sz() { CMatrix s(2, 2); s << 1, 0, 0, -1; return s; }
CMatrix id2() { return CMatrix::Identity(2, 2); }

}  // namespace

TEST_CASE("ising chain drift for one and two qubits") {
  auto p1 = build_ising_qft_problem(1, 8, 4.0);
  CHECK((p1.system.h0 - (-3.0) * sz()).norm() < 1e-14);
  CHECK((p1.system.controls[0] - sx()).norm() < 1e-14);
  CHECK((p1.system.controls[1] - sy()).norm() < 1e-14);

  auto p2 = build_ising_qft_problem(2, 8, 4.0);
  // site fields 3 and 4: diagonal (-6, 0, -2, 8)
  RVector diag_expected(4);
  diag_expected << -6, 0, -2, 8;
  CHECK((p2.system.h0.diagonal().real() - diag_expected).norm() < 1e-14);
  CHECK(p2.system.h0.diagonal().imag().norm() < 1e-14);
  CMatrix offdiag = p2.system.h0;
  offdiag.diagonal().setZero();
  CHECK(offdiag.norm() < 1e-14);
  CHECK((p2.system.controls[0] - (kron2(sx(), id2()) + kron2(id2(), sx()))).norm() <
        1e-14);
  CHECK((p2.system.controls[1] - (kron2(sy(), id2()) + kron2(id2(), sy()))).norm() <
        1e-14);
  CHECK(std::abs(p2.system.h0.trace()) < 1e-14);
  CHECK(p2.basis.kind() == BasisKind::PiecewiseConstant);
  CHECK(p2.epsilon == 1e-4);
}

TEST_CASE("ising preset defaults") {
  auto p = build_ising_qft_problem();
  CHECK(p.system.dim() == 32);
  CHECK(p.system.num_controls() == 2);
  CHECK(p.basis.size() == 1000);
  CHECK(p.basis.horizon() == 125.0);
  CHECK(std::abs(p.system.h0.trace()) < 1e-12);
}

TEST_CASE("qft gate matches the hand-built four-dimensional transform") {
  UnitaryMatrix f = qft_gate(4);
  CMatrix expect(4, 4);
  const Complex i(0, 1);
  expect << 1, 1, 1, 1, 1, i, -1, -i, 1, -1, 1, -1, 1, -i, -1, i;
  expect *= 0.5;
  CHECK((f.matrix() - expect).norm() < 1e-14);
}

TEST_CASE("heisenberg chain drift and control") {
  auto singlet_target = qft_gate(2);  // any 2-dim unitary works as a target
  auto p1 = build_heisenberg_tgate_problem(singlet_target, 1, 8, 4.0);
  CHECK((p1.system.h0 - 10.0 * sx()).norm() < 1e-14);
  CHECK((p1.system.controls[0] - sz()).norm() < 1e-14);

  auto p2 = build_heisenberg_tgate_problem(qft_gate(4), 2, 8, 4.0);
  CMatrix exchange = p2.system.h0 - 10.0 * (kron2(sx(), id2()) + kron2(id2(), sx()));
  CVector singlet(4);
  singlet << 0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0;
  CHECK((exchange * singlet + 3.0 * singlet).norm() < 1e-14);
  CHECK((p2.system.controls[0] - kron2(sz(), id2())).norm() < 1e-14);
  CHECK_THROWS_AS(build_heisenberg_tgate_problem(qft_gate(2), 2, 8, 4.0),
                  std::invalid_argument);
}

TEST_CASE("control system validation rejects non-hermitian input") {
  CMatrix bad(2, 2);
  bad << 0, 1, 2, 0;
  CHECK_THROWS_AS(make_control_system(bad, {sx()}), std::invalid_argument);
  CHECK_THROWS_AS(make_control_system(sz(), {bad}), std::invalid_argument);
  CHECK_THROWS_AS(make_control_system(sz(), {}), std::invalid_argument);
  CHECK_NOTHROW(make_control_system(sz(), {sx(), sy()}));
}

TEST_CASE("piecewise-constant basis support convention") {
  auto b = PulseBasis::piecewise_constant(4, 1.0);
  CHECK(b.eval(1, 0.3) == 1.0);
  CHECK(b.eval(1, 0.5) == 1.0);  // interior grid point belongs to the left
  CHECK(b.eval(1, 0.25) == 0.0);
  CHECK(b.eval(1, 0.51) == 0.0);
  CHECK(b.eval(0, 0.0) == 0.0);
  CHECK(b.eval(3, 1.0) == 1.0);
  CHECK_THROWS_AS(b.eval(4, 0.5), std::invalid_argument);
  // partition of unity on (0, T]
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ud(1e-9, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double t = ud(rng);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += b.eval(k, t);
    CHECK(sum == 1.0);
  }
  CHECK((b.gram() - 0.25 * RMatrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("hermite basis calibration pins the boundary tail") {
  auto b = PulseBasis::hermite(16, 10.0);
  double at_zero = 0.0, outside = 0.0;
  for (int k = 0; k < 16; ++k) {
    at_zero = std::max(at_zero, std::abs(b.eval(k, 0.0)));
    outside = std::max(outside, std::abs(b.eval(k, -1.0)));
    outside = std::max(outside, std::abs(b.eval(k, 11.0)));
  }
  CHECK(at_zero == doctest::Approx(1e-8).epsilon(0.01));
  CHECK(outside < 1e-8);
  // peak of the ground function sits at T/2 with the universal height
  CHECK(b.eval(0, 5.0) == doctest::Approx(std::pow(kPi, -0.25)));
}

TEST_CASE("hermite gram is near-diagonal and positive definite") {
  auto b = PulseBasis::hermite(8, 6.0);
  const RMatrix& g = b.gram();
  CHECK((g - g.transpose()).norm() < 1e-14);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(g);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  double offdiag = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (i != j) offdiag = std::max(offdiag, std::abs(g(i, j)));
  CHECK(offdiag < 1e-6 * g.diagonal().maxCoeff());

  // independent quadrature oracle: fine trapezoid
  const int n = 200000;
  RMatrix ref = RMatrix::Zero(8, 8);
  RVector vals(8);
  for (int i = 0; i <= n; ++i) {
    const double t = 6.0 * double(i) / n;
    for (int k = 0; k < 8; ++k) vals[k] = b.eval(k, t);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    ref += (w * 6.0 / n) * vals * vals.transpose();
  }
  CHECK((g - ref).norm() < 1e-7 * ref.norm());
}

TEST_CASE("gauss-legendre integrates exactly and accurately") {
  RVector x, w;
  gauss_legendre(3, 0.0, 2.0, x, w);
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += w[i] * std::pow(x[i], 5);
  CHECK(acc == doctest::Approx(64.0 / 6.0).epsilon(1e-14));  // x^5 on [0,2]

  gauss_legendre(20, 0.0, 1.0, x, w);
  acc = 0.0;
  for (int i = 0; i < 20; ++i) acc += w[i] * std::cos(x[i]);
  CHECK(std::abs(acc - std::sin(1.0)) < 1e-15);
}

TEST_CASE("synthesize matches a naive basis sum") {
  std::mt19937_64 rng(32);
  auto bh = PulseBasis::hermite(8, 5.0);
  RVector a = RVector::NullaryExpr(16, [&](Eigen::Index) {
    return std::normal_distribution<double>()(rng);
  });
  for (int i = 0; i < 50; ++i) {
    const double t = 5.0 * double(i) / 49.0;
    RVector f = synthesize(bh, a, t);
    for (int r = 0; r < 2; ++r) {
      double ref = 0.0;
      for (int k = 0; k < 8; ++k) ref += a[r * 8 + k] * bh.eval(k, t);
      CHECK(f[r] == doctest::Approx(ref).epsilon(1e-13));
    }
  }

  auto bp = PulseBasis::piecewise_constant(4, 1.0);
  RVector ap(8);
  ap << 1, 2, 3, 4, 5, 6, 7, 8;
  RVector f = synthesize(bp, ap, 0.3);
  CHECK(f[0] == 2.0);
  CHECK(f[1] == 6.0);
  CHECK(synthesize(bp, ap, 0.0).norm() == 0.0);
  CHECK_THROWS_AS(synthesize(bp, RVector::Zero(7), 0.3), std::invalid_argument);
}

TEST_CASE("pulse norm closed forms") {
  auto bp = PulseBasis::piecewise_constant(16, 8.0);
  std::mt19937_64 rng(33);
  RVector a = RVector::NullaryExpr(32, [&](Eigen::Index) {
    return std::normal_distribution<double>()(rng);
  });
  CHECK(pulse_norm(bp, a) ==
        doctest::Approx(std::sqrt(8.0 / 16.0) * a.norm()).epsilon(1e-14));

  auto bh = PulseBasis::hermite(6, 7.0);
  RVector e = RVector::Zero(6);
  e[2] = 1.0;
  CHECK(pulse_norm(bh, e) == doctest::Approx(std::sqrt(bh.gram()(2, 2))));

  // fine-grid oracle for the integrated power
  RVector ah = RVector::NullaryExpr(12, [&](Eigen::Index) {
    return std::normal_distribution<double>()(rng);
  });
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = 7.0 * double(i) / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * (7.0 / n) * synthesize(bh, ah, t).squaredNorm();
  }
  CHECK(pulse_norm(bh, ah) == doctest::Approx(std::sqrt(acc)).epsilon(1e-6));
}

TEST_CASE("random pulses hit the requested norm deterministically") {
  auto b = PulseBasis::piecewise_constant(64, 8.0);
  RVector a1 = random_pulse(b, 2, 3.5, 42);
  RVector a2 = random_pulse(b, 2, 3.5, 42);
  RVector a3 = random_pulse(b, 2, 3.5, 43);
  CHECK((a1 - a2).norm() == 0.0);
  CHECK((a1 - a3).norm() > 1e-3);
  CHECK(pulse_norm(b, a1) == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(random_pulse(b, 2, 0.0, 7).norm() == 0.0);

  auto bh = PulseBasis::hermite(12, 5.0);
  RVector ah = random_pulse(bh, 1, 0.8, 9);
  CHECK(pulse_norm(bh, ah) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("distinct seeds give nearly orthogonal directions") {
  auto b = PulseBasis::piecewise_constant(128, 8.0);
  int ok = 0;
  for (int pair = 0; pair < 100; ++pair) {
    RVector u = random_pulse(b, 2, 1.0, 1000 + 2 * pair);
    RVector v = random_pulse(b, 2, 1.0, 1001 + 2 * pair);
    const double cosine = u.dot(v) / (u.norm() * v.norm());
    if (std::abs(cosine) < 0.2) ++ok;
  }
  CHECK(ok >= 99);
}

TEST_CASE("subsystem projector removes environment directions") {
  std::mt19937_64 rng(34);
  UnitaryMatrix wsys(testutil::haar_unitary(2, rng));
  TargetSpec t = TargetSpec::subsystem(wsys, 2);
  CHECK(t.gate().dim() == 4);
  CHECK(t.residual_dim() == 12);  // 15 - 3

  // coordinates of identity (x) su(2) directions vanish after projection
  for (int j = 0; j < 3; ++j) {
    RVector e = RVector::Zero(3);
    e[j] = 1.0;
    CMatrix x = su_embed(e).matrix();
    CMatrix lifted(4, 4);
    lifted.setZero();
    lifted.block(0, 0, 2, 2) = x;
    lifted.block(2, 2, 2, 2) = x;
    RVector full = su_project(AntiHermitian(lifted));
    CHECK(t.project(full).norm() < 1e-12);
  }
  // a generic direction survives with its norm bounded by the full norm
  CMatrix g = testutil::random_traceless_antihermitian(4, 1.0, rng);
  RVector full = su_project(AntiHermitian(g));
  RVector kept = t.project(full);
  CHECK(kept.size() == 12);
  CHECK(kept.norm() <= full.norm() + 1e-12);

  TargetSpec tf = TargetSpec::full(UnitaryMatrix(CMatrix::Identity(4, 4)));
  CHECK(tf.residual_dim() == 15);
  CHECK((tf.project(full) - full).norm() == 0.0);
}

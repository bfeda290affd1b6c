#include "doctest.h"
#include "helpers.hpp"
#include "pulseforge/trustregion.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <random>

using namespace pulseforge;

namespace {

double quad_value(const RMatrix& a, const RVector& g, const RVector& x) {
  return x.dot(a * x) + 2.0 * g.dot(x);
}

// independent solver: pseudoinverse interior test plus plain bisection on
// ||x_lambda|| = r; no newton, no shared code path
RVector tr_oracle(const RMatrix& a, const RVector& g, double r) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (a + a.transpose()));
  const RVector d = es.eigenvalues().cwiseMax(0.0);
  const RVector gh = es.eigenvectors().transpose() * g;
  const Eigen::Index n = d.size();
  const double cut = 1e-12 * std::max(d.maxCoeff(), 0.0);

  RVector x0 = RVector::Zero(n);
  double gnull = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d[i] > cut)
      x0[i] = -gh[i] / d[i];
    else
      gnull += gh[i] * gh[i];
  }
  if (std::sqrt(gnull) <= 1e-12 * g.norm() && x0.norm() <= r)
    return es.eigenvectors() * x0;

  auto norm_at = [&](double lam) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += gh[i] * gh[i] / ((d[i] - lam) * (d[i] - lam));
    return std::sqrt(acc);
  };
  double lo = -(g.norm() / r + d.maxCoeff()) - 1.0, hi = 0.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_at(mid) > r ? hi : lo) = mid;
  }
  const double lam = 0.5 * (lo + hi);
  RVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = -gh[i] / (d[i] - lam);
  return es.eigenvectors() * x;
}

}  // namespace

TEST_CASE("trivial and hand-checked subproblems") {
  auto sol = solve_tr_subproblem(RMatrix::Identity(3, 3), RVector::Zero(3), 2.0);
  CHECK(sol.p.norm() == 0.0);
  CHECK(sol.lambda == 0.0);
  CHECK_FALSE(sol.on_boundary);

  RMatrix a = RVector::LinSpaced(2, 2.0, 1.0).asDiagonal();
  RVector g(2);
  g << -2.0, 0.0;
  sol = solve_tr_subproblem(a, g, 10.0);
  CHECK(sol.p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.p[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sol.lambda == 0.0);

  // rank-deficient A, pull along the null direction: boundary solution
  RMatrix a2 = RMatrix::Zero(2, 2);
  a2(0, 0) = 1.0;
  RVector g2(2);
  g2 << -1.0, -1.0;
  sol = solve_tr_subproblem(a2, g2, 1.0);
  CHECK(sol.on_boundary);
  CHECK(sol.lambda < 0.0);
  CHECK(sol.p.norm() == doctest::Approx(1.0).epsilon(1e-10));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000000; ++i) {
    const double th = 2.0 * kPi * i / 1000000.0;
    RVector x(2);
    x << std::cos(th), std::sin(th);
    best = std::min(best, quad_value(a2, g2, x));
  }
  CHECK(quad_value(a2, g2, sol.p) <= best + 1e-6);

  // pseudoinverse point beyond the radius: analytic boundary multiplier
  RVector g3(2);
  g3 << -2.0, 0.0;
  sol = solve_tr_subproblem(a2, g3, 1.0);
  CHECK(sol.lambda == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(sol.p[0] == doctest::Approx(1.0).epsilon(1e-9));
  sol = solve_tr_subproblem(a2, g3, 3.0);
  CHECK(sol.lambda == 0.0);
  CHECK(sol.p[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(sol.on_boundary);
}

TEST_CASE("input validation") {
  RMatrix bad = RMatrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(solve_tr_subproblem(bad, RVector::Ones(2), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_tr_subproblem(RMatrix::Identity(2, 2), RVector::Ones(2), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(newton_step(RMatrix::Zero(3, 5), RVector::Ones(3), 1.0),
                  std::domain_error);
  CHECK_NOTHROW(newton_step(RMatrix::Zero(3, 5), RVector::Zero(3), 1.0));
}

TEST_CASE("random instances beat the independent oracle") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> rad(0.05, 5.0);
  for (int rep = 0; rep < 500; ++rep) {
    const int n = dim(rng);
    RMatrix b = RMatrix::NullaryExpr(n, n, [&](Eigen::Index, Eigen::Index) {
      return nd(rng);
    });
    RMatrix a = b * b.transpose();
    if (rep % 3 == 0) {
      // plant a null space
      Eigen::SelfAdjointEigenSolver<RMatrix> es(a);
      RVector d = es.eigenvalues();
      d[0] = 0.0;
      a = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    }
    RVector g = RVector::NullaryExpr(n, [&](Eigen::Index) { return nd(rng); });
    const double r = rad(rng);
    auto sol = solve_tr_subproblem(a, g, r);

    // feasibility and complementarity
    CHECK(sol.p.norm() <= r * (1.0 + 1e-10));
    CHECK(std::abs(sol.lambda * (sol.p.norm() - r)) <=
          1e-8 * r * (1.0 + std::abs(sol.lambda)));
    CHECK(sol.lambda <= 0.0);

    // at least as good as the independent bisection solver
    RVector ox = tr_oracle(a, g, r);
    const double mine = quad_value(a, g, sol.p);
    const double theirs = quad_value(a, g, ox);
    CHECK(mine <= theirs + 1e-6 * (1.0 + std::abs(theirs)));
    CHECK(sol.model_value == doctest::Approx(mine).epsilon(1e-9));
  }
}

TEST_CASE("underdetermined steps recover the least-norm move at large radius") {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> nd;
  RMatrix j = RMatrix::NullaryExpr(6, 20, [&](Eigen::Index, Eigen::Index) {
    return nd(rng);
  });
  RVector l = RVector::NullaryExpr(6, [&](Eigen::Index) { return nd(rng); });
  auto sol = newton_step(j, l, 1e6);
  RVector oracle = j.completeOrthogonalDecomposition().solve(-l);
  CHECK((sol.p - oracle).norm() < 1e-10 * oracle.norm());
  CHECK(sol.lambda == 0.0);
  CHECK((j * sol.p + l).norm() < 1e-10);

  // shrinking radius turns the step into steepest descent
  RVector grad = j.transpose() * l;
  auto tiny = newton_step(j, l, 1e-6 * grad.norm());
  const double cosine = -tiny.p.dot(grad) / (tiny.p.norm() * grad.norm());
  CHECK(cosine > 1.0 - 1e-6);
  CHECK(tiny.on_boundary);
}

TEST_CASE("reduced and direct paths agree in model value") {
  std::mt19937_64 rng(63);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    RMatrix j = RMatrix::NullaryExpr(6, 20, [&](Eigen::Index, Eigen::Index) {
      return nd(rng);
    });
    RVector l = RVector::NullaryExpr(6, [&](Eigen::Index) { return nd(rng); });
    for (double r : {0.01, 0.1, 1.0, 10.0, 1000.0}) {
      auto reduced = newton_step(j, l, r);
      auto direct = solve_tr_subproblem(j.transpose() * j, j.transpose() * l, r);
      const double dv = (j * direct.p + l).squaredNorm();
      CHECK(reduced.model_value ==
            doctest::Approx(dv).epsilon(1e-8));
      CHECK(reduced.p.norm() <= r * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("model value never increases as the radius grows") {
  std::mt19937_64 rng(64);
  std::normal_distribution<double> nd;
  RMatrix j = RMatrix::NullaryExpr(5, 12, [&](Eigen::Index, Eigen::Index) {
    return nd(rng);
  });
  RVector l = RVector::NullaryExpr(5, [&](Eigen::Index) { return nd(rng); });
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const double r = 1e-3 * std::pow(4.0, i);
    const double mv = newton_step(j, l, r).model_value;
    CHECK(mv <= prev * (1.0 + 1e-12) + 1e-15);
    prev = mv;
  }
}

TEST_CASE("radius controller tracks the relative model error band") {
  RadiusState s{1.0, 0.0, false};

  // failed step: rejected, quartered
  RadiusState rej = adapt_radius(s, 0.5, -0.1);
  CHECK_FALSE(rej.accepted);
  CHECK(rej.r == 0.25);

  // model error inside the band: hold
  RadiusState hold = adapt_radius(s, 1.25, 1.0);
  CHECK(hold.accepted);
  CHECK(hold.r == 1.0);
  CHECK(hold.last_ratio == doctest::Approx(1.25));

  // model overshoots the band: halve
  RadiusState shrink = adapt_radius(s, 1.5, 1.0);
  CHECK(shrink.accepted);
  CHECK(shrink.r == 0.5);

  // accurate model (and conservative models): grow
  CHECK(adapt_radius(s, 1.05, 1.0).r == 2.0);
  CHECK(adapt_radius(s, 0.5, 1.0).r == 2.0);

  // hard clamps
  RadiusState low{2e-12, 0.0, false};
  CHECK(adapt_radius(low, 0.5, -1.0).r == kRadiusMin);
  RadiusState high{8e5, 0.0, false};
  CHECK(adapt_radius(high, 1.0, 1.0).r == kRadiusMax);
}

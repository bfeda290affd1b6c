#include "pulseforge/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pulseforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i, std::uint64_t s) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + i * 1000003ull + s * 101ull + 1ull;
  z ^= z >> 31;
  return z;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::Stalled: return "Stalled";
  }
  return "Unknown";
}

int SolveReport::accepted_iterations() const {
  int n = 0;
  for (const auto& rec : records)
    if (rec.index > 0 && rec.accepted) ++n;
  return n;
}

SolveReport newton_raphson_solve(const ProblemSpec& prob, const RVector& a0,
                                 const SolveOptions& opts) {
  if (a0.size() != prob.num_parameters())
    throw std::invalid_argument("newton_raphson_solve: a0 length != R*K");

  const auto t0 = Clock::now();
  SolveReport rep;
  rep.seed = opts.seed;
  rep.problem = prob.name;
  rep.final_a = a0;

  RVector a = a0;
  long props = 0;

  auto push_record = [&](int index, double gate, double geo, double radius,
                         double ratio, bool accepted) {
    IterationRecord rec;
    rec.index = index;
    rec.gate_error = gate;
    rec.geodesic_error = geo;
    rec.pulse_norm = pulse_norm(prob.basis, a);
    rec.radius = radius;
    rec.ratio = ratio;
    rec.accepted = accepted;
    rec.wall_seconds = seconds_since(t0);
    rec.propagations = props;
    rep.records.push_back(std::move(rec));
  };

  auto finish = [&](SolveStatus status, double gate, double geo) {
    rep.status = status;
    rep.final_a = a;
    rep.final_gate_error = gate;
    rep.final_geodesic_error = geo;
    rep.total_propagations = props;
    rep.total_seconds = seconds_since(t0);
    return rep;
  };

  double gate = 0.0, err2 = 0.0;
  try {
    auto prop = propagate(prob.system, prob.basis, a);
    ++props;
    auto jd = jacobian(prob.system, prob.basis, a, prob.target, prop);
    gate = gate_error_hs(prop.final_propagator(), prob.target.gate().matrix());
    err2 = jd.res.coords.squaredNorm();

    RadiusState st;
    st.r = opts.initial_radius > 0.0
               ? opts.initial_radius
               : std::max(1e-3, std::min(a.norm() / 10.0, ill_conditioning(jd)));
    st.r = std::clamp(st.r, kRadiusMin, kRadiusMax);

    push_record(0, gate, jd.res.geodesic_error(), st.r, 0.0, true);
    if (gate <= prob.epsilon)
      return finish(SolveStatus::Converged, gate, jd.res.geodesic_error());

    int rejections_at_min = 0;
    for (int n = 1; n <= opts.max_iter; ++n) {
      const double r_used = st.r;
      auto step = newton_step(jd.j, jd.res.coords, r_used);

      const RVector a_cand = a + step.p;
      auto prop_cand = propagate(prob.system, prob.basis, a_cand);
      ++props;
      auto res_cand = residual(prob.target, prop_cand);
      const double err2_cand = res_cand.coords.squaredNorm();

      st = adapt_radius(st, err2 - step.model_value, err2 - err2_cand);
      if (st.accepted) {
        a = a_cand;
        jd = jacobian(prob.system, prob.basis, a, prob.target, prop_cand);
        err2 = err2_cand;
        gate = gate_error_hs(prop_cand.final_propagator(),
                             prob.target.gate().matrix());
        rejections_at_min = 0;
      } else if (st.r <= kRadiusMin) {
        ++rejections_at_min;
      } else {
        rejections_at_min = 0;
      }

      push_record(n, gate, std::sqrt(err2), r_used, st.last_ratio, st.accepted);

      if (gate <= prob.epsilon)
        return finish(SolveStatus::Converged, gate, std::sqrt(err2));
      if (rejections_at_min >= opts.stall_rejections) {
        rep.note = "trust radius pinned at its floor";
        return finish(SolveStatus::Stalled, gate, std::sqrt(err2));
      }
    }
    return finish(SolveStatus::MaxIterations, gate, std::sqrt(err2));
  } catch (const std::exception& ex) {
    rep.note = ex.what();
    return finish(SolveStatus::Stalled, gate, std::sqrt(err2));
  }
}

BfgsOutcome bfgs_minimize(const std::function<double(const RVector&)>& value,
                          const std::function<RVector(const RVector&)>& grad,
                          const RVector& x0, const BfgsOptions& opts,
                          const std::function<bool(const BfgsStep&)>& stop) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  const Eigen::Index n = x0.size();

  BfgsOutcome out;
  out.x = x0;
  RVector g = grad(out.x);
  out.value = value(out.x);
  if (g.norm() <= opts.grad_tol) return out;

  RMatrix h = RMatrix::Identity(n, n);
  bool scaled = false;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    RVector d = -(h * g);
    double m = g.dot(d);
    if (m >= 0.0) {  // not a descent direction, reset the approximation
      h.setIdentity();
      scaled = false;
      d = -g;
      m = g.dot(d);
      if (m >= 0.0) break;  // gradient numerically zero
    }

    // strong Wolfe line search by bracketing bisection
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double alpha = 1.0;
    bool found = false;
    RVector xt, gt;
    double ft = 0.0;
    for (int ev = 0; ev < opts.max_line_search; ++ev) {
      xt = out.x + alpha * d;
      ft = value(xt);
      if (!(ft <= out.value + c1 * alpha * m)) {
        hi = alpha;
      } else {
        gt = grad(xt);
        const double mt = gt.dot(d);
        if (mt < c2 * m) {
          lo = alpha;  // still descending steeply: lengthen
        } else if (mt > -c2 * m) {
          hi = alpha;  // overshot the one-dimensional minimum: shorten
        } else {
          found = true;
          break;
        }
      }
      alpha = std::isinf(hi) ? 2.0 * alpha : 0.5 * (lo + hi);
    }
    if (!found) {
      out.stalled = true;
      break;
    }

    const RVector s = alpha * d;
    const RVector y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h = (sy / y.squaredNorm()) * RMatrix::Identity(n, n);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const RVector hy = h * y;
      h -= rho * (s * hy.transpose() + hy * s.transpose());
      h += rho * rho * (y.dot(hy) + sy) * (s * s.transpose());
    }

    out.x = xt;
    out.value = ft;
    g = gt;

    BfgsStep rec;
    rec.x = out.x;
    rec.value = out.value;
    rec.step_length = s.norm();
    out.steps.push_back(std::move(rec));
    if (stop && stop(out.steps.back())) return out;
    if (g.norm() <= opts.grad_tol) return out;
  }
  return out;
}

SolveReport bfgs_grape_solve(const ProblemSpec& prob, const RVector& a0,
                             const SolveOptions& opts) {
  if (a0.size() != prob.num_parameters())
    throw std::invalid_argument("bfgs_grape_solve: a0 length != R*K");

  const auto t0 = Clock::now();
  SolveReport rep;
  rep.seed = opts.seed;
  rep.problem = prob.name;
  rep.final_a = a0;

  long props = 0;
  struct Eval {
    RVector x;
    PropagationResult prop;
    Residual res;
    bool has_jd = false;
    JacobianData jd;
  } cache;

  auto ensure_val = [&](const RVector& x) -> Eval& {
    if (cache.x.size() != x.size() || cache.x != x) {
      cache.x = x;
      cache.prop = propagate(prob.system, prob.basis, x);
      cache.res = residual(prob.target, cache.prop);
      cache.has_jd = false;
      ++props;
    }
    return cache;
  };
  auto ensure_grad = [&](const RVector& x) -> Eval& {
    auto& e = ensure_val(x);
    if (!e.has_jd) {
      e.jd = jacobian(prob.system, prob.basis, x, prob.target, e.prop);
      e.has_jd = true;
    }
    return e;
  };

  auto value = [&](const RVector& x) {
    return ensure_val(x).res.coords.squaredNorm();
  };
  auto grad = [&](const RVector& x) -> RVector {
    auto& e = ensure_grad(x);
    return 2.0 * (e.jd.j.transpose() * e.jd.res.coords);
  };

  auto record_at = [&](int index, const RVector& x, double step_length) {
    auto& e = ensure_val(x);
    IterationRecord rec;
    rec.index = index;
    rec.gate_error =
        gate_error_hs(e.prop.final_propagator(), prob.target.gate().matrix());
    rec.geodesic_error = e.res.geodesic_error();
    rec.pulse_norm = pulse_norm(prob.basis, x);
    rec.radius = step_length;
    rec.ratio = 0.0;
    rec.accepted = true;
    rec.wall_seconds = seconds_since(t0);
    rec.propagations = props;
    const double gate = rec.gate_error;
    rep.records.push_back(std::move(rec));
    return gate;
  };

  try {
    const double gate0 = record_at(0, a0, 0.0);
    if (gate0 <= prob.epsilon) {
      rep.status = SolveStatus::Converged;
    } else {
      BfgsOptions bopts;
      bopts.max_iter = opts.max_iter;
      int index = 0;
      bool reached = false;
      auto outcome = bfgs_minimize(value, grad, a0, bopts,
                                   [&](const BfgsStep& s) {
                                     const double gate =
                                         record_at(++index, s.x, s.step_length);
                                     reached = gate <= prob.epsilon;
                                     return reached;
                                   });
      rep.final_a = outcome.x;
      if (reached)
        rep.status = SolveStatus::Converged;
      else if (outcome.stalled || outcome.steps.empty())
        rep.status = SolveStatus::Stalled;
      else
        rep.status = SolveStatus::MaxIterations;
      if (outcome.steps.empty()) rep.note = "no descent step taken";
    }
  } catch (const std::exception& ex) {
    rep.note = ex.what();
    rep.status = SolveStatus::Stalled;
  }

  if (!rep.records.empty()) {
    const auto& last = rep.records.back();
    rep.final_gate_error = last.gate_error;
    rep.final_geodesic_error = last.geodesic_error;
  }
  rep.total_propagations = props;
  rep.total_seconds = seconds_since(t0);
  return rep;
}

double find_best_initial_norm(const ProblemSpec& prob,
                              std::optional<double> bound, int grid_size,
                              int samples_per_norm, std::uint64_t seed) {
  if (grid_size < 1)
    throw std::invalid_argument("find_best_initial_norm: grid_size >= 1");
  if (samples_per_norm < 1)
    throw std::invalid_argument("find_best_initial_norm: samples_per_norm >= 1");
  if (bound && *bound <= 0.0)
    throw std::invalid_argument("find_best_initial_norm: bound must be > 0");

  double lo, hi;
  if (bound) {
    lo = *bound / 100.0;
    hi = 4.0 * *bound / 5.0;
  } else {
    // drift-scaled center: norm at which controls compete with the drift
    double mean_ctrl = 0.0;
    for (const auto& hc : prob.system.controls) mean_ctrl += hc.norm();
    mean_ctrl /= std::max(1, prob.system.num_controls());
    double center = std::sqrt(prob.basis.horizon()) * prob.system.h0.norm();
    if (mean_ctrl > 0.0) center /= mean_ctrl;
    if (!(center > 0.0)) center = std::sqrt(prob.basis.horizon());
    lo = center / 100.0;
    hi = center * 100.0;
  }

  const int R = prob.system.num_controls();
  double best_norm = 0.0;
  double best_med = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_size; ++i) {
    const double frac =
        grid_size == 1 ? 0.5 : double(i) / double(grid_size - 1);
    const double norm = lo * std::pow(hi / lo, frac);
    std::vector<double> vals;
    vals.reserve(std::size_t(samples_per_norm));
    for (int s = 0; s < samples_per_norm; ++s) {
      const RVector a = random_pulse(prob.basis, R, norm,
                                     mix_seed(seed, std::uint64_t(i),
                                              std::uint64_t(s)));
      const auto prop = propagate(prob.system, prob.basis, a);
      vals.push_back(
          ill_conditioning(jacobian(prob.system, prob.basis, a, prob.target, prop)));
    }
    const double med = median_of(std::move(vals));
    if (med < best_med) {
      best_med = med;
      best_norm = norm;
    }
  }
  if (std::isinf(best_med))
    throw std::runtime_error(
        "find_best_initial_norm: no norm on the grid gave finite "
        "ill-conditioning (problem likely uncontrollable at this horizon)");
  return best_norm;
}

UnitaryMatrix make_reachable_target(const ControlSystem& sys,
                                    const PulseBasis& basis, double rho,
                                    std::uint64_t seed) {
  const RVector a = random_pulse(basis, sys.num_controls(), rho, seed);
  return UnitaryMatrix(propagate(sys, basis, a).final_propagator());
}

}  // namespace pulseforge

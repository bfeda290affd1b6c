#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pulseforge/objective.hpp"
#include "pulseforge/trustregion.hpp"

namespace pulseforge {

enum class SolveStatus { Converged, MaxIterations, Stalled };

const char* to_string(SolveStatus s);

struct IterationRecord {
  int index = 0;
  double gate_error = 0.0;
  double geodesic_error = 0.0;
  double pulse_norm = 0.0;
  double radius = 0.0;  // radius used for the step (newton) or step length (bfgs)
  double ratio = 0.0;   // model_decrease / |actual_decrease| (newton only)
  bool accepted = false;
  double wall_seconds = 0.0;  // cumulative
  long propagations = 0;      // cumulative
};

struct SolveReport {
  std::vector<IterationRecord> records;
  RVector final_a;
  SolveStatus status = SolveStatus::MaxIterations;
  double final_gate_error = 0.0;
  double final_geodesic_error = 0.0;
  long total_propagations = 0;
  double total_seconds = 0.0;
  std::uint64_t seed = 0;  // caller-supplied provenance (copied from options)
  std::string problem;     // problem name, copied from the problem definition
  std::string note;        // diagnostic detail when a run aborts

  int accepted_iterations() const;
};

struct SolveOptions {
  int max_iter = 200;
  double initial_radius = 0.0;  // 0 selects the default rule
  int stall_rejections = 10;    // consecutive rejections at r_min => Stalled
  std::uint64_t seed = 0;       // recorded in the report, not used by the solver
};

// trust-region Newton iteration on the matrix-log residual
SolveReport newton_raphson_solve(const ProblemSpec& prob, const RVector& a0,
                                 const SolveOptions& opts = {});

// quasi-Newton minimization of the squared geodesic error (baseline)
SolveReport bfgs_grape_solve(const ProblemSpec& prob, const RVector& a0,
                             const SolveOptions& opts = {});

// norm with the smallest median first-order move over random pulse samples,
// scanned on a geometric grid in [bound/100, 4*bound/5]; without a bound the
// grid spans four decades around a drift-scaled heuristic center
double find_best_initial_norm(const ProblemSpec& prob,
                              std::optional<double> bound, int grid_size = 12,
                              int samples_per_norm = 3, std::uint64_t seed = 0);

// reachable target: endpoint propagator of a random pulse of the given norm
UnitaryMatrix make_reachable_target(const ControlSystem& sys,
                                    const PulseBasis& basis, double rho,
                                    std::uint64_t seed);

// generic quasi-Newton engine used by the baseline (exposed for testing)
struct BfgsOptions {
  int max_iter = 200;
  double grad_tol = 1e-10;
  int max_line_search = 40;
};
struct BfgsStep {
  RVector x;
  double value = 0.0;
  double step_length = 0.0;
};
struct BfgsOutcome {
  RVector x;
  double value = 0.0;
  bool stalled = false;
  std::vector<BfgsStep> steps;
};
BfgsOutcome bfgs_minimize(const std::function<double(const RVector&)>& value,
                          const std::function<RVector(const RVector&)>& grad,
                          const RVector& x0, const BfgsOptions& opts,
                          const std::function<bool(const BfgsStep&)>& stop = {});

}  // namespace pulseforge

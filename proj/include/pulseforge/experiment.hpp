#pragma once

#include "pulseforge/config.hpp"
#include "pulseforge/solver.hpp"

namespace pulseforge {

// one solver run fully described: seed, outcome, emitted file paths
struct RunResult {
  std::uint64_t seed = 0;
  SolveReport report;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  std::string csv_path;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::string summary_path;
  bool all_converged = false;
};

// materialized problem + start data for one seed (exposed for tests)
struct PreparedRun {
  ProblemSpec problem;
  RVector a0;
  double initial_norm = 0.0;
};
PreparedRun prepare_run(const ExperimentConfig& cfg, std::uint64_t seed);

// run every seed (optionally in parallel), write per-run iteration CSVs,
// optional spectrum CSVs, and one summary JSON; output ordering and record
// content are independent of the worker count
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SpectrumTable {
  RVector omega;   // angular frequencies, ascending, symmetric about zero
  RMatrix power;   // one column per control: |f_r-hat|^2
};

// sample each control on a uniform grid (midpoint convention), discrete
// Fourier transform, squared magnitudes
SpectrumTable pulse_spectrum(const PulseBasis& basis, const RVector& a,
                             int grid_size);

struct SweepRow {
  double norm = 0.0;
  std::uint64_t seed = 0;
  double ill_cond = 0.0;
  double time_to_eps = 0.0;  // wall seconds; nan when never reached
  double final_norm = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (norm, seed)
  std::string csv_path;
  bool all_converged = false;
};

// one solver run per (norm, seed) cell plus the first-order-move diagnostic
// at that norm; cells may run in parallel, output order is fixed
SweepResult campaign_norm_sweep(const ExperimentConfig& cfg,
                                const std::vector<double>& norms);

void write_iteration_csv(const std::string& path,
                         const std::vector<IterationRecord>& records);
void write_spectrum_csv(const std::string& path, const SpectrumTable& table);

}  // namespace pulseforge

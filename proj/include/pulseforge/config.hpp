#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pulseforge/common.hpp"

namespace pulseforge {

// flat key = value experiment description; '#' starts a comment
struct ExperimentConfig {
  std::string problem = "ising-qft";  // ising-qft | heisenberg-t | custom
  int qubits = 5;
  int K = 0;       // 0 keeps the preset default
  double T = 0.0;  // 0 keeps the preset default
  std::string basis = "pwc";          // pwc | hermite
  std::string algorithm = "newton";   // newton | bfgs
  double epsilon = 1e-4;
  std::optional<double> fluence_bound;
  std::string initial_norm = "auto";  // auto | <number>
  std::vector<std::uint64_t> seeds = {1};
  int max_iter = 200;
  std::string out_dir;  // empty: PULSEFORGE_OUT env var, then "."
  std::string target = "qft";  // qft | file:<path> | derived:<seed>
  std::optional<double> target_norm;  // norm of the derived-target pulse
  bool emit_spectrum = false;
  int spectrum_points = 0;  // 0 selects 8*K
  int workers = 1;
  std::string h0_file;                     // custom problem drift
  std::vector<std::string> control_files;  // custom problem controls
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

// row-major complex matrix file: first token N, then N*N "re im" pairs
CMatrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const CMatrix& m);

// fixed 17-significant-digit decimal formatting used by every emitted file
std::string format_double(double x);

}  // namespace pulseforge

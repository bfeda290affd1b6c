#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pulseforge/algebra.hpp"
#include "pulseforge/common.hpp"

namespace pulseforge {

enum class BasisKind { PiecewiseConstant, Hermite };

// time-dependent amplitude basis b_0..b_{K-1} on [0, T] with its Gram matrix
class PulseBasis {
 public:
  static PulseBasis piecewise_constant(int K, double T);
  static PulseBasis hermite(int K, double T);

  BasisKind kind() const { return kind_; }
  int size() const { return K_; }
  double horizon() const { return T_; }
  const RMatrix& gram() const { return gram_; }
  double hermite_scale() const { return scale_; }

  // value of basis function k at time t; piecewise-constant functions are
  // supported on ((k)T/K, (k+1)T/K], i.e. interior grid points belong to the
  // interval on their left
  double eval(int k, double t) const;

 private:
  PulseBasis() = default;
  BasisKind kind_ = BasisKind::PiecewiseConstant;
  int K_ = 0;
  double T_ = 0.0;
  double scale_ = 1.0;  // Hermite only
  RMatrix gram_;
};

// drift Hamiltonian plus control Hamiltonians, all Hermitian, shared dimension
struct ControlSystem {
  CMatrix h0;
  std::vector<CMatrix> controls;

  Eigen::Index dim() const { return h0.rows(); }
  int num_controls() const { return int(controls.size()); }
};

ControlSystem make_control_system(CMatrix h0, std::vector<CMatrix> controls);

// how the residual treats the target: full su(N) coordinates, or with the
// identity x u(env) directions projected out (gate on a subsystem factor)
enum class TargetProjector { FullSu, Subsystem };

class TargetSpec {
 public:
  static TargetSpec full(UnitaryMatrix v);
  // target W on the system factor, acting as W (x) I on system (x) environment
  static TargetSpec subsystem(const UnitaryMatrix& w_sys, int env_dim);

  const UnitaryMatrix& gate() const { return v_; }
  TargetProjector projector() const { return projector_; }
  int env_dim() const { return env_dim_; }
  // residual coordinate count: N^2-1 minus the projected-out directions
  Eigen::Index residual_dim() const;
  // apply the projector to full su coordinates
  RVector project(const RVector& full_coords) const;

 private:
  explicit TargetSpec(UnitaryMatrix v) : v_(std::move(v)) {}
  UnitaryMatrix v_;
  TargetProjector projector_ = TargetProjector::FullSu;
  int env_dim_ = 1;
  RMatrix complement_;  // orthonormal basis of the kept directions
};

struct ProblemSpec {
  std::string name;
  ControlSystem system;
  PulseBasis basis;
  TargetSpec target;
  double epsilon = 1e-4;
  std::optional<double> fluence_bound;

  int num_parameters() const { return system.num_controls() * basis.size(); }
};

// ferromagnetic-coupling spin chain with site-dependent z fields (n+2) and
// collective x/y controls; target is the discrete Fourier transform gate
ProblemSpec build_ising_qft_problem(int qubits = 5, int K = 1000, double T = 125.0);

// isotropic exchange chain with a strong uniform x drive and a single local
// z control on the first site; target supplied by the caller
ProblemSpec build_heisenberg_tgate_problem(UnitaryMatrix target, int qubits = 5,
                                           int K = 1500, double T = 90.0);

// discrete Fourier transform gate on an N-dimensional register
UnitaryMatrix qft_gate(Eigen::Index n);

// parameters are control-major: a[(r)*K + k] multiplies control r, basis k
Eigen::Index infer_num_controls(const PulseBasis& basis, const RVector& a);

// pulse values f_r(t) for all controls
RVector synthesize(const PulseBasis& basis, const RVector& a, double t);

// integrated-power norm sqrt(sum_r a_r^T G a_r)
double pulse_norm(const PulseBasis& basis, const RVector& a);

// deterministic Gaussian direction normalized to the requested norm
RVector random_pulse(const PulseBasis& basis, int num_controls, double rho,
                     std::uint64_t seed);

// Gauss-Legendre nodes/weights on [a, b]
void gauss_legendre(int n, double a, double b, RVector& nodes, RVector& weights);

}  // namespace pulseforge

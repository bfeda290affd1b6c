#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pulseforge/experiment.hpp"
#include "pulseforge/version.hpp"

namespace py = pybind11;
using namespace pulseforge;

namespace {

// python-facing convenience: one propagation per call, full pipeline inside
double prob_gate_error(const ProblemSpec& prob, const RVector& a) {
  const auto prop = propagate(prob.system, prob.basis, a);
  return gate_error_hs(prop.final_propagator(), prob.target.gate().matrix());
}

RVector prob_residual(const ProblemSpec& prob, const RVector& a) {
  const auto prop = propagate(prob.system, prob.basis, a);
  return residual(prob.target, prop).coords;
}

JacobianData prob_jacobian(const ProblemSpec& prob, const RVector& a) {
  const auto prop = propagate(prob.system, prob.basis, a);
  return jacobian(prob.system, prob.basis, a, prob.target, prop);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "control pulse synthesis by trust-region Newton root finding";
  m.attr("__version__") = PULSEFORGE_VERSION;

  py::class_<PulseBasis>(m, "PulseBasis")
      .def_static("piecewise_constant", &PulseBasis::piecewise_constant,
                  py::arg("K"), py::arg("T"))
      .def_static("hermite", &PulseBasis::hermite, py::arg("K"), py::arg("T"))
      .def_property_readonly("size", &PulseBasis::size)
      .def_property_readonly("horizon", &PulseBasis::horizon)
      .def_property_readonly("gram", &PulseBasis::gram)
      .def_property_readonly("hermite_scale", &PulseBasis::hermite_scale)
      .def("eval", &PulseBasis::eval, py::arg("k"), py::arg("t"));

  py::class_<ControlSystem>(m, "ControlSystem")
      .def(py::init([](const CMatrix& h0, const std::vector<CMatrix>& hs) {
             return make_control_system(h0, hs);
           }),
           py::arg("h0"), py::arg("controls"))
      .def_property_readonly("dim", &ControlSystem::dim)
      .def_property_readonly("num_controls", &ControlSystem::num_controls)
      .def_property_readonly("h0",
                             [](const ControlSystem& s) { return s.h0; })
      .def_property_readonly(
          "controls", [](const ControlSystem& s) { return s.controls; });

  py::class_<TargetSpec>(m, "TargetSpec")
      .def_static(
          "full",
          [](const CMatrix& v) { return TargetSpec::full(UnitaryMatrix(v)); },
          py::arg("gate"))
      .def_static(
          "subsystem",
          [](const CMatrix& w, int env_dim) {
            return TargetSpec::subsystem(UnitaryMatrix(w), env_dim);
          },
          py::arg("gate"), py::arg("env_dim"))
      .def_property_readonly(
          "gate", [](const TargetSpec& t) { return t.gate().matrix(); })
      .def_property_readonly("residual_dim", &TargetSpec::residual_dim);

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def(py::init([](std::string name, ControlSystem system, PulseBasis basis,
                       TargetSpec target, double epsilon,
                       std::optional<double> fluence_bound) {
             return ProblemSpec{std::move(name), std::move(system),
                                std::move(basis), std::move(target), epsilon,
                                fluence_bound};
           }),
           py::arg("name"), py::arg("system"), py::arg("basis"),
           py::arg("target"), py::arg("epsilon") = 1e-4,
           py::arg("fluence_bound") = std::nullopt)
      .def_readwrite("name", &ProblemSpec::name)
      .def_readonly("system", &ProblemSpec::system)
      .def_readonly("basis", &ProblemSpec::basis)
      .def_readonly("target", &ProblemSpec::target)
      .def_readwrite("epsilon", &ProblemSpec::epsilon)
      .def_readwrite("fluence_bound", &ProblemSpec::fluence_bound)
      .def_property_readonly("num_parameters", &ProblemSpec::num_parameters);

  m.def("build_ising_qft_problem", &build_ising_qft_problem,
        py::arg("qubits") = 5, py::arg("K") = 1000, py::arg("T") = 125.0);
  m.def(
      "build_heisenberg_tgate_problem",
      [](const CMatrix& target, int qubits, int K, double T) {
        return build_heisenberg_tgate_problem(UnitaryMatrix(target), qubits, K,
                                              T);
      },
      py::arg("target"), py::arg("qubits") = 5, py::arg("K") = 1500,
      py::arg("T") = 90.0);
  m.def(
      "qft_gate", [](Eigen::Index n) { return qft_gate(n).matrix(); },
      py::arg("n"));

  m.def("synthesize", &synthesize, py::arg("basis"), py::arg("a"),
        py::arg("t"));
  m.def("pulse_norm", &pulse_norm, py::arg("basis"), py::arg("a"));
  m.def("random_pulse", &random_pulse, py::arg("basis"),
        py::arg("num_controls"), py::arg("rho"), py::arg("seed"));

  py::class_<PropagationResult>(m, "PropagationResult")
      .def_property_readonly("times",
                             [](const PropagationResult& p) { return p.times; })
      .def_property_readonly("steps", &PropagationResult::steps)
      .def_property_readonly(
          "final_propagator",
          [](const PropagationResult& p) { return p.final_propagator(); })
      .def_property_readonly(
          "cumulative",
          [](const PropagationResult& p) { return p.cumulative; });

  m.def("propagate", &propagate, py::arg("system"), py::arg("basis"),
        py::arg("a"));
  m.def("propagate_magnus4", &propagate_magnus4, py::arg("system"),
        py::arg("basis"), py::arg("a"), py::arg("S"));

  m.def("gate_error_hs", &gate_error_hs, py::arg("u"), py::arg("v"));
  m.def("gate_error", &prob_gate_error, py::arg("problem"), py::arg("a"));
  m.def("residual_coords", &prob_residual, py::arg("problem"), py::arg("a"));
  m.def(
      "jacobian",
      [](const ProblemSpec& prob, const RVector& a) {
        return prob_jacobian(prob, a).j;
      },
      py::arg("problem"), py::arg("a"));
  m.def(
      "ill_conditioning",
      [](const ProblemSpec& prob, const RVector& a) {
        return ill_conditioning(prob_jacobian(prob, a));
      },
      py::arg("problem"), py::arg("a"));

  py::class_<SubproblemSolution>(m, "SubproblemSolution")
      .def_readonly("p", &SubproblemSolution::p)
      .def_readonly("lam", &SubproblemSolution::lambda)
      .def_readonly("model_value", &SubproblemSolution::model_value)
      .def_readonly("on_boundary", &SubproblemSolution::on_boundary);
  m.def("newton_step", &newton_step, py::arg("j"), py::arg("l"), py::arg("r"));
  m.def("solve_tr_subproblem", &solve_tr_subproblem, py::arg("a"),
        py::arg("g"), py::arg("r"));

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("Converged", SolveStatus::Converged)
      .value("MaxIterations", SolveStatus::MaxIterations)
      .value("Stalled", SolveStatus::Stalled);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("index", &IterationRecord::index)
      .def_readonly("gate_error", &IterationRecord::gate_error)
      .def_readonly("geodesic_error", &IterationRecord::geodesic_error)
      .def_readonly("pulse_norm", &IterationRecord::pulse_norm)
      .def_readonly("radius", &IterationRecord::radius)
      .def_readonly("ratio", &IterationRecord::ratio)
      .def_readonly("accepted", &IterationRecord::accepted)
      .def_readonly("wall_seconds", &IterationRecord::wall_seconds)
      .def_readonly("propagations", &IterationRecord::propagations);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("records", &SolveReport::records)
      .def_readonly("final_a", &SolveReport::final_a)
      .def_readonly("status", &SolveReport::status)
      .def_readonly("final_gate_error", &SolveReport::final_gate_error)
      .def_readonly("final_geodesic_error", &SolveReport::final_geodesic_error)
      .def_readonly("total_propagations", &SolveReport::total_propagations)
      .def_readonly("total_seconds", &SolveReport::total_seconds)
      .def_readonly("note", &SolveReport::note)
      .def_property_readonly("accepted_iterations",
                             &SolveReport::accepted_iterations);

  const auto opts = [](int max_iter, double initial_radius,
                       std::uint64_t seed) {
    SolveOptions o;
    o.max_iter = max_iter;
    o.initial_radius = initial_radius;
    o.seed = seed;
    return o;
  };
  m.def(
      "newton_solve",
      [opts](const ProblemSpec& prob, const RVector& a0, int max_iter,
             double initial_radius, std::uint64_t seed) {
        return newton_raphson_solve(prob, a0,
                                    opts(max_iter, initial_radius, seed));
      },
      py::arg("problem"), py::arg("a0"), py::arg("max_iter") = 200,
      py::arg("initial_radius") = 0.0, py::arg("seed") = 0);
  m.def(
      "bfgs_solve",
      [opts](const ProblemSpec& prob, const RVector& a0, int max_iter,
             std::uint64_t seed) {
        return bfgs_grape_solve(prob, a0, opts(max_iter, 0.0, seed));
      },
      py::arg("problem"), py::arg("a0"), py::arg("max_iter") = 200,
      py::arg("seed") = 0);

  m.def("find_best_initial_norm", &find_best_initial_norm, py::arg("problem"),
        py::arg("fluence_bound") = std::nullopt, py::arg("grid_size") = 12,
        py::arg("samples_per_norm") = 3, py::arg("seed") = 0);
  m.def(
      "make_reachable_target",
      [](const ControlSystem& sys, const PulseBasis& basis, double rho,
         std::uint64_t seed) {
        return make_reachable_target(sys, basis, rho, seed).matrix();
      },
      py::arg("system"), py::arg("basis"), py::arg("rho"), py::arg("seed"));

  m.def(
      "pulse_spectrum",
      [](const PulseBasis& basis, const RVector& a, int grid_size) {
        auto table = pulse_spectrum(basis, a, grid_size);
        return py::make_tuple(std::move(table.omega), std::move(table.power));
      },
      py::arg("basis"), py::arg("a"), py::arg("grid_size"),
      "returns (omega, power) with one power column per control");
}

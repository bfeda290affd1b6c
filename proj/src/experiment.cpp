#include "pulseforge/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "pulseforge/version.hpp"

namespace fs = std::filesystem;

namespace pulseforge {

namespace {

// norm at which the control fluence competes with the drift, used when no
// explicit norm is configured for a derived target
double drift_scaled_norm(const ControlSystem& sys, const PulseBasis& basis) {
  double mean_ctrl = 0.0;
  for (const auto& hc : sys.controls) mean_ctrl += hc.norm();
  mean_ctrl /= std::max(1, sys.num_controls());
  double center = std::sqrt(basis.horizon()) * sys.h0.norm();
  if (mean_ctrl > 0.0) center /= mean_ctrl;
  if (!(center > 0.0)) center = std::sqrt(basis.horizon());
  return center;
}

ProblemSpec finish_problem(ProblemSpec prob, const ExperimentConfig& cfg) {
  if (cfg.basis == "hermite")
    prob.basis = PulseBasis::hermite(prob.basis.size(), prob.basis.horizon());

  if (cfg.target == "qft") {
    prob.target = TargetSpec::full(qft_gate(prob.system.dim()));
  } else if (cfg.target.rfind("file:", 0) == 0) {
    prob.target =
        TargetSpec::full(UnitaryMatrix(load_matrix(cfg.target.substr(5))));
  } else if (cfg.target.rfind("derived:", 0) == 0) {
    const std::uint64_t tseed = std::stoull(cfg.target.substr(8));
    const double rho =
        cfg.target_norm
            ? *cfg.target_norm
            : (cfg.fluence_bound ? *cfg.fluence_bound / 2.0
                                 : drift_scaled_norm(prob.system, prob.basis));
    prob.target =
        TargetSpec::full(make_reachable_target(prob.system, prob.basis, rho, tseed));
  } else {
    throw std::invalid_argument("unknown target: " + cfg.target);
  }

  prob.epsilon = cfg.epsilon;
  prob.fluence_bound = cfg.fluence_bound;
  return prob;
}

ProblemSpec build_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "ising-qft")
    return finish_problem(
        build_ising_qft_problem(cfg.qubits, cfg.K > 0 ? cfg.K : 1000,
                                cfg.T > 0.0 ? cfg.T : 125.0),
        cfg);
  if (cfg.problem == "heisenberg-t") {
    const Eigen::Index n = Eigen::Index(1) << cfg.qubits;
    return finish_problem(
        build_heisenberg_tgate_problem(UnitaryMatrix(CMatrix::Identity(n, n)),
                                       cfg.qubits, cfg.K > 0 ? cfg.K : 1500,
                                       cfg.T > 0.0 ? cfg.T : 90.0),
        cfg);
  }
  if (cfg.problem == "custom") {
    if (cfg.K <= 0 || cfg.T <= 0.0)
      throw std::invalid_argument("custom problem requires explicit K and T");
    CMatrix h0 = load_matrix(cfg.h0_file);
    std::vector<CMatrix> controls;
    controls.reserve(cfg.control_files.size());
    for (const auto& path : cfg.control_files) controls.push_back(load_matrix(path));
    const Eigen::Index n = h0.rows();
    return finish_problem(
        ProblemSpec{"custom",
                    make_control_system(std::move(h0), std::move(controls)),
                    PulseBasis::piecewise_constant(cfg.K, cfg.T),
                    TargetSpec::full(UnitaryMatrix(CMatrix::Identity(n, n))),
                    cfg.epsilon, cfg.fluence_bound},
        cfg);
  }
  throw std::invalid_argument("unknown problem: " + cfg.problem);
}

std::string resolve_out_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("PULSEFORGE_OUT"); env && *env) return env;
  return ".";
}

// run `count` independent cells on up to `workers` threads; every cell writes
// only its own slot, so results are identical for any worker count
void run_cells(int workers, std::size_t count,
               const std::function<void(std::size_t)>& cell) {
  if (count == 0) return;
  const int nw = int(std::min(std::size_t(std::max(workers, 1)), count));
  if (nw == 1) {
    for (std::size_t i = 0; i < count; ++i) cell(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(nw));
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          cell(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

nlohmann::json config_echo(const ExperimentConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(serialize_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

nlohmann::json run_to_json(const RunResult& run) {
  nlohmann::json j;
  j["seed"] = run.seed;
  j["status"] = to_string(run.report.status);
  j["final_gate_error"] = run.report.final_gate_error;
  j["final_geodesic_error"] = run.report.final_geodesic_error;
  j["initial_norm"] = run.initial_norm;
  j["final_norm"] = run.final_norm;
  j["accepted_iterations"] = run.report.accepted_iterations();
  j["total_propagations"] = run.report.total_propagations;
  j["total_seconds"] = run.report.total_seconds;
  j["csv"] = run.csv_path;
  if (!run.report.note.empty()) j["note"] = run.report.note;
  return j;
}

}  // namespace

PreparedRun prepare_run(const ExperimentConfig& cfg, std::uint64_t seed) {
  ProblemSpec prob = build_problem(cfg);
  const double rho =
      cfg.initial_norm == "auto"
          ? find_best_initial_norm(prob, prob.fluence_bound, 12, 3, seed)
          : std::stod(cfg.initial_norm);
  RVector a0 =
      random_pulse(prob.basis, prob.system.num_controls(), rho, seed);
  return PreparedRun{std::move(prob), std::move(a0), rho};
}

void write_iteration_csv(const std::string& path,
                         const std::vector<IterationRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "iter,gate_error,geodesic_error,pulse_norm,radius,ratio,accepted,"
         "wall_seconds\n";
  for (const auto& r : records)
    out << r.index << ',' << format_double(r.gate_error) << ','
        << format_double(r.geodesic_error) << ','
        << format_double(r.pulse_norm) << ',' << format_double(r.radius) << ','
        << format_double(r.ratio) << ',' << (r.accepted ? 1 : 0) << ','
        << format_double(r.wall_seconds) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_spectrum_csv(const std::string& path, const SpectrumTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "omega";
  for (Eigen::Index r = 0; r < table.power.cols(); ++r) out << ",power_" << r;
  out << "\n";
  for (Eigen::Index i = 0; i < table.omega.size(); ++i) {
    out << format_double(table.omega(i));
    for (Eigen::Index r = 0; r < table.power.cols(); ++r)
      out << ',' << format_double(table.power(i, r));
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const std::string out_dir = resolve_out_dir(cfg);
  fs::create_directories(out_dir);

  ExperimentResult result;
  result.runs.resize(cfg.seeds.size());

  run_cells(cfg.workers, cfg.seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const PreparedRun pr = prepare_run(cfg, seed);
    SolveOptions opts;
    opts.max_iter = cfg.max_iter;
    opts.seed = seed;
    SolveReport rep = cfg.algorithm == "bfgs"
                          ? bfgs_grape_solve(pr.problem, pr.a0, opts)
                          : newton_raphson_solve(pr.problem, pr.a0, opts);

    RunResult& run = result.runs[i];
    run.seed = seed;
    run.initial_norm = pr.initial_norm;
    run.final_norm = pulse_norm(pr.problem.basis, rep.final_a);
    run.csv_path =
        (fs::path(out_dir) / ("run_seed" + std::to_string(seed) + ".csv"))
            .string();
    write_iteration_csv(run.csv_path, rep.records);
    if (cfg.emit_spectrum) {
      const int points =
          cfg.spectrum_points > 0 ? cfg.spectrum_points : 8 * pr.problem.basis.size();
      const SpectrumTable table =
          pulse_spectrum(pr.problem.basis, rep.final_a, points);
      write_spectrum_csv(
          (fs::path(out_dir) / ("spectrum_seed" + std::to_string(seed) + ".csv"))
              .string(),
          table);
    }
    run.report = std::move(rep);
  });

  result.all_converged = !result.runs.empty();
  for (const auto& run : result.runs)
    if (run.report.status != SolveStatus::Converged) result.all_converged = false;

  nlohmann::json summary;
  summary["library_version"] = PULSEFORGE_VERSION;
  summary["config"] = config_echo(cfg);
  summary["all_converged"] = result.all_converged;
  summary["runs"] = nlohmann::json::array();
  for (const auto& run : result.runs) summary["runs"].push_back(run_to_json(run));

  result.summary_path = (fs::path(out_dir) / "summary.json").string();
  std::ofstream out(result.summary_path);
  if (!out) throw std::runtime_error("cannot write summary: " + result.summary_path);
  out << summary.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + result.summary_path);
  return result;
}

SpectrumTable pulse_spectrum(const PulseBasis& basis, const RVector& a,
                             int grid_size) {
  if (grid_size < 2)
    throw std::invalid_argument("pulse_spectrum: grid_size >= 2");
  const Eigen::Index R = infer_num_controls(basis, a);
  const int n = grid_size;
  const double T = basis.horizon();
  const double dt = T / n;

  RMatrix f(R, n);
  for (int l = 0; l < n; ++l) f.col(l) = synthesize(basis, a, (l + 0.5) * dt);

  const int half = n / 2;
  SpectrumTable table;
  table.omega.resize(2 * half + 1);
  table.power.resize(2 * half + 1, R);
  const double pi = std::acos(-1.0);

  for (int j = -half; j <= half; ++j) {
    const double w = 2.0 * pi * double(j) / T;
    // incremental rotation through e^{-i w t_l} on the midpoint grid
    Complex rot = std::polar(1.0, -w * 0.5 * dt);
    const Complex step = std::polar(1.0, -w * dt);
    CVector acc = CVector::Zero(R);
    for (int l = 0; l < n; ++l) {
      acc += f.col(l).cast<Complex>() * rot;
      rot *= step;
    }
    const Eigen::Index row = j + half;
    table.omega(row) = w;
    for (Eigen::Index r = 0; r < R; ++r) {
      const Complex v = dt * acc(r);
      table.power(row, r) = std::norm(v);
    }
  }
  return table;
}

SweepResult campaign_norm_sweep(const ExperimentConfig& cfg,
                                const std::vector<double>& norms) {
  if (norms.empty())
    throw std::invalid_argument("campaign_norm_sweep: empty norm grid");
  for (double norm : norms)
    if (!(norm > 0.0))
      throw std::invalid_argument("campaign_norm_sweep: norms must be > 0");

  const std::string out_dir = resolve_out_dir(cfg);
  fs::create_directories(out_dir);
  const ProblemSpec prob = build_problem(cfg);
  const int R = prob.system.num_controls();
  const std::size_t nseeds = cfg.seeds.size();

  SweepResult result;
  result.rows.resize(norms.size() * nseeds);

  run_cells(cfg.workers, result.rows.size(), [&](std::size_t i) {
    const double norm = norms[i / nseeds];
    const std::uint64_t seed = cfg.seeds[i % nseeds];
    const RVector a0 = random_pulse(prob.basis, R, norm, seed);
    const auto prop = propagate(prob.system, prob.basis, a0);
    const double ill =
        ill_conditioning(jacobian(prob.system, prob.basis, a0, prob.target, prop));

    SolveOptions opts;
    opts.max_iter = cfg.max_iter;
    opts.seed = seed;
    const SolveReport rep = cfg.algorithm == "bfgs"
                                ? bfgs_grape_solve(prob, a0, opts)
                                : newton_raphson_solve(prob, a0, opts);

    SweepRow& row = result.rows[i];
    row.norm = norm;
    row.seed = seed;
    row.ill_cond = ill;
    row.time_to_eps = std::numeric_limits<double>::quiet_NaN();
    for (const auto& rec : rep.records)
      if (rec.gate_error <= prob.epsilon) {
        row.time_to_eps = rec.wall_seconds;
        break;
      }
    row.final_norm = pulse_norm(prob.basis, rep.final_a);
  });

  // a cell converged iff it recorded a time to epsilon
  result.all_converged = true;
  for (const auto& row : result.rows)
    if (std::isnan(row.time_to_eps)) result.all_converged = false;

  result.csv_path = (fs::path(out_dir) / "sweep.csv").string();
  std::ofstream out(result.csv_path);
  if (!out) throw std::runtime_error("cannot write csv: " + result.csv_path);
  out << "norm,seed,ill_conditioning,time_to_eps,final_norm\n";
  for (const auto& row : result.rows)
    out << format_double(row.norm) << ',' << row.seed << ','
        << format_double(row.ill_cond) << ',' << format_double(row.time_to_eps)
        << ',' << format_double(row.final_norm) << "\n";
  if (!out) throw std::runtime_error("write failed: " + result.csv_path);
  return result;
}

}  // namespace pulseforge

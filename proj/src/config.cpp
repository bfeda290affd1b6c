#include "pulseforge/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pulseforge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_positive(const std::string& v, const char* key) {
  std::size_t used = 0;
  const double x = std::stod(v, &used);
  if (used != v.size() || !(x > 0.0))
    throw std::invalid_argument(std::string("config: ") + key +
                                " must be a positive number, got '" + v + "'");
  return x;
}

int parse_positive_int(const std::string& v, const char* key) {
  std::size_t used = 0;
  const long x = std::stol(v, &used);
  if (used != v.size() || x <= 0)
    throw std::invalid_argument(std::string("config: ") + key +
                                " must be a positive integer, got '" + v + "'");
  return int(x);
}

bool parse_bool(const std::string& v, const char* key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument(std::string("config: ") + key +
                              " must be true or false, got '" + v + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " has an empty key or value");

    if (key == "problem") {
      if (val != "ising-qft" && val != "heisenberg-t" && val != "custom")
        throw std::invalid_argument("config: unknown problem '" + val + "'");
      cfg.problem = val;
    } else if (key == "qubits") {
      cfg.qubits = parse_positive_int(val, "qubits");
    } else if (key == "K") {
      cfg.K = parse_positive_int(val, "K");
    } else if (key == "T") {
      cfg.T = parse_positive(val, "T");
    } else if (key == "basis") {
      if (val != "pwc" && val != "hermite")
        throw std::invalid_argument("config: unknown basis '" + val + "'");
      cfg.basis = val;
    } else if (key == "algorithm") {
      if (val != "newton" && val != "bfgs")
        throw std::invalid_argument("config: unknown algorithm '" + val + "'");
      cfg.algorithm = val;
    } else if (key == "epsilon") {
      cfg.epsilon = parse_positive(val, "epsilon");
    } else if (key == "fluence_bound") {
      cfg.fluence_bound = parse_positive(val, "fluence_bound");
    } else if (key == "initial_norm") {
      if (val != "auto") parse_positive(val, "initial_norm");
      cfg.initial_norm = val;
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& item : split_list(val)) {
        std::size_t used = 0;
        cfg.seeds.push_back(std::stoull(item, &used));
        if (used != item.size())
          throw std::invalid_argument("config: bad seed '" + item + "'");
      }
      if (cfg.seeds.empty())
        throw std::invalid_argument("config: seeds list is empty");
    } else if (key == "max_iter") {
      cfg.max_iter = parse_positive_int(val, "max_iter");
    } else if (key == "out_dir") {
      cfg.out_dir = val;
    } else if (key == "target") {
      if (val != "qft" && val.rfind("file:", 0) != 0 &&
          val.rfind("derived:", 0) != 0)
        throw std::invalid_argument("config: unknown target '" + val + "'");
      cfg.target = val;
    } else if (key == "target_norm") {
      cfg.target_norm = parse_positive(val, "target_norm");
    } else if (key == "emit_spectrum") {
      cfg.emit_spectrum = parse_bool(val, "emit_spectrum");
    } else if (key == "spectrum_points") {
      cfg.spectrum_points = parse_positive_int(val, "spectrum_points");
    } else if (key == "workers") {
      cfg.workers = parse_positive_int(val, "workers");
    } else if (key == "h0_file") {
      cfg.h0_file = val;
    } else if (key == "control_files") {
      cfg.control_files = split_list(val);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (cfg.problem == "custom" &&
      (cfg.h0_file.empty() || cfg.control_files.empty()))
    throw std::invalid_argument(
        "config: custom problem needs h0_file and control_files");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "problem = " << cfg.problem << "\n";
  out << "qubits = " << cfg.qubits << "\n";
  if (cfg.K > 0) out << "K = " << cfg.K << "\n";
  if (cfg.T > 0.0) out << "T = " << format_double(cfg.T) << "\n";
  out << "basis = " << cfg.basis << "\n";
  out << "algorithm = " << cfg.algorithm << "\n";
  out << "epsilon = " << format_double(cfg.epsilon) << "\n";
  if (cfg.fluence_bound)
    out << "fluence_bound = " << format_double(*cfg.fluence_bound) << "\n";
  out << "initial_norm = " << cfg.initial_norm << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    out << (i ? "," : "") << cfg.seeds[i];
  out << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  if (!cfg.out_dir.empty()) out << "out_dir = " << cfg.out_dir << "\n";
  out << "target = " << cfg.target << "\n";
  if (cfg.target_norm)
    out << "target_norm = " << format_double(*cfg.target_norm) << "\n";
  out << "emit_spectrum = " << (cfg.emit_spectrum ? "true" : "false") << "\n";
  if (cfg.spectrum_points > 0)
    out << "spectrum_points = " << cfg.spectrum_points << "\n";
  out << "workers = " << cfg.workers << "\n";
  if (!cfg.h0_file.empty()) out << "h0_file = " << cfg.h0_file << "\n";
  if (!cfg.control_files.empty()) {
    out << "control_files = ";
    for (std::size_t i = 0; i < cfg.control_files.size(); ++i)
      out << (i ? "," : "") << cfg.control_files[i];
    out << "\n";
  }
  return out.str();
}

CMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  Eigen::Index n = 0;
  if (!(in >> n) || n <= 0)
    throw std::runtime_error("matrix file " + path +
                             ": expected a positive dimension header");
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double re = 0.0, im = 0.0;
      if (!(in >> re >> im))
        throw std::runtime_error("matrix file " + path +
                                 ": truncated at entry (" + std::to_string(i) +
                                 ", " + std::to_string(j) + ")");
      m(i, j) = Complex(re, im);
    }
  return m;
}

void save_matrix(const std::string& path, const CMatrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("save_matrix: matrix must be square");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path);
  out << m.rows() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j).real()) << ' '
          << format_double(m(i, j).imag());
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pulseforge

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qzo/harness.hpp"

namespace qzo {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto p = line.find('#'); p != std::string::npos) line.erase(p);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = " (line " + std::to_string(lineno) + ")";
    if (eq == std::string::npos) throw ConfigError("expected 'section.key = value'" + where);
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
      throw ConfigError("key '" + key + "' is not of the form section.key" + where);
    if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'" + where);
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, v] : kv) {
    SolverConfig& s = cfg.solver;
    if (key == "problem.name") cfg.problem = v;
    else if (key == "problem.file") cfg.instance_file = v;
    else if (key == "problem.d") cfg.d = int(to_int(key, v));
    else if (key == "problem.kappa") cfg.kappa = to_double(key, v);
    else if (key == "problem.geometry") cfg.geometry = v;
    else if (key == "solver.method") s.method = parse_method(v);
    else if (key == "solver.eps") s.epsilon = to_double(key, v);
    else if (key == "solver.T") s.T = to_int(key, v);
    else if (key == "solver.eta") s.eta = to_double(key, v);
    else if (key == "solver.R") s.R = to_double(key, v);
    else if (key == "solver.backend") s.backend = parse_backend(v);
    else if (key == "solver.sigma") s.sigma = to_double(key, v);
    else if (key == "solver.r1") s.r1 = to_double(key, v);
    else if (key == "solver.mp_constant") s.mp_constant = to_double(key, v);
    else if (key == "solver.record_stride") s.record_stride = to_int(key, v);
    else if (key == "oracle.theta") cfg.theta = to_double(key, v);
    else if (key == "oracle.mode") cfg.noise_mode = parse_noise_mode(v);
    else if (key == "oracle.seed") cfg.seed = std::uint64_t(to_int(key, v));
    else if (key == "run.repetitions" || key == "run.reps") cfg.repetitions = int(to_int(key, v));
    else if (key == "run.out") cfg.out_dir = v;
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ConfigError("theta must be finite and >= 0");
  if (!(solver.epsilon > 0.0)) throw ConfigError("eps must be positive");
  if (solver.T && *solver.T < 1) throw ConfigError("T must be >= 1");
  if (solver.record_stride < 1) throw ConfigError("record_stride must be >= 1");
  if (!instance_file.empty()) {
    if (!std::filesystem::exists(instance_file)) throw IoError("instance file '" + instance_file + "' does not exist");
  } else if (d < 1) {
    throw ConfigError("problem.d must be >= 1");
  }
  if (!geometry.empty() && geometry != "euclidean" && geometry != "entropy")
    throw ConfigError("problem.geometry must be 'euclidean' or 'entropy'");
  if (out_dir.empty()) throw ConfigError("output directory is empty");
}

// ---- traces ----------------------------------------------------------------

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "iter,f_value,gap,charged_queries,actual_evals,wallclock_ms\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iter << ',' << fmt(r.f_value) << ',' << fmt(r.gap) << ',' << r.charged_queries << ',' << r.actual_evals
        << ',' << fmt(r.wallclock_ms) << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "iter,f_value,gap,charged_queries,actual_evals,wallclock_ms")
    throw LoadError("trace CSV: unexpected header");
  std::vector<TraceRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string f[6];
    for (int i = 0; i < 6; ++i)
      if (!std::getline(ss, f[i], ',')) throw LoadError("trace CSV: short row at line " + std::to_string(lineno));
    try {
      TraceRecord r;
      r.iter = std::stoll(f[0]);
      r.f_value = std::strtod(f[1].c_str(), nullptr);
      r.gap = std::strtod(f[2].c_str(), nullptr);
      r.charged_queries = std::stoull(f[3]);
      r.actual_evals = std::stoull(f[4]);
      r.wallclock_ms = std::strtod(f[5].c_str(), nullptr);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw LoadError("trace CSV: bad value at line " + std::to_string(lineno));
    }
  }
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InvalidInput("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

GapSummary summarize(const std::vector<RunTrace>& runs) {
  GapSummary s;
  s.runs = int(runs.size());
  if (runs.empty()) return s;
  std::vector<double> gaps;
  for (const RunTrace& r : runs) {
    gaps.push_back(r.final_gap());
    if (!r.records.empty()) {
      s.total_charged += r.records.back().charged_queries;
      s.total_actual += r.records.back().actual_evals;
    }
  }
  s.median_gap = quantile(gaps, 0.5);
  s.q1_gap = quantile(gaps, 0.25);
  s.q3_gap = quantile(gaps, 0.75);
  return s;
}

void write_summary(std::ostream& out, const GapSummary& s) {
  out << "runs\t" << s.runs << "\nmedian_gap\t" << fmt(s.median_gap) << "\nq1_gap\t" << fmt(s.q1_gap)
      << "\nq3_gap\t" << fmt(s.q3_gap) << "\ntotal_charged_queries\t" << s.total_charged
      << "\ntotal_actual_evals\t" << s.total_actual << '\n';
}

GapSummary read_summary(std::istream& in) {
  GapSummary s;
  std::string key, value;
  while (in >> key >> value) {
    if (key == "runs") s.runs = std::stoi(value);
    else if (key == "median_gap") s.median_gap = std::strtod(value.c_str(), nullptr);
    else if (key == "q1_gap") s.q1_gap = std::strtod(value.c_str(), nullptr);
    else if (key == "q3_gap") s.q3_gap = std::strtod(value.c_str(), nullptr);
    else if (key == "total_charged_queries") s.total_charged = std::stoull(value);
    else if (key == "total_actual_evals") s.total_actual = std::stoull(value);
    else throw LoadError("summary: unknown key '" + key + "'");
  }
  return s;
}

}  // namespace qzo

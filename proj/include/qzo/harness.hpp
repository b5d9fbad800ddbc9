#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qzo/solvers.hpp"
#include "qzo/whitebox.hpp"

namespace qzo {

// ---- built-in problems ----------------------------------------------------

struct BuiltinProblem {
  ObjectiveSpec spec;
  // Radius about the optimum containing every iterate, used by qgd_convex when known.
  std::optional<double> sublevel_radius;
  // Start point when the domain's default start is a poor choice (e.g. the optimum).
  std::optional<Vector> start;
  MirrorGeometry geometry = MirrorGeometry::euclidean(1);
};

std::vector<std::string> builtin_names();
// p is the norm in which G (and L) are stated: 2 for Euclidean methods, 1 for simplex mirror methods.
BuiltinProblem make_builtin(const std::string& name, int d, double p = 2.0, double kappa = 10.0);
// Weights of the linear and log-sum-exp objectives: c_0 = 0, c_j = 1/2 + (j-1)/(2 max(1, d-2)).
Vector builtin_cost_vector(int d);
std::optional<ZsgInstance> builtin_game(const std::string& name);
// Norm used by `method` on `problem`: 1 for mirror methods on simplex problems, else 2.
double default_norm_p(Method method, const std::string& problem);

// ---- configuration ---------------------------------------------------------

// Parses `section.key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> load_config(const std::string& path);

struct ExperimentConfig {
  std::string problem = "quadratic";
  std::string instance_file;
  int d = 2;
  double kappa = 10.0;
  std::string geometry;  // empty: the problem's default
  SolverConfig solver;
  double theta = 0.0;
  NoiseMode noise_mode = NoiseMode::hash;
  std::uint64_t seed = 0;
  int repetitions = 1;
  std::string out_dir = "out";

  void validate() const;
};

// Applies recognised keys onto cfg; unknown keys raise ConfigError.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

// ---- traces ----------------------------------------------------------------

void write_trace_csv(std::ostream& out, const RunTrace& trace);
std::vector<TraceRecord> read_trace_csv(std::istream& in);

struct GapSummary {
  int runs = 0;
  double median_gap = 0.0;
  double q1_gap = 0.0;
  double q3_gap = 0.0;
  std::uint64_t total_charged = 0;
  std::uint64_t total_actual = 0;
};

// Linear-interpolation quantile of unsorted data.
double quantile(std::vector<double> v, double q);
GapSummary summarize(const std::vector<RunTrace>& runs);
void write_summary(std::ostream& out, const GapSummary& s);
GapSummary read_summary(std::istream& in);

struct ExperimentResult {
  std::vector<RunTrace> runs;
  std::vector<std::string> trace_paths;
  std::string summary_path;
  GapSummary summary;
};

// Seed of repetition i.
std::uint64_t repetition_seed(std::uint64_t base, int i);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// ---- rates -----------------------------------------------------------------

struct SlopeReport {
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

SlopeReport fit_rate(const std::vector<std::pair<double, double>>& points);

struct SweepSpec {
  std::string problem;
  int d = 2;
  double kappa = 10.0;
  Method method = Method::qpsm;
  std::vector<std::int64_t> Ts;
  int repetitions = 5;
  std::uint64_t seed = 1;
  // theta = theta_multiplier * (method's budget at the eps matching each T), unless theta_abs is set.
  double theta_multiplier = 1.0;
  std::optional<double> theta_abs;
  NoiseMode noise_mode = NoiseMode::hash;
  std::optional<Backend> backend;
};

struct SweepPoint {
  std::int64_t T = 0;
  double epsilon = 0.0;
  double theta = 0.0;
  std::vector<double> final_gaps;
  double median_gap = 0.0;
  // Every run's charged count matched the closed form.
  bool accounting_exact = true;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  SlopeReport fit;
};

// Accuracy matching an iteration budget, inverting each method's iteration-count formula.
double epsilon_for_iterations(Method method, const BuiltinProblem& prob, std::int64_t T, double mp_constant = 4.0);
// Precision budget of a method at accuracy eps.
double method_theta_budget(Method method, const BuiltinProblem& prob, double eps, double mp_constant = 4.0);
// Closed-form charged-query count of a finished run.
std::uint64_t expected_charged_queries(const RunTrace& trace, int d, double G);

RunTrace run_builtin(const BuiltinProblem& prob, const SolverConfig& cfg, double theta, NoiseMode mode);
SweepResult run_sweep(const SweepSpec& spec);

// ---- regimes ---------------------------------------------------------------

struct RegimeRow {
  double m = 0.0;
  double inv_eps = 0.0;
  double cost_qmd = 0.0;        // m sqrt(n) / eps^2
  double cost_classical = 0.0;  // (m + n) / eps^2
  double cost_qmwu = 0.0;       // sqrt(m + n) / eps^2.5 + 1 / eps^3
  std::string label;
};

std::vector<RegimeRow> zsg_regimes(const std::vector<double>& ms, const std::vector<double>& inv_eps);
void emit_zsg_regimes(std::ostream& out, const std::vector<double>& ms, const std::vector<double>& inv_eps);
// n points spaced geometrically on [lo, hi].
std::vector<double> geometric_range(double lo, double hi, int n);

}  // namespace qzo

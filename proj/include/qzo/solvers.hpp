#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qzo/core.hpp"
#include "qzo/geometry.hpp"
#include "qzo/qgrad.hpp"

namespace qzo {

enum class Method { qpsm, qgd_convex, qgd_pl, qmd, qda, qmp };

Method parse_method(const std::string& s);
std::string to_string(Method m);

struct SolverConfig {
  Method method = Method::qpsm;
  double epsilon = 0.1;
  std::optional<std::int64_t> T;
  std::optional<double> eta;
  std::optional<double> R;
  std::uint64_t seed = 0;
  // Defaults: fd for qpsm/qmd/qda, statevector for qgd_*/qmp.
  std::optional<Backend> backend;
  std::optional<Vector> x0;
  // Overrides of derived parameters.
  std::optional<double> sigma;
  std::optional<double> r1;
  // Constant c in the mirror-prox iteration count c L R^2 / (mu eps).
  double mp_constant = 4.0;
  // Keep every k-th record (the final iteration is always kept).
  std::int64_t record_stride = 1;
};

struct TraceRecord {
  std::int64_t iter = 0;
  double f_value = 0.0;  // at the method's output iterate (running average or last point)
  double gap = 0.0;      // NaN when f_star is unknown
  std::uint64_t charged_queries = 0;
  std::uint64_t actual_evals = 0;
  double wallclock_ms = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  Vector final_point;
  Vector final_average;
  std::uint64_t seed = 0;
  std::string config_echo;

  Method method = Method::qpsm;
  Backend backend = Backend::finite_difference;
  std::int64_t T = 0;           // configured iteration budget
  std::int64_t iterations = 0;  // iterations actually run
  double eta = 0.0;
  double theta_budget = 0.0;
  bool theta_over_budget = false;
  bool downgraded = false;
  bool terminated_early = false;
  // Charge of one gradient/subgradient estimate when it is constant over the run.
  std::uint64_t per_estimate_charge = 0;
  // qgd_convex: target sigma of each estimate, and the number of charged gap evaluations.
  std::vector<double> sigma_schedule;
  std::uint64_t gap_evaluations = 0;

  double final_gap() const { return records.empty() ? 0.0 : records.back().gap; }
  double final_value() const { return records.empty() ? 0.0 : records.back().f_value; }
};

// Hidden constant of the nonsmooth precision budgets. At 1 the emulated subgradient error at the
// budget is roughly 13 eps per coordinate for entropic mirror descent, which swamps runs with T <= 1e3.
inline constexpr double kNonsmoothBudgetConstant = 1e-3;

// Precision budgets for projected subgradient and mirror descent / dual averaging.
double qpsm_theta_budget(double eps, double G, double R, int d);
double md_theta_budget(double eps, double G, double R, double K, double mu, const NormSpec& norms, int d);

// Derived iteration counts.
std::int64_t qpsm_iterations(double eps, double G, double R);
std::int64_t md_iterations(double eps, double G, double R, double mu);
// Default R for mirror methods: sqrt(log dim) for entropy setups from the uniform start,
// otherwise the domain diameter in the geometry's norm.
double default_mirror_radius(const MirrorGeometry& geom, const DomainSpec& domain);

RunTrace qpsm_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg);
RunTrace qgd_convex_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg);
RunTrace qgd_pl_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg);
RunTrace qmd_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
                   const MirrorGeometry& geom);
RunTrace qda_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
                   const MirrorGeometry& geom);
RunTrace qmp_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
                   const MirrorGeometry& geom);

// Dispatch on cfg.method; geometry is ignored by qpsm and qgd_*.
RunTrace solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
               const MirrorGeometry& geom);

}  // namespace qzo

#include <chrono>
#include <cmath>
#include <sstream>

#include "qzo/solvers.hpp"

namespace qzo {

Method parse_method(const std::string& s) {
  if (s == "qpsm") return Method::qpsm;
  if (s == "qgd_convex" || s == "qgd-convex") return Method::qgd_convex;
  if (s == "qgd_pl" || s == "qgd-pl") return Method::qgd_pl;
  if (s == "qmd") return Method::qmd;
  if (s == "qda") return Method::qda;
  if (s == "qmp") return Method::qmp;
  throw ConfigError("unknown method '" + s + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::qpsm: return "qpsm";
    case Method::qgd_convex: return "qgd_convex";
    case Method::qgd_pl: return "qgd_pl";
    case Method::qmd: return "qmd";
    case Method::qda: return "qda";
    case Method::qmp: return "qmp";
  }
  return "?";
}

double qpsm_theta_budget(double eps, double G, double R, int d) {
  return kNonsmoothBudgetConstant * std::pow(eps, 5) / (std::pow(G, 4) * std::pow(R, 4) * std::pow(double(d), 4.5));
}

double md_theta_budget(double eps, double G, double R, double K, double mu, const NormSpec& norms, int d) {
  return kNonsmoothBudgetConstant * mu * std::pow(eps, 5) /
         (std::pow(G, 4) * R * R * K * K * norms.vartheta_star * norms.vartheta_star * norms.vartheta *
          std::pow(double(d), 3));
}

std::int64_t qpsm_iterations(double eps, double G, double R) {
  return std::max<std::int64_t>(1, std::int64_t(std::ceil(std::pow(3.0 * R * G / eps, 2))));
}

std::int64_t md_iterations(double eps, double G, double R, double mu) {
  return std::max<std::int64_t>(1, std::int64_t(std::ceil(std::pow(6.0 * G * R / (std::sqrt(mu) * eps), 2))));
}

double default_mirror_radius(const MirrorGeometry& geom, const DomainSpec& domain) {
  switch (geom.setup()) {
    case MirrorSetup::simplex_entropy:
      return std::sqrt(std::max(std::log(double(domain.dim())), 1e-12) * domain.scale());
    case MirrorSetup::spectraplex_entropy:
      return std::sqrt(std::max(std::log(double(domain.matrix_n())), 1e-12));
    case MirrorSetup::euclidean:
      break;
  }
  return domain.diameter(geom.norm().p);
}

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
 public:
  Recorder(const ObjectiveSpec& p, const NoisyOracle& o, RunTrace& t, std::int64_t stride, std::int64_t last)
      : problem_(p), oracle_(o), trace_(t), stride_(std::max<std::int64_t>(1, stride)), last_(last),
        start_(Clock::now()) {}

  void record(std::int64_t iter, const Vector& out, bool force = false) {
    if (!force && iter % stride_ != 0 && iter != last_) return;
    TraceRecord r;
    r.iter = iter;
    r.f_value = problem_.evaluator(out);
    r.gap = problem_.f_star ? r.f_value - *problem_.f_star : std::numeric_limits<double>::quiet_NaN();
    r.charged_queries = oracle_.charged_queries();
    r.actual_evals = oracle_.actual_evals();
    r.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    // Same iteration again: refresh the counters instead of duplicating the row.
    if (!trace_.records.empty() && trace_.records.back().iter == iter) trace_.records.back() = r;
    else trace_.records.push_back(r);
  }

 private:
  const ObjectiveSpec& problem_;
  const NoisyOracle& oracle_;
  RunTrace& trace_;
  std::int64_t stride_;
  std::int64_t last_;
  Clock::time_point start_;
};

void check_oracle(const ObjectiveSpec& problem, const NoisyOracle& oracle) {
  problem.validate();
  if (oracle.base().d != problem.d) throw ShapeError("solver: oracle/problem dimension mismatch");
}

Vector start_point(const ObjectiveSpec& problem, const SolverConfig& cfg) {
  Vector x = cfg.x0 ? *cfg.x0 : problem.domain.default_start();
  if (x.size() != problem.d) throw ShapeError("solver: start point dimension mismatch");
  if (!problem.domain.contains(x)) throw InvalidInput("solver: start point outside the domain");
  return x;
}

std::string echo(const SolverConfig& cfg, const RunTrace& t, double extra_r1 = 0.0) {
  std::ostringstream os;
  os.precision(17);
  os << "method=" << to_string(cfg.method) << " eps=" << cfg.epsilon << " T=" << t.T << " eta=" << t.eta
     << " backend=" << to_string(t.backend) << " seed=" << cfg.seed;
  if (extra_r1 > 0.0) os << " r1=" << extra_r1;
  return os.str();
}

void update_average(Vector& avg, const Vector& x, std::int64_t count) {
  // avg holds the mean of count-1 points; fold in the count-th.
  avg += (x - avg) / double(count);
}

// Shared driver for the averaged subgradient methods. `next` maps (x_t, g_t) to x_{t+1}.
template <class Next>
RunTrace run_averaged(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg, const NormSpec& norms,
                      std::int64_t T, double eta, double r1, double budget, Vector x, Next next) {
  RunTrace trace;
  trace.method = cfg.method;
  trace.seed = cfg.seed;
  trace.T = T;
  trace.eta = eta;
  trace.backend = cfg.backend.value_or(Backend::finite_difference);
  if (trace.backend != Backend::finite_difference && trace.backend != Backend::exact)
    throw ConfigError("subgradient methods support the fd and exact backends");
  trace.theta_budget = budget;
  trace.theta_over_budget = oracle.theta() > budget;

  SubgradientConfig sub{r1, std::min(1.0 / 3.0, 1.0 / (3.0 * double(T)))};
  trace.per_estimate_charge =
      trace.backend == Backend::exact ? 1 : subgradient_charge(problem.d, sub.rho);
  Rng rng(cfg.seed);

  Recorder rec(problem, oracle, trace, cfg.record_stride, T);
  trace.records.reserve(std::size_t(T / std::max<std::int64_t>(1, cfg.record_stride) + 2));
  Vector avg = x;
  rec.record(0, avg, true);
  for (std::int64_t t = 1; t <= T; ++t) {
    Vector g;
    if (trace.backend == Backend::exact) {
      g = problem.reference_gradient(x);
      oracle.charge_queries(1);
    } else {
      g = subgradient_estimate(oracle, x, problem.G, sub, norms, rng).k;
    }
    update_average(avg, x, t);
    x = next(x, g);
    rec.record(t, avg);
  }
  trace.iterations = T;
  trace.final_point = x;
  trace.final_average = avg;
  trace.config_echo = echo(cfg, trace, r1);
  return trace;
}

}  // namespace

RunTrace qpsm_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg) {
  check_oracle(problem, oracle);
  const int d = problem.d;
  const double G = problem.G;
  const NormSpec norms = NormSpec::make(2.0, d);
  const double R = cfg.R.value_or(problem.domain.diameter(2.0));
  if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("qpsm: R must be finite and positive");
  const std::int64_t T = cfg.T.value_or(qpsm_iterations(cfg.epsilon, G, R));
  const double eta = cfg.eta.value_or(R / (G * std::sqrt(double(T))));
  const double r1 = cfg.r1.value_or(cfg.epsilon / (6.0 * G * norms.vartheta));
  const DomainSpec& dom = problem.domain;
  return run_averaged(problem, oracle, cfg, norms, T, eta, r1, qpsm_theta_budget(cfg.epsilon, G, R, d),
                      start_point(problem, cfg),
                      [&](const Vector& x, const Vector& g) { return dom.project(x - eta * g); });
}

RunTrace qmd_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
                   const MirrorGeometry& geom) {
  check_oracle(problem, oracle);
  check_geometry_domain(geom, problem.domain);
  const int d = problem.d;
  const double G = problem.G;
  const NormSpec& norms = geom.norm();
  const double R = cfg.R.value_or(default_mirror_radius(geom, problem.domain));
  const std::int64_t T = cfg.T.value_or(md_iterations(cfg.epsilon, G, R, geom.mu()));
  const double eta = cfg.eta.value_or((R / G) * std::sqrt(geom.mu() / double(T)));
  const double r1 = cfg.r1.value_or(cfg.epsilon / (6.0 * G * norms.vartheta));
  const double K = problem.domain.diameter(norms.p);
  const DomainSpec& dom = problem.domain;
  return run_averaged(problem, oracle, cfg, norms, T, eta, r1,
                      md_theta_budget(cfg.epsilon, G, R, K, geom.mu(), norms, d), start_point(problem, cfg),
                      [&](const Vector& x, const Vector& g) { return mirror_step(geom, x, g, eta, dom); });
}

RunTrace qda_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
                   const MirrorGeometry& geom) {
  check_oracle(problem, oracle);
  check_geometry_domain(geom, problem.domain);
  if (geom.setup() == MirrorSetup::spectraplex_entropy)
    throw ConfigError("qda: no closed-form dual-averaging step for the spectraplex");
  const int d = problem.d;
  const double G = problem.G;
  const NormSpec& norms = geom.norm();
  const double R = cfg.R.value_or(default_mirror_radius(geom, problem.domain));
  const std::int64_t T = cfg.T.value_or(md_iterations(cfg.epsilon, G, R, geom.mu()));
  const double eta = cfg.eta.value_or((R / G) * std::sqrt(geom.mu() / double(T)));
  const double r1 = cfg.r1.value_or(cfg.epsilon / (6.0 * G * norms.vartheta));
  const double K = problem.domain.diameter(norms.p);
  const DomainSpec& dom = problem.domain;
  // x_1 minimizes Phi over the domain: the uniform point, or the Euclidean anchor.
  const Vector x1 = dom.default_start();
  if (cfg.x0 && (*cfg.x0 - x1).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("qda: the start point is fixed to the minimizer of the potential");
  Vector S = Vector::Zero(d);
  const bool entropy = geom.setup() == MirrorSetup::simplex_entropy;
  return run_averaged(problem, oracle, cfg, norms, T, eta, r1,
                      md_theta_budget(cfg.epsilon, G, R, K, geom.mu(), norms, d), x1,
                      [&](const Vector&, const Vector& g) -> Vector {
                        S += g;
                        if (entropy) {
                          Vector a = -eta * S;
                          Vector w = (a.array() - a.maxCoeff()).exp().matrix();
                          return w * (dom.scale() / w.sum());
                        }
                        return dom.project(x1 - eta * S);
                      });
}

RunTrace qmp_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
                   const MirrorGeometry& geom) {
  check_oracle(problem, oracle);
  check_geometry_domain(geom, problem.domain);
  if (!problem.L) throw ConfigError("qmp: smoothness constant L is required");
  const int d = problem.d;
  const double G = problem.G, L = *problem.L, mu = geom.mu();
  const NormSpec& norms = geom.norm();
  const double R = cfg.R.value_or(default_mirror_radius(geom, problem.domain));
  const double K = problem.domain.diameter(norms.p);
  const std::int64_t T = cfg.T.value_or(
      std::max<std::int64_t>(1, std::int64_t(std::ceil(cfg.mp_constant * L * R * R / (mu * cfg.epsilon)))));
  const double eta = cfg.eta.value_or(mu / L);
  double sigma = cfg.sigma.value_or(cfg.epsilon * mu / (12.0 * norms.vartheta_star * L * K));
  sigma = std::min(sigma, 3.0 * G);

  RunTrace trace;
  trace.method = Method::qmp;
  trace.seed = cfg.seed;
  trace.T = T;
  trace.eta = eta;
  trace.backend = cfg.backend.value_or(Backend::statevector);
  if (trace.backend == Backend::finite_difference) throw ConfigError("qmp: needs a smooth-gradient backend");
  trace.theta_budget = gradient_theta_budget(sigma, d, G, L, norms.vartheta);
  trace.theta_over_budget = oracle.theta() > trace.theta_budget;
  trace.per_estimate_charge =
      trace.backend == Backend::exact ? 1 : suppressed_bias_charge(d, G, sigma);

  Rng rng(cfg.seed);
  Recorder rec(problem, oracle, trace, cfg.record_stride, T);
  Vector x = start_point(problem, cfg);
  Vector avg = x;
  rec.record(0, x, true);
  for (std::int64_t t = 1; t <= T; ++t) {
    GradientEstimate gx = estimate_gradient(trace.backend, oracle, x, G, L, sigma, norms, rng);
    Vector z = mirror_step(geom, x, gx.k, eta, problem.domain);
    GradientEstimate gz = estimate_gradient(trace.backend, oracle, z, G, L, sigma, norms, rng);
    x = mirror_step(geom, x, gz.k, eta, problem.domain);
    trace.downgraded = trace.downgraded || gx.downgraded || gz.downgraded;
    if (t == 1) avg = z;
    else update_average(avg, z, t);
    rec.record(t, avg);
  }
  trace.iterations = T;
  trace.final_point = x;
  trace.final_average = avg;
  trace.config_echo = echo(cfg, trace);
  return trace;
}

RunTrace qgd_pl_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg) {
  check_oracle(problem, oracle);
  if (!problem.mu) throw ConfigError("qgd_pl: PL constant mu is required");
  if (!problem.L) throw ConfigError("qgd_pl: smoothness constant L is required");
  const int d = problem.d;
  const double G = problem.G, L = *problem.L, mu = *problem.mu;
  const NormSpec norms = NormSpec::make(2.0, d);
  Vector x = start_point(problem, cfg);

  std::int64_t T;
  if (cfg.T) {
    T = *cfg.T;
  } else {
    if (!problem.f_star) throw ConfigError("qgd_pl: f_star is needed to derive T (or set T)");
    const double gap0 = problem.evaluator(x) - *problem.f_star;
    const double kappa = L / mu;
    T = gap0 > 0.0 ? std::max<std::int64_t>(1, std::int64_t(std::ceil(kappa * std::log(2.0 * gap0 / cfg.epsilon))))
                   : 1;
  }
  const double eta = cfg.eta.value_or(1.0 / L);
  const double sigma = std::min(cfg.sigma.value_or(std::sqrt(cfg.epsilon * mu / (5.0 * d))), 3.0 * G);

  RunTrace trace;
  trace.method = Method::qgd_pl;
  trace.seed = cfg.seed;
  trace.T = T;
  trace.eta = eta;
  trace.backend = cfg.backend.value_or(Backend::statevector);
  if (trace.backend == Backend::finite_difference) throw ConfigError("qgd_pl: needs a smooth-gradient backend");
  trace.theta_budget = gradient_theta_budget(sigma, d, G, L, norms.vartheta);
  trace.theta_over_budget = oracle.theta() > trace.theta_budget;
  trace.per_estimate_charge = trace.backend == Backend::exact ? 1 : suppressed_bias_charge(d, G, sigma);

  Rng rng(cfg.seed);
  Recorder rec(problem, oracle, trace, cfg.record_stride, T);
  rec.record(0, x, true);
  for (std::int64_t t = 1; t <= T; ++t) {
    GradientEstimate g = estimate_gradient(trace.backend, oracle, x, G, L, sigma, norms, rng);
    trace.downgraded = trace.downgraded || g.downgraded;
    x = problem.domain.project(x - eta * g.k);
    rec.record(t, x);
  }
  trace.iterations = T;
  trace.final_point = x;
  trace.final_average = x;
  trace.config_echo = echo(cfg, trace);
  return trace;
}

RunTrace qgd_convex_solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg) {
  check_oracle(problem, oracle);
  if (!problem.f_star) throw ConfigError("qgd_convex: f_star is required");
  if (!problem.L) throw ConfigError("qgd_convex: smoothness constant L is required");
  const int d = problem.d;
  const double G = problem.G, L = *problem.L, fstar = *problem.f_star;
  const NormSpec norms = NormSpec::make(2.0, d);
  const double R = cfg.R.value_or(problem.domain.diameter(2.0));
  if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("qgd_convex: R (sublevel-set radius) must be supplied");
  const std::int64_t T =
      cfg.T.value_or(std::max<std::int64_t>(1, std::int64_t(std::ceil(4.0 * L * R * R / cfg.epsilon))));
  const double eta = cfg.eta.value_or(1.0 / L);

  RunTrace trace;
  trace.method = Method::qgd_convex;
  trace.seed = cfg.seed;
  trace.T = T;
  trace.eta = eta;
  trace.backend = cfg.backend.value_or(Backend::statevector);
  if (trace.backend == Backend::finite_difference) throw ConfigError("qgd_convex: needs a smooth-gradient backend");
  // Budget quoted at the smallest target sigma the run can request.
  const double sigma_floor = std::min(cfg.epsilon / (4.0 * R * std::sqrt(double(d))), 3.0 * G);
  trace.theta_budget = gradient_theta_budget(sigma_floor, d, G, L, norms.vartheta);

  Rng rng(cfg.seed);
  Recorder rec(problem, oracle, trace, cfg.record_stride, T);
  Vector x = start_point(problem, cfg);
  rec.record(0, x, true);
  std::int64_t t = 0;
  for (; t < T; ++t) {
    const double delta = oracle.evaluate(x) - fstar;
    oracle.charge_queries(1);
    ++trace.gap_evaluations;
    if (delta <= cfg.epsilon) {
      trace.terminated_early = true;
      break;
    }
    const double sigma = std::min(delta / (4.0 * R * std::sqrt(double(d))), 3.0 * G);
    GradientEstimate g = estimate_gradient(trace.backend, oracle, x, G, L, sigma, norms, rng);
    trace.sigma_schedule.push_back(trace.backend == Backend::exact ? 0.0 : sigma);
    trace.downgraded = trace.downgraded || g.downgraded;
    trace.theta_over_budget = trace.theta_over_budget || g.theta_over_budget;
    x = problem.domain.project(x - eta * g.k);
    rec.record(t + 1, x);
  }
  // The terminal state, including the last charged gap evaluation, is always on record.
  rec.record(t, x, true);
  trace.iterations = t;
  trace.final_point = x;
  trace.final_average = x;
  trace.config_echo = echo(cfg, trace);
  return trace;
}

RunTrace solve(const ObjectiveSpec& problem, NoisyOracle& oracle, const SolverConfig& cfg,
               const MirrorGeometry& geom) {
  switch (cfg.method) {
    case Method::qpsm: return qpsm_solve(problem, oracle, cfg);
    case Method::qgd_convex: return qgd_convex_solve(problem, oracle, cfg);
    case Method::qgd_pl: return qgd_pl_solve(problem, oracle, cfg);
    case Method::qmd: return qmd_solve(problem, oracle, cfg, geom);
    case Method::qda: return qda_solve(problem, oracle, cfg, geom);
    case Method::qmp: return qmp_solve(problem, oracle, cfg, geom);
  }
  throw ConfigError("unknown method");
}

}  // namespace qzo

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "qzo/harness.hpp"

namespace qzo {

namespace {

// Runs f(0..n-1) on a small pool; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, F f) {
  const std::size_t k = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lk(m);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < k; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string first_token(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string tok;
  in >> tok;
  return tok;
}

double norm_for(const ExperimentConfig& cfg) {
  if (cfg.geometry == "euclidean") return 2.0;
  if (cfg.geometry == "entropy") return 1.0;
  return default_norm_p(cfg.solver.method, cfg.problem);
}

double radius_for(Method method, const BuiltinProblem& prob) {
  const DomainSpec& dom = prob.spec.domain;
  switch (method) {
    case Method::qpsm: return dom.diameter(2.0);
    case Method::qmd:
    case Method::qda:
    case Method::qmp: return default_mirror_radius(prob.geometry, dom);
    case Method::qgd_convex:
    case Method::qgd_pl: return prob.sublevel_radius.value_or(dom.diameter(2.0));
  }
  return dom.diameter(2.0);
}

double need(const std::optional<double>& v, const char* what) {
  if (!v) throw ConfigError(std::string("problem lacks ") + what);
  return *v;
}

}  // namespace

std::uint64_t repetition_seed(std::uint64_t base, int i) { return base + std::uint64_t(i); }

RunTrace run_builtin(const BuiltinProblem& prob, const SolverConfig& cfg_in, double theta, NoiseMode mode) {
  SolverConfig cfg = cfg_in;
  if (!cfg.x0 && prob.start) cfg.x0 = prob.start;
  if (!cfg.R && prob.sublevel_radius && cfg.method == Method::qgd_convex) cfg.R = prob.sublevel_radius;
  NoisyOracle oracle(prob.spec, theta, mode, cfg.seed);
  return solve(prob.spec, oracle, cfg, prob.geometry);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.runs.resize(std::size_t(cfg.repetitions));

  std::function<RunTrace(std::uint64_t)> one;
  if (cfg.instance_file.empty()) {
    const BuiltinProblem prob = make_builtin(cfg.problem, cfg.d, norm_for(cfg), cfg.kappa);
    one = [&cfg, prob](std::uint64_t seed) {
      SolverConfig s = cfg.solver;
      s.seed = seed;
      return run_builtin(prob, s, cfg.theta, cfg.noise_mode);
    };
  } else {
    WhiteboxOptions opts;
    opts.noise_mode = cfg.noise_mode;
    if (cfg.solver.backend) opts.backend = *cfg.solver.backend;
    opts.T = cfg.solver.T;
    const std::string tag = first_token(cfg.instance_file);
    const double eps = cfg.solver.epsilon, theta = cfg.theta;
    if (tag == "SDP") {
      auto inst = load_sdp(cfg.instance_file);
      one = [=](std::uint64_t seed) { return solve_sdp_dual(inst, eps, theta, seed, opts).second; };
    } else if (tag == "LP") {
      auto inst = load_lp(cfg.instance_file);
      one = [=](std::uint64_t seed) { return solve_lp(inst, eps, theta, seed, opts).second; };
    } else {
      auto inst = load_zsg(cfg.instance_file);
      one = [=](std::uint64_t seed) { return solve_zsg(inst, eps, theta, seed, opts).row_trace; };
    }
  }

  parallel_for(res.runs.size(), [&](std::size_t i) { res.runs[i] = one(repetition_seed(cfg.seed, int(i))); });

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu.csv", i);
    const std::string path = (fs::path(cfg.out_dir) / name).string();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_trace_csv(out, res.runs[i]);
    if (!out) throw IoError("write failed for '" + path + "'");
    res.trace_paths.push_back(path);
  }
  res.summary = summarize(res.runs);
  res.summary_path = (fs::path(cfg.out_dir) / "summary.tsv").string();
  std::ofstream out(res.summary_path);
  if (!out) throw IoError("cannot write '" + res.summary_path + "'");
  write_summary(out, res.summary);
  if (!out) throw IoError("write failed for '" + res.summary_path + "'");
  return res;
}

// ---- rates -----------------------------------------------------------------

SlopeReport fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw InvalidInput("fit_rate needs at least 4 points");
  SlopeReport r;
  r.points = points;
  double sx = 0, sy = 0;
  std::vector<double> lx, ly;
  for (auto [T, gap] : points) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("fit_rate: T must be positive");
    if (!(gap > 0.0) || !std::isfinite(gap)) throw InvalidInput("fit_rate: gaps must be positive");
    lx.push_back(std::log(T));
    ly.push_back(std::log(gap));
    sx += lx.back();
    sy += ly.back();
  }
  const double n = double(points.size()), mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("fit_rate: all T values coincide");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (r.intercept + r.slope * lx[i]);
    sse += e * e;
  }
  r.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return r;
}

double epsilon_for_iterations(Method method, const BuiltinProblem& prob, std::int64_t T, double mp_constant) {
  if (T < 1) throw InvalidInput("T must be >= 1");
  const ObjectiveSpec& s = prob.spec;
  const double R = radius_for(method, prob), G = s.G, t = double(T);
  switch (method) {
    case Method::qpsm: return 3.0 * R * G / std::sqrt(t);
    case Method::qmd:
    case Method::qda: return 6.0 * G * R / std::sqrt(prob.geometry.mu() * t);
    case Method::qmp: return mp_constant * need(s.L, "L") * R * R / (prob.geometry.mu() * t);
    case Method::qgd_convex: return 4.0 * need(s.L, "L") * R * R / t;
    case Method::qgd_pl: {
      const Vector x0 = prob.start.value_or(s.domain.default_start());
      const double gap0 = s.evaluator(x0) - need(s.f_star, "f_star");
      return 2.0 * gap0 * std::exp(-t * need(s.mu, "mu") / need(s.L, "L"));
    }
  }
  throw ConfigError("unknown method");
}

double method_theta_budget(Method method, const BuiltinProblem& prob, double eps, double mp_constant) {
  (void)mp_constant;
  const ObjectiveSpec& s = prob.spec;
  const int d = s.d;
  const double R = radius_for(method, prob), G = s.G;
  switch (method) {
    case Method::qpsm: return qpsm_theta_budget(eps, G, R, d);
    case Method::qmd:
    case Method::qda: {
      const NormSpec& nm = prob.geometry.norm();
      return md_theta_budget(eps, G, R, s.domain.diameter(nm.p), prob.geometry.mu(), nm, d);
    }
    case Method::qmp: {
      const NormSpec& nm = prob.geometry.norm();
      const double L = need(s.L, "L"), K = s.domain.diameter(nm.p);
      const double sigma = std::min(eps * prob.geometry.mu() / (12.0 * nm.vartheta_star * L * K), 3.0 * G);
      return gradient_theta_budget(sigma, d, G, L, nm.vartheta);
    }
    case Method::qgd_pl: {
      const double sigma = std::min(std::sqrt(eps * need(s.mu, "mu") / (5.0 * d)), 3.0 * G);
      return gradient_theta_budget(sigma, d, G, need(s.L, "L"), NormSpec::make(2.0, d).vartheta);
    }
    case Method::qgd_convex: {
      const double sigma = std::min(eps / (4.0 * R * std::sqrt(double(d))), 3.0 * G);
      return gradient_theta_budget(sigma, d, G, need(s.L, "L"), NormSpec::make(2.0, d).vartheta);
    }
  }
  throw ConfigError("unknown method");
}

std::uint64_t expected_charged_queries(const RunTrace& trace, int d, double G) {
  const auto iters = std::uint64_t(trace.iterations);
  switch (trace.method) {
    case Method::qmp: return 2 * iters * trace.per_estimate_charge;
    case Method::qgd_convex: {
      std::uint64_t total = trace.gap_evaluations;
      for (double sigma : trace.sigma_schedule) total += sigma == 0.0 ? 1 : suppressed_bias_charge(d, G, sigma);
      return total;
    }
    default: return iters * trace.per_estimate_charge;
  }
}

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.Ts.empty()) throw ConfigError("sweep: no T values");
  if (spec.repetitions < 1) throw ConfigError("sweep: repetitions must be >= 1");
  const BuiltinProblem prob =
      make_builtin(spec.problem, spec.d, default_norm_p(spec.method, spec.problem), spec.kappa);

  SweepResult out;
  out.points.resize(spec.Ts.size());
  for (std::size_t i = 0; i < spec.Ts.size(); ++i) {
    SweepPoint& p = out.points[i];
    p.T = spec.Ts[i];
    p.epsilon = epsilon_for_iterations(spec.method, prob, p.T);
    p.theta = spec.theta_abs.value_or(spec.theta_multiplier * method_theta_budget(spec.method, prob, p.epsilon));
    p.final_gaps.assign(std::size_t(spec.repetitions), 0.0);
  }
  const std::size_t reps = std::size_t(spec.repetitions);
  std::vector<char> exact(spec.Ts.size() * reps, 1);
  parallel_for(spec.Ts.size() * reps, [&](std::size_t k) {
    SweepPoint& p = out.points[k / reps];
    SolverConfig cfg;
    cfg.method = spec.method;
    cfg.epsilon = p.epsilon;
    cfg.T = p.T;
    cfg.backend = spec.backend;
    cfg.seed = repetition_seed(spec.seed, int(k % reps));
    cfg.record_stride = std::max<std::int64_t>(1, p.T / 1000);
    const RunTrace tr = run_builtin(prob, cfg, p.theta, spec.noise_mode);
    p.final_gaps[k % reps] = tr.final_gap();
    exact[k] = tr.records.back().charged_queries == expected_charged_queries(tr, prob.spec.d, prob.spec.G);
  });

  std::vector<std::pair<double, double>> pts;
  bool positive = true;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    SweepPoint& p = out.points[i];
    p.median_gap = quantile(p.final_gaps, 0.5);
    for (std::size_t r = 0; r < reps; ++r) p.accounting_exact = p.accounting_exact && exact[i * reps + r];
    positive = positive && p.median_gap > 0.0;
    pts.emplace_back(double(p.T), p.median_gap);
  }
  if (pts.size() >= 4 && positive) {
    out.fit = fit_rate(pts);
  } else {
    out.fit.points = pts;
    out.fit.slope = out.fit.intercept = out.fit.r_squared = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// ---- regimes ---------------------------------------------------------------

std::vector<double> geometric_range(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw InvalidInput("geometric_range: need 0 < lo <= hi and n >= 1");
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo * std::pow(hi / lo, double(i) / double(n - 1)));
  return v;
}

std::vector<RegimeRow> zsg_regimes(const std::vector<double>& ms, const std::vector<double>& inv_eps) {
  std::vector<RegimeRow> rows;
  for (double m : ms) {
    if (!(m > 0.0)) throw InvalidInput("regimes: m must be positive");
    for (double ie : inv_eps) {
      if (!(ie > 0.0)) throw InvalidInput("regimes: 1/eps must be positive");
      RegimeRow r;
      r.m = m;
      r.inv_eps = ie;
      const double n = m;
      r.cost_qmd = m * std::sqrt(n) * ie * ie;
      r.cost_classical = (m + n) * ie * ie;
      r.cost_qmwu = std::sqrt(m + n) * std::pow(ie, 2.5) + ie * ie * ie;
      r.label = "qmd";
      double best = r.cost_qmd;
      if (r.cost_classical < best) {
        best = r.cost_classical;
        r.label = "classical";
      }
      if (r.cost_qmwu < best) r.label = "qmwu";
      rows.push_back(r);
    }
  }
  return rows;
}

void emit_zsg_regimes(std::ostream& out, const std::vector<double>& ms, const std::vector<double>& inv_eps) {
  out << "m\tn\tinv_eps\tcost_qmd\tcost_classical\tcost_qmwu\tlabel\n";
  char buf[256];
  for (const RegimeRow& r : zsg_regimes(ms, inv_eps)) {
    std::snprintf(buf, sizeof buf, "%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t", r.m, r.m, r.inv_eps, r.cost_qmd,
                  r.cost_classical, r.cost_qmwu);
    out << buf << r.label << '\n';
  }
}

}  // namespace qzo

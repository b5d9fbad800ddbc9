// qzo: command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qzo/harness.hpp"

using namespace qzo;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

// Flags shared by every subcommand. Unset values leave config-file or built-in defaults alone.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta;
  std::optional<std::string> backend;
  std::optional<double> eps;
  std::optional<int> reps;
  std::optional<std::string> out;
  std::string mode = "hash";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "base seed");
  app->add_option("--theta", c.theta, "oracle precision");
  app->add_option("--backend", c.backend, "statevector | surrogate | exact | fd");
  app->add_option("--eps", c.eps, "target accuracy");
  app->add_option("--reps", c.reps, "repetitions");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--noise", c.mode, "none | hash | sinusoid");
}

ExperimentConfig base_config(const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty()) apply_config(cfg, load_config(c.config));
  if (c.seed) cfg.seed = *c.seed;
  if (c.theta) cfg.theta = *c.theta;
  if (c.backend) cfg.solver.backend = parse_backend(*c.backend);
  if (c.eps) cfg.solver.epsilon = *c.eps;
  if (c.reps) cfg.repetitions = *c.reps;
  if (c.out) cfg.out_dir = *c.out;
  if (c.config.empty() || c.mode != "hash") cfg.noise_mode = parse_noise_mode(c.mode);
  return cfg;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

void write_run(const std::optional<std::string>& out, const std::string& stem, const DualCertificate* cert,
               const RunTrace& trace) {
  if (!out) return;
  auto t = open_out(*out, stem + "_trace.csv");
  write_trace_csv(t, trace);
  if (cert) {
    auto f = open_out(*out, stem + "_certificate.txt");
    write_certificate(f, *cert);
  }
}

WhiteboxOptions whitebox_options(const ExperimentConfig& cfg, std::optional<std::int64_t> T) {
  WhiteboxOptions o;
  o.noise_mode = cfg.noise_mode;
  if (cfg.solver.backend) o.backend = *cfg.solver.backend;
  o.T = T ? T : cfg.solver.T;
  return o;
}

// ---- subcommands -----------------------------------------------------------

int cmd_grad_est(const Common& c, const std::string& problem, int d, int samples, std::optional<double> sigma) {
  ExperimentConfig cfg = base_config(c);
  const BuiltinProblem P = make_builtin(problem, d, 2.0, cfg.kappa);
  const ObjectiveSpec& s = P.spec;
  const Backend backend = cfg.solver.backend.value_or(Backend::statevector);
  const double sg = sigma.value_or(0.1);
  const Vector x = P.start ? *P.start : s.domain.default_start();
  const Vector g = s.reference_gradient(x);
  NoisyOracle oracle(s, cfg.theta, cfg.noise_mode, cfg.seed);
  Rng rng(cfg.seed);
  Vector sum = Vector::Zero(d);
  double m2 = 0.0;
  bool downgraded = false;
  for (int i = 0; i < samples; ++i) {
    GradientEstimate e;
    if (backend == Backend::finite_difference) {
      SubgradientConfig sub;
      sub.r1 = sg / (6.0 * s.G);
      e = subgradient_estimate(oracle, x, s.G, sub, NormSpec::make(2.0, d), rng);
    } else {
      e = estimate_gradient(backend, oracle, x, s.G, s.L.value_or(s.G), sg, NormSpec::make(2.0, d), rng);
    }
    downgraded |= e.downgraded;
    const Vector err = e.k - g;
    sum += err;
    m2 += err.cwiseAbs().maxCoeff() * err.cwiseAbs().maxCoeff();
  }
  std::printf("problem %s d %d backend %s sigma %g samples %d\n", problem.c_str(), d, to_string(backend).c_str(), sg,
              samples);
  std::printf("bias_inf %.6g\nsecond_moment_inf %.6g\ncharged_queries %llu\nactual_evals %llu\n",
              (sum / samples).cwiseAbs().maxCoeff(), m2 / samples,
              static_cast<unsigned long long>(oracle.charged_queries()),
              static_cast<unsigned long long>(oracle.actual_evals()));
  if (downgraded) std::printf("note statevector grid above cap, surrogate used\n");
  return kOk;
}

int cmd_solve(const Common& c, const std::optional<std::string>& problem, const std::optional<std::string>& method,
              std::optional<int> d, std::optional<std::int64_t> T) {
  ExperimentConfig cfg = base_config(c);
  if (problem) cfg.problem = *problem;
  if (method) cfg.solver.method = parse_method(*method);
  if (d) cfg.d = *d;
  if (T) cfg.solver.T = *T;
  ExperimentResult r = run_experiment(cfg);
  std::cout << "runs " << r.summary.runs << "\nmedian_gap " << r.summary.median_gap << "\nq1_gap " << r.summary.q1_gap
            << "\nq3_gap " << r.summary.q3_gap << "\ntotal_charged_queries " << r.summary.total_charged
            << "\nsummary " << r.summary_path << '\n';
  return kOk;
}

int cmd_sdp(const Common& c, const std::string& file, std::optional<std::int64_t> T, double feas_tol) {
  ExperimentConfig cfg = base_config(c);
  const SdpInstance inst = load_sdp(file);
  auto [cert, trace] = solve_sdp_dual(inst, cfg.solver.epsilon, cfg.theta, cfg.seed, whitebox_options(cfg, T));
  write_certificate(std::cout, cert);
  const FeasibilityReport rep = check_dual_feasibility(inst, cert, feas_tol);
  std::cout << "feasible " << (rep.pass() ? "yes" : "no") << '\n';
  write_run(c.out, "sdp", &cert, trace);
  return kOk;
}

int cmd_lp(const Common& c, const std::string& file, std::optional<std::int64_t> T) {
  ExperimentConfig cfg = base_config(c);
  const LpInstance inst = load_lp(file);
  auto [cert, trace] = solve_lp(inst, cfg.solver.epsilon, cfg.theta, cfg.seed, whitebox_options(cfg, T));
  write_certificate(std::cout, cert);
  write_run(c.out, "lp", &cert, trace);
  return kOk;
}

int cmd_zsg(const Common& c, const std::string& source, std::optional<std::int64_t> T) {
  ExperimentConfig cfg = base_config(c);
  const std::optional<ZsgInstance> builtin = builtin_game(source);
  const ZsgInstance inst = builtin ? *builtin : load_zsg(source);
  ZsgSolution s = solve_zsg(inst, cfg.solver.epsilon, cfg.theta, cfg.seed, whitebox_options(cfg, T));
  std::cout.precision(10);
  std::cout << "value " << s.value << "\nlower " << s.lower << "\nupper " << s.upper << "\nx";
  for (double v : s.x) std::cout << ' ' << v;
  std::cout << "\ny";
  for (double v : s.y) std::cout << ' ' << v;
  std::cout << "\ncharged_queries " << s.row_cert.charged_queries + s.col_cert.charged_queries << '\n';
  write_run(c.out, "zsg_row", &s.row_cert, s.row_trace);
  write_run(c.out, "zsg_col", &s.col_cert, s.col_trace);
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& problem, const std::string& method, int d, double kappa,
              std::vector<std::int64_t> Ts, double theta_mult) {
  ExperimentConfig cfg = base_config(c);
  SweepSpec s;
  s.problem = problem;
  s.method = parse_method(method);
  s.d = d;
  s.kappa = kappa;
  s.Ts = std::move(Ts);
  s.repetitions = c.reps.value_or(5);
  s.seed = c.seed.value_or(1);
  s.theta_multiplier = theta_mult;
  s.theta_abs = c.theta;
  s.noise_mode = cfg.noise_mode;
  s.backend = cfg.solver.backend;
  SweepResult r = run_sweep(s);
  std::ostringstream os;
  os.precision(10);
  os << "T\teps\ttheta\tmedian_gap\taccounting_exact\n";
  for (const SweepPoint& p : r.points)
    os << p.T << '\t' << p.epsilon << '\t' << p.theta << '\t' << p.median_gap << '\t' << (p.accounting_exact ? 1 : 0)
       << '\n';
  os << "# slope " << r.fit.slope << " intercept " << r.fit.intercept << " r_squared " << r.fit.r_squared << '\n';
  std::cout << os.str();
  if (c.out) open_out(*c.out, "sweep.tsv") << os.str();
  return kOk;
}

int cmd_regimes(const Common& c, double m_lo, double m_hi, double e_lo, double e_hi, int points) {
  const auto ms = geometric_range(m_lo, m_hi, points);
  const auto es = geometric_range(e_lo, e_hi, points);
  if (c.out) {
    auto f = open_out(*c.out, "regimes.tsv");
    emit_zsg_regimes(f, ms, es);
  } else {
    emit_zsg_regimes(std::cout, ms, es);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order convex optimization with emulated quantum gradient oracles"};
  app.require_subcommand(1);
  Common common;

  auto* ge = app.add_subcommand("grad-est", "empirical bias and second moment of a gradient backend");
  std::string ge_problem = "quadratic";
  int ge_d = 4, ge_samples = 1000;
  std::optional<double> ge_sigma;
  ge->add_option("--problem", ge_problem, "built-in problem");
  ge->add_option("--d", ge_d, "dimension");
  ge->add_option("--samples", ge_samples, "number of estimates")->check(CLI::PositiveNumber);
  ge->add_option("--sigma", ge_sigma, "target accuracy of each estimate");
  add_common(ge, common);

  auto* so = app.add_subcommand("solve", "run a black-box solver, writing per-run CSVs and a summary");
  std::optional<std::string> so_problem, so_method;
  std::optional<int> so_d;
  std::optional<std::int64_t> so_T;
  so->add_option("--problem", so_problem, "built-in problem");
  so->add_option("--method", so_method, "qpsm | qgd_convex | qgd_pl | qmd | qda | qmp");
  so->add_option("--d", so_d, "dimension");
  so->add_option("--T", so_T, "iteration budget");
  add_common(so, common);

  std::string instance;
  std::optional<std::int64_t> wb_T;
  auto* sdp = app.add_subcommand("sdp", "dual certificate for an SDP instance file");
  sdp->add_option("instance", instance, "instance file")->required();
  sdp->add_option("--T", wb_T, "iteration budget");
  double feas_tol = 1e-8;
  sdp->add_option("--feas-tol", feas_tol, "absolute tolerance on the slack's smallest eigenvalue");
  add_common(sdp, common);
  auto* lp = app.add_subcommand("lp", "dual certificate for an LP instance file");
  lp->add_option("instance", instance, "instance file")->required();
  lp->add_option("--T", wb_T, "iteration budget");
  add_common(lp, common);
  auto* zsg = app.add_subcommand("zsg", "value and strategies of a zero-sum game");
  zsg->add_option("instance", instance, "instance file, or matching-pennies / rps")->required();
  zsg->add_option("--T", wb_T, "iteration budget");
  add_common(zsg, common);

  auto* sw = app.add_subcommand("sweep", "median final gap over a T grid and its log-log slope");
  std::string sw_problem = "linear-simplex", sw_method = "qpsm";
  int sw_d = 16;
  double sw_kappa = 10.0, sw_mult = 1.0;
  std::vector<std::int64_t> sw_Ts = {100, 1000, 10000, 100000};
  sw->add_option("--problem", sw_problem, "built-in problem");
  sw->add_option("--method", sw_method, "solver");
  sw->add_option("--d", sw_d, "dimension");
  sw->add_option("--kappa", sw_kappa, "condition number of the quadratic");
  sw->add_option("--Ts", sw_Ts, "iteration budgets")->delimiter(',');
  sw->add_option("--theta-mult", sw_mult, "multiple of the method's precision budget (ignored with --theta)");
  add_common(sw, common);

  auto* rg = app.add_subcommand("regimes", "cost table over (m, 1/eps) for game solvers");
  double m_lo = 1e2, m_hi = 1e8, e_lo = 1e1, e_hi = 1e4;
  int points = 13;
  rg->add_option("--m-min", m_lo);
  rg->add_option("--m-max", m_hi);
  rg->add_option("--inv-eps-min", e_lo);
  rg->add_option("--inv-eps-max", e_hi);
  rg->add_option("--points", points)->check(CLI::PositiveNumber);
  add_common(rg, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*ge) return cmd_grad_est(common, ge_problem, ge_d, ge_samples, ge_sigma);
    if (*so) return cmd_solve(common, so_problem, so_method, so_d, so_T);
    if (*sdp) return cmd_sdp(common, instance, wb_T, feas_tol);
    if (*lp) return cmd_lp(common, instance, wb_T);
    if (*zsg) return cmd_zsg(common, instance, wb_T);
    if (*sw) return cmd_sweep(common, sw_problem, sw_method, sw_d, sw_kappa, sw_Ts, sw_mult);
    if (*rg) return cmd_regimes(common, m_lo, m_hi, e_lo, e_hi, points);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const InvalidState& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}

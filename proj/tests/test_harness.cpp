#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qzo/harness.hpp"

using namespace qzo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("qzo_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV text with the last (wallclock) column removed.
std::string drop_wallclock(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

double naive_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.problem = "linear-simplex";
  cfg.d = 4;
  cfg.solver.method = Method::qmd;
  cfg.solver.T = 50;
  cfg.solver.epsilon = 0.2;
  cfg.theta = 1e-9;
  cfg.seed = 7;
  cfg.repetitions = 3;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config parsing") {
    std::istringstream in(
        "# experiment\n"
        "problem.name = quadratic\n"
        "problem.d = 3   # trailing comment\n"
        "solver.method = qgd_pl\n"
        "solver.eps=1e-3\n"
        "oracle.theta = 1e-8\n"
        "oracle.mode = sinusoid\n"
        "oracle.seed = 42\n"
        "run.reps = 4\n"
        "run.out = /tmp/x\n");
    auto kv = parse_config(in);
    CHECK(kv.size() == 9);
    ExperimentConfig cfg;
    apply_config(cfg, kv);
    CHECK(cfg.problem == "quadratic");
    CHECK(cfg.d == 3);
    CHECK(cfg.solver.method == Method::qgd_pl);
    CHECK(cfg.solver.epsilon == 1e-3);
    CHECK(cfg.theta == 1e-8);
    CHECK(cfg.noise_mode == NoiseMode::sinusoid);
    CHECK(cfg.seed == 42);
    CHECK(cfg.repetitions == 4);
    CHECK(cfg.out_dir == "/tmp/x");
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("config errors") {
    auto parse = [](const std::string& t) {
      std::istringstream in(t);
      return parse_config(in);
    };
    CHECK_THROWS_AS(parse("problem.name quadratic\n"), ConfigError);
    CHECK_THROWS_AS(parse("name = quadratic\n"), ConfigError);
    CHECK_THROWS_AS(parse("problem.d = 2\nproblem.d = 3\n"), ConfigError);
    try {
      parse("\n\nproblem.d = 2\nproblem.d = 3\n");
      CHECK(false);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    ExperimentConfig cfg;
    CHECK_THROWS_AS(apply_config(cfg, parse("solver.speed = 3\n")), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, parse("problem.d = three\n")), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, parse("solver.method = newton\n")), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, parse("solver.backend = analog\n")), ConfigError);
    ExperimentConfig bad;
    bad.repetitions = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.theta = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.geometry = "hyperbolic";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.instance_file = "/nonexistent/instance.sdp";
    try {
      bad.validate();
      CHECK(false);
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/instance.sdp") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.txt"), IoError);
  }

  TEST_CASE("built-in problems") {
    for (const auto& name : builtin_names()) {
      if (builtin_game(name)) {
        CHECK_THROWS_AS(make_builtin(name, 3), ConfigError);
        continue;
      }
      BuiltinProblem p = make_builtin(name, 5);
      CHECK_NOTHROW(p.spec.validate());
      CHECK(p.spec.f_star.has_value());
      Vector x0 = p.start ? *p.start : p.spec.domain.default_start();
      CHECK(p.spec.domain.contains(x0));
      CHECK(p.spec.evaluator(x0) >= *p.spec.f_star - 1e-12);
    }
    CHECK_THROWS_AS(make_builtin("rosenbrock", 2), ConfigError);
    CHECK(builtin_game("rps")->A.rows() == 3);
    CHECK(builtin_game("matching-pennies")->A(0, 1) == -1.0);
    CHECK_FALSE(builtin_game("quadratic"));

    // The declared optimum of the linear objective is the cheapest vertex.
    BuiltinProblem lin = make_builtin("linear-simplex", 16, 1.0);
    Vector c = builtin_cost_vector(16);
    CHECK(*lin.spec.f_star == doctest::Approx(c.minCoeff()));
    CHECK(lin.spec.G == doctest::Approx(c.cwiseAbs().maxCoeff()));

    // log-sum-exp: no simplex point beats the declared optimum.
    BuiltinProblem lse = make_builtin("log-sum-exp", 8, 1.0);
    std::mt19937_64 rng(1);
    std::exponential_distribution<double> E(1.0);
    for (int t = 0; t < 2000; ++t) {
      Vector x(8);
      for (int i = 0; i < 8; ++i) x[i] = E(rng);
      x /= x.sum();
      CHECK(lse.spec.evaluator(x) >= *lse.spec.f_star - 1e-12);
    }
    CHECK(default_norm_p(Method::qmd, "linear-simplex") == 1.0);
    CHECK(default_norm_p(Method::qpsm, "linear-simplex") == 2.0);
  }

  TEST_CASE("trace CSV round-trip") {
    RunTrace t;
    for (int i = 0; i < 5; ++i) {
      TraceRecord r;
      r.iter = i * 10;
      r.f_value = 1.0 / (i + 3.0);
      r.gap = i == 2 ? std::numeric_limits<double>::quiet_NaN() : std::pow(0.1, i) / 3.0;
      r.charged_queries = 98u * std::uint64_t(i);
      r.actual_evals = 32u * std::uint64_t(i);
      r.wallclock_ms = 0.125 * i;
      t.records.push_back(r);
    }
    std::stringstream ss;
    write_trace_csv(ss, t);
    CHECK(ss.str().rfind("iter,f_value,gap,charged_queries,actual_evals,wallclock_ms\n", 0) == 0);
    auto back = read_trace_csv(ss);
    REQUIRE(back.size() == t.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].iter == t.records[i].iter);
      CHECK(back[i].f_value == t.records[i].f_value);
      if (std::isnan(t.records[i].gap)) CHECK(std::isnan(back[i].gap));
      else CHECK(back[i].gap == t.records[i].gap);
      CHECK(back[i].charged_queries == t.records[i].charged_queries);
      CHECK(back[i].actual_evals == t.records[i].actual_evals);
      CHECK(back[i].wallclock_ms == t.records[i].wallclock_ms);
    }
  }

  TEST_CASE("quantiles and summaries") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
    CHECK(quantile({7.0}, 0.75) == 7.0);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidInput);
    GapSummary s{4, 0.5, 0.25, 0.75, 1000, 2000};
    std::stringstream ss;
    write_summary(ss, s);
    GapSummary b = read_summary(ss);
    CHECK(b.runs == 4);
    CHECK(b.median_gap == 0.5);
    CHECK(b.q1_gap == 0.25);
    CHECK(b.q3_gap == 0.75);
    CHECK(b.total_charged == 1000);
    CHECK(b.total_actual == 2000);
  }

  TEST_CASE("run_experiment: files, medians and determinism") {
    fs::path a = scratch("a"), b = scratch("b");
    ExperimentResult ra = run_experiment(small_config(a));
    REQUIRE(ra.trace_paths.size() == 3);
    int csvs = 0;
    for (const auto& e : fs::directory_iterator(a)) csvs += e.path().extension() == ".csv";
    CHECK(csvs == 3);
    CHECK(fs::exists(ra.summary_path));

    std::vector<double> finals;
    std::uint64_t charged = 0;
    for (const auto& p : ra.trace_paths) {
      std::ifstream in(p);
      auto recs = read_trace_csv(in);
      REQUIRE_FALSE(recs.empty());
      finals.push_back(recs.back().gap);
      charged += recs.back().charged_queries;
    }
    std::ifstream sin(ra.summary_path);
    GapSummary s = read_summary(sin);
    CHECK(s.runs == 3);
    CHECK(s.median_gap == doctest::Approx(naive_median(finals)).epsilon(1e-15));
    CHECK(s.total_charged == charged);

    ExperimentResult rb = run_experiment(small_config(b));
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(drop_wallclock(slurp(ra.trace_paths[i])) == drop_wallclock(slurp(rb.trace_paths[i])));
    // Distinct repetitions use distinct seeds.
    CHECK(drop_wallclock(slurp(ra.trace_paths[0])) != drop_wallclock(slurp(ra.trace_paths[1])));
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("run_experiment: instance files") {
    fs::path dir = scratch("inst");
    fs::create_directories(dir);
    {
      std::ofstream f(dir / "mp.csv");
      f << "1,-1\n-1,1\n";
    }
    ExperimentConfig cfg;
    cfg.instance_file = (dir / "mp.csv").string();
    cfg.solver.epsilon = 0.2;
    cfg.repetitions = 2;
    cfg.out_dir = (dir / "out").string();
    ExperimentResult r = run_experiment(cfg);
    CHECK(r.trace_paths.size() == 2);

    ExperimentConfig missing = cfg;
    missing.instance_file = (dir / "nope.lp").string();
    try {
      run_experiment(missing);
      CHECK(false);
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("nope.lp") != std::string::npos);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("fit_rate on synthetic power laws") {
    std::vector<std::pair<double, double>> half, one, flat;
    for (double T : {1e2, 1e3, 1e4, 1e5}) {
      half.push_back({T, 100.0 / std::sqrt(T)});
      one.push_back({T, 100.0 / T});
      flat.push_back({T, 0.3});
    }
    SlopeReport h = fit_rate(half);
    CHECK(h.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(h.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::exp(h.intercept) == doctest::Approx(100.0).epsilon(1e-10));
    CHECK(fit_rate(one).slope == doctest::Approx(-1.0).epsilon(1e-12));
    SlopeReport f = fit_rate(flat);
    CHECK(std::abs(f.slope) < 1e-12);
    CHECK(f.r_squared == 1.0);

    CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 1}, {3, 1}}), InvalidInput);
    auto bad = half;
    bad[2].second = 0.0;
    CHECK_THROWS_AS(fit_rate(bad), InvalidInput);
    bad = half;
    bad[1].second = -1.0;
    CHECK_THROWS_AS(fit_rate(bad), InvalidInput);
  }

  TEST_CASE("iteration budgets invert to accuracies") {
    BuiltinProblem lin = make_builtin("linear-simplex", 16, 2.0);
    for (std::int64_t T : {100, 1000, 10000}) {
      const double e = epsilon_for_iterations(Method::qpsm, lin, T);
      CHECK(std::abs(double(qpsm_iterations(e, lin.spec.G, lin.spec.domain.diameter(2.0)) - T)) <= 1.0);
    }
    BuiltinProblem lin1 = make_builtin("linear-simplex", 16, 1.0);
    const double R = default_mirror_radius(lin1.geometry, lin1.spec.domain);
    for (std::int64_t T : {100, 1000, 10000}) {
      const double e = epsilon_for_iterations(Method::qmd, lin1, T);
      CHECK(std::abs(double(md_iterations(e, lin1.spec.G, R, lin1.geometry.mu()) - T)) <= 1.0);
    }
  }

  TEST_CASE("closed-form query counts match short runs") {
    for (Method m : {Method::qpsm, Method::qmd, Method::qda}) {
      BuiltinProblem p = make_builtin("linear-simplex", 6, default_norm_p(m, "linear-simplex"));
      SolverConfig cfg;
      cfg.method = m;
      cfg.T = 40;
      cfg.epsilon = 0.3;
      RunTrace t = run_builtin(p, cfg, 1e-10, NoiseMode::hash);
      CHECK(t.records.back().charged_queries == expected_charged_queries(t, 6, p.spec.G));
    }
    BuiltinProblem l = make_builtin("log-sum-exp", 4, 1.0);
    SolverConfig q;
    q.method = Method::qmp;
    q.T = 10;
    q.epsilon = 0.1;
    RunTrace tq = run_builtin(l, q, 0.0, NoiseMode::none);
    CHECK(tq.records.back().charged_queries == expected_charged_queries(tq, 4, l.spec.G));
    BuiltinProblem quad = make_builtin("quadratic", 3);
    SolverConfig g;
    g.method = Method::qgd_convex;
    g.epsilon = 0.05;
    RunTrace tg = run_builtin(quad, g, 0.0, NoiseMode::none);
    CHECK(tg.records.back().charged_queries == expected_charged_queries(tg, 3, quad.spec.G));
  }

  TEST_CASE("regime table") {
    auto rows = zsg_regimes({1e6}, {2.0});
    REQUIRE(rows.size() == 1);
    const RegimeRow& r = rows[0];
    CHECK(r.cost_qmd == doctest::Approx(1e6 * 1e3 * 4.0));
    CHECK(r.cost_classical == doctest::Approx(2e6 * 4.0));
    CHECK(r.cost_qmwu == doctest::Approx(std::sqrt(2e6) * std::pow(2.0, 2.5) + 8.0));
    CHECK(r.label == "qmwu");

    auto unit = zsg_regimes({1.0}, {2.0});
    CHECK(unit[0].label == "qmd");

    std::stringstream ss;
    emit_zsg_regimes(ss, {5.0}, {3.0});
    std::string header, row, extra;
    std::getline(ss, header);
    std::getline(ss, row);
    CHECK(header == "m\tn\tinv_eps\tcost_qmd\tcost_classical\tcost_qmwu\tlabel");
    CHECK_FALSE(row.empty());
    CHECK_FALSE(std::getline(ss, extra));

    // Once the qmwu cost wins it keeps winning as m grows, and once it loses it keeps losing as 1/eps grows.
    auto ms = geometric_range(1.0, 1e8, 40), ies = geometric_range(1.0, 1e4, 40);
    CHECK(ms.front() == doctest::Approx(1.0));
    CHECK(ms.back() == doctest::Approx(1e8));
    auto grid = zsg_regimes(ms, ies);
    REQUIRE(grid.size() == ms.size() * ies.size());
    for (double ie : ies) {
      bool seen = false;
      for (const auto& g : grid) {
        if (g.inv_eps != ie) continue;
        if (seen) CHECK(g.label == "qmwu");
        seen = seen || g.label == "qmwu";
      }
    }
    for (double m : ms) {
      bool left = false;
      for (const auto& g : grid) {
        if (g.m != m) continue;
        if (left) CHECK(g.label != "qmwu");
        left = left || (g.label != "qmwu" && g.inv_eps > 1.0);
      }
    }
    CHECK_THROWS_AS(zsg_regimes({0.0}, {1.0}), InvalidInput);
  }
}

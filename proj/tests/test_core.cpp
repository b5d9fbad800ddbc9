#include <cmath>
#include <random>

#include "doctest.h"
#include "qzo/core.hpp"

using namespace qzo;

namespace {

ObjectiveSpec sq_norm(int d) {
  ObjectiveSpec s;
  s.name = "sq";
  s.d = d;
  s.G = 10.0;
  s.evaluator = [](const Vector& x) { return x.squaredNorm(); };
  s.domain = DomainSpec::whole_space(d);
  return s;
}

Vector random_vec(int d, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = U(rng);
  return v;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("dual exponent") {
    CHECK(dual_exponent(2.0) == 2.0);
    CHECK(dual_exponent(1.0) == kInf);
    CHECK(dual_exponent(kInf) == 1.0);
    CHECK(dual_exponent(4.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(dual_exponent(0.5), InvalidInput);
  }

  TEST_CASE("norm spec comparison constants and Hoelder") {
    std::mt19937_64 rng(7);
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
      const int d = 9;
      NormSpec n = NormSpec::make(p, d);
      if (std::isfinite(n.q) && std::isfinite(p)) CHECK(1.0 / p + 1.0 / n.q == doctest::Approx(1.0));
      CHECK(n.vartheta * n.vartheta_star <= d * (1.0 + 1e-12));
      for (int t = 0; t < 200; ++t) {
        Vector x = random_vec(d, rng), g = random_vec(d, rng);
        const double inf = x.cwiseAbs().maxCoeff();
        CHECK(n.norm(x) <= n.vartheta * inf * (1 + 1e-12));
        CHECK(n.dual_norm(x) <= n.vartheta_star * inf * (1 + 1e-12));
        CHECK(g.dot(x) <= n.norm(x) * n.dual_norm(g) + 1e-12);
      }
    }
  }

  TEST_CASE("domain membership and projection") {
    DomainSpec s = DomainSpec::simplex(3, 2.0);
    Vector p = s.project((Vector(3) << 5.0, -1.0, 0.3).finished());
    CHECK(s.contains(p));
    CHECK(p.sum() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((p.array() >= 0.0).all());
    CHECK(s.diameter(1.0) == doctest::Approx(4.0));
    CHECK(s.diameter(2.0) == doctest::Approx(2.0 * std::sqrt(2.0)));

    DomainSpec ball = DomainSpec::ball(Vector::Zero(2), 1.0);
    Vector q = ball.project((Vector(2) << 3.0, 4.0).finished());
    CHECK(q[0] == doctest::Approx(0.6));
    CHECK(q[1] == doctest::Approx(0.8));

    DomainSpec box = DomainSpec::box((Vector(2) << 0, 0).finished(), (Vector(2) << 1, 2).finished());
    Vector r = box.project((Vector(2) << -1, 5).finished());
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 2.0);
    CHECK_FALSE(box.contains((Vector(2) << 0.5, 2.5).finished()));

    DomainSpec spx = DomainSpec::spectraplex(2);
    Matrix M(2, 2);
    M << 2, 0, 0, -1;
    Vector flat = spx.project(Eigen::Map<Vector>(M.data(), 4));
    CHECK(spx.contains(flat));
  }

  TEST_CASE("simplex projection against a brute-force oracle") {
    // In one dimension less, the projection of v is the minimizer of |x - v|^2 over a fine grid.
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
      Vector v = random_vec(2, rng, -2, 2);
      Vector p = project_simplex(v, 1.0);
      double best = kInf, arg = 0;
      for (int k = 0; k <= 100000; ++k) {
        const double a = k / 100000.0;
        const double dist = (v[0] - a) * (v[0] - a) + (v[1] - 1 + a) * (v[1] - 1 + a);
        if (dist < best) best = dist, arg = a;
      }
      CHECK(p[0] == doctest::Approx(arg).epsilon(2e-5));
    }
  }

  TEST_CASE("evaluate: zero noise, fixed noise and bounds") {
    NoisyOracle o(sq_norm(2), 0.0, NoiseMode::hash, 1);
    CHECK(o.evaluate((Vector(2) << 1, 2).finished()) == 5.0);

    std::mt19937_64 rng(11);
    for (NoiseMode m : {NoiseMode::hash, NoiseMode::sinusoid}) {
      NoisyOracle n(sq_norm(4), 0.1, m, 42);
      for (int i = 0; i < 1000; ++i) {
        Vector x = random_vec(4, rng);
        const double a = n.evaluate(x), b = n.evaluate(x);
        CHECK(a == b);
        CHECK(std::abs(a - x.squaredNorm()) < 0.1);
      }
      CHECK(n.actual_evals() == 2000);
    }
    NoisyOracle s(sq_norm(3), 0.1, NoiseMode::sinusoid, 0);
    CHECK(s.evaluate(Vector::Zero(3)) == 0.0);
  }

  TEST_CASE("hash noise covers the band and depends on the seed") {
    std::mt19937_64 rng(5);
    NoisyOracle a(sq_norm(3), 1.0, NoiseMode::hash, 1), b(sq_norm(3), 1.0, NoiseMode::hash, 2);
    double lo = 1, hi = -1;
    int differ = 0;
    for (int i = 0; i < 10000; ++i) {
      Vector x = random_vec(3, rng);
      const double e = a.noise(x);
      CHECK(std::abs(e) < 1.0);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
      differ += a.noise(x) != b.noise(x);
    }
    CHECK(lo < -0.99);
    CHECK(hi > 0.99);
    CHECK(differ > 9990);
  }

  TEST_CASE("evaluate errors") {
    NoisyOracle o(sq_norm(2), 0.0, NoiseMode::none, 0);
    CHECK_THROWS_AS(o.evaluate(Vector::Zero(3)), ShapeError);
    Vector bad(2);
    bad << 1.0, std::nan("");
    CHECK_THROWS_AS(o.evaluate(bad), InvalidInput);
    CHECK_THROWS_AS(NoisyOracle(sq_norm(2), -1.0, NoiseMode::hash, 0), InvalidInput);
  }

  TEST_CASE("charge_queries") {
    NoisyOracle o(sq_norm(1), 0.0, NoiseMode::none, 0);
    o.charge_queries(5);
    CHECK(o.charged_queries() == 5);
    o.charge_queries(0);
    CHECK(o.charged_queries() == 5);
    o.charge_queries(3);
    o.charge_queries(4);
    CHECK(o.charged_queries() == 12);
    CHECK(o.actual_evals() == 0);
  }

  TEST_CASE("objective validation") {
    ObjectiveSpec s = sq_norm(2);
    s.G = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = sq_norm(2);
    s.L = 1.0;
    s.mu = 2.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = sq_norm(2);
    s.domain = DomainSpec::simplex(3);
    CHECK_THROWS_AS(s.validate(), ShapeError);
  }

  TEST_CASE("Lipschitz audit of a declared constant") {
    // |x|_1 is 1-Lipschitz under l_1.
    ObjectiveSpec s;
    s.name = "l1";
    s.d = 6;
    s.G = 1.0;
    s.evaluator = [](const Vector& x) { return x.lpNorm<1>(); };
    s.domain = DomainSpec::box(Vector::Constant(6, -1), Vector::Constant(6, 1));
    NormSpec n = NormSpec::make(1.0, 6);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10000; ++i) {
      Vector x = random_vec(6, rng), y = random_vec(6, rng);
      CHECK(std::abs(s.evaluator(x) - s.evaluator(y)) <= s.G * n.norm(x - y) + 1e-9);
    }
  }

  TEST_CASE("reference gradient falls back to central differences") {
    ObjectiveSpec s = sq_norm(3);
    Vector x(3);
    x << 0.5, -1.0, 2.0;
    CHECK((s.reference_gradient(x) - 2.0 * x).cwiseAbs().maxCoeff() < 1e-7);
  }

  TEST_CASE("noise mode names round-trip") {
    for (NoiseMode m : {NoiseMode::none, NoiseMode::hash, NoiseMode::sinusoid})
      CHECK(parse_noise_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_noise_mode("gauss"), ConfigError);
  }
}

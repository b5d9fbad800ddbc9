#include <cmath>
#include <random>

#include "doctest.h"
#include "qzo/geometry.hpp"
#include "support/oracles.hpp"

using namespace qzo;

namespace {

Vector flat(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }
Matrix unflat(const Vector& v, int n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

double trace_norm(const Matrix& M) { return sym_eig(M).eigenvalues.cwiseAbs().sum(); }

Matrix random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N01;
  Matrix G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = N01(rng);
  return 0.5 * (G + G.transpose());
}

// Independent von Neumann relative entropy: tr X log X - tr X log Y - tr X + tr Y.
double vn_divergence(const Matrix& X, const Matrix& Y) {
  Eigen::SelfAdjointEigenSolver<Matrix> ex(X), ey(Y);
  Matrix logX = ex.eigenvectors() * ex.eigenvalues().array().log().matrix().asDiagonal() *
                ex.eigenvectors().transpose();
  Matrix logY = ey.eigenvectors() * ey.eigenvalues().array().log().matrix().asDiagonal() *
                ey.eigenvectors().transpose();
  return (X * (logX - logY)).trace() - X.trace() + Y.trace();
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("Bregman divergence examples") {
    auto euc = MirrorGeometry::euclidean(2);
    CHECK(bregman_divergence(euc, (Vector(2) << 1, 0).finished(), Vector::Zero(2)) == doctest::Approx(0.5));
    auto ent = MirrorGeometry::simplex_entropy(2);
    Vector x(2), xb(2);
    x << 0.5, 0.5;
    xb << 0.25, 0.75;
    CHECK(bregman_divergence(ent, x, xb) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)));
    CHECK(bregman_divergence(ent, x, xb) == doctest::Approx(0.14384).epsilon(1e-4));
    CHECK(bregman_divergence(ent, x, x) == 0.0);
    CHECK_THROWS_AS(bregman_divergence(ent, (Vector(2) << 1, 0).finished(), x), DomainError);
  }

  TEST_CASE("von Neumann divergence matches an independent evaluation") {
    std::mt19937_64 rng(2);
    auto g = MirrorGeometry::spectraplex_entropy(3);
    for (int t = 0; t < 20; ++t) {
      Matrix X = testing::random_density(3, rng, 0.05), Y = testing::random_density(3, rng, 0.05);
      CHECK(bregman_divergence(g, flat(X), flat(Y)) == doctest::Approx(vn_divergence(X, Y)).epsilon(1e-9));
    }
  }

  TEST_CASE("three-point identity") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N01;
    auto euc = MirrorGeometry::euclidean(4);
    auto ent = MirrorGeometry::simplex_entropy(4);
    auto spx = MirrorGeometry::spectraplex_entropy(3);
    for (int t = 0; t < 50; ++t) {
      Vector a(4), b(4), c(4);
      for (int i = 0; i < 4; ++i) a[i] = N01(rng), b[i] = N01(rng), c[i] = N01(rng);
      CHECK(std::abs(three_point_identity_residual(euc, a, b, c)) < 1e-12 * (1 + a.norm() + b.norm() + c.norm()) * 10);
      Vector p = testing::random_simplex_point(4, rng, 0.01), q = testing::random_simplex_point(4, rng, 0.01),
             w = testing::random_simplex_point(4, rng, 0.01);
      CHECK(std::abs(three_point_identity_residual(ent, p, q, w)) < 1e-10 * 10);
      CHECK(three_point_identity_residual(ent, p, p, w) == doctest::Approx(0.0).epsilon(1e-15));
      Matrix X = testing::random_density(3, rng, 0.05), Y = testing::random_density(3, rng, 0.05),
             W = testing::random_density(3, rng, 0.05);
      CHECK(std::abs(three_point_identity_residual(spx, flat(X), flat(Y), flat(W))) <= 1e-9);
    }
  }

  TEST_CASE("mirror map inverse and strong convexity") {
    std::mt19937_64 rng(6);
    auto ent = MirrorGeometry::simplex_entropy(5);
    auto euc = MirrorGeometry::euclidean(5);
    auto spx = MirrorGeometry::spectraplex_entropy(3);
    CHECK(ent.mu() == 1.0);
    CHECK(euc.mu() == 1.0);
    CHECK(spx.mu() == 0.5);
    for (int t = 0; t < 200; ++t) {
      Vector x = testing::random_simplex_point(5, rng, 1e-3), y = testing::random_simplex_point(5, rng, 1e-3);
      CHECK((ent.grad_phi_inverse(ent.grad_phi(x)) - x).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(bregman_divergence(ent, x, y) >= 0.5 * std::pow((x - y).lpNorm<1>(), 2) - 1e-12);
      CHECK(bregman_divergence(euc, x, y) >= 0.5 * (x - y).squaredNorm() - 1e-12);
      Matrix X = testing::random_density(3, rng, 0.01), Y = testing::random_density(3, rng, 0.01);
      CHECK((unflat(spx.grad_phi_inverse(spx.grad_phi(flat(X))), 3) - X).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(bregman_divergence(spx, flat(X), flat(Y)) >= 0.25 * std::pow(trace_norm(X - Y), 2) - 1e-12);
    }
  }

  TEST_CASE("Bregman projection examples") {
    auto ent = MirrorGeometry::simplex_entropy(2);
    DomainSpec s = DomainSpec::simplex(2);
    Vector p = bregman_project(ent, (Vector(2) << 2, 2).finished(), s);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    p = bregman_project(ent, (Vector(2) << 1, 3).finished(), s);
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.75));
    p = bregman_project(ent, (Vector(2) << 1, 3).finished(), DomainSpec::simplex(2, 2.0));
    CHECK(p.sum() == doctest::Approx(2.0));

    auto euc = MirrorGeometry::euclidean(2);
    p = bregman_project(euc, (Vector(2) << 3, 4).finished(), DomainSpec::ball(Vector::Zero(2), 1.0));
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[1] == doctest::Approx(0.8));

    CHECK_THROWS_AS(bregman_project(ent, (Vector(2) << 1, 1).finished(), DomainSpec::ball(Vector::Zero(2), 1.0)),
                    ConfigError);
    CHECK_THROWS_AS(bregman_project(MirrorGeometry::spectraplex_entropy(2), Vector::Ones(4), DomainSpec::simplex(4)),
                    ConfigError);
  }

  TEST_CASE("projection optimality and generalized Pythagoras") {
    std::mt19937_64 rng(8);
    std::exponential_distribution<double> E(1.0);
    auto ent = MirrorGeometry::simplex_entropy(4);
    DomainSpec s = DomainSpec::simplex(4);
    auto euc = MirrorGeometry::euclidean(4);
    DomainSpec ball = DomainSpec::ball(Vector::Zero(4), 1.0);
    std::normal_distribution<double> N01;
    for (int t = 0; t < 200; ++t) {
      Vector xb(4), x = testing::random_simplex_point(4, rng, 0.01);
      for (int i = 0; i < 4; ++i) xb[i] = 3.0 * E(rng) + 1e-3;
      Vector P = bregman_project(ent, xb, s);
      CHECK((ent.grad_phi(P) - ent.grad_phi(xb)).dot(P - x) <= 1e-9);
      CHECK(bregman_divergence(ent, x, P) + bregman_divergence(ent, P, xb) <= bregman_divergence(ent, x, xb) + 1e-9);

      Vector v(4), u(4);
      for (int i = 0; i < 4; ++i) v[i] = 2.0 * N01(rng), u[i] = N01(rng);
      u = ball.project(u);
      Vector Q = bregman_project(euc, v, ball);
      CHECK((Q - v).dot(Q - u) <= 1e-9);
      CHECK(bregman_divergence(euc, u, Q) + bregman_divergence(euc, Q, v) <= bregman_divergence(euc, u, v) + 1e-9);
    }
  }

  TEST_CASE("mirror step examples and closed forms") {
    auto ent = MirrorGeometry::simplex_entropy(2);
    DomainSpec s = DomainSpec::simplex(2);
    Vector x(2), g(2);
    x << 0.5, 0.5;
    g << std::log(2.0), 0.0;
    Vector y = mirror_step(ent, x, g, 1.0, s);
    CHECK(y[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK((mirror_step(ent, x, Vector::Zero(2), 0.7, s) - x).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(mirror_step(ent, x, g, 0.0, s), InvalidInput);

    std::mt19937_64 rng(10);
    std::normal_distribution<double> N01;
    auto ent6 = MirrorGeometry::simplex_entropy(6);
    DomainSpec s6 = DomainSpec::simplex(6);
    for (int t = 0; t < 100; ++t) {
      Vector p = testing::random_simplex_point(6, rng, 0.0), h(6);
      for (int i = 0; i < 6; ++i) h[i] = 5.0 * N01(rng);
      const double eta = 0.3;
      Vector w = (p.array() * (-eta * h.array()).exp()).matrix();
      w /= w.sum();
      CHECK((mirror_step(ent6, p, h, eta, s6) - w).cwiseAbs().maxCoeff() < 1e-12);
    }
    // Large gradients stay finite.
    Vector big = mirror_step(ent6, Vector::Constant(6, 1.0 / 6), Vector::LinSpaced(6, -1e4, 1e4), 1.0, s6);
    CHECK(big.allFinite());
    CHECK(big.sum() == doctest::Approx(1.0));

    auto spx = MirrorGeometry::spectraplex_entropy(2);
    DomainSpec sp = DomainSpec::spectraplex(2);
    Matrix half = 0.5 * Matrix::Identity(2, 2);
    Matrix ga = 0.8 * Matrix::Identity(2, 2);
    CHECK((mirror_step(spx, flat(half), flat(ga), 1.3, sp) - flat(half)).cwiseAbs().maxCoeff() < 1e-14);

    auto spx3 = MirrorGeometry::spectraplex_entropy(3);
    DomainSpec sp3 = DomainSpec::spectraplex(3);
    for (int t = 0; t < 30; ++t) {
      Matrix X = testing::random_density(3, rng, 0.02), H = random_symmetric(3, rng);
      const double eta = 0.5;
      Eigen::SelfAdjointEigenSolver<Matrix> ex(X);
      Matrix L = ex.eigenvectors() * ex.eigenvalues().array().log().matrix().asDiagonal() * ex.eigenvectors().transpose();
      Eigen::SelfAdjointEigenSolver<Matrix> ey(L - eta * H);
      Matrix Z = ey.eigenvectors() * ey.eigenvalues().array().exp().matrix().asDiagonal() * ey.eigenvectors().transpose();
      Z /= Z.trace();
      CHECK((unflat(mirror_step(spx3, flat(X), flat(H), eta, sp3), 3) - Z).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("sym_eig examples and reconstruction") {
    SymEigResult a = sym_eig((Matrix(2, 2) << 1, 0, 0, 3).finished());
    CHECK(a.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(a.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(std::abs(a.eigenvectors(1, 0)) == doctest::Approx(1.0));

    SymEigResult b = sym_eig((Matrix(2, 2) << 0, 1, 1, 0).finished());
    CHECK(b.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(b.eigenvalues[1] == doctest::Approx(-1.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(b.eigenvectors.col(0).dot((Vector(2) << r, r).finished())) == doctest::Approx(1.0));
    CHECK(std::abs(b.eigenvectors.col(1).dot((Vector(2) << r, -r).finished())) == doctest::Approx(1.0));

    std::mt19937_64 rng(12);
    for (int t = 0; t < 10; ++t) {
      Matrix M = random_symmetric(20, rng);
      SymEigResult e = sym_eig(M);
      for (int i = 1; i < 20; ++i) CHECK(e.eigenvalues[i - 1] >= e.eigenvalues[i]);
      const double op = e.eigenvalues.cwiseAbs().maxCoeff();
      Matrix rec = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
      // Operator norm of the residual via an independent solver.
      Eigen::SelfAdjointEigenSolver<Matrix> res(0.5 * (rec - M + (rec - M).transpose()), Eigen::EigenvaluesOnly);
      CHECK(res.eigenvalues().cwiseAbs().maxCoeff() <= 1e-8 * op);
      CHECK((e.eigenvectors.transpose() * e.eigenvectors - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(lambda_max(M) == doctest::Approx(e.eigenvalues[0]));
      CHECK(lambda_min(M) == doctest::Approx(e.eigenvalues[19]));
    }
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(sym_eig(bad), InvalidInput);
  }

  TEST_CASE("SPD log and exp") {
    CHECK((spd_exp(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = std::exp(1.0);
    D(1, 1) = std::exp(2.0);
    Matrix L = spd_log(D);
    CHECK(L(0, 0) == doctest::Approx(1.0));
    CHECK(L(1, 1) == doctest::Approx(2.0));
    CHECK(std::abs(L(0, 1)) < 1e-15);
    CHECK_THROWS_AS(spd_log((Matrix(2, 2) << 1, 0, 0, -1).finished()), DomainError);

    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> U(0.0, 4.0);
    for (int t = 0; t < 20; ++t) {
      Eigen::HouseholderQR<Matrix> qr(random_symmetric(6, rng));
      Matrix Q = qr.householderQ();
      Vector lam(6);
      for (int i = 0; i < 6; ++i) lam[i] = std::pow(10.0, -U(rng));  // condition number <= 1e4
      Matrix S = Q * lam.asDiagonal() * Q.transpose();
      S = 0.5 * (S + Matrix(S.transpose()));
      CHECK((spd_exp(spd_log(S)) - S).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

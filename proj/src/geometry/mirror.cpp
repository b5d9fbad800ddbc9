#include <algorithm>
#include <cmath>

#include "qzo/geometry.hpp"

namespace qzo {

namespace {

constexpr double kLogFloor = 1e-300;

Eigen::Map<const Matrix> as_matrix(const Vector& v, int n) { return {v.data(), n, n}; }

Vector flatten(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

void require_positive(const Vector& x, const char* who) {
  if (!x.allFinite() || x.minCoeff() <= 0.0)
    throw DomainError(std::string(who) + ": entropy potential needs strictly positive coordinates");
}

void require_dim(const MirrorGeometry& g, const Vector& x, const char* who) {
  if (x.size() != g.dim()) throw ShapeError(std::string(who) + ": dimension mismatch");
}

// log of a symmetric matrix with eigenvalues clamped from below; used only on iterates.
Matrix clamped_log(const Matrix& X) {
  SymEigResult e = sym_eig(X);
  if (e.eigenvalues.minCoeff() < 0.0) throw DomainError("spectraplex iterate has a negative eigenvalue");
  Vector l = e.eigenvalues.unaryExpr([](double v) { return std::log(std::max(v, kLogFloor)); });
  Matrix R = e.eigenvectors * l.asDiagonal() * e.eigenvectors.transpose();
  return 0.5 * (R + R.transpose());
}

// exp(Y) / tr(exp(Y)) with the top eigenvalue subtracted first.
Matrix normalized_exp(const Matrix& Y) {
  SymEigResult e = sym_eig(Y);
  double top = e.eigenvalues[0];
  Vector w = (e.eigenvalues.array() - top).exp();
  Matrix R = e.eigenvectors * (w / w.sum()).asDiagonal() * e.eigenvectors.transpose();
  return 0.5 * (R + R.transpose());
}

}  // namespace

std::string to_string(MirrorSetup s) {
  switch (s) {
    case MirrorSetup::euclidean: return "euclidean";
    case MirrorSetup::simplex_entropy: return "simplex_entropy";
    case MirrorSetup::spectraplex_entropy: return "spectraplex_entropy";
  }
  return "?";
}

MirrorGeometry MirrorGeometry::euclidean(int d) {
  MirrorGeometry g;
  g.setup_ = MirrorSetup::euclidean;
  g.mu_ = 1.0;
  g.norm_ = NormSpec::make(2.0, d);
  g.dim_ = d;
  return g;
}

MirrorGeometry MirrorGeometry::simplex_entropy(int d) {
  MirrorGeometry g;
  g.setup_ = MirrorSetup::simplex_entropy;
  g.mu_ = 1.0;
  g.norm_ = NormSpec::make(1.0, d);
  g.dim_ = d;
  return g;
}

MirrorGeometry MirrorGeometry::spectraplex_entropy(int n) {
  MirrorGeometry g;
  g.setup_ = MirrorSetup::spectraplex_entropy;
  g.mu_ = 0.5;
  g.norm_ = NormSpec::make(1.0, n);
  g.dim_ = n * n;
  g.n_ = n;
  return g;
}

double MirrorGeometry::phi(const Vector& x) const {
  require_dim(*this, x, "phi");
  switch (setup_) {
    case MirrorSetup::euclidean:
      return 0.5 * x.squaredNorm();
    case MirrorSetup::simplex_entropy:
      require_positive(x, "phi");
      return (x.array() * x.array().log()).sum();
    case MirrorSetup::spectraplex_entropy: {
      Matrix X = as_matrix(x, n_);
      return (X * spd_log(X)).trace();
    }
  }
  return 0.0;
}

Vector MirrorGeometry::grad_phi(const Vector& x) const {
  require_dim(*this, x, "grad_phi");
  switch (setup_) {
    case MirrorSetup::euclidean:
      return x;
    case MirrorSetup::simplex_entropy:
      require_positive(x, "grad_phi");
      return (1.0 + x.array().log()).matrix();
    case MirrorSetup::spectraplex_entropy: {
      Matrix Y = Matrix::Identity(n_, n_) + spd_log(as_matrix(x, n_));
      return flatten(Y);
    }
  }
  return x;
}

Vector MirrorGeometry::grad_phi_inverse(const Vector& y) const {
  require_dim(*this, y, "grad_phi_inverse");
  switch (setup_) {
    case MirrorSetup::euclidean:
      return y;
    case MirrorSetup::simplex_entropy:
      return (y.array() - 1.0).exp().matrix();
    case MirrorSetup::spectraplex_entropy:
      return flatten(spd_exp(as_matrix(y, n_) - Matrix::Identity(n_, n_)));
  }
  return y;
}

double MirrorGeometry::primal_norm(const Vector& x) const {
  if (setup_ == MirrorSetup::spectraplex_entropy) {
    SymEigResult e = sym_eig(as_matrix(x, n_));
    return e.eigenvalues.cwiseAbs().sum();
  }
  return norm_.norm(x);
}

double bregman_divergence(const MirrorGeometry& geom, const Vector& x, const Vector& x_bar) {
  require_dim(geom, x, "bregman_divergence");
  require_dim(geom, x_bar, "bregman_divergence");
  switch (geom.setup()) {
    case MirrorSetup::euclidean:
      return 0.5 * (x - x_bar).squaredNorm();
    case MirrorSetup::simplex_entropy:
      require_positive(x, "bregman_divergence");
      require_positive(x_bar, "bregman_divergence");
      return (x.array() * (x.array() / x_bar.array()).log() - x.array() + x_bar.array()).sum();
    case MirrorSetup::spectraplex_entropy: {
      int n = geom.matrix_n();
      Matrix X = as_matrix(x, n), Xb = as_matrix(x_bar, n);
      return (X * (spd_log(X) - spd_log(Xb))).trace() - X.trace() + Xb.trace();
    }
  }
  return 0.0;
}

double three_point_identity_residual(const MirrorGeometry& geom, const Vector& x, const Vector& x_bar,
                                     const Vector& w) {
  double lhs = (geom.grad_phi(x) - geom.grad_phi(x_bar)).dot(x - w);
  double rhs = bregman_divergence(geom, x, x_bar) + bregman_divergence(geom, w, x) -
               bregman_divergence(geom, w, x_bar);
  return lhs - rhs;
}

void check_geometry_domain(const MirrorGeometry& geom, const DomainSpec& domain) {
  if (geom.dim() != domain.dim()) throw ShapeError("geometry/domain dimension mismatch");
  using K = DomainSpec::Kind;
  bool ok = geom.setup() == MirrorSetup::euclidean ||
            (geom.setup() == MirrorSetup::simplex_entropy && domain.kind() == K::simplex) ||
            (geom.setup() == MirrorSetup::spectraplex_entropy && domain.kind() == K::spectraplex);
  if (!ok) throw ConfigError("no Bregman projection for geometry " + to_string(geom.setup()) + " on this domain");
}

Vector bregman_project(const MirrorGeometry& geom, const Vector& x_bar, const DomainSpec& domain) {
  check_geometry_domain(geom, domain);
  require_dim(geom, x_bar, "bregman_project");
  switch (geom.setup()) {
    case MirrorSetup::euclidean:
      return domain.project(x_bar);
    case MirrorSetup::simplex_entropy:
      require_positive(x_bar, "bregman_project");
      return x_bar * (domain.scale() / x_bar.sum());
    case MirrorSetup::spectraplex_entropy: {
      Matrix X = as_matrix(x_bar, geom.matrix_n());
      double tr = X.trace();
      if (!(tr > 0.0)) throw DomainError("bregman_project: trace must be positive");
      Matrix P = X / tr;
      return flatten(0.5 * (P + P.transpose()));
    }
  }
  return x_bar;
}

Vector mirror_step(const MirrorGeometry& geom, const Vector& x, const Vector& g, double eta,
                   const DomainSpec& domain) {
  check_geometry_domain(geom, domain);
  require_dim(geom, x, "mirror_step");
  require_dim(geom, g, "mirror_step");
  if (!(eta > 0.0)) throw InvalidInput("mirror_step: eta must be positive");
  if (!g.allFinite()) throw InvalidInput("mirror_step: non-finite gradient");
  switch (geom.setup()) {
    case MirrorSetup::euclidean:
      return domain.project(x - eta * g);
    case MirrorSetup::simplex_entropy: {
      if (!x.allFinite() || x.minCoeff() < 0.0) throw DomainError("mirror_step: iterate left the simplex");
      // grad_phi, then the inverse map shifted by its max, then renormalization.
      Vector y = (1.0 + x.array().max(kLogFloor).log()).matrix() - eta * g;
      Vector z = (y.array() - y.maxCoeff()).exp().matrix();
      return z * (domain.scale() / z.sum());
    }
    case MirrorSetup::spectraplex_entropy: {
      int n = geom.matrix_n();
      Matrix Y = clamped_log(as_matrix(x, n)) - eta * Matrix(as_matrix(g, n));
      return flatten(normalized_exp(Y));
    }
  }
  return x;
}

}  // namespace qzo

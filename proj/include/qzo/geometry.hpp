#pragma once

#include "qzo/core.hpp"

namespace qzo {

struct SymEigResult {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

// M is symmetrized on entry.
SymEigResult sym_eig(const Matrix& M);
double lambda_max(const Matrix& M);
double lambda_min(const Matrix& M);
Matrix spd_log(const Matrix& M);
Matrix spd_exp(const Matrix& M);

enum class MirrorSetup { euclidean, simplex_entropy, spectraplex_entropy };

std::string to_string(MirrorSetup s);

// Mirror map bundle. Spectraplex points are n x n matrices flattened column-major,
// and the pairing <., .> is the Frobenius inner product.
class MirrorGeometry {
 public:
  static MirrorGeometry euclidean(int d);
  static MirrorGeometry simplex_entropy(int d);
  static MirrorGeometry spectraplex_entropy(int n);

  MirrorSetup setup() const { return setup_; }
  double mu() const { return mu_; }
  const NormSpec& norm() const { return norm_; }
  int dim() const { return dim_; }
  int matrix_n() const { return n_; }

  double phi(const Vector& x) const;
  Vector grad_phi(const Vector& x) const;
  Vector grad_phi_inverse(const Vector& y) const;
  // Norm in which mu is stated (trace norm for the spectraplex).
  double primal_norm(const Vector& x) const;

 private:
  MirrorSetup setup_ = MirrorSetup::euclidean;
  double mu_ = 1.0;
  NormSpec norm_;
  int dim_ = 0;
  int n_ = 0;
};

double bregman_divergence(const MirrorGeometry& geom, const Vector& x, const Vector& x_bar);
double three_point_identity_residual(const MirrorGeometry& geom, const Vector& x, const Vector& x_bar,
                                     const Vector& w);
Vector bregman_project(const MirrorGeometry& geom, const Vector& x_bar, const DomainSpec& domain);
Vector mirror_step(const MirrorGeometry& geom, const Vector& x, const Vector& g, double eta,
                   const DomainSpec& domain);

// Throws ConfigError unless bregman_project supports the pair.
void check_geometry_domain(const MirrorGeometry& geom, const DomainSpec& domain);

}  // namespace qzo

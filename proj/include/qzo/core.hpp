#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "qzo/errors.hpp"

namespace qzo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Returns q with 1/p + 1/q = 1.
double dual_exponent(double p);

// lp norm with p in [1, inf].
double lp_norm(const Vector& x, double p);

struct NormSpec {
  double p = 2.0;
  double q = 2.0;
  // ||x||_p <= vartheta ||x||_inf, ||x||_q <= vartheta_star ||x||_inf.
  double vartheta = 1.0;
  double vartheta_star = 1.0;

  static NormSpec make(double p, int d);
  double norm(const Vector& x) const { return lp_norm(x, p); }
  double dual_norm(const Vector& g) const { return lp_norm(g, q); }
};

class DomainSpec {
 public:
  enum class Kind { euclidean_ball, simplex, box, spectraplex };

  static DomainSpec ball(Vector center, double radius);
  static DomainSpec simplex(int d, double scale = 1.0);
  static DomainSpec box(Vector lo, Vector hi);
  // Unconstrained R^d, represented as an infinite box.
  static DomainSpec whole_space(int d);
  // Points are n x n symmetric matrices flattened column-major.
  static DomainSpec spectraplex(int n);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  double scale() const { return scale_; }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  int matrix_n() const { return n_; }

  bool contains(const Vector& x, double tol = 1e-9) const;
  // Euclidean projection.
  Vector project(const Vector& x) const;
  // Diameter measured in the l_p norm (trace norm for the spectraplex).
  double diameter(double p) const;
  // A canonical interior starting point.
  Vector default_start() const;

 private:
  Kind kind_ = Kind::box;
  int dim_ = 0;
  Vector center_;
  double radius_ = 0.0;
  double scale_ = 1.0;
  Vector lo_, hi_;
  int n_ = 0;
};

// Euclidean projection onto {x >= 0, sum x = scale}.
Vector project_simplex(const Vector& v, double scale = 1.0);

struct ObjectiveSpec {
  std::string name;
  std::function<double(const Vector&)> evaluator;
  // Reference only; the exact and surrogate backends are its sole consumers.
  std::function<Vector(const Vector&)> exact_gradient;
  int d = 0;
  double G = 1.0;
  std::optional<double> L;
  std::optional<double> mu;
  DomainSpec domain = DomainSpec::whole_space(1);
  std::optional<double> f_star;

  void validate() const;
  // exact_gradient when present, otherwise central differences of the exact evaluator.
  Vector reference_gradient(const Vector& x) const;
};

enum class NoiseMode { none, hash, sinusoid };

NoiseMode parse_noise_mode(const std::string& s);
std::string to_string(NoiseMode m);

// Fixed theta-perturbation of an objective plus query accounting.
class NoisyOracle {
 public:
  // Sinusoid mode: eta(x) = 0.9 theta sin(omega0 * sum_i x_i).
  static constexpr double kSinusoidOmega = 1e3;
  static constexpr double kSinusoidAmplitude = 0.9;

  NoisyOracle(ObjectiveSpec base, double theta, NoiseMode mode, std::uint64_t seed);

  double evaluate(const Vector& x);
  // The deterministic perturbation eta(x); |eta| < theta.
  double noise(const Vector& x) const;

  void charge_queries(std::uint64_t n) { charged_ += n; }

  const ObjectiveSpec& base() const { return base_; }
  double theta() const { return theta_; }
  NoiseMode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t charged_queries() const { return charged_; }
  std::uint64_t actual_evals() const { return actual_; }

 private:
  ObjectiveSpec base_;
  double theta_;
  NoiseMode mode_;
  std::uint64_t seed_;
  std::uint64_t charged_ = 0;
  std::uint64_t actual_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace qzo

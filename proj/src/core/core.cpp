#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "qzo/core.hpp"

namespace qzo {

double dual_exponent(double p) {
  if (!(p >= 1.0)) throw InvalidInput("dual_exponent: p must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double lp_norm(const Vector& x, double p) {
  if (std::isinf(p)) return x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  // Scale by the max entry to avoid overflow in |x|^p.
  double m = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / m, p);
  return m * std::pow(s, 1.0 / p);
}

NormSpec NormSpec::make(double p, int d) {
  if (d < 1) throw InvalidInput("NormSpec: dimension must be positive");
  NormSpec n;
  n.p = p;
  n.q = dual_exponent(p);
  auto root = [d](double e) { return std::isinf(e) ? 1.0 : std::pow(double(d), 1.0 / e); };
  n.vartheta = root(n.p);
  n.vartheta_star = root(n.q);
  return n;
}

// ---------------------------------------------------------------------------

Vector project_simplex(const Vector& v, double scale) {
  const Eigen::Index d = v.size();
  std::vector<double> u(v.data(), v.data() + d);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    cum += u[k];
    double t = (cum - scale) / double(k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  Vector x = (v.array() - tau).max(0.0);
  // Remove residual rounding so the sum matches the scale closely.
  double s = x.sum();
  if (s > 0.0) x *= scale / s;
  return x;
}

DomainSpec DomainSpec::ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("ball: radius must be positive");
  DomainSpec s;
  s.kind_ = Kind::euclidean_ball;
  s.dim_ = int(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

DomainSpec DomainSpec::simplex(int d, double scale) {
  if (d < 1 || !(scale > 0.0)) throw InvalidInput("simplex: need d >= 1 and scale > 0");
  DomainSpec s;
  s.kind_ = Kind::simplex;
  s.dim_ = d;
  s.scale_ = scale;
  return s;
}

DomainSpec DomainSpec::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw ShapeError("box: lo/hi size mismatch");
  if ((hi.array() < lo.array()).any()) throw InvalidInput("box: hi < lo");
  DomainSpec s;
  s.kind_ = Kind::box;
  s.dim_ = int(lo.size());
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

DomainSpec DomainSpec::whole_space(int d) {
  return box(Vector::Constant(d, -kInf), Vector::Constant(d, kInf));
}

DomainSpec DomainSpec::spectraplex(int n) {
  if (n < 1) throw InvalidInput("spectraplex: n must be positive");
  DomainSpec s;
  s.kind_ = Kind::spectraplex;
  s.dim_ = n * n;
  s.n_ = n;
  return s;
}

bool DomainSpec::contains(const Vector& x, double tol) const {
  if (x.size() != dim_) return false;
  if (!x.allFinite()) return false;
  switch (kind_) {
    case Kind::euclidean_ball:
      return (x - center_).norm() <= radius_ * (1.0 + tol) + tol;
    case Kind::simplex:
      return x.minCoeff() >= -tol && std::abs(x.sum() - scale_) <= std::max(1e-12, tol) * std::max(1.0, scale_);
    case Kind::box:
      return ((x.array() >= lo_.array() - tol) && (x.array() <= hi_.array() + tol)).all();
    case Kind::spectraplex: {
      Eigen::Map<const Matrix> X(x.data(), n_, n_);
      if ((X - X.transpose()).cwiseAbs().maxCoeff() > tol) return false;
      if (std::abs(X.trace() - 1.0) > tol) return false;
      Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff() >= -tol;
    }
  }
  return false;
}

Vector DomainSpec::project(const Vector& x) const {
  if (x.size() != dim_) throw ShapeError("project: dimension mismatch");
  switch (kind_) {
    case Kind::euclidean_ball: {
      Vector r = x - center_;
      double n = r.norm();
      if (n <= radius_) return x;
      return center_ + r * (radius_ / n);
    }
    case Kind::simplex:
      return project_simplex(x, scale_);
    case Kind::box:
      return x.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::spectraplex: {
      Eigen::Map<const Matrix> X(x.data(), n_, n_);
      Matrix S = 0.5 * (X + X.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(S);
      Vector lam = project_simplex(es.eigenvalues(), 1.0);
      Matrix P = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      P = 0.5 * (P + P.transpose());
      return Eigen::Map<Vector>(P.data(), dim_);
    }
  }
  return x;
}

double DomainSpec::diameter(double p) const {
  switch (kind_) {
    case Kind::euclidean_ball:
      if (p >= 2.0) return 2.0 * radius_;
      return 2.0 * radius_ * std::pow(double(dim_), 1.0 / p - 0.5);
    case Kind::simplex:
      return (std::isinf(p) ? 1.0 : std::pow(2.0, 1.0 / p)) * scale_;
    case Kind::box:
      return lp_norm(hi_ - lo_, p);
    case Kind::spectraplex:
      // Schatten-p distance between two orthogonal rank-one projectors.
      return std::isinf(p) ? 1.0 : std::pow(2.0, 1.0 / p);
  }
  return kInf;
}

Vector DomainSpec::default_start() const {
  switch (kind_) {
    case Kind::euclidean_ball:
      return center_;
    case Kind::simplex:
      return Vector::Constant(dim_, scale_ / dim_);
    case Kind::box: {
      Vector x(dim_);
      for (int i = 0; i < dim_; ++i) {
        bool flo = std::isfinite(lo_[i]), fhi = std::isfinite(hi_[i]);
        x[i] = flo && fhi ? 0.5 * (lo_[i] + hi_[i]) : flo ? lo_[i] : fhi ? hi_[i] : 0.0;
      }
      return x;
    }
    case Kind::spectraplex: {
      Matrix I = Matrix::Identity(n_, n_) / double(n_);
      return Eigen::Map<Vector>(I.data(), dim_);
    }
  }
  return Vector::Zero(dim_);
}

// ---------------------------------------------------------------------------

void ObjectiveSpec::validate() const {
  if (!evaluator) throw ConfigError("objective '" + name + "': missing evaluator");
  if (d < 1) throw ConfigError("objective '" + name + "': dimension must be positive");
  if (!(G > 0.0)) throw ConfigError("objective '" + name + "': G must be positive");
  if (L && mu && !(*L >= *mu && *mu > 0.0)) throw ConfigError("objective '" + name + "': need L >= mu > 0");
  if (domain.dim() != d) throw ShapeError("objective '" + name + "': domain dimension mismatch");
}

Vector ObjectiveSpec::reference_gradient(const Vector& x) const {
  if (exact_gradient) return exact_gradient(x);
  Vector g(x.size());
  Vector xp = x, xm = x;
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = base * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (evaluator(xp) - evaluator(xm)) / (xp[i] - xm[i]);
    xp[i] = xm[i] = x[i];
  }
  return g;
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "none") return NoiseMode::none;
  if (s == "hash") return NoiseMode::hash;
  if (s == "sinusoid") return NoiseMode::sinusoid;
  throw ConfigError("unknown noise mode '" + s + "'");
}

std::string to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::none: return "none";
    case NoiseMode::hash: return "hash";
    case NoiseMode::sinusoid: return "sinusoid";
  }
  return "?";
}

NoisyOracle::NoisyOracle(ObjectiveSpec base, double theta, NoiseMode mode, std::uint64_t seed)
    : base_(std::move(base)), theta_(theta), mode_(mode), seed_(seed) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw InvalidInput("oracle: theta must be finite and >= 0");
  base_.validate();
}

double NoisyOracle::noise(const Vector& x) const {
  if (theta_ == 0.0) return 0.0;
  switch (mode_) {
    case NoiseMode::none:
      return 0.0;
    case NoiseMode::hash: {
      std::uint64_t h = splitmix64(seed_ ^ 0x5DEECE66DULL);
      for (double v : x) {
        // +0.0 and -0.0 are the same point.
        std::uint64_t bits = v == 0.0 ? 0 : std::bit_cast<std::uint64_t>(v);
        h = splitmix64(h ^ bits);
      }
      // u in (0, 1), strictly.
      double u = (double(h >> 11) + 0.5) * 0x1.0p-53;
      // The 1 - 1e-6 margin keeps |eta| < theta after rounding of f + eta.
      return theta_ * (1.0 - 1e-6) * (2.0 * u - 1.0);
    }
    case NoiseMode::sinusoid:
      return kSinusoidAmplitude * theta_ * std::sin(kSinusoidOmega * x.sum());
  }
  return 0.0;
}

double NoisyOracle::evaluate(const Vector& x) {
  if (x.size() != base_.d) throw ShapeError("evaluate: expected dimension " + std::to_string(base_.d));
  if (!x.allFinite()) throw InvalidInput("evaluate: non-finite input");
  ++actual_;
  return base_.evaluator(x) + noise(x);
}

}  // namespace qzo

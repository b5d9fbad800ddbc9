#include <cmath>

#include "qzo/qgrad.hpp"

namespace qzo {

std::uint64_t subgradient_charge(int d, double rho) {
  return std::uint64_t(std::ceil(8.0 * std::log2(double(d) / rho)));
}

void SubgradientConfig::validate(double theta, int d, double G) const {
  if (!(r1 > 0.0)) throw ConfigError("subgradient: r1 must be positive");
  if (!(rho > 0.0) || rho > 1.0 / 3.0) throw ConfigError("subgradient: rho must lie in (0, 1/3]");
  if (!(theta >= 0.0) || theta > r1 * d * G / rho)
    throw ConfigError("subgradient: theta must lie in [0, r1 d G / rho]");
}

double SubgradientConfig::r2(double theta, int d, double G) const {
  return std::sqrt(theta * r1 * rho / (double(d) * G));
}

double SubgradientConfig::step(double theta, int d, double G, const Vector& z) const {
  if (theta == 0.0) {
    // Noise-free oracle: the usual rounding-optimal central-difference step.
    return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, z.cwiseAbs().maxCoeff());
  }
  // Below machine epsilon the evaluator's own rounding is the effective noise.
  const double theta_eff = std::max(theta, std::numeric_limits<double>::epsilon());
  return r2(theta_eff, d, G) / double(d);
}

GradientEstimate subgradient_estimate(NoisyOracle& oracle, const Vector& x, double G, const SubgradientConfig& cfg,
                                      const NormSpec& norms, Rng& rng) {
  const int d = oracle.base().d;
  if (x.size() != d) throw ShapeError("subgradient_estimate: dimension mismatch");
  if (!(G > 0.0)) throw InvalidInput("subgradient_estimate: G must be positive");
  const double theta = oracle.theta();
  cfg.validate(theta, d, G);

  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vector z(d);
  for (int i = 0; i < d; ++i) z[i] = x[i] + cfg.r1 * U(rng);
  const double h = cfg.step(theta, d, G, z);

  GradientEstimate e;
  e.k.resize(d);
  Vector zp = z, zm = z;
  for (int i = 0; i < d; ++i) {
    zp[i] = z[i] + h;
    zm[i] = z[i] - h;
    // Divide by the representable step, not 2h.
    e.k[i] = (oracle.evaluate(zp) - oracle.evaluate(zm)) / (zp[i] - zm[i]);
    zp[i] = zm[i] = z[i];
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < cfg.rho) {
    for (int i = 0; i < d; ++i) e.k[i] = G * U(rng);
    e.failure_injected = true;
  }

  e.backend = Backend::finite_difference;
  e.rho = cfg.rho;
  e.charged_queries = subgradient_charge(d, cfg.rho);
  e.error_bound = 23.0 * 23.0 * norms.vartheta_star *
                  std::sqrt(theta * double(d) * d * d * G / (cfg.rho * cfg.r1));
  e.offset = 2.0 * G * norms.vartheta * cfg.r1;
  oracle.charge_queries(e.charged_queries);
  return e;
}

}  // namespace qzo

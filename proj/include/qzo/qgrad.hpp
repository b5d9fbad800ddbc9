#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qzo/core.hpp"

namespace qzo {

using Rng = std::mt19937_64;
using StateVector = std::vector<std::complex<double>>;

inline constexpr std::size_t kStatevectorCap = std::size_t{1} << 22;

// Centered grid {(j + 1/2)/B - 1/2} per axis, scaled by radius around center.
// Flat index layout: axis 0 varies fastest.
struct GridSpec {
  int b = 1;
  std::size_t B = 2;
  int d = 1;
  Vector center;
  double radius = 1.0;

  static GridSpec make(int b, Vector center, double radius, std::size_t cap = kStatevectorCap);
  std::size_t size() const;
  static double axis_point(std::size_t j, std::size_t B) { return (double(j) + 0.5) / double(B) - 0.5; }
  // Unit-grid point (before scaling) for a flat index.
  Vector unit_point(std::size_t flat) const;
};

// True when B^d = 2^(b d) fits under the cap.
bool grid_fits(int b, int d, std::size_t cap = kStatevectorCap);

enum class Backend { statevector, surrogate, exact, finite_difference };

Backend parse_backend(const std::string& s);
std::string to_string(Backend b);

struct GradientEstimate {
  Vector k;
  double sigma = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  std::uint64_t charged_queries = 0;
  Backend backend = Backend::surrogate;
  // Statevector request that exceeded the cap and ran on the surrogate instead.
  bool downgraded = false;
  bool theta_over_budget = false;
  // Subgradient metadata: dual-norm error bound and the smoothing offset.
  double error_bound = 0.0;
  double offset = 0.0;
  bool failure_injected = false;
};

// Query-charge formulas.
std::uint64_t subgradient_charge(int d, double rho);
std::uint64_t suppressed_bias_charge(int d, double G, double sigma);
std::uint64_t surrogate_charge(int d, double sigma);
// Bits per register for a target sigma: ceil(log2(12 G / sigma)).
int suppressed_bias_bits(double G, double sigma);
// Largest theta for which the suppressed-bias guarantee holds at target sigma.
double gradient_theta_budget(double sigma, int d, double G, double L, double vartheta);

// Phase state without touching the charge counter (evaluations are still counted).
StateVector prepare_phase_state(NoisyOracle& oracle, const GridSpec& grid, double G);
// As prepare_phase_state, plus one charged query.
StateVector build_phase_state(NoisyOracle& oracle, const GridSpec& grid, double G);

// In place, per register: a_m <- sum_j a_j exp(-2 pi i j m / B) / sqrt(B).
void register_dft(StateVector& state, int b, int d);

GradientEstimate jordan_measure(const StateVector& state, const GridSpec& grid, double G, Rng& rng);
// Repeated measurement of copies of one state; the transform is done once.
std::vector<GradientEstimate> jordan_measure(const StateVector& state, const GridSpec& grid, double G, Rng& rng,
                                             int shots);

GradientEstimate suppressed_bias_estimate(NoisyOracle& oracle, const Vector& y, double G, double L, double sigma,
                                          const NormSpec& norms, Rng& rng, std::size_t cap = kStatevectorCap);

// Fixed bias direction in [-1, 1]^d for a given oracle seed.
Vector surrogate_bias_direction(int d, std::uint64_t seed);

// k = g + (3 sigma^2/4) u + n, n uniform on [-sigma/2, sigma/2]^d, replaced with probability
// 3 sigma^2/4 by a uniform draw on [-sigma, sigma]^d. Does not touch any oracle.
GradientEstimate surrogate_gradient(const Vector& exact_grad, double sigma, const Vector& bias_direction,
                                    Rng& rng);
GradientEstimate surrogate_gradient(const Vector& exact_grad, double sigma, Rng& rng);

struct SubgradientConfig {
  double r1 = 0.0;
  double rho = 1.0 / 3.0;

  void validate(double theta, int d, double G) const;
  double r2(double theta, int d, double G) const;
  // Central-difference step actually used.
  double step(double theta, int d, double G, const Vector& z) const;
};

GradientEstimate subgradient_estimate(NoisyOracle& oracle, const Vector& x, double G, const SubgradientConfig& cfg,
                                      const NormSpec& norms, Rng& rng);

// Smooth-gradient dispatch used by the gradient-based solvers; charges the oracle.
// statevector: suppressed-bias protocol (falls back to the surrogate above the cap);
// surrogate: statistical surrogate in 3G-normalized units with the same charge;
// exact: reference gradient, one charged query.
GradientEstimate estimate_gradient(Backend backend, NoisyOracle& oracle, const Vector& y, double G, double L,
                                   double sigma, const NormSpec& norms, Rng& rng);

}  // namespace qzo

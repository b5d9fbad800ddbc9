#include <algorithm>
#include <cmath>
#include <numbers>

#include "qzo/qgrad.hpp"

namespace qzo {

namespace {

using cplx = std::complex<double>;

// Iterative radix-2 transform with kernel exp(-2 pi i j m / n), unnormalized.
void fft_inplace(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / double(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Direct twiddles rather than a running product keep the error at ~1 ulp.
        cplx w = std::polar(1.0, ang * double(k));
        cplx u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

double centered(std::size_t m, std::size_t B) {
  return m < B / 2 ? double(m) / double(B) : (double(m) - double(B)) / double(B);
}

}  // namespace

bool grid_fits(int b, int d, std::size_t cap) {
  if (b < 1 || d < 1) return false;
  long bits = long(b) * long(d);
  if (bits >= 62) return false;
  return (std::size_t{1} << bits) <= cap;
}

GridSpec GridSpec::make(int b, Vector center, double radius, std::size_t cap) {
  if (b < 1) throw InvalidInput("grid: b must be >= 1");
  if (!(radius > 0.0)) throw InvalidInput("grid: radius must be positive");
  const int d = int(center.size());
  if (d < 1) throw InvalidInput("grid: empty center");
  if (!grid_fits(b, d, cap))
    throw ResourceError("grid: 2^(" + std::to_string(b) + "*" + std::to_string(d) + ") amplitudes exceed cap " +
                        std::to_string(cap));
  GridSpec g;
  g.b = b;
  g.B = std::size_t{1} << b;
  g.d = d;
  g.center = std::move(center);
  g.radius = radius;
  return g;
}

std::size_t GridSpec::size() const { return std::size_t{1} << (b * d); }

Vector GridSpec::unit_point(std::size_t flat) const {
  Vector x(d);
  for (int i = 0; i < d; ++i) {
    x[i] = axis_point(flat % B, B);
    flat /= B;
  }
  return x;
}

StateVector prepare_phase_state(NoisyOracle& oracle, const GridSpec& grid, double G) {
  if (!(G > 0.0)) throw InvalidInput("phase state: G must be positive");
  if (grid.d != oracle.base().d) throw ShapeError("phase state: grid dimension mismatch");
  const std::size_t N = grid.size();
  const double amp = 1.0 / std::sqrt(double(N));
  // The factor B makes the per-index phase step 2 pi g / (3G), so outcome m / B reads g / (3G) directly.
  const double scale = double(grid.B) / (3.0 * G * grid.radius);
  StateVector s(N);
  Vector p(grid.d);
  for (std::size_t idx = 0; idx < N; ++idx) {
    std::size_t rem = idx;
    for (int i = 0; i < grid.d; ++i) {
      p[i] = grid.center[i] + grid.radius * GridSpec::axis_point(rem % grid.B, grid.B);
      rem /= grid.B;
    }
    double t = oracle.evaluate(p) * scale;
    // exp(2 pi i t) only depends on the fractional part; reducing first keeps sin/cos accurate.
    double frac = t - std::floor(t);
    s[idx] = std::polar(amp, 2.0 * std::numbers::pi * frac);
  }
  return s;
}

StateVector build_phase_state(NoisyOracle& oracle, const GridSpec& grid, double G) {
  StateVector s = prepare_phase_state(oracle, grid, G);
  oracle.charge_queries(1);
  return s;
}

void register_dft(StateVector& state, int b, int d) {
  const std::size_t B = std::size_t{1} << b;
  const std::size_t N = std::size_t{1} << (b * d);
  if (state.size() != N) throw ShapeError("register_dft: state size mismatch");
  const double norm = 1.0 / std::sqrt(double(B));
  std::vector<cplx> fiber(B);
  std::size_t stride = 1;
  for (int axis = 0; axis < d; ++axis, stride *= B) {
    for (std::size_t base = 0; base < N; ++base) {
      // Visit each fiber once, from its element with axis index 0.
      if ((base / stride) % B != 0) continue;
      for (std::size_t j = 0; j < B; ++j) fiber[j] = state[base + j * stride];
      fft_inplace(fiber);
      for (std::size_t j = 0; j < B; ++j) state[base + j * stride] = fiber[j] * norm;
    }
  }
}

namespace {

struct OutcomeSampler {
  std::vector<double> cdf;
  std::size_t B;
  int d;

  OutcomeSampler(const StateVector& state, const GridSpec& grid) : B(grid.B), d(grid.d) {
    if (state.size() != grid.size()) throw ShapeError("measurement: state size mismatch");
    double total = 0.0;
    for (const auto& a : state) total += std::norm(a);
    if (std::abs(total - 1.0) > 1e-9) throw InvalidState("measurement: state norm^2 = " + std::to_string(total));
    StateVector t = state;
    register_dft(t, grid.b, grid.d);
    cdf.resize(t.size());
    double c = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) cdf[i] = (c += std::norm(t[i]));
  }

  // Centered outcome c in [-1/2, 1/2)^d.
  Vector sample(Rng& rng) const {
    std::uniform_real_distribution<double> U(0.0, cdf.back());
    double u = U(rng);
    std::size_t idx = std::size_t(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    idx = std::min(idx, cdf.size() - 1);
    Vector c(d);
    for (int i = 0; i < d; ++i) {
      c[i] = centered(idx % B, B);
      idx /= B;
    }
    return c;
  }
};

}  // namespace

GradientEstimate jordan_measure(const StateVector& state, const GridSpec& grid, double G, Rng& rng) {
  OutcomeSampler sampler(state, grid);
  GradientEstimate e;
  e.k = 3.0 * G * sampler.sample(rng);
  e.backend = Backend::statevector;
  e.charged_queries = 1;
  return e;
}

std::vector<GradientEstimate> jordan_measure(const StateVector& state, const GridSpec& grid, double G, Rng& rng,
                                             int shots) {
  if (shots < 0) throw InvalidInput("measurement: shots must be >= 0");
  OutcomeSampler sampler(state, grid);
  std::vector<GradientEstimate> out(static_cast<std::size_t>(shots));
  for (GradientEstimate& e : out) {
    e.k = 3.0 * G * sampler.sample(rng);
    e.backend = Backend::statevector;
    e.charged_queries = 1;
  }
  return out;
}

std::uint64_t suppressed_bias_charge(int d, double G, double sigma) {
  return 8 * std::uint64_t(std::ceil(std::log(72.0 * d * G * G / (sigma * sigma)))) + 1;
}

std::uint64_t surrogate_charge(int d, double sigma) {
  if (sigma == 0.0) return 1;
  return 8 * std::uint64_t(std::ceil(std::log(8.0 * d / (sigma * sigma)))) + 1;
}

int suppressed_bias_bits(double G, double sigma) { return int(std::ceil(std::log2(12.0 * G / sigma))); }

double gradient_theta_budget(double sigma, int d, double G, double L, double vartheta) {
  double reps = 32.0 * std::ceil(std::log(72.0 * d * G * G / (sigma * sigma))) + 4.0;
  double s2 = sigma * sigma;
  return s2 * s2 / (2.0 * L * vartheta * vartheta * 9.0 * G * G * reps * reps);
}

Vector surrogate_bias_direction(int d, std::uint64_t seed) {
  Vector u(d);
  std::uint64_t h = splitmix64(seed ^ 0xB1A5D1EC7ULL);
  for (int i = 0; i < d; ++i) {
    h = splitmix64(h);
    u[i] = 2.0 * (double(h >> 11) * 0x1.0p-53) - 1.0;
  }
  return u;
}

GradientEstimate surrogate_gradient(const Vector& exact_grad, double sigma, const Vector& bias_direction, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidInput("surrogate: sigma must be >= 0");
  if (bias_direction.size() != exact_grad.size()) throw ShapeError("surrogate: bias direction size mismatch");
  const int d = int(exact_grad.size());
  GradientEstimate e;
  e.backend = Backend::surrogate;
  e.sigma = sigma;
  e.delta = 0.75 * sigma * sigma;
  e.charged_queries = surrogate_charge(d, sigma);
  if (sigma == 0.0) {
    e.k = exact_grad;
    return e;
  }
  Vector bias = e.delta * bias_direction.cwiseMax(-1.0).cwiseMin(1.0);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  bool fail = coin(rng) < e.delta;
  double half_width = fail ? sigma : 0.5 * sigma;
  Vector n(d);
  for (int i = 0; i < d; ++i) n[i] = half_width * U(rng);
  e.failure_injected = fail;
  e.k = exact_grad + bias + n;
  return e;
}

GradientEstimate surrogate_gradient(const Vector& exact_grad, double sigma, Rng& rng) {
  return surrogate_gradient(exact_grad, sigma, Vector::Ones(exact_grad.size()), rng);
}

namespace {

// Surrogate in 3G-normalized units, rescaled; output clipped to the phase-estimation range.
GradientEstimate normalized_surrogate(NoisyOracle& oracle, const Vector& y, double G, double sigma, Rng& rng) {
  const int d = int(y.size());
  const double s = sigma / (3.0 * G);
  Vector gn = oracle.base().reference_gradient(y) / (3.0 * G);
  GradientEstimate e = surrogate_gradient(gn, s, surrogate_bias_direction(d, oracle.seed()), rng);
  e.k = 3.0 * G * e.k.cwiseMax(-0.5).cwiseMin(0.5);
  e.sigma = sigma;
  e.delta = 3.0 * G * 0.75 * s * s;
  e.charged_queries = suppressed_bias_charge(d, G, sigma);
  return e;
}

}  // namespace

GradientEstimate suppressed_bias_estimate(NoisyOracle& oracle, const Vector& y, double G, double L, double sigma,
                                          const NormSpec& norms, Rng& rng, std::size_t cap) {
  const int d = oracle.base().d;
  if (y.size() != d) throw ShapeError("suppressed_bias_estimate: dimension mismatch");
  if (!(G > 0.0) || !(L > 0.0)) throw InvalidInput("suppressed_bias_estimate: need G > 0 and L > 0");
  if (!(sigma > 0.0) || sigma > 3.0 * G)
    throw InvalidInput("suppressed_bias_estimate: need 0 < sigma <= 3G");
  const std::uint64_t reps = suppressed_bias_charge(d, G, sigma);
  const int b = suppressed_bias_bits(G, sigma);
  const bool over = oracle.theta() > gradient_theta_budget(sigma, d, G, L, norms.vartheta);

  if (!grid_fits(b, d, cap)) {
    GradientEstimate e = normalized_surrogate(oracle, y, G, sigma, rng);
    oracle.charge_queries(reps);
    e.downgraded = true;
    e.theta_over_budget = over;
    return e;
  }

  // theta = 0 would collapse the grid; a double-precision evaluator is never better than
  // machine-epsilon accurate, so the radius uses that as the effective noise level.
  const double theta_eff = std::max(oracle.theta(), std::numeric_limits<double>::epsilon());
  const double r = std::sqrt(2.0 * theta_eff) / (std::sqrt(L) * norms.vartheta);
  GridSpec grid = GridSpec::make(b, y, r, cap);
  OutcomeSampler sampler(prepare_phase_state(oracle, grid, G), grid);
  oracle.charge_queries(reps);

  std::vector<std::vector<double>> draws(d, std::vector<double>(reps));
  for (std::uint64_t t = 0; t < reps; ++t) {
    Vector c = sampler.sample(rng);
    for (int i = 0; i < d; ++i) draws[i][t] = c[i];
  }
  GradientEstimate e;
  e.k.resize(d);
  for (int i = 0; i < d; ++i) {
    auto mid = draws[i].begin() + reps / 2;
    std::nth_element(draws[i].begin(), mid, draws[i].end());
    e.k[i] = 3.0 * G * *mid;
  }
  e.backend = Backend::statevector;
  e.sigma = sigma;
  e.delta = 3.0 * G * 0.75 * std::pow(sigma / (3.0 * G), 2);
  e.charged_queries = reps;
  e.theta_over_budget = over;
  return e;
}

GradientEstimate estimate_gradient(Backend backend, NoisyOracle& oracle, const Vector& y, double G, double L,
                                   double sigma, const NormSpec& norms, Rng& rng) {
  switch (backend) {
    case Backend::statevector:
      return suppressed_bias_estimate(oracle, y, G, L, sigma, norms, rng);
    case Backend::surrogate: {
      if (!(sigma > 0.0) || sigma > 3.0 * G) throw InvalidInput("surrogate backend: need 0 < sigma <= 3G");
      GradientEstimate e = normalized_surrogate(oracle, y, G, sigma, rng);
      oracle.charge_queries(e.charged_queries);
      e.theta_over_budget = oracle.theta() > gradient_theta_budget(sigma, int(y.size()), G, L, norms.vartheta);
      return e;
    }
    case Backend::exact: {
      GradientEstimate e;
      e.k = oracle.base().reference_gradient(y);
      e.backend = Backend::exact;
      e.charged_queries = 1;
      oracle.charge_queries(1);
      return e;
    }
    case Backend::finite_difference:
      throw ConfigError("finite-difference backend estimates subgradients, not smooth gradients");
  }
  throw ConfigError("unknown backend");
}

Backend parse_backend(const std::string& s) {
  if (s == "statevector") return Backend::statevector;
  if (s == "surrogate") return Backend::surrogate;
  if (s == "exact") return Backend::exact;
  if (s == "fd" || s == "finite_difference") return Backend::finite_difference;
  throw ConfigError("unknown backend '" + s + "'");
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::statevector: return "statevector";
    case Backend::surrogate: return "surrogate";
    case Backend::exact: return "exact";
    case Backend::finite_difference: return "fd";
  }
  return "?";
}

}  // namespace qzo

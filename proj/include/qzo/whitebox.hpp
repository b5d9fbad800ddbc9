#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qzo/solvers.hpp"

namespace qzo {

struct SdpInstance {
  int m = 0;
  int n = 0;
  std::vector<Matrix> A;
  Vector b;
  Matrix C;
  double r_p = 1.0;
  double r_d = 1.0;
  int s = 0;  // max nonzeros per row over C and all A_i

  void compute_sparsity();
  // Throws LoadError on any normalization violation.
  void validate() const;
};

struct LpInstance {
  Matrix A;  // m x n, entries in [-1, 1]
  Vector b;  // m
  Vector c;  // n, entries in [-1, 1]
  double r_p = 1.0;
  double r_d = 1.0;

  int m() const { return int(A.rows()); }
  int n() const { return int(A.cols()); }
  void validate() const;
};

struct ZsgInstance {
  Matrix A;  // payoff, entries in [-1, 1]
  void validate() const;
};

struct DualCertificate {
  double y0 = 0.0;
  Vector y;
  double objective = 0.0;
  double min_slack_eig = 0.0;
  std::uint64_t charged_queries = 0;
  std::uint64_t actual_evals = 0;
  // LP only: charged oracle queries times the per-evaluation max-finding cost.
  std::uint64_t data_queries = 0;
  double theta_used = 0.0;
  // |y0| + ||y||_1 exceeded r_d.
  bool rd_audit_failed = false;
};

// Where the scaled dual variable lives.
// dilated_ball: r_d * simplex over m+1 coordinates, the last one a slack, so y ranges over
//   {y >= 0, ||y||_1 <= r_d}.
// dilated_simplex: exactly r_d * simplex over m coordinates (used by the game reduction).
enum class DualDomain { dilated_ball, dilated_simplex };

struct WhiteboxOptions {
  NoiseMode noise_mode = NoiseMode::hash;
  DualDomain domain = DualDomain::dilated_ball;
  Backend backend = Backend::finite_difference;
  std::optional<std::int64_t> T;
  std::int64_t max_records = 20000;
};

// lambda_max(C / r_d - sum_i y~_i A_i) + (b / r_p)^T y~.
double sdp_eig_objective(const SdpInstance& inst, const Vector& y_tilde);

std::pair<DualCertificate, RunTrace> solve_sdp_dual(const SdpInstance& inst, double epsilon, double theta,
                                                    std::uint64_t seed, const WhiteboxOptions& opts = {});

struct LpCost {
  std::uint64_t charged = 0;  // ceil(sqrt(n)) per call
  std::uint64_t scanned = 0;  // n per call
};

struct LpValue {
  double value = 0.0;
  int argmax = 0;
};

// max_j {c_j - <A_j, y>} + (b / r_p)^T y with the lowest maximizing index.
LpValue lp_objective(const LpInstance& inst, const Vector& y, LpCost* cost = nullptr);
std::uint64_t lp_max_finding_charge(int n);

std::pair<DualCertificate, RunTrace> solve_lp(const LpInstance& inst, double epsilon, double theta,
                                              std::uint64_t seed, const WhiteboxOptions& opts = {});

struct ZsgSolution {
  double value = 0.0;
  Vector x;  // column player (minimizer), in the n-simplex
  Vector y;  // row player (maximizer), in the m-simplex
  double lower = 0.0;  // min_j (A^T y)_j
  double upper = 0.0;  // max_i (A x)_i
  RunTrace row_trace;
  RunTrace col_trace;
  DualCertificate row_cert;
  DualCertificate col_cert;
};

ZsgSolution solve_zsg(const ZsgInstance& inst, double epsilon, double theta, std::uint64_t seed,
                      const WhiteboxOptions& opts = {});

struct FeasibilityReport {
  bool nonnegative = false;
  bool psd = false;
  double min_y = 0.0;
  double min_slack_eig = 0.0;
  double objective = 0.0;
  bool pass() const { return nonnegative && psd; }
};

FeasibilityReport check_dual_feasibility(const SdpInstance& inst, const DualCertificate& cert, double tol = 1e-8);

SdpInstance lp_as_sdp(const LpInstance& lp);

// Text formats.
SdpInstance parse_sdp(std::istream& in);
LpInstance parse_lp(std::istream& in);
ZsgInstance parse_zsg(std::istream& in);
SdpInstance load_sdp(const std::string& path);
LpInstance load_lp(const std::string& path);
ZsgInstance load_zsg(const std::string& path);
void write_sdp(std::ostream& out, const SdpInstance& inst);
void write_lp(std::ostream& out, const LpInstance& inst);
void write_certificate(std::ostream& out, const DualCertificate& cert);

}  // namespace qzo

#include <algorithm>
#include <cmath>

#include "qzo/whitebox.hpp"

namespace qzo {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kNormTol = 1e-12;
// Lipschitz constant of the scaled eigenvalue objective in l1.
constexpr double kEigLipschitz = 2.0;

double op_norm(const Matrix& M) {
  SymEigResult e = sym_eig(M);
  return std::max(std::abs(e.eigenvalues[0]), std::abs(e.eigenvalues[e.eigenvalues.size() - 1]));
}

}  // namespace

void SdpInstance::compute_sparsity() {
  int best = 0;
  auto scan = [&](const Matrix& M) {
    for (Eigen::Index r = 0; r < M.rows(); ++r) best = std::max(best, int((M.row(r).array() != 0.0).count()));
  };
  scan(C);
  for (const auto& Ai : A) scan(Ai);
  s = best;
}

void SdpInstance::validate() const {
  if (m < 1 || n < 1) throw LoadError("sdp: need m >= 1 and n >= 1");
  if (int(A.size()) != m || b.size() != m) throw LoadError("sdp: constraint count mismatch");
  if (!(r_p >= 1.0) || !(r_d >= 1.0)) throw LoadError("sdp: r_p and r_d must be >= 1");
  auto check = [&](const Matrix& M, const std::string& name) {
    if (M.rows() != n || M.cols() != n) throw LoadError("sdp: " + name + " has the wrong size");
    if (!M.allFinite()) throw LoadError("sdp: " + name + " has non-finite entries");
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > kSymTol) throw LoadError("sdp: " + name + " is not symmetric");
    double nrm = op_norm(M);
    if (nrm > 1.0 + kNormTol) throw LoadError("sdp: ||" + name + "||_op = " + std::to_string(nrm) + " > 1");
  };
  check(C, "C");
  for (int i = 0; i < m; ++i) check(A[i], "A" + std::to_string(i + 1));
  if (!b.allFinite() || b.cwiseAbs().maxCoeff() > r_p)
    throw LoadError("sdp: ||b||_inf exceeds r_p = " + std::to_string(r_p));
}

void LpInstance::validate() const {
  if (m() < 1 || n() < 1) throw LoadError("lp: empty constraint matrix");
  if (b.size() != m() || c.size() != n()) throw LoadError("lp: dimension mismatch between A, b, c");
  if (!(r_p >= 1.0) || !(r_d >= 1.0)) throw LoadError("lp: r_p and r_d must be >= 1");
  if (!A.allFinite() || A.cwiseAbs().maxCoeff() > 1.0) throw LoadError("lp: entries of A must lie in [-1, 1]");
  if (!c.allFinite() || c.cwiseAbs().maxCoeff() > 1.0) throw LoadError("lp: entries of c must lie in [-1, 1]");
  if (!b.allFinite() || b.cwiseAbs().maxCoeff() > r_p) throw LoadError("lp: ||b||_inf exceeds r_p");
}

void ZsgInstance::validate() const {
  if (A.rows() < 1 || A.cols() < 1) throw LoadError("zsg: empty payoff matrix");
  if (!A.allFinite() || A.cwiseAbs().maxCoeff() > 1.0) throw LoadError("zsg: payoff entries must lie in [-1, 1]");
}

double sdp_eig_objective(const SdpInstance& inst, const Vector& y_tilde) {
  if (y_tilde.size() != inst.m) throw ShapeError("sdp_eig_objective: expected " + std::to_string(inst.m) + " weights");
  Matrix M = inst.C / inst.r_d;
  for (int i = 0; i < inst.m; ++i) M.noalias() -= y_tilde[i] * inst.A[i];
  return lambda_max(M) + (inst.b / inst.r_p).dot(y_tilde);
}

std::uint64_t lp_max_finding_charge(int n) { return std::uint64_t(std::ceil(std::sqrt(double(n)))); }

LpValue lp_objective(const LpInstance& inst, const Vector& y, LpCost* cost) {
  if (y.size() != inst.m()) throw ShapeError("lp_objective: expected " + std::to_string(inst.m()) + " weights");
  LpValue best{-kInf, 0};
  for (int j = 0; j < inst.n(); ++j) {
    double v = inst.c[j] - inst.A.col(j).dot(y);
    if (v > best.value) best = {v, j};
  }
  best.value += (inst.b / inst.r_p).dot(y);
  if (cost) {
    cost->charged += lp_max_finding_charge(inst.n());
    cost->scanned += std::uint64_t(inst.n());
  }
  return best;
}

namespace {

struct ScaledDual {
  Vector y_tilde;  // first m coordinates of the averaged iterate
  RunTrace trace;
  std::uint64_t charged = 0;
  std::uint64_t actual = 0;
  double theta = 0.0;
};

// Minimizes h over the dilated dual region with mirror descent in the entropy geometry.
// h takes the m scaled dual weights; eps_scaled is the accuracy in h units.
ScaledDual minimize_scaled(int m, std::function<double(const Vector&)> h, std::function<Vector(const Vector&)> grad,
                           double eps_scaled, double theta, std::uint64_t seed, const WhiteboxOptions& opts) {
  const int dim = opts.domain == DualDomain::dilated_ball ? m + 1 : m;
  ObjectiveSpec spec;
  spec.name = "scaled-dual";
  spec.d = dim;
  spec.G = kEigLipschitz;
  spec.domain = DomainSpec::simplex(dim, 1.0);
  spec.evaluator = [h, m](const Vector& v) { return h(v.head(m)); };
  spec.exact_gradient = [grad, m, dim](const Vector& v) {
    Vector g = Vector::Zero(dim);
    g.head(m) = grad(v.head(m));
    return g;
  };

  MirrorGeometry geom = MirrorGeometry::simplex_entropy(dim);
  const double R = default_mirror_radius(geom, spec.domain);
  ScaledDual out;
  // The inner mirror-descent budget; it sits below eps'^5 / m^4.5 up to logarithmic factors.
  out.theta = std::min(theta, md_theta_budget(eps_scaled, spec.G, R, spec.domain.diameter(1.0), geom.mu(),
                                              geom.norm(), dim));
  NoisyOracle oracle(spec, out.theta, opts.noise_mode, seed);

  SolverConfig cfg;
  cfg.method = Method::qmd;
  cfg.epsilon = eps_scaled;
  cfg.seed = seed;
  cfg.backend = opts.backend;
  cfg.T = opts.T;
  const std::int64_t T = opts.T.value_or(md_iterations(eps_scaled, spec.G, R, geom.mu()));
  cfg.record_stride = std::max<std::int64_t>(1, T / std::max<std::int64_t>(1, opts.max_records));
  out.trace = qmd_solve(spec, oracle, cfg, geom);
  out.y_tilde = out.trace.final_average.head(m).cwiseMax(0.0);
  out.charged = oracle.charged_queries();
  out.actual = oracle.actual_evals();
  return out;
}

}  // namespace

std::pair<DualCertificate, RunTrace> solve_sdp_dual(const SdpInstance& inst, double epsilon, double theta,
                                                    std::uint64_t seed, const WhiteboxOptions& opts) {
  inst.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("solve_sdp_dual: epsilon must lie in (0, 1)");
  const int m = inst.m, n = inst.n;
  auto h = [&inst](const Vector& yt) { return sdp_eig_objective(inst, yt); };
  auto grad = [&inst](const Vector& yt) {
    Matrix M = inst.C / inst.r_d;
    for (int i = 0; i < inst.m; ++i) M.noalias() -= yt[i] * inst.A[i];
    Vector v = sym_eig(M).eigenvectors.col(0);
    Vector g(inst.m);
    for (int i = 0; i < inst.m; ++i) g[i] = -v.dot(inst.A[i] * v) + inst.b[i] / inst.r_p;
    return g;
  };
  ScaledDual sd = minimize_scaled(m, h, grad, epsilon / (inst.r_p * inst.r_d), theta, seed, opts);

  DualCertificate cert;
  cert.y = inst.r_d * sd.y_tilde;
  Matrix S = -inst.C;
  for (int i = 0; i < m; ++i) S.noalias() += cert.y[i] * inst.A[i];
  cert.y0 = -lambda_min(S);
  cert.min_slack_eig = lambda_min(S + cert.y0 * Matrix::Identity(n, n));
  cert.objective = inst.r_p * cert.y0 + inst.b.dot(cert.y);
  cert.charged_queries = sd.charged;
  cert.actual_evals = sd.actual;
  cert.theta_used = sd.theta;
  cert.rd_audit_failed =
      opts.domain == DualDomain::dilated_ball && std::abs(cert.y0) + cert.y.lpNorm<1>() > inst.r_d;
  return {cert, std::move(sd.trace)};
}

std::pair<DualCertificate, RunTrace> solve_lp(const LpInstance& inst, double epsilon, double theta,
                                              std::uint64_t seed, const WhiteboxOptions& opts) {
  inst.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("solve_lp: epsilon must lie in (0, 1)");
  const double rd = inst.r_d;
  auto h = [&inst, rd](const Vector& yt) { return lp_objective(inst, rd * yt).value / rd; };
  auto grad = [&inst, rd](const Vector& yt) {
    LpValue v = lp_objective(inst, rd * yt);
    return Vector(-inst.A.col(v.argmax) + inst.b / inst.r_p);
  };
  ScaledDual sd = minimize_scaled(inst.m(), h, grad, epsilon / (inst.r_p * inst.r_d), theta, seed, opts);

  DualCertificate cert;
  cert.y = rd * sd.y_tilde;
  Vector Aty = inst.A.transpose() * cert.y;
  cert.y0 = (inst.c - Aty).maxCoeff();
  cert.min_slack_eig = (Vector::Constant(inst.n(), cert.y0) + Aty - inst.c).minCoeff();
  cert.objective = inst.r_p * cert.y0 + inst.b.dot(cert.y);
  cert.charged_queries = sd.charged;
  cert.actual_evals = sd.actual;
  cert.data_queries = sd.charged * lp_max_finding_charge(inst.n());
  cert.theta_used = sd.theta;
  cert.rd_audit_failed =
      opts.domain == DualDomain::dilated_ball && std::abs(cert.y0) + cert.y.lpNorm<1>() > inst.r_d;
  return {cert, std::move(sd.trace)};
}

ZsgSolution solve_zsg(const ZsgInstance& inst, double epsilon, double theta, std::uint64_t seed,
                      const WhiteboxOptions& opts) {
  inst.validate();
  const Matrix& A = inst.A;
  const int m = int(A.rows()), n = int(A.cols());
  WhiteboxOptions o = opts;
  o.domain = DualDomain::dilated_simplex;

  // Row side: minimize max_j -(A^T y)_j over the m-simplex.
  LpInstance row{A, Vector::Zero(m), Vector::Zero(n), 1.0, 1.0};
  // Column side: minimize max_i (A x)_i over the n-simplex.
  LpInstance col{-A.transpose(), Vector::Zero(n), Vector::Zero(m), 1.0, 1.0};

  ZsgSolution sol;
  auto [rc, rt] = solve_lp(row, epsilon, theta, seed, o);
  auto [cc, ct] = solve_lp(col, epsilon, theta, splitmix64(seed), o);
  sol.y = rc.y;
  sol.x = cc.y;
  sol.lower = (A.transpose() * sol.y).minCoeff();
  sol.upper = (A * sol.x).maxCoeff();
  sol.value = 0.5 * (sol.lower + sol.upper);
  sol.row_cert = rc;
  sol.col_cert = cc;
  sol.row_trace = std::move(rt);
  sol.col_trace = std::move(ct);
  return sol;
}

FeasibilityReport check_dual_feasibility(const SdpInstance& inst, const DualCertificate& cert, double tol) {
  if (cert.y.size() != inst.m) throw ShapeError("check_dual_feasibility: certificate size mismatch");
  FeasibilityReport r;
  r.min_y = cert.y.minCoeff();
  r.nonnegative = r.min_y >= 0.0;
  Matrix S = cert.y0 * Matrix::Identity(inst.n, inst.n) - inst.C;
  for (int i = 0; i < inst.m; ++i) S.noalias() += cert.y[i] * inst.A[i];
  r.min_slack_eig = lambda_min(S);
  r.psd = r.min_slack_eig >= -tol;
  r.objective = inst.r_p * cert.y0 + inst.b.dot(cert.y);
  return r;
}

SdpInstance lp_as_sdp(const LpInstance& lp) {
  SdpInstance s;
  s.m = lp.m();
  s.n = lp.n();
  s.C = lp.c.asDiagonal();
  for (int i = 0; i < s.m; ++i) s.A.push_back(Matrix(lp.A.row(i).transpose().asDiagonal()));
  s.b = lp.b;
  s.r_p = lp.r_p;
  s.r_d = lp.r_d;
  s.compute_sparsity();
  return s;
}

}  // namespace qzo

#include <cmath>

#include "qzo/geometry.hpp"

namespace qzo {

SymEigResult sym_eig(const Matrix& M) {
  if (M.rows() != M.cols()) throw ShapeError("sym_eig: matrix must be square");
  if (!M.allFinite()) throw InvalidInput("sym_eig: non-finite entries");
  Matrix S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success)
    throw NumericError("sym_eig: eigensolver did not converge (n=" + std::to_string(M.rows()) + ")");
  SymEigResult r;
  r.eigenvalues = es.eigenvalues().reverse();
  r.eigenvectors = es.eigenvectors().rowwise().reverse();
  return r;
}

double lambda_max(const Matrix& M) {
  if (!M.allFinite()) throw InvalidInput("lambda_max: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("lambda_max: eigensolver did not converge");
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double lambda_min(const Matrix& M) {
  if (!M.allFinite()) throw InvalidInput("lambda_min: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("lambda_min: eigensolver did not converge");
  return es.eigenvalues()(0);
}

namespace {

template <class F>
Matrix apply_spectral(const SymEigResult& e, F f) {
  Vector fl = e.eigenvalues.unaryExpr(f);
  Matrix R = e.eigenvectors * fl.asDiagonal() * e.eigenvectors.transpose();
  return 0.5 * (R + R.transpose());
}

}  // namespace

Matrix spd_log(const Matrix& M) {
  SymEigResult e = sym_eig(M);
  if (e.eigenvalues.minCoeff() <= 0.0)
    throw DomainError("spd_log: nonpositive eigenvalue " + std::to_string(e.eigenvalues.minCoeff()));
  return apply_spectral(e, [](double v) { return std::log(v); });
}

Matrix spd_exp(const Matrix& M) {
  return apply_spectral(sym_eig(M), [](double v) { return std::exp(v); });
}

}  // namespace qzo

#include "etc/krylov.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace etc {

Eigen::VectorXd dense_solve(const DenseMatrix& D, const Eigen::VectorXd& b) {
  if (D.rows() != D.cols() || D.rows() != b.size())
    throw ContractError("dense_solve: dimension mismatch");
  if (D.rows() > kDenseLimit) throw ContractError("dense_solve: matrix exceeds the dense limit");
  Eigen::LLT<DenseMatrix> llt(D);
  if (llt.info() != Eigen::Success)
    throw ContractError("dense_solve: matrix is not symmetric positive definite");
  return llt.solve(b);
}

ConditionEstimate condition_estimate(const DenseMatrix& D) {
  if (D.rows() != D.cols()) throw ContractError("condition_estimate: matrix is not square");
  if (D.rows() > kDenseLimit)
    throw ContractError("condition_estimate: matrix exceeds the dense limit");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(D, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("condition_estimate: eigensolver failed");
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  return {lo, hi, hi / lo};
}

ConditionEstimate condition_estimate(const DenseMatrix& D, const DenseMatrix& D_ref) {
  if (D.rows() != D.cols() || D_ref.rows() != D_ref.cols() || D.rows() != D_ref.rows())
    throw ContractError("condition_estimate: dimension mismatch");
  if (D.rows() > kDenseLimit)
    throw ContractError("condition_estimate: matrix exceeds the dense limit");
  Eigen::LLT<DenseMatrix> llt(D_ref);
  if (llt.info() != Eigen::Success)
    throw ContractError("condition_estimate: reference matrix is singular or indefinite");
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(D, D_ref,
                                                           Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw std::runtime_error("condition_estimate: eigensolver failed");
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  return {lo, hi, hi / lo};
}

}  // namespace etc

#pragma once

#include "etc/preconditioner.hpp"
#include "etc/types.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace etc {

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  /// ||r_k|| / ||b|| for k = 0..iterations.
  std::vector<double> relative_residuals;
  std::optional<double> kappa_eff;
  double prep_seconds = 0.0;
  double exec_seconds = 0.0;
  Precision precision = Precision::F64;
  std::string preconditioner = "fct";
  std::optional<ReferenceParams> ref_params;
};

/// Thrown when the Krylov recurrence loses positivity or produces non-finite values.
class SolverBreakdown : public std::runtime_error {
 public:
  SolverBreakdown(const std::string& what, int iteration)
      : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

inline constexpr int kDefaultMaxIter = 1024;

template <typename Scalar>
struct PcgOutput {
  CellVector<Scalar> solution;
  SolveReport report;
};

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// `apply_a(x, y)` computes y = A x and `apply_m(r, z)` computes z = M^{-1} r; neither may
/// alias its arguments. The loop is r <- b - A p, z <- M^{-1} r, w <- z, rho <- r.z, then
/// per iteration: z <- A w, alpha <- rho / z.w, p += alpha w, r -= alpha z, exit check on
/// ||r||/||b||, z <- M^{-1} r, rho' <- r.z, w <- z + (rho'/rho) w. One application of A
/// and of M^{-1} per iteration.
template <typename Scalar, typename ApplyA, typename ApplyM>
PcgOutput<Scalar> pcg(ApplyA&& apply_a, ApplyM&& apply_m, const CellVector<Scalar>& b,
                      double rtol, int max_iter = kDefaultMaxIter) {
  if (!(rtol > 0.0)) throw ContractError("pcg: rtol must be positive");
  if (max_iter < 1) throw ContractError("pcg: max_iter must be >= 1");
  if (!b.allFinite()) throw ContractError("pcg: right-hand side is not finite");

  const Index n = b.size();
  PcgOutput<Scalar> out;
  SolveReport& rep = out.report;
  rep.precision = precision_of<Scalar>();
  CellVector<Scalar>& p = out.solution;
  p.setZero(n);

  const double b_norm = static_cast<double>(b.norm());
  if (b_norm == 0.0) {
    rep.relative_residuals.push_back(0.0);
    rep.converged = true;
    return out;
  }

  // Breakdown threshold on z.w relative to ||z|| ||w||.
  const double eps = 1e2 * static_cast<double>(std::numeric_limits<Scalar>::epsilon());

  CellVector<Scalar> r = b;  // b - A*0
  CellVector<Scalar> z(n), w(n);
  apply_m(r, z);
  w = z;
  double rho = static_cast<double>(r.dot(z));
  rep.relative_residuals.push_back(static_cast<double>(r.norm()) / b_norm);
  if (rep.relative_residuals.back() <= rtol) {
    rep.converged = true;
    return out;
  }
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw SolverBreakdown("pcg: r.z is not positive (preconditioner not SPD?)", 0);

  for (int it = 1; it <= max_iter; ++it) {
    apply_a(w, z);
    const double zw = static_cast<double>(z.dot(w));
    if (!std::isfinite(zw)) throw SolverBreakdown("pcg: non-finite value in A w", it);
    if (zw <= eps * static_cast<double>(z.norm()) * static_cast<double>(w.norm()))
      throw SolverBreakdown("pcg: w.Aw is not positive (operator not SPD?)", it);
    const Scalar alpha = static_cast<Scalar>(rho / zw);
    p.noalias() += alpha * w;
    r.noalias() -= alpha * z;

    const double rel = static_cast<double>(r.norm()) / b_norm;
    if (!std::isfinite(rel)) throw SolverBreakdown("pcg: residual became non-finite", it);
    rep.relative_residuals.push_back(rel);
    rep.iterations = it;
    if (rel <= rtol) {
      rep.converged = true;
      break;
    }

    apply_m(r, z);
    const double rho_next = static_cast<double>(r.dot(z));
    if (!std::isfinite(rho_next)) throw SolverBreakdown("pcg: non-finite value in M^-1 r", it);
    if (rho_next <= 0.0) throw SolverBreakdown("pcg: r.z is not positive", it);
    w = z + static_cast<Scalar>(rho_next / rho) * w;
    rho = rho_next;
  }
  return out;
}

/// Cholesky solve; throws ContractError if D is not symmetric positive definite.
Eigen::VectorXd dense_solve(const DenseMatrix& D, const Eigen::VectorXd& b);

struct ConditionEstimate {
  double lambda_min;
  double lambda_max;
  double cond;
};

/// Extreme eigenvalues of symmetric D, or of the pencil D x = lambda D_ref x.
ConditionEstimate condition_estimate(const DenseMatrix& D);
ConditionEstimate condition_estimate(const DenseMatrix& D, const DenseMatrix& D_ref);

}  // namespace etc

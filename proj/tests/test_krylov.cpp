#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "etc/krylov.hpp"
#include "etc/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace etc;

namespace {

struct Setup {
  DiscreteSystem<double> sys;
  CellVector<double> b;
};

Setup random_setup(std::mt19937_64& rng, Index max_n, double contrast) {
  const GridSpec g(1 + rng() % max_n, 1 + rng() % max_n, 1 + rng() % max_n);
  const auto f = random_field(g, contrast, rng);
  Setup s{build_system<double>(f, BoundaryConfig(Axis::Z, 1.0, 0.0)), {}};
  s.b = build_rhs(s.sys);
  return s;
}

template <typename M>
PcgOutput<double> solve(const DiscreteSystem<double>& sys, const CellVector<double>& b, M& m, double rtol,
                        int max_iter = kDefaultMaxIter) {
  return pcg<double>(
      [&](const CellVector<double>& x, CellVector<double>& y) { apply_operator(sys, x, y); },
      [&](const CellVector<double>& r, CellVector<double>& z) { m.apply(r, z); }, b, rtol, max_iter);
}

}  // namespace

TEST_CASE("PCG agrees with the dense Cholesky solve") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const Setup s = random_setup(rng, 6, 1e3);
    FctPreconditioner<double> m(s.sys.grid, solve_reference_lp(coefficient_stats(s.sys)));
    const auto out = solve(s.sys, s.b, m, 1e-10);
    REQUIRE(out.report.converged);
    const Eigen::VectorXd direct = dense_solve(assemble_dense(s.sys), s.b);
    CHECK((out.solution - direct).norm() <= 1e-8 * direct.norm());
  }
}

TEST_CASE("residual history") {
  std::mt19937_64 rng(32);
  const Setup s = random_setup(rng, 6, 100);
  IdentityPreconditioner m;
  const auto out = solve(s.sys, s.b, m, 1e-8);
  CHECK(out.report.converged);
  CHECK(out.report.relative_residuals.size() == static_cast<std::size_t>(out.report.iterations) + 1);
  CHECK(out.report.relative_residuals.front() == 1.0);
  CHECK(out.report.relative_residuals.back() <= 1e-8);
  CHECK(out.report.relative_residuals[out.report.relative_residuals.size() - 2] > 1e-8);
  const CellVector<double> r = s.b - apply_operator(s.sys, out.solution);
  CHECK(r.norm() / s.b.norm() == doctest::Approx(out.report.relative_residuals.back()).epsilon(1e-3));
}

TEST_CASE("zero right-hand side") {
  const auto sys = uniform_system<double>(GridSpec(2, 2, 2), 1, 1, 1, 2, 2);
  IdentityPreconditioner m;
  const auto out = solve(sys, CellVector<double>::Zero(8), m, 1e-6);
  CHECK(out.report.converged);
  CHECK(out.report.iterations == 0);
  CHECK(out.solution.isZero());
}

TEST_CASE("iteration cap reports non-convergence") {
  std::mt19937_64 rng(33);
  const Setup s = random_setup(rng, 6, 1e3);
  IdentityPreconditioner m;
  const auto out = solve(s.sys, s.b, m, 1e-12, 2);
  CHECK_FALSE(out.report.converged);
  CHECK(out.report.iterations == 2);
  CHECK(out.report.relative_residuals.size() == 3);
}

TEST_CASE("homogeneous medium with matched references converges in one step") {
  const GridSpec g(8, 6, 5, 1.0, 2.0, 1.5);
  const auto f = OrthotropicField::constant(g, 2.0, 3.0, 4.0);
  const auto sys = build_system<double>(f, BoundaryConfig(Axis::Z, 1.0, 0.0));
  const auto refs = solve_reference_lp(coefficient_stats(sys));
  CHECK(refs.objective() == doctest::Approx(1.0));
  FctPreconditioner<double> m(g, refs);
  const auto out = solve(sys, build_rhs(sys), m, 1e-10);
  CHECK(out.report.iterations == 1);
}

TEST_CASE("loss of positivity raises SolverBreakdown") {
  DenseMatrix A(2, 2);
  A << 1, 0, 0, -1;
  const CellVector<double> b = CellVector<double>::Ones(2);
  auto apply_a = [&](const CellVector<double>& x, CellVector<double>& y) { y = A * x; };
  auto ident = [](const CellVector<double>& r, CellVector<double>& z) { z = r; };
  CHECK_THROWS_AS(pcg<double>(apply_a, ident, b, 1e-8), SolverBreakdown);

  DenseMatrix I = DenseMatrix::Identity(2, 2);
  auto apply_i = [&](const CellVector<double>& x, CellVector<double>& y) { y = I * x; };
  auto negate = [](const CellVector<double>& r, CellVector<double>& z) { z = -r; };
  try {
    pcg<double>(apply_i, negate, b, 1e-8);
    FAIL("expected breakdown");
  } catch (const SolverBreakdown& e) {
    CHECK(e.iteration() == 0);
  }
  CHECK_THROWS_AS(pcg<double>(apply_i, ident, b, 0.0), ContractError);
}

TEST_CASE("single precision PCG") {
  std::mt19937_64 rng(34);
  const Setup s = random_setup(rng, 6, 100);
  const auto sf = build_system<float>(random_field(s.sys.grid, 100, rng), BoundaryConfig{});
  FctPreconditioner<float> m(sf.grid, solve_reference_lp(coefficient_stats(sf)));
  const auto out = pcg<float>(
      [&](const CellVector<float>& x, CellVector<float>& y) { apply_operator(sf, x, y); },
      [&](const CellVector<float>& r, CellVector<float>& z) { m.apply(r, z); }, build_rhs(sf), 1e-5);
  CHECK(out.report.converged);
  CHECK(out.report.precision == Precision::F32);
}

TEST_CASE("preconditioned condition number is bounded by the spectral constants") {
  std::mt19937_64 rng(35);
  for (RefMode mode : {RefMode::Opt, RefMode::One})
    for (int t = 0; t < 10; ++t) {
      const Setup s = random_setup(rng, 5, 1e3);
      const auto stats = coefficient_stats(s.sys);
      const auto refs = mode == RefMode::Opt ? solve_reference_lp(stats) : ones_reference(stats);
      const auto c = condition_estimate(assemble_dense(s.sys),
                                        assemble_dense(reference_system<double>(s.sys.grid, refs)));
      CHECK(c.cond <= refs.objective() * (1 + 1e-8));
      CHECK(c.lambda_min >= refs.lambda_lo * (1 - 1e-8));
      CHECK(c.lambda_max <= refs.lambda_hi * (1 + 1e-8));
    }
}

TEST_CASE("condition estimate matches an independent eigen solve") {
  DenseMatrix D(3, 3);
  D << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const auto c = condition_estimate(D);
  Eigen::EigenSolver<DenseMatrix> es(D);
  const Eigen::VectorXd ev = es.eigenvalues().real();
  CHECK(c.lambda_min == doctest::Approx(ev.minCoeff()));
  CHECK(c.cond == doctest::Approx(ev.maxCoeff() / ev.minCoeff()));
  const auto same = condition_estimate(D, D);
  CHECK(same.cond == doctest::Approx(1.0));
  DenseMatrix bad = DenseMatrix::Identity(3, 3);
  bad(2, 2) = -1;
  CHECK_THROWS_AS(condition_estimate(D, bad), ContractError);
  CHECK_THROWS_AS(dense_solve(bad, Eigen::VectorXd::Ones(3)), ContractError);
}

TEST_CASE("condition number of the plain operator grows like h^-2") {
  double prev = 0.0;
  for (Index n : {4, 8}) {
    const auto sys = build_system<double>(OrthotropicField::constant(GridSpec::cube(n), 1, 1, 1), BoundaryConfig{});
    const double c = condition_estimate(assemble_dense(sys)).cond;
    if (prev > 0) {
      CHECK(c / prev >= 3.0);
      CHECK(c / prev <= 5.0);
    }
    prev = c;
  }
}

#include "etc/oracle.hpp"

#include "etc/krylov.hpp"
#include "etc/preconditioner.hpp"
#include "etc/tpfa.hpp"
#include "etc/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace etc {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Index pick(std::mt19937_64& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

Eigen::VectorXd random_vector(Index n, std::mt19937_64& rng) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = uniform(rng, -1.0, 1.0);
  return v;
}

GridSpec random_grid(Index max_n, std::mt19937_64& rng) {
  return GridSpec(pick(rng, 1, max_n), pick(rng, 1, max_n), pick(rng, 1, max_n),
                  uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0));
}

ReferenceParams refs_for(const DiscreteSystem<double>& sys, RefMode mode) {
  const CoefficientStats stats = coefficient_stats(sys);
  return mode == RefMode::Opt ? solve_reference_lp(stats) : ones_reference(stats);
}

OracleResult transform_oracle(Index max_n, std::mt19937_64& rng) {
  OracleResult res{"fct-vs-direct-dct", true, 0, 0.0, 1e-12};
  for (Index nx = 1; nx <= max_n; ++nx)
    for (Index ny = 1; ny <= max_n; ++ny)
      for (Index nz : {1, 3}) {
        FctPlan<double> plan(nx, ny, nz);
        const Eigen::VectorXd v = random_vector(nx * ny * nz, rng);
        Eigen::VectorXd hat(v.size()), back(v.size());
        plan.forward(v.data(), hat.data());
        plan.backward(hat.data(), back.data());
        for (Index k = 0; k < nz; ++k) {
          const std::span<const double> slice(v.data() + k * nx * ny, nx * ny);
          const std::vector<double> ref = dct2d_ref_forward(slice, nx, ny);
          double scale = 0.0, err = 0.0;
          for (Index c = 0; c < nx * ny; ++c) {
            scale = std::max(scale, std::abs(ref[c]));
            err = std::max(err, std::abs(ref[c] - hat[k * nx * ny + c]));
          }
          res.worst = std::max(res.worst, err / scale);
        }
        res.worst = std::max(res.worst, (back - v).norm() / v.norm());
        ++res.cases;
      }
  res.passed = res.worst <= res.tolerance;
  return res;
}

OracleResult precond_oracle(Index max_n, std::mt19937_64& rng) {
  OracleResult res{"fct-preconditioner-exactness", true, 0, 0.0, 1e-11};
  for (int t = 0; t < 50; ++t) {
    const GridSpec g = random_grid(max_n, rng);
    ReferenceParams refs;
    for (FaceGroup f : kFaceGroups) refs[f] = std::exp(uniform(rng, -2.0, 2.0));
    const DiscreteSystem<double> a_ref = reference_system<double>(g, refs);
    const Eigen::VectorXd r = random_vector(g.cells(), rng);
    FctPreconditioner<double> m(g, refs);
    Eigen::VectorXd z(r.size());
    m.apply(r, z);
    const double err = (apply_operator(a_ref, CellVector<double>(z)) - r).norm() / r.norm();
    res.worst = std::max(res.worst, err);
    ++res.cases;
  }
  res.passed = res.worst <= res.tolerance;
  return res;
}

OracleResult dense_pcg_oracle(Index max_n, std::mt19937_64& rng) {
  OracleResult res{"pcg-vs-dense-solve", true, 0, 0.0, 1e-8};
  for (int t = 0; t < 20; ++t) {
    const GridSpec g = random_grid(max_n, rng);
    const OrthotropicField f = random_field(g, 1e3, rng);
    const DiscreteSystem<double> sys = build_system<double>(f, BoundaryConfig(Axis::Z, 1.0, 0.0));
    const CellVector<double> b = build_rhs(sys);
    FctPreconditioner<double> m(g, refs_for(sys, RefMode::Opt));
    const auto out = pcg<double>(
        [&](const CellVector<double>& x, CellVector<double>& y) { apply_operator(sys, x, y); },
        [&](const CellVector<double>& r, CellVector<double>& z) { m.apply(r, z); }, b, 1e-10);
    const Eigen::VectorXd direct = dense_solve(assemble_dense(sys), b);
    res.worst = std::max(res.worst, (out.solution - direct).norm() / direct.norm());
    ++res.cases;
  }
  res.passed = res.worst <= res.tolerance;
  return res;
}

OracleResult condition_oracle(Index max_n, std::mt19937_64& rng, RefMode mode) {
  OracleResult res{std::string("condition-bound-") + to_string(mode), true, 0, 0.0, 1.0 + 1e-8};
  for (int t = 0; t < 20; ++t) {
    const GridSpec g = random_grid(max_n, rng);
    const OrthotropicField f = random_field(g, 1e3, rng);
    const DiscreteSystem<double> sys = build_system<double>(f, BoundaryConfig(Axis::Z, 1.0, 0.0));
    const ReferenceParams refs = refs_for(sys, mode);
    const ConditionEstimate c =
        condition_estimate(assemble_dense(sys), assemble_dense(reference_system<double>(g, refs)));
    res.worst = std::max(res.worst, c.cond / refs.objective());
    ++res.cases;
  }
  res.passed = res.worst <= res.tolerance;
  return res;
}

OracleResult lp_oracle(Index max_n, std::mt19937_64& rng) {
  // The LP optimum must not be beaten by random perturbations of the reference constants.
  OracleResult res{"reference-lp-optimality", true, 0, 0.0, 1.0 + 1e-12};
  for (int t = 0; t < 20; ++t) {
    const GridSpec g = random_grid(max_n, rng);
    const OrthotropicField f = random_field(g, 1e3, rng);
    const DiscreteSystem<double> sys = build_system<double>(f, BoundaryConfig(Axis::Z, 1.0, 0.0));
    const CoefficientStats stats = coefficient_stats(sys);
    const ReferenceParams best = solve_reference_lp(stats);
    res.worst = std::max(res.worst, std::abs(std::log(best.objective()) - lp_optimal_value(stats)) + 1.0);
    for (int p = 0; p < 50; ++p) {
      ReferenceParams trial = best;
      for (FaceGroup fg : kFaceGroups) trial[fg] *= std::exp(uniform(rng, -0.5, 0.5));
      compute_spectral_bounds(stats, trial);
      res.worst = std::max(res.worst, best.objective() / trial.objective());
    }
    ++res.cases;
  }
  res.passed = res.worst <= res.tolerance;
  return res;
}

}  // namespace

OrthotropicField random_field(const GridSpec& grid, double contrast, std::mt19937_64& rng) {
  const double lc = std::log(contrast);
  std::vector<double> k[3];
  for (auto& c : k) {
    c.resize(grid.cells());
    for (double& v : c) v = std::exp(uniform(rng, 0.0, lc));
  }
  return OrthotropicField(grid, std::move(k[0]), std::move(k[1]), std::move(k[2]));
}

std::vector<OracleResult> run_oracles(Index max_n, std::uint64_t seed) {
  if (max_n < 1) throw ConfigError("max-n must be >= 1");
  if (max_n * max_n * max_n > kDenseLimit)
    throw ConfigError("max-n is too large for the dense oracles (max-n^3 must be <= 4096)");
  std::mt19937_64 rng(seed);
  std::vector<OracleResult> out;
  out.push_back(transform_oracle(max_n, rng));
  out.push_back(precond_oracle(max_n, rng));
  out.push_back(dense_pcg_oracle(max_n, rng));
  out.push_back(condition_oracle(max_n, rng, RefMode::Opt));
  out.push_back(condition_oracle(max_n, rng, RefMode::One));
  out.push_back(lp_oracle(max_n, rng));
  return out;
}

}  // namespace etc

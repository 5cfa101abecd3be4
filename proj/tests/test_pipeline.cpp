#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "etc/oracle.hpp"
#include "etc/pipeline.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

using namespace etc;

TEST_CASE("axis permutation convention") {
  const GridSpec g(2, 3, 4, 0.5, 1.0, 2.0);
  const auto f = OrthotropicField::constant(g, 2, 3, 4);
  const auto px = axis_permute(f, Axis::X);
  CHECK(px.grid() == GridSpec(4, 3, 2, 2.0, 1.0, 0.5));
  CHECK(px.kx()[0] == 4);
  CHECK(px.ky()[0] == 3);
  CHECK(px.kz()[0] == 2);
  const auto py = axis_permute(f, Axis::Y);
  CHECK(py.grid() == GridSpec(2, 4, 3, 0.5, 2.0, 1.0));
  CHECK(py.kx()[0] == 2);
  CHECK(py.ky()[0] == 4);
  CHECK(py.kz()[0] == 3);
  CHECK(axis_permute(f, Axis::Z) == f);
}

TEST_CASE("axis permutation moves cells with their coordinates and is an involution") {
  std::mt19937_64 rng(40);
  const GridSpec g(3, 4, 5, 0.7, 1.1, 1.9);
  const auto f = random_field(g, 50, rng);
  const auto px = axis_permute(f, Axis::X);
  const auto py = axis_permute(f, Axis::Y);
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index c = flat(i, j, k, g);
        REQUIRE(px.kz()[flat(k, j, i, px.grid())] == f.kx()[c]);
        REQUIRE(py.kz()[flat(i, k, j, py.grid())] == f.ky()[c]);
      }
  CHECK(axis_permute(px, Axis::X) == f);
  CHECK(axis_permute(py, Axis::Y) == f);
}

TEST_CASE("homogeneous anisotropic medium returns the requested component") {
  const auto f = OrthotropicField::constant(GridSpec(6, 5, 4, 1.0, 0.8, 1.3), 2, 3, 4);
  SolveOptions o;
  o.rtol = 1e-10;
  const double expect[3] = {2, 3, 4};
  const Axis axes[3] = {Axis::X, Axis::Y, Axis::Z};
  for (int a = 0; a < 3; ++a) {
    const auto r = homogenize(f, BoundaryConfig(axes[a], 1.0, 0.0), o);
    CHECK(std::abs(*r.kappa_eff - expect[a]) <= 1e-12 * expect[a]);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
  }
}

TEST_CASE("series layers along x give the harmonic mean") {
  const GridSpec g(6, 3, 4);
  std::vector<double> layer{1.0, 10.0, 0.2, 4.0, 3.0, 0.5};
  std::vector<double> kx(g.cells());
  for (Index c = 0; c < g.cells(); ++c) kx[c] = layer[c % g.nx];
  const OrthotropicField f(g, kx, std::vector<double>(g.cells(), 1.0), std::vector<double>(g.cells(), 7.0));
  SolveOptions o;
  o.rtol = 1e-12;
  const auto r = homogenize(f, BoundaryConfig(Axis::X, 0.0, 2.0), o);
  const double harmonic = 6.0 / std::accumulate(layer.begin(), layer.end(), 0.0,
                                                [](double s, double v) { return s + 1 / v; });
  CHECK(std::abs(*r.kappa_eff - harmonic) <= 1e-10 * harmonic);
}

TEST_CASE("flux conservation and physical bounds") {
  std::mt19937_64 rng(41);
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    const auto f = random_field(GridSpec(7, 6, 5), 100, rng);
    SolveOptions o;
    o.rtol = 1e-12;
    const auto res = homogenize_full(f, BoundaryConfig(axis, 1.0, 0.0), o);
    const double so = std::accumulate(res.outflow.begin(), res.outflow.end(), 0.0);
    const double si = std::accumulate(res.inflow.begin(), res.inflow.end(), 0.0);
    CHECK(std::abs(so + si) <= 1e-10 * std::abs(so));
    const int a = static_cast<int>(axis);
    CHECK(*res.report.kappa_eff >= f.min_component(a));
    CHECK(*res.report.kappa_eff <= f.max_component(a));
  }
}

TEST_CASE("all preconditioners reach the same answer") {
  const auto f = gen_center_ball(12, 10.0);
  const BoundaryConfig bc(Axis::Z, 1.0, 0.0);
  SolveOptions o;
  o.rtol = 1e-10;
  const double ref = *homogenize(f, bc, o).kappa_eff;
  for (auto kind : {PreconditionerKind::Ssor, PreconditionerKind::Jacobi, PreconditionerKind::None}) {
    o.precond = kind;
    CHECK(*homogenize(f, bc, o).kappa_eff == doctest::Approx(ref).epsilon(1e-8));
  }
  o.precond = PreconditionerKind::Fct;
  o.ref_mode = RefMode::One;
  CHECK(*homogenize(f, bc, o).kappa_eff == doctest::Approx(ref).epsilon(1e-8));
  o.precision = Precision::F32;
  o.rtol = 1e-5;
  const auto r32 = homogenize(f, bc, o);
  CHECK(r32.precision == Precision::F32);
  CHECK(*r32.kappa_eff == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("option validation") {
  const auto f = gen_center_ball(4, 10.0);
  SolveOptions o;
  o.rtol = 1.5;
  CHECK_THROWS_AS(homogenize(f, BoundaryConfig{}, o), ConfigError);
  o.rtol = 1e-5;
  o.precond = PreconditionerKind::Ssor;
  o.omega = 2.5;
  CHECK_THROWS_AS(homogenize(f, BoundaryConfig{}, o), ConfigError);
  ExperimentPlan plan;
  plan.rtols.clear();
  CHECK_THROWS_AS(plan.validate(), ConfigError);
  plan.rtols = {1e-5};
  plan.p_out = plan.p_in;
  CHECK_THROWS_AS(plan.validate(), ConfigError);
}

TEST_CASE("smooth problem error decays at second order") {
  SolveOptions o;
  o.rtol = 1e-9;
  const double e8 = solve_smooth(8, o).l2_error;
  const double e16 = solve_smooth(16, o).l2_error;
  CHECK(e8 / e16 > 3.5);
  CHECK(e8 / e16 < 4.5);
}

TEST_CASE("report JSON schema and history CSV") {
  const auto f = gen_center_ball(8, 10.0);
  SolveOptions o;
  RunRecord rec;
  rec.report = homogenize(f, BoundaryConfig{}, o);
  rec.grid = f.grid();
  rec.rtol = o.rtol;
  rec.config = {{"medium", "center-ball"}};
  const auto j = to_json(rec);
  CHECK(validate_report_json(j).empty());
  CHECK(j["precond"] == "fct-opt");
  CHECK(j["ref_params"]["lambda_hi"].get<double>() >= j["ref_params"]["lambda_lo"].get<double>());
  CHECK_FALSE(j.contains("l2_error"));
  CHECK_FALSE(to_json(rec, false).contains("prep_seconds"));

  auto broken = j;
  broken.erase("iterations");
  CHECK(validate_report_json(broken) == "missing key iterations");
  broken = j;
  broken["precision"] = "f16";
  CHECK_FALSE(validate_report_json(broken).empty());

  const std::string csv = history_csv(rec.report);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,relres");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    ++rows;
  }
  CHECK(rows == rec.report.iterations + 1);
}

TEST_CASE("reports are deterministic apart from timings") {
  const auto f = gen_random_balls(16, 20, 0.05, 0.15, 100.0, 5);
  SolveOptions o;
  RunRecord a, b;
  a.report = homogenize(f, BoundaryConfig{}, o);
  b.report = homogenize(f, BoundaryConfig{}, o);
  a.grid = b.grid = f.grid();
  CHECK(to_json(a, false).dump() == to_json(b, false).dump());
  CHECK(history_csv(a.report) == history_csv(b.report));
}

TEST_CASE("experiment runners") {
  ExperimentPlan plan;
  plan.generator.kind = GeneratorKind::CenterBall;
  plan.generator.kappa_inc = 10.0;
  plan.rtols = {1e-6};

  const auto rows = run_convergence_study(plan, {8, 16});
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].dof == 4096);
  CHECK_FALSE(rows[0].l2_error.has_value());
  CHECK(convergence_csv(rows).rfind("n,dof,l2_error,kappa_eff,", 0) == 0);

  plan.generator.n = 16;
  SolveOptions fct, ssor;
  ssor.precond = PreconditionerKind::Ssor;
  ssor.omega = 1.5;
  const auto runs = compare_preconditioners(plan, {fct, ssor});
  CHECK(runs[0].label == "fct-opt");
  CHECK(runs[1].label == "ssor-1.5");
  CHECK(runs[0].report.iterations < runs[1].report.iterations);

  plan.rtols = {1e-5, 1e-6};
  const auto prec = precision_study(plan);
  REQUIRE(prec.size() == 5);
  CHECK(prec[0].relative_difference == 0.0);
  CHECK(prec[1].precision == Precision::F32);
  CHECK(prec[1].relative_difference < 1e-2);

  plan.generator.n = 16;
  plan.generator.periods = 2;
  const auto ch = channels_study(plan, {1.0, 2.0}, {RefMode::Opt, RefMode::One});
  REQUIRE(ch.size() == 4);
  CHECK(channels_summary_csv(ch).rfind("psi,ref,iterations", 0) == 0);

  plan.generator.kind = GeneratorKind::Smooth;
  const auto smooth = run_convergence_study(plan, {8});
  CHECK(smooth[0].l2_error.has_value());
}

TEST_CASE("generator specs") {
  GeneratorSpec s;
  s.kind = GeneratorKind::RandomBalls;
  s.n = 8;
  s.preset = "a";
  CHECK(describe(s)["preset"] == "a");
  CHECK(make_field(s).grid().nx == 8);
  s.kind = GeneratorKind::Channels;
  s.periods = 3;
  CHECK_THROWS_AS(make_field(s), ConfigError);
  CHECK(parse_generator("center-ball") == GeneratorKind::CenterBall);
  CHECK_THROWS_AS(parse_generator("cubes"), ConfigError);
}

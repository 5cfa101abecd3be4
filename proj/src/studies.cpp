#include "etc/pipeline.hpp"

#include <cmath>
#include <cstdio>

namespace etc {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double first_rtol(const ExperimentPlan& plan) {
  plan.validate();
  return plan.rtols.front();
}

BoundaryConfig plan_boundary(const ExperimentPlan& plan) {
  return BoundaryConfig(plan.axis, plan.p_in, plan.p_out);
}

}  // namespace

GeneratorKind parse_generator(std::string_view s) {
  if (s == "smooth") return GeneratorKind::Smooth;
  if (s == "center-ball") return GeneratorKind::CenterBall;
  if (s == "random-balls") return GeneratorKind::RandomBalls;
  if (s == "channels") return GeneratorKind::Channels;
  throw ConfigError("unknown config '" + std::string(s) +
                    "' (expected smooth, center-ball, random-balls or channels)");
}

const char* to_string(GeneratorKind g) {
  switch (g) {
    case GeneratorKind::Smooth: return "smooth";
    case GeneratorKind::CenterBall: return "center-ball";
    case GeneratorKind::RandomBalls: return "random-balls";
    case GeneratorKind::Channels: return "channels";
  }
  return "?";
}

OrthotropicField make_field(const GeneratorSpec& s) {
  switch (s.kind) {
    case GeneratorKind::Smooth: return gen_smooth_problem(s.n).field;
    case GeneratorKind::CenterBall: return gen_center_ball(s.n, s.kappa_inc);
    case GeneratorKind::RandomBalls:
      if (!s.preset.empty()) {
        const RandomBallPreset& p = random_ball_preset(s.preset);
        return gen_random_balls(s.n, p.count, p.r_min, p.r_max, s.kappa_inc, p.seed);
      }
      return gen_random_balls(s.n, s.count, s.r_min, s.r_max, s.kappa_inc, s.seed);
    case GeneratorKind::Channels:
      if (s.periods < 1 || s.n % s.periods != 0)
        throw ConfigError("channels: n must be a multiple of periods");
      return gen_channels(s.cells_per_period(), s.periods, s.psi);
  }
  throw ConfigError("unknown generator");
}

nlohmann::json describe(const GeneratorSpec& s) {
  nlohmann::json j{{"generator", to_string(s.kind)}, {"n", s.n}};
  switch (s.kind) {
    case GeneratorKind::Smooth: break;
    case GeneratorKind::CenterBall: j["kappa_inc"] = s.kappa_inc; break;
    case GeneratorKind::RandomBalls:
      j["kappa_inc"] = s.kappa_inc;
      if (!s.preset.empty()) {
        j["preset"] = s.preset;
      } else {
        j["count"] = s.count;
        j["r_min"] = s.r_min;
        j["r_max"] = s.r_max;
        j["seed"] = s.seed;
      }
      break;
    case GeneratorKind::Channels:
      j["psi"] = s.psi;
      j["periods"] = s.periods;
      break;
  }
  return j;
}

void ExperimentPlan::validate() const {
  if (rtols.empty()) throw ConfigError("at least one rtol is required");
  for (double r : rtols)
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("rtol must lie in (0, 1)");
  BoundaryConfig(axis, p_in, p_out);
}

std::vector<ConvergenceRow> run_convergence_study(const ExperimentPlan& plan,
                                                  const std::vector<Index>& ns) {
  SolveOptions o = plan.base;
  o.rtol = first_rtol(plan);
  std::vector<ConvergenceRow> rows;
  for (Index n : ns) {
    GeneratorSpec spec = plan.generator;
    spec.n = n;
    ConvergenceRow row{};
    row.n = n;
    row.dof = n * n * n;
    SolveReport rep;
    if (spec.kind == GeneratorKind::Smooth) {
      SmoothSolveResult s = solve_smooth(n, o);
      row.l2_error = s.l2_error;
      rep = std::move(s.report);
      row.kappa_eff = std::nan("");
    } else {
      rep = homogenize(make_field(spec), plan_boundary(plan), o);
      row.kappa_eff = *rep.kappa_eff;
    }
    row.iterations = rep.iterations;
    row.converged = rep.converged;
    row.prep_seconds = rep.prep_seconds;
    row.exec_seconds = rep.exec_seconds;
    rows.push_back(row);
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string s = "n,dof,l2_error,kappa_eff,iterations,converged,prep_seconds,exec_seconds\n";
  for (const auto& r : rows) {
    s += std::to_string(r.n) + "," + std::to_string(r.dof) + "," +
         (r.l2_error ? num(*r.l2_error) : "") + "," +
         (std::isnan(r.kappa_eff) ? "" : num(r.kappa_eff)) + "," + std::to_string(r.iterations) +
         "," + (r.converged ? "1" : "0") + "," + num(r.prep_seconds) + "," +
         num(r.exec_seconds) + "\n";
  }
  return s;
}

std::vector<LabeledRun> compare_preconditioners(const ExperimentPlan& plan,
                                                const std::vector<SolveOptions>& settings) {
  const double rtol = first_rtol(plan);
  const OrthotropicField field = make_field(plan.generator);
  std::vector<LabeledRun> runs;
  for (SolveOptions o : settings) {
    o.rtol = rtol;
    runs.push_back({preconditioner_label(o), homogenize(field, plan_boundary(plan), o)});
  }
  return runs;
}

std::vector<PrecisionRow> precision_study(const ExperimentPlan& plan) {
  plan.validate();
  const OrthotropicField field = make_field(plan.generator);
  const BoundaryConfig bc = plan_boundary(plan);
  SolveOptions o = plan.base;
  o.precision = Precision::F64;
  o.rtol = 1e-9;
  const SolveReport base = homogenize(field, bc, o);
  const double ref = *base.kappa_eff;

  std::vector<PrecisionRow> rows;
  auto push = [&](const SolveReport& r, double rtol) {
    rows.push_back({r.precision, rtol, *r.kappa_eff, std::abs(*r.kappa_eff - ref) / std::abs(ref),
                    r.iterations, r.converged, r.prep_seconds, r.exec_seconds});
  };
  push(base, 1e-9);
  for (Precision p : {Precision::F32, Precision::F64})
    for (double rtol : plan.rtols) {
      if (p == Precision::F64 && rtol == 1e-9) continue;
      o.precision = p;
      o.rtol = rtol;
      push(homogenize(field, bc, o), rtol);
    }
  return rows;
}

std::string precision_csv(const std::vector<PrecisionRow>& rows) {
  std::string s = "precision,rtol,kappa_eff,relative_difference,iterations,converged,prep_seconds,"
                  "exec_seconds\n";
  for (const auto& r : rows)
    s += std::string(to_string(r.precision)) + "," + num(r.rtol) + "," + num(r.kappa_eff) + "," +
         num(r.relative_difference) + "," + std::to_string(r.iterations) + "," +
         (r.converged ? "1" : "0") + "," + num(r.prep_seconds) + "," + num(r.exec_seconds) + "\n";
  return s;
}

std::vector<ChannelsRun> channels_study(const ExperimentPlan& plan, const std::vector<double>& psis,
                                        const std::vector<RefMode>& modes) {
  SolveOptions o = plan.base;
  o.rtol = first_rtol(plan);
  o.precond = PreconditionerKind::Fct;
  std::vector<ChannelsRun> runs;
  for (double psi : psis) {
    GeneratorSpec spec = plan.generator;
    spec.kind = GeneratorKind::Channels;
    spec.psi = psi;
    const OrthotropicField field = make_field(spec);
    for (RefMode m : modes) {
      o.ref_mode = m;
      runs.push_back({psi, m, homogenize(field, plan_boundary(plan), o)});
    }
  }
  return runs;
}

std::string channels_summary_csv(const std::vector<ChannelsRun>& runs) {
  std::string s = "psi,ref,iterations,converged,kappa_eff\n";
  for (const auto& r : runs)
    s += num(r.psi) + "," + to_string(r.mode) + "," + std::to_string(r.report.iterations) + "," +
         (r.report.converged ? "1" : "0") + "," + num(*r.report.kappa_eff) + "\n";
  return s;
}

}  // namespace etc

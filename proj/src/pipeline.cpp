#include "etc/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

namespace etc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Builds the preconditioner (counted as preparation), then runs PCG (execution).
template <typename S>
PcgOutput<S> solve_prepared(const DiscreteSystem<S>& sys, const CellVector<S>& b,
                            const SolveOptions& o, Clock::time_point t0) {
  auto apply_a = [&](const CellVector<S>& x, CellVector<S>& y) { apply_operator(sys, x, y); };
  PcgOutput<S> out;
  Clock::time_point t1;
  std::optional<ReferenceParams> refs;
  switch (o.precond) {
    case PreconditionerKind::Fct: {
      const CoefficientStats stats = coefficient_stats(sys);
      refs = o.ref_mode == RefMode::Opt ? solve_reference_lp(stats) : ones_reference(stats);
      FctPreconditioner<S> m(sys.grid, *refs);
      t1 = Clock::now();
      out = pcg<S>(apply_a, [&](const CellVector<S>& r, CellVector<S>& z) { m.apply(r, z); }, b,
                   o.rtol, o.max_iter);
      break;
    }
    case PreconditionerKind::Ssor: {
      SsorPreconditioner<S> m(sys, o.omega);
      t1 = Clock::now();
      out = pcg<S>(apply_a, [&](const CellVector<S>& r, CellVector<S>& z) { m.apply(r, z); }, b,
                   o.rtol, o.max_iter);
      break;
    }
    case PreconditionerKind::Jacobi: {
      JacobiPreconditioner<S> m(sys);
      t1 = Clock::now();
      out = pcg<S>(apply_a, [&](const CellVector<S>& r, CellVector<S>& z) { m.apply(r, z); }, b,
                   o.rtol, o.max_iter);
      break;
    }
    case PreconditionerKind::None: {
      IdentityPreconditioner m;
      t1 = Clock::now();
      out = pcg<S>(apply_a, [&](const CellVector<S>& r, CellVector<S>& z) { m.apply(r, z); }, b,
                   o.rtol, o.max_iter);
      break;
    }
  }
  const Clock::time_point t2 = Clock::now();
  out.report.prep_seconds = seconds_between(t0, t1);
  out.report.exec_seconds = seconds_between(t1, t2);
  out.report.preconditioner = preconditioner_label(o);
  out.report.ref_params = refs;
  return out;
}

void check_options(const SolveOptions& o) {
  if (!(o.rtol > 0.0 && o.rtol < 1.0)) throw ConfigError("rtol must lie in (0, 1)");
  if (o.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (o.precond == PreconditionerKind::Ssor && !(o.omega > 0.0 && o.omega < 2.0))
    throw ConfigError("omega must lie in (0, 2)");
}

template <typename S>
HomogenizeResult homogenize_impl(const OrthotropicField& field, const BoundaryConfig& boundary,
                                 const SolveOptions& o) {
  const Clock::time_point t0 = Clock::now();
  const OrthotropicField f = axis_permute(field, boundary.axis);
  const BoundaryConfig bz(Axis::Z, boundary.p_in, boundary.p_out);
  const DiscreteSystem<S> sys = build_system<S>(f, bz);
  const CellVector<S> b = build_rhs(sys);
  PcgOutput<S> out = solve_prepared(sys, b, o, t0);

  HomogenizeResult res;
  res.outflow = reconstruct_boundary_flux(sys, out.solution);
  res.inflow = reconstruct_inflow_flux(sys, out.solution);
  out.report.kappa_eff = effective_conductivity(sys, res.outflow);
  res.report = std::move(out.report);
  res.solution = out.solution.template cast<double>();
  return res;
}

template <typename S>
SmoothSolveResult solve_smooth_impl(Index n, const SolveOptions& o) {
  const Clock::time_point t0 = Clock::now();
  const SmoothProblem prob = gen_smooth_problem(n);
  const GridSpec& g = prob.field.grid();
  const DiscreteSystem<S> sys = build_system<S>(prob.field, BoundaryConfig{});
  std::vector<double> p_in(g.slice_cells()), p_out(g.slice_cells());
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const auto c = g.center(i, j, 0);
      p_in[j * g.nx + i] = prob.exact(c[0], c[1], 0.0);
      p_out[j * g.nx + i] = prob.exact(c[0], c[1], g.lz);
    }
  CellVector<S> b = build_rhs(sys, p_in, p_out);
  add_source(sys, b, prob.source);
  PcgOutput<S> out = solve_prepared(sys, b, o, t0);
  SmoothSolveResult res;
  res.l2_error = l2_error_midpoint(g, out.solution, prob.exact);
  res.report = std::move(out.report);
  return res;
}

}  // namespace

OrthotropicField axis_permute(const OrthotropicField& field, Axis axis) {
  if (axis == Axis::Z) return field;
  const GridSpec& g = field.grid();
  const bool swap_x = axis == Axis::X;
  const GridSpec pg = swap_x ? GridSpec(g.nz, g.ny, g.nx, g.lz, g.ly, g.lx)
                             : GridSpec(g.nx, g.nz, g.ny, g.lx, g.lz, g.ly);
  std::vector<double> kx(g.cells()), ky(g.cells()), kz(g.cells());
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index src = flat(i, j, k, g);
        const Index dst = swap_x ? flat(k, j, i, pg) : flat(i, k, j, pg);
        if (swap_x) {
          kx[dst] = field.kz()[src];
          ky[dst] = field.ky()[src];
          kz[dst] = field.kx()[src];
        } else {
          kx[dst] = field.kx()[src];
          ky[dst] = field.kz()[src];
          kz[dst] = field.ky()[src];
        }
      }
  return OrthotropicField(pg, std::move(kx), std::move(ky), std::move(kz));
}

std::string preconditioner_label(const SolveOptions& o) {
  switch (o.precond) {
    case PreconditionerKind::Fct: return std::string("fct-") + to_string(o.ref_mode);
    case PreconditionerKind::Ssor: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "ssor-%g", o.omega);
      return buf;
    }
    default: return to_string(o.precond);
  }
}

HomogenizeResult homogenize_full(const OrthotropicField& field, const BoundaryConfig& boundary,
                                 const SolveOptions& options) {
  check_options(options);
  return options.precision == Precision::F64 ? homogenize_impl<double>(field, boundary, options)
                                             : homogenize_impl<float>(field, boundary, options);
}

SolveReport homogenize(const OrthotropicField& field, const BoundaryConfig& boundary,
                       const SolveOptions& options) {
  return homogenize_full(field, boundary, options).report;
}

SmoothSolveResult solve_smooth(Index n, const SolveOptions& options) {
  check_options(options);
  return options.precision == Precision::F64 ? solve_smooth_impl<double>(n, options)
                                             : solve_smooth_impl<float>(n, options);
}

nlohmann::json to_json(const RunRecord& r, bool include_timings) {
  using nlohmann::json;
  json j;
  j["config"] = r.config.is_null() ? json::object() : r.config;
  j["grid"] = {{"nx", r.grid.nx}, {"ny", r.grid.ny}, {"nz", r.grid.nz},
               {"lx", r.grid.lx}, {"ly", r.grid.ly}, {"lz", r.grid.lz}};
  j["boundary"] = {{"axis", to_string(r.boundary.axis)},
                   {"p_in", r.boundary.p_in},
                   {"p_out", r.boundary.p_out}};
  j["precond"] = r.report.preconditioner;
  if (r.report.ref_params) {
    const ReferenceParams& p = *r.report.ref_params;
    j["ref_params"] = {{"kx", p.kx},     {"ky", p.ky},     {"kz", p.kz},
                       {"kin", p.kin},   {"kout", p.kout}, {"lambda_lo", p.lambda_lo},
                       {"lambda_hi", p.lambda_hi}};
  } else {
    j["ref_params"] = nullptr;
  }
  j["rtol"] = r.rtol;
  j["iterations"] = r.report.iterations;
  j["converged"] = r.report.converged;
  j["kappa_eff"] = r.report.kappa_eff ? json(*r.report.kappa_eff) : json(nullptr);
  if (r.l2_error) j["l2_error"] = *r.l2_error;
  if (include_timings) {
    j["prep_seconds"] = r.report.prep_seconds;
    j["exec_seconds"] = r.report.exec_seconds;
  }
  j["precision"] = to_string(r.report.precision);
  return j;
}

std::string validate_report_json(const nlohmann::json& j) {
  if (!j.is_object()) return "report is not an object";
  auto need = [&](const char* key, auto pred, const char* what) -> std::string {
    if (!j.contains(key)) return std::string("missing key ") + key;
    if (!pred(j[key])) return std::string(key) + " must be " + what;
    return {};
  };
  const auto is_obj = [](const nlohmann::json& v) { return v.is_object(); };
  const auto is_num = [](const nlohmann::json& v) { return v.is_number(); };
  const auto is_str = [](const nlohmann::json& v) { return v.is_string(); };
  const auto is_int = [](const nlohmann::json& v) { return v.is_number_integer(); };
  const auto is_bool = [](const nlohmann::json& v) { return v.is_boolean(); };
  const auto num_or_null = [](const nlohmann::json& v) { return v.is_number() || v.is_null(); };
  const auto obj_or_null = [](const nlohmann::json& v) { return v.is_object() || v.is_null(); };
  for (std::string e :
       {need("config", is_obj, "an object"), need("grid", is_obj, "an object"),
        need("boundary", is_obj, "an object"), need("precond", is_str, "a string"),
        need("ref_params", obj_or_null, "an object or null"), need("rtol", is_num, "a number"),
        need("iterations", is_int, "an integer"), need("converged", is_bool, "a boolean"),
        need("kappa_eff", num_or_null, "a number or null"),
        need("prep_seconds", is_num, "a number"), need("exec_seconds", is_num, "a number"),
        need("precision", is_str, "a string")})
    if (!e.empty()) return e;
  for (const char* k : {"nx", "ny", "nz"})
    if (!j["grid"].contains(k) || !j["grid"][k].is_number_integer())
      return std::string("grid.") + k + " must be an integer";
  for (const char* k : {"lx", "ly", "lz"})
    if (!j["grid"].contains(k) || !j["grid"][k].is_number())
      return std::string("grid.") + k + " must be a number";
  if (!j["boundary"].contains("axis") || !j["boundary"]["axis"].is_string())
    return "boundary.axis must be a string";
  for (const char* k : {"p_in", "p_out"})
    if (!j["boundary"].contains(k) || !j["boundary"][k].is_number())
      return std::string("boundary.") + k + " must be a number";
  if (j["ref_params"].is_object())
    for (const char* k : {"kx", "ky", "kz", "kin", "kout", "lambda_lo", "lambda_hi"})
      if (!j["ref_params"].contains(k) || !j["ref_params"][k].is_number())
        return std::string("ref_params.") + k + " must be a number";
  if (j.contains("l2_error") && !j["l2_error"].is_number()) return "l2_error must be a number";
  const std::string prec = j["precision"];
  if (prec != "f64" && prec != "f32") return "precision must be f64 or f32";
  return {};
}

std::string history_csv(const SolveReport& report) {
  std::string s = "iter,relres\n";
  for (std::size_t k = 0; k < report.relative_residuals.size(); ++k)
    s += std::to_string(k) + "," + fmt_double(report.relative_residuals[k]) + "\n";
  return s;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace etc

#include "etc/cli.hpp"

#include "etc/oracle.hpp"
#include "etc/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace etc {

namespace {

struct SolverFlags {
  std::string axis = "z";
  double p_in = 1.0, p_out = 0.0;
  double rtol = 1e-5;
  int max_iter = kDefaultMaxIter;
  std::string precond = "fct";
  double omega = 1.0;
  std::string ref = "opt";
  std::string precision = "f64";
  int threads = 0;
};

struct GeneratorFlags {
  std::string config = "center-ball";
  Index n = 32;
  double kappa_inc = 10.0;
  Index count = 40;
  double r_min = 0.08, r_max = 0.14;
  double psi = 1.0;
  Index periods = 8;
  std::uint64_t seed = 1;
};

const std::vector<std::string> kAxes{"x", "y", "z"};
const std::vector<std::string> kPreconds{"fct", "ssor", "jacobi", "none"};
const std::vector<std::string> kRefs{"opt", "one"};
const std::vector<std::string> kPrecisions{"f64", "f32"};
const std::vector<std::string> kConfigs{"smooth", "center-ball", "random-balls", "channels"};

void add_boundary_flags(CLI::App* app, SolverFlags& f) {
  app->add_option("--axis", f.axis, "Dirichlet axis")->check(CLI::IsMember(kAxes))->capture_default_str();
  app->add_option("--p-in", f.p_in, "potential on the inflow face")->capture_default_str();
  app->add_option("--p-out", f.p_out, "potential on the outflow face")->capture_default_str();
}

void add_common_solver_flags(CLI::App* app, SolverFlags& f) {
  app->add_option("--max-iter", f.max_iter, "PCG iteration cap")->capture_default_str();
  app->add_option("--omega", f.omega, "SSOR relaxation factor (ssor only)")->capture_default_str();
  app->add_option("--precision", f.precision, "floating-point precision")
      ->check(CLI::IsMember(kPrecisions))
      ->capture_default_str();
  app->add_option("--threads", f.threads, "worker threads (0 = auto)")->capture_default_str();
}

void add_solver_flags(CLI::App* app, SolverFlags& f) {
  add_boundary_flags(app, f);
  app->add_option("--rtol", f.rtol, "relative residual tolerance")->capture_default_str();
  app->add_option("--precond", f.precond, "preconditioner")
      ->check(CLI::IsMember(kPreconds))
      ->capture_default_str();
  app->add_option("--ref", f.ref, "reference constants for fct")
      ->check(CLI::IsMember(kRefs))
      ->capture_default_str();
  add_common_solver_flags(app, f);
}

void add_generator_flags(CLI::App* app, GeneratorFlags& g, bool with_n = true) {
  app->add_option("--config", g.config, "medium generator")
      ->check(CLI::IsMember(kConfigs))
      ->capture_default_str();
  if (with_n) app->add_option("--n", g.n, "cells per axis")->capture_default_str();
  app->add_option("--kappa-inc", g.kappa_inc, "inclusion conductivity")->capture_default_str();
  app->add_option("--count", g.count, "number of random balls")->capture_default_str();
  app->add_option("--r-min", g.r_min, "smallest ball radius")->capture_default_str();
  app->add_option("--r-max", g.r_max, "largest ball radius")->capture_default_str();
  app->add_option("--psi", g.psi, "channel contrast exponent")->capture_default_str();
  app->add_option("--periods", g.periods, "channel periods per axis")->capture_default_str();
  app->add_option("--seed", g.seed, "random seed")->capture_default_str();
}

GeneratorSpec to_spec(const GeneratorFlags& g) {
  GeneratorSpec s;
  s.kind = parse_generator(g.config);
  s.n = g.n;
  s.kappa_inc = g.kappa_inc;
  s.count = g.count;
  s.r_min = g.r_min;
  s.r_max = g.r_max;
  s.seed = g.seed;
  s.psi = g.psi;
  s.periods = g.periods;
  return s;
}

SolveOptions to_options(const SolverFlags& f) {
  SolveOptions o;
  o.rtol = f.rtol;
  o.max_iter = f.max_iter;
  o.precond = parse_preconditioner(f.precond);
  o.omega = f.omega;
  o.ref_mode = parse_ref_mode(f.ref);
  o.precision = f.precision == "f32" ? Precision::F32 : Precision::F64;
  if (!(o.rtol > 0.0 && o.rtol < 1.0)) throw ConfigError("--rtol must lie in (0, 1)");
  if (o.max_iter < 1) throw ConfigError("--max-iter must be >= 1");
  if (!(o.omega > 0.0 && o.omega < 2.0)) throw ConfigError("--omega must lie in (0, 2)");
  if (f.threads < 0) throw ConfigError("--threads must be >= 0");
  return o;
}

nlohmann::json solver_json(const SolverFlags& f) {
  return {{"axis", f.axis},   {"p_in", f.p_in},           {"p_out", f.p_out},
          {"rtol", f.rtol},   {"max_iter", f.max_iter},   {"precond", f.precond},
          {"omega", f.omega}, {"ref", f.ref},             {"precision", f.precision}};
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Effective thermal conductivity of voxel media", "etc");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  SolverFlags sf;
  GeneratorFlags gf;
  std::string output, report_path, history_path, input;
  std::vector<Index> ns{16, 32, 64};
  std::vector<double> rtols{1e-5, 1e-6, 1e-7, 1e-8, 1e-9};
  std::vector<std::string> preconds{"fct", "ssor", "jacobi", "none"};
  std::vector<double> psis{1.0, 2.0, 3.0};
  std::vector<std::string> refs{"opt", "one"};
  Index max_n = 5;
  std::string dtype = "f64";

  auto* gen = app.add_subcommand("generate", "write a generated medium to a voxel file");
  add_generator_flags(gen, gf);
  gen->add_option("-o", output, "output voxel file")->required();
  gen->add_option("--dtype", dtype, "payload precision")->check(CLI::IsMember(kPrecisions))->capture_default_str();

  auto* solve = app.add_subcommand("solve", "compute kappa_eff of a voxel file or generated medium");
  solve->add_option("input", input, "voxel file (omit to use --config)");
  add_generator_flags(solve, gf);
  add_solver_flags(solve, sf);
  solve->add_option("--report", report_path, "write the report JSON here");
  solve->add_option("--history", history_path, "write the residual history CSV here");

  auto* conv = app.add_subcommand("convergence", "resolution sweep");
  add_generator_flags(conv, gf, false);
  conv->add_option("--n", ns, "resolutions")->capture_default_str();
  add_solver_flags(conv, sf);
  conv->add_option("-o", output, "output CSV (stdout if omitted)");

  auto* cmp = app.add_subcommand("compare", "residual histories for several preconditioners");
  add_generator_flags(cmp, gf);
  add_boundary_flags(cmp, sf);
  cmp->add_option("--rtol", sf.rtol, "relative residual tolerance")->capture_default_str();
  cmp->add_option("--precond", preconds, "preconditioners")->check(CLI::IsMember(kPreconds))->capture_default_str();
  cmp->add_option("--ref", sf.ref, "reference constants for fct")->check(CLI::IsMember(kRefs))->capture_default_str();
  add_common_solver_flags(cmp, sf);
  cmp->add_option("-o", output, "output directory for history CSVs");

  auto* chan = app.add_subcommand("channels", "reference-constant study on the channels medium");
  add_generator_flags(chan, gf);
  add_boundary_flags(chan, sf);
  chan->add_option("--rtol", sf.rtol, "relative residual tolerance")->capture_default_str();
  chan->remove_option(chan->get_option_no_throw("--psi"));
  chan->add_option("--psi", psis, "contrast exponents")->capture_default_str();
  chan->add_option("--ref", refs, "reference modes")->check(CLI::IsMember(kRefs))->capture_default_str();
  add_common_solver_flags(chan, sf);
  chan->add_option("-o", output, "output directory for history CSVs");

  auto* prec = app.add_subcommand("precision", "single versus double precision");
  add_generator_flags(prec, gf);
  add_boundary_flags(prec, sf);
  prec->add_option("--rtol", rtols, "tolerances for the sweep")->capture_default_str();
  prec->add_option("--precond", sf.precond, "preconditioner")->check(CLI::IsMember(kPreconds))->capture_default_str();
  prec->add_option("--ref", sf.ref, "reference constants for fct")->check(CLI::IsMember(kRefs))->capture_default_str();
  prec->add_option("--max-iter", sf.max_iter, "PCG iteration cap")->capture_default_str();
  prec->add_option("--omega", sf.omega, "SSOR relaxation factor (ssor only)")->capture_default_str();
  prec->add_option("--threads", sf.threads, "worker threads (0 = auto)")->capture_default_str();
  prec->add_option("-o", output, "output CSV (stdout if omitted)");

  auto* bench = app.add_subcommand("bench", "time preparation and execution of one solve");
  add_generator_flags(bench, gf);
  add_solver_flags(bench, sf);

  auto* orc = app.add_subcommand("oracle", "run the transform and dense-solver cross-checks");
  orc->add_option("--max-n", max_n, "largest grid extent")->capture_default_str();
  orc->add_option("--seed", gf.seed, "random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    apply_threads(sf.threads);
    nlohmann::json config{{"command", app.get_subcommands().front()->get_name()}};

    if (gen->parsed()) {
      const VoxDtype dt = dtype == "f32" ? VoxDtype::F32 : VoxDtype::F64;
      write_vox(make_field(to_spec(gf)), output, dt);
      out << "wrote " << output << "\n";
      return 0;
    }

    if (solve->parsed() || bench->parsed()) {
      const SolveOptions o = to_options(sf);
      const BoundaryConfig bc(parse_axis(sf.axis), sf.p_in, sf.p_out);
      config["solver"] = solver_json(sf);
      RunRecord rec;
      if (!input.empty()) {
        config["input"] = input;
        const OrthotropicField field = read_vox(input).field;
        rec.report = homogenize(field, bc, o);
        rec.grid = field.grid();
      } else {
        const GeneratorSpec spec = to_spec(gf);
        config["medium"] = describe(spec);
        if (spec.kind == GeneratorKind::Smooth) {
          SmoothSolveResult s = solve_smooth(spec.n, o);
          rec.report = std::move(s.report);
          rec.l2_error = s.l2_error;
          rec.grid = GridSpec::cube(spec.n);
        } else {
          const OrthotropicField field = make_field(spec);
          rec.report = homogenize(field, bc, o);
          rec.grid = field.grid();
        }
      }
      rec.config = config;
      rec.boundary = bc;
      rec.rtol = o.rtol;
      if (bench->parsed()) {
        const double per_iter =
            rec.report.iterations > 0 ? rec.report.exec_seconds / rec.report.iterations : 0.0;
        out << "prep_seconds,exec_seconds,iterations,seconds_per_iteration\n"
            << fmt(rec.report.prep_seconds) << "," << fmt(rec.report.exec_seconds) << ","
            << rec.report.iterations << "," << fmt(per_iter) << "\n";
      } else {
        if (!report_path.empty()) write_text_file(report_path, to_json(rec).dump(2) + "\n");
        if (!history_path.empty()) write_text_file(history_path, history_csv(rec.report));
        out << "kappa_eff=" << (rec.report.kappa_eff ? fmt(*rec.report.kappa_eff) : "n/a");
        if (rec.l2_error) out << " l2_error=" << fmt(*rec.l2_error);
        out << " iterations=" << rec.report.iterations
            << " converged=" << (rec.report.converged ? "true" : "false") << "\n";
      }
      if (!rec.report.converged) {
        err << "etc: solver did not converge within " << o.max_iter << " iterations\n";
        return 1;
      }
      return 0;
    }

    ExperimentPlan plan;
    plan.generator = to_spec(gf);
    plan.axis = parse_axis(sf.axis);
    plan.p_in = sf.p_in;
    plan.p_out = sf.p_out;
    plan.output_dir = output;

    if (conv->parsed()) {
      plan.base = to_options(sf);
      plan.rtols = {sf.rtol};
      plan.validate();
      const auto rows = run_convergence_study(plan, ns);
      const std::string csv = convergence_csv(rows);
      if (output.empty()) out << csv;
      else write_text_file(output, csv);
      for (const auto& r : rows)
        if (!r.converged) return 1;
      return 0;
    }

    if (cmp->parsed()) {
      plan.base = to_options(sf);
      plan.rtols = {sf.rtol};
      plan.validate();
      std::vector<SolveOptions> settings;
      for (const auto& p : preconds) {
        SolveOptions o = plan.base;
        o.precond = parse_preconditioner(p);
        settings.push_back(o);
      }
      const auto runs = compare_preconditioners(plan, settings);
      if (!output.empty()) ensure_dir(output);
      std::string summary = "precond,iterations,converged,kappa_eff\n";
      for (const auto& r : runs) {
        summary += r.label + "," + std::to_string(r.report.iterations) + "," +
                   (r.report.converged ? "1" : "0") + "," + fmt(*r.report.kappa_eff) + "\n";
        if (!output.empty())
          write_text_file(join(output, "history_" + r.label + ".csv"), history_csv(r.report));
      }
      if (!output.empty()) write_text_file(join(output, "summary.csv"), summary);
      out << summary;
      return 0;
    }

    if (chan->parsed()) {
      plan.generator.kind = GeneratorKind::Channels;
      plan.base = to_options(sf);
      plan.rtols = {sf.rtol};
      plan.validate();
      std::vector<RefMode> modes;
      for (const auto& m : refs) modes.push_back(parse_ref_mode(m));
      const auto runs = channels_study(plan, psis, modes);
      const std::string summary = channels_summary_csv(runs);
      if (!output.empty()) {
        ensure_dir(output);
        for (const auto& r : runs)
          write_text_file(join(output, "history_psi" + fmt(r.psi) + "_" + to_string(r.mode) + ".csv"),
                          history_csv(r.report));
        write_text_file(join(output, "summary.csv"), summary);
      }
      out << summary;
      return 0;
    }

    if (prec->parsed()) {
      sf.rtol = rtols.empty() ? sf.rtol : rtols.front();
      plan.base = to_options(sf);
      plan.rtols = rtols;
      plan.validate();
      const std::string csv = precision_csv(precision_study(plan));
      if (output.empty()) out << csv;
      else write_text_file(output, csv);
      return 0;
    }

    if (orc->parsed()) {
      bool ok = true;
      for (const auto& r : run_oracles(max_n, gf.seed)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " cases=" << r.cases
            << " worst=" << fmt(r.worst) << " tol=" << fmt(r.tolerance) << "\n";
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
    return 2;
  } catch (const ConfigError& e) {
    err << "etc: " << e.what() << "\n";
    return 2;
  } catch (const ContractError& e) {
    err << "etc: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "etc: " << e.what() << "\n";
    return 3;
  } catch (const VoxParseError& e) {
    err << "etc: " << e.what() << "\n";
    return 3;
  } catch (const SolverBreakdown& e) {
    err << "etc: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace etc

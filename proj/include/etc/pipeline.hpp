#pragma once

#include "etc/grid.hpp"
#include "etc/krylov.hpp"
#include "etc/preconditioner.hpp"
#include "etc/tpfa.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace etc {

/// Transposes the field so that `axis` becomes z: X swaps x<->z, Y swaps y<->z, Z is the
/// identity. Conductivity components and edge lengths move with their axes, so applying
/// the same permutation twice returns the original field.
OrthotropicField axis_permute(const OrthotropicField& field, Axis axis);

struct SolveOptions {
  double rtol = 1e-5;
  int max_iter = kDefaultMaxIter;
  PreconditionerKind precond = PreconditionerKind::Fct;
  double omega = 1.0;
  RefMode ref_mode = RefMode::Opt;
  Precision precision = Precision::F64;
};

std::string preconditioner_label(const SolveOptions& options);

struct HomogenizeResult {
  SolveReport report;
  /// Solution in the permuted frame (Dirichlet axis along z), widened to double.
  CellVector<double> solution;
  std::vector<double> outflow;  // +z flux per Gamma_out face
  std::vector<double> inflow;   // outward-normal flux per Gamma_in face
};

/// Permute, assemble, choose reference constants, solve, reconstruct the outflow and
/// evaluate the effective conductivity along boundary.axis. Throws SolverBreakdown on
/// loss of positivity.
HomogenizeResult homogenize_full(const OrthotropicField& field, const BoundaryConfig& boundary,
                                 const SolveOptions& options);

SolveReport homogenize(const OrthotropicField& field, const BoundaryConfig& boundary,
                       const SolveOptions& options);

struct SmoothSolveResult {
  SolveReport report;
  double l2_error = 0.0;
};

/// Manufactured smooth problem with its exact potential as Dirichlet data and the matching
/// source term.
SmoothSolveResult solve_smooth(Index n, const SolveOptions& options);

// ---- reports ---------------------------------------------------------------------------

struct RunRecord {
  nlohmann::json config;
  GridSpec grid;
  BoundaryConfig boundary;
  double rtol = 0.0;
  SolveReport report;
  std::optional<double> l2_error;
};

/// Report JSON. Timing fields are omitted when include_timings is false.
nlohmann::json to_json(const RunRecord& record, bool include_timings = true);

/// Checks the report schema; returns an empty string when valid, else the first problem.
std::string validate_report_json(const nlohmann::json& j);

/// `iter,relres` with one row per entry of the residual history, starting at iteration 0.
std::string history_csv(const SolveReport& report);

void write_text_file(const std::string& path, const std::string& text);

// ---- experiment runners ------------------------------------------------------------------

enum class GeneratorKind { Smooth, CenterBall, RandomBalls, Channels };
GeneratorKind parse_generator(std::string_view s);
const char* to_string(GeneratorKind g);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::CenterBall;
  Index n = 64;
  double kappa_inc = 10.0;
  // random balls; `preset` ("a", "b", "c") overrides count/radii/seed when non-empty
  std::string preset;
  Index count = 40;
  double r_min = 0.08, r_max = 0.14;
  std::uint64_t seed = 1;
  // channels; n is cells_per_period * periods
  double psi = 1.0;
  Index periods = 8;

  Index cells_per_period() const { return n / periods; }
};

OrthotropicField make_field(const GeneratorSpec& spec);
nlohmann::json describe(const GeneratorSpec& spec);

struct ExperimentPlan {
  GeneratorSpec generator;
  Axis axis = Axis::Z;
  double p_in = 1.0, p_out = 0.0;
  std::vector<double> rtols{1e-5};
  SolveOptions base;  // preconditioner, ref mode, precision, max_iter
  std::string output_dir;

  /// Throws ConfigError unless rtols is non-empty with values in (0,1) and p_in != p_out.
  void validate() const;
};

struct ConvergenceRow {
  Index n;
  Index dof;
  std::optional<double> l2_error;
  double kappa_eff;
  int iterations;
  bool converged;
  double prep_seconds, exec_seconds;
};

/// Solves the plan's generator at every resolution in `ns` with the first rtol.
std::vector<ConvergenceRow> run_convergence_study(const ExperimentPlan& plan,
                                                  const std::vector<Index>& ns);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

struct LabeledRun {
  std::string label;
  SolveReport report;
};

/// One solve per preconditioner setting at the plan's first rtol.
std::vector<LabeledRun> compare_preconditioners(const ExperimentPlan& plan,
                                                const std::vector<SolveOptions>& settings);

struct PrecisionRow {
  Precision precision;
  double rtol;
  double kappa_eff;
  double relative_difference;  // against the f64, rtol = 1e-9 baseline
  int iterations;
  bool converged;
  double prep_seconds, exec_seconds;
};

/// f64 baseline at rtol 1e-9, then every plan rtol in f32 and in f64.
std::vector<PrecisionRow> precision_study(const ExperimentPlan& plan);
std::string precision_csv(const std::vector<PrecisionRow>& rows);

struct ChannelsRun {
  double psi;
  RefMode mode;
  SolveReport report;
};

/// Channels medium per psi, solved with each reference mode at the plan's first rtol.
std::vector<ChannelsRun> channels_study(const ExperimentPlan& plan, const std::vector<double>& psis,
                                        const std::vector<RefMode>& modes);
std::string channels_summary_csv(const std::vector<ChannelsRun>& runs);

}  // namespace etc

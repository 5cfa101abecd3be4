#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "etc/cli.hpp"
#include "etc/grid.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace etc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "etc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("etc_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

nlohmann::json without_timings(nlohmann::json j) {
  j.erase("prep_seconds");
  j.erase("exec_seconds");
  return j;
}

}  // namespace

TEST_CASE("help lists every flag") {
  const Run r = run({"--help-all"});
  CHECK(r.code == 0);
  for (const char* flag : {"--axis", "--p-in", "--p-out", "--rtol", "--max-iter", "--precond", "--omega", "--ref",
                           "--precision", "--report", "--history", "--threads", "--config", "--n", "--kappa-inc",
                           "--count", "--r-min", "--r-max", "--psi", "--periods", "--seed", "-o", "--max-n"})
    CHECK_MESSAGE(r.out.find(std::string(flag) + " ") != std::string::npos, flag);
  for (const char* sub : {"generate", "solve", "convergence", "compare", "channels", "precision", "bench", "oracle"})
    CHECK(r.out.find(sub) != std::string::npos);
}

TEST_CASE("solve help matches the golden file") {
  const Run r = run({"solve", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out == slurp(fs::path(ETC_TEST_DATA_DIR) / "solve_help.txt"));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"solve", "--bogus"}).code == 2);
  CHECK(run({"solve", "--precond", "icc"}).code == 2);
  CHECK(run({"solve", "--rtol", "2"}).code == 2);
  CHECK(run({"solve", "--n", "1"}).code == 2);
  const Run eq = run({"solve", "--config", "center-ball", "--n", "8", "--p-in", "1", "--p-out", "1"});
  CHECK(eq.code == 2);
  CHECK(eq.err.find("p_in != p_out") != std::string::npos);
}

TEST_CASE("I/O errors exit with 3") {
  const fs::path d = scratch_dir("io");
  CHECK(run({"solve", (d / "missing.vox").string()}).code == 3);
  std::ofstream(d / "junk.vox") << "not a voxel file";
  const Run r = run({"solve", (d / "junk.vox").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("byte 0") != std::string::npos);
  CHECK(run({"generate", "--n", "4", "-o", (d / "no" / "such" / "dir.vox").string()}).code == 3);
}

TEST_CASE("non-convergence exits with 1") {
  const Run r = run({"solve", "--config", "center-ball", "--n", "8", "--kappa-inc", "100", "--precond", "none",
                     "--max-iter", "3", "--rtol", "1e-9"});
  CHECK(r.code == 1);
  CHECK(r.out.find("converged=false") != std::string::npos);
}

TEST_CASE("generate then solve writes a valid report, deterministically") {
  const fs::path d = scratch_dir("solve");
  const std::string vox = (d / "rve.vox").string();
  REQUIRE(run({"generate", "--config", "random-balls", "--n", "16", "--count", "12", "--seed", "3", "--kappa-inc",
               "20", "-o", vox})
              .code == 0);
  auto solve = [&](const std::string& tag) {
    const std::string rep = (d / ("r" + tag + ".json")).string();
    const std::string hist = (d / ("h" + tag + ".csv")).string();
    const Run r = run({"solve", vox, "--axis", "x", "--p-in", "1", "--p-out", "0", "--rtol", "1e-5", "--precond",
                       "fct", "--ref", "opt", "--report", rep, "--history", hist});
    CHECK(r.code == 0);
    return std::make_pair(nlohmann::json::parse(slurp(rep)), slurp(hist));
  };
  const auto [j1, h1] = solve("1");
  const auto [j2, h2] = solve("2");
  CHECK(j1["boundary"]["axis"] == "x");
  CHECK(j1["converged"] == true);
  CHECK(j1["iterations"].get<int>() > 0);
  CHECK(without_timings(j1) == without_timings(j2));
  CHECK(h1 == h2);
  CHECK(h1.rfind("iter,relres\n0,1\n", 0) == 0);
}

TEST_CASE("smooth solve reports the L2 error") {
  const fs::path d = scratch_dir("smooth");
  const std::string rep = (d / "s.json").string();
  const Run r = run({"solve", "--config", "smooth", "--n", "8", "--rtol", "1e-9", "--report", rep});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(rep));
  CHECK(j["l2_error"].get<double>() > 0.0);
  CHECK(j["kappa_eff"].is_null());
}

TEST_CASE("study subcommands") {
  const fs::path d = scratch_dir("studies");
  const Run conv = run({"convergence", "--config", "center-ball", "--n", "8", "--n", "16", "--rtol", "1e-6"});
  CHECK(conv.code == 0);
  CHECK(conv.out.rfind("n,dof,", 0) == 0);

  const Run cmp = run({"compare", "--config", "center-ball", "--n", "8", "--precond", "fct", "--precond", "ssor",
                       "--omega", "1.5", "-o", (d / "cmp").string()});
  CHECK(cmp.code == 0);
  CHECK(fs::exists(d / "cmp" / "history_fct-opt.csv"));
  CHECK(fs::exists(d / "cmp" / "history_ssor-1.5.csv"));
  CHECK(fs::exists(d / "cmp" / "summary.csv"));

  const Run ch = run({"channels", "--n", "16", "--periods", "2", "--psi", "1", "--psi", "2", "-o", (d / "ch").string()});
  CHECK(ch.code == 0);
  CHECK(fs::exists(d / "ch" / "history_psi2_one.csv"));

  const Run pr = run({"precision", "--config", "center-ball", "--n", "8", "--rtol", "1e-5", "--rtol", "1e-6"});
  CHECK(pr.code == 0);
  CHECK(pr.out.find("f32,1.0000000000000001e-05") != std::string::npos);

  const Run bench = run({"bench", "--config", "center-ball", "--n", "8", "--threads", "1"});
  CHECK(bench.code == 0);
  CHECK(bench.out.rfind("prep_seconds,exec_seconds", 0) == 0);
}

TEST_CASE("oracle subcommand") {
  const Run r = run({"oracle", "--max-n", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(run({"oracle", "--max-n", "40"}).code == 2);
}

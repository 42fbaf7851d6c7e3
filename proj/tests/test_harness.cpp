#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "epiproc/gridfn.hpp"
#include "epiproc/harness.hpp"
#include "json.hpp"

using namespace epiproc;
using namespace epiproc::harness;

namespace {

std::string scratch_path(const std::string& name) {
  return "harness_scratch_" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

struct CmdResult {
  int exit_code;
  std::string output;
};

/// Run the CLI binary with the given arguments, capturing stdout+stderr.
CmdResult run_cli(const std::string& args) {
  const std::string cmd = std::string(EPIPROC_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) output += buf;
  const int status = pclose(pipe);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, output};
}

void write_step_grids(const std::string& f_path, const std::string& g_path) {
  const gridfn::GridDomain line({0.0}, {1.0}, {11});
  std::vector<double> f_vals(11, 0.0), g_vals(11, 0.0);
  for (std::size_t i = 0; i < 11; ++i) {
    const double x = line.coordinate(0, i);
    f_vals[i] = (x >= 0.5) ? 1.0 : 0.0;
    g_vals[i] = (x >= 0.6) ? 1.0 : 0.0;
  }
  gridfn::write_csv_file(gridfn::GridFunction(line, f_vals), f_path);
  gridfn::write_csv_file(gridfn::GridFunction(line, g_vals), g_path);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("experiment names round trip") {
  for (Experiment e :
       {Experiment::hypi_dist, Experiment::sim_copula, Experiment::bootstrap_band,
        Experiment::gof_power, Experiment::sim_taildep,
        Experiment::sim_regression}) {
    CHECK(experiment_from_name(experiment_name(e)) == e);
  }
  CHECK_THROWS_AS(experiment_from_name("sim_nonsense"), std::invalid_argument);
}

TEST_CASE("unknown parameters are rejected with the experiment named") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::sim_taildep;
  cfg.parameters["bogus"] = "1";
  try {
    run(cfg);
    FAIL("expected an unknown-parameter error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("sim_taildep") != std::string::npos);
  }
}

TEST_CASE("manifest echoes resolved defaults and reps 0 writes only a header") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::sim_taildep;
  cfg.reps = 0;
  cfg.seed = 5;
  cfg.threads = 1;
  cfg.out_path = scratch_path("taildep_empty.csv");
  const RunManifest m = run(cfg);
  CHECK(m.resolved.parameters.at("model") == "max");
  CHECK(m.resolved.parameters.at("n") == "100000");
  CHECK(m.resolved.parameters.at("T") == "3");
  CHECK(m.resolved_threads == 1);
  CHECK(m.first_replicate_seeds.size() == 4);
  CHECK(slurp(cfg.out_path) == "rep,statistic,value\n");

  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(cfg.out_path + ".manifest.json"));
  CHECK(manifest.at("experiment") == "sim_taildep");
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("parameters").at("model") == "max");
  CHECK(manifest.at("first_replicate_seeds").size() == 4);
}

TEST_CASE("replicated runs are seed deterministic and thread invariant") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::sim_copula;
  cfg.parameters["n"] = "60";
  cfg.parameters["grid"] = "5";
  cfg.parameters["napprox"] = "100";
  cfg.reps = 4;
  cfg.seed = 77;
  cfg.threads = 1;
  cfg.out_path = scratch_path("copula_a.csv");
  run(cfg);

  ExperimentConfig again = cfg;
  again.threads = 3;
  again.out_path = scratch_path("copula_b.csv");
  run(again);
  CHECK(slurp(cfg.out_path) == slurp(again.out_path));

  ExperimentConfig third = cfg;
  third.out_path = scratch_path("copula_c.csv");
  run(third);
  CHECK(slurp(cfg.out_path) == slurp(third.out_path));

  // 3 statistics per replicate plus the header.
  CHECK(line_count(slurp(cfg.out_path)) == 1 + 3 * 4);
}

TEST_CASE("distance experiment reports through the stdout line") {
  const std::string f_path = scratch_path("step_f.csv");
  const std::string g_path = scratch_path("step_g.csv");
  write_step_grids(f_path, g_path);
  ExperimentConfig cfg;
  cfg.experiment = Experiment::hypi_dist;
  cfg.parameters["f"] = f_path;
  cfg.parameters["g"] = g_path;
  cfg.parameters["ylow"] = "-0.5";
  cfg.parameters["yhigh"] = "1.5";
  cfg.out_path = scratch_path("dist.csv");
  const RunManifest m = run(cfg);
  CHECK(m.stdout_line.rfind("d_hypi=", 0) == 0);
  CHECK(m.stdout_line.find(" d_sup=1 ") != std::string::npos);
  CHECK(line_count(slurp(cfg.out_path)) == 1 + 4);
}

TEST_CASE("mismatched grids in the distance experiment are an error") {
  const gridfn::GridDomain a({0.0}, {1.0}, {11});
  const gridfn::GridDomain b({0.0}, {1.0}, {21});
  const std::string f_path = scratch_path("grid_a.csv");
  const std::string g_path = scratch_path("grid_b.csv");
  gridfn::write_csv_file(
      gridfn::GridFunction(a, std::vector<double>(11, 0.0)), f_path);
  gridfn::write_csv_file(
      gridfn::GridFunction(b, std::vector<double>(21, 0.0)), g_path);
  ExperimentConfig cfg;
  cfg.experiment = Experiment::hypi_dist;
  cfg.parameters["f"] = f_path;
  cfg.parameters["g"] = g_path;
  cfg.parameters["ylow"] = "-1";
  cfg.parameters["yhigh"] = "2";
  CHECK_THROWS_AS(run(cfg), std::invalid_argument);
}

TEST_CASE("band coverage mode emits per-replicate coverage rows") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::bootstrap_band;
  cfg.parameters["n"] = "40";
  cfg.parameters["M"] = "60";
  cfg.parameters["grid"] = "5";
  cfg.parameters["level"] = "0.9";
  cfg.parameters["coverage-reps"] = "2";
  cfg.reps = 2;
  cfg.threads = 1;
  cfg.seed = 3;
  cfg.out_path = scratch_path("band.csv");
  run(cfg);
  const std::string text = slurp(cfg.out_path);
  CHECK(line_count(text) == 1 + 2 * 2);
  CHECK(text.find("covered") != std::string::npos);
  CHECK(text.find("band_halfwidth") != std::string::npos);
}

TEST_CASE("power experiment uses the wide table header") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::gof_power;
  cfg.parameters["n"] = "30";
  cfg.parameters["deltas"] = "0";
  cfg.parameters["level"] = "1";
  cfg.parameters["grid"] = "5";
  cfg.reps = 0;
  cfg.out_path = scratch_path("power_empty.csv");
  run(cfg);
  CHECK(slurp(cfg.out_path) == "delta,reject_rate_T,reject_rate_S,mc_se\n");

  cfg.reps = 500;
  cfg.parameters["null-reps"] = "500";
  cfg.threads = 1;
  cfg.out_path = scratch_path("power_level1.csv");
  run(cfg);
  CHECK(slurp(cfg.out_path) ==
        "delta,reject_rate_T,reject_rate_S,mc_se\n0,1,1,0\n");
}

TEST_CASE("regression trajectory mode writes one profile") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::sim_regression;
  cfg.parameters["n"] = "500";
  cfg.parameters["grid"] = "9";
  cfg.parameters["zmax"] = "5";
  cfg.parameters["trajectory"] = "1";
  cfg.reps = 7;  // ignored in trajectory mode
  cfg.threads = 1;
  cfg.out_path = scratch_path("traj.csv");
  run(cfg);
  const std::string text = slurp(cfg.out_path);
  CHECK(line_count(text) == 1 + 9 + 2);
  CHECK(text.find("proc_at_-inf") != std::string::npos);
  CHECK(text.find("proc_at_+inf") != std::string::npos);
}

TEST_CASE("config files reproduce flag-based runs byte for byte") {
  ExperimentConfig direct;
  direct.experiment = Experiment::sim_taildep;
  direct.parameters["n"] = "300";
  direct.parameters["k"] = "10";
  direct.parameters["grid"] = "4";
  direct.parameters["T"] = "2";
  direct.reps = 3;
  direct.seed = 21;
  direct.threads = 1;
  direct.out_path = scratch_path("taildep_direct.csv");
  run(direct);

  const std::string cfg_path = scratch_path("taildep.json");
  {
    std::ofstream out(cfg_path);
    out << R"({"experiment": "sim_taildep",
               "parameters": {"n": 300, "k": 10, "grid": 4, "T": 2},
               "reps": 3, "seed": 21, "threads": 1,
               "out": ")" << scratch_path("taildep_config.csv") << R"("})";
  }
  const ExperimentConfig loaded = load_config_file(cfg_path);
  CHECK(loaded.experiment == Experiment::sim_taildep);
  CHECK(loaded.parameters.at("n") == "300");
  run(loaded);
  CHECK(slurp(direct.out_path) == slurp(scratch_path("taildep_config.csv")));
}

TEST_CASE("config files reject unknown top-level keys") {
  const std::string cfg_path = scratch_path("bad.json");
  {
    std::ofstream out(cfg_path);
    out << R"({"experiment": "sim_copula", "repz": 3})";
  }
  CHECK_THROWS_AS(load_config_file(cfg_path), std::invalid_argument);
  CHECK_THROWS_AS(load_config_file("no_such_config.json"), std::runtime_error);
}

TEST_CASE("cli distance command prints the summary line") {
  const std::string f_path = scratch_path("cli_f.csv");
  const std::string g_path = scratch_path("cli_g.csv");
  write_step_grids(f_path, g_path);
  const CmdResult r = run_cli("hypi dist --f " + f_path + " --g " + g_path +
                              " --ylow -0.5 --yhigh 1.5");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("d_hypi=") != std::string::npos);
  CHECK(r.output.find("d_sup=1") != std::string::npos);
}

TEST_CASE("cli simulation command writes the csv") {
  const std::string out = scratch_path("cli_taildep.csv");
  const CmdResult r =
      run_cli("sim taildep --n 200 --k 10 --grid 4 --T 2 --reps 2 --seed 9 "
              "--threads 1 --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(line_count(slurp(out)) == 1 + 2 * 5);
}

TEST_CASE("cli rejects bad inputs with an error line") {
  const CmdResult bad_model = run_cli("sim taildep --model pyramid --reps 1");
  CHECK(bad_model.exit_code != 0);
  CHECK(bad_model.output.find("error:") != std::string::npos);

  const CmdResult bad_flag = run_cli("sim taildep --bogus 1");
  CHECK(bad_flag.exit_code != 0);
}

TEST_CASE("cli loads config files") {
  const std::string cfg_path = scratch_path("cli_cfg.json");
  const std::string out = scratch_path("cli_cfg_out.csv");
  {
    std::ofstream f(cfg_path);
    f << R"({"experiment": "sim_taildep",
             "parameters": {"n": 200, "k": 10, "grid": 4, "T": 2},
             "reps": 2, "seed": 9, "threads": 1, "out": ")" << out << R"("})";
  }
  const CmdResult r = run_cli("--config " + cfg_path);
  CHECK(r.exit_code == 0);
  CHECK(line_count(slurp(out)) == 1 + 2 * 5);
}

}  // TEST_SUITE

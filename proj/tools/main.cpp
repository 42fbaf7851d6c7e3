#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "epiproc/harness.hpp"

namespace {

/// Flags shared by every experiment leaf.
struct CommonFlags {
  std::uint64_t seed = 0;
  std::size_t reps = 100;
  std::size_t threads = 0;
  std::string out;
};

void add_common_flags(CLI::App* leaf, CommonFlags& flags) {
  leaf->add_option("--seed", flags.seed, "Master RNG seed (default 0)");
  leaf->add_option("--reps", flags.reps, "Number of replicates");
  leaf->add_option("--threads", flags.threads,
                   "Worker threads (0 = all hardware threads)");
  leaf->add_option("--out", flags.out,
                   "Output CSV path; <out>.manifest.json is written next to it");
}

struct ParamFlag {
  const char* key;
  const char* help;
  bool required = false;
};

/// Bind --<key> options that record only the values the user actually set;
/// defaults are resolved (and echoed into the manifest) by the harness.
void add_param_flags(CLI::App* leaf,
                     std::map<std::string, std::string>& store,
                     const std::vector<ParamFlag>& flags) {
  for (const auto& flag : flags) {
    const std::string key = flag.key;
    auto* opt = leaf->add_option_function<std::string>(
        "--" + key,
        [&store, key](const std::string& value) { store[key] = value; },
        flag.help);
    if (flag.required) opt->required();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulation harness for function-space process experiments: "
      "epigraph/hypograph distances, empirical copula processes with "
      "bootstrap bands and power curves, tail dependence estimation, and "
      "residual empirical processes."};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "Run one experiment described by a JSON config file "
                 "(same schema as the flags)");

  std::optional<epiproc::harness::ExperimentConfig> selected;
  auto make_leaf_callback = [&selected](epiproc::harness::Experiment experiment,
                                        std::map<std::string, std::string>* params,
                                        CommonFlags* common) {
    return [&selected, experiment, params, common]() {
      epiproc::harness::ExperimentConfig cfg;
      cfg.experiment = experiment;
      cfg.parameters = *params;
      cfg.seed = common->seed;
      cfg.reps = common->reps;
      cfg.threads = common->threads;
      cfg.out_path = common->out;
      selected = std::move(cfg);
    };
  };

  // hypi dist
  CLI::App* hypi = app.add_subcommand("hypi", "Grid-function distances");
  hypi->require_subcommand(1);
  CLI::App* dist = hypi->add_subcommand(
      "dist",
      "Print the epigraph/hypograph distance plus sup, L1 and L2 distances "
      "between two grid functions");
  std::map<std::string, std::string> dist_params;
  CommonFlags dist_common;
  add_param_flags(dist, dist_params,
                  {{"f", "First grid function (CSV)", true},
                   {"g", "Second grid function (CSV)", true},
                   {"ylow", "Lower edge of the value window", true},
                   {"yhigh", "Upper edge of the value window", true},
                   {"ypoints", "Window resolution (default 201)"},
                   {"radius", "Hull radius in cells (default 1)"},
                   {"backend", "Set-distance backend: dt or brute (default dt)"}});
  add_common_flags(dist, dist_common);
  dist->callback(make_leaf_callback(epiproc::harness::Experiment::hypi_dist,
                                    &dist_params, &dist_common));

  // sim {copula, taildep, regression}
  CLI::App* sim = app.add_subcommand("sim", "Monte Carlo process experiments");
  sim->require_subcommand(1);

  CLI::App* sim_copula = sim->add_subcommand(
      "copula",
      "Empirical copula process replicates: pointwise value, hull gap, and "
      "distance to a simulated limit draw");
  std::map<std::string, std::string> copula_params;
  CommonFlags copula_common;
  add_param_flags(
      sim_copula, copula_params,
      {{"model", "Copula model: indep or mixture (default mixture)"},
       {"lambda", "Mixture weight on comonotonicity (default 0.5)"},
       {"n", "Sample size per replicate (default 1000)"},
       {"grid", "Grid points per axis on [0,1]^2 (default 41)"},
       {"napprox", "Latent sample size behind each limit draw (default 2000)"},
       {"ylow", "Lower edge of the process value window (default -4)"},
       {"yhigh", "Upper edge of the process value window (default 4)"},
       {"ypoints", "Value window resolution (default 321)"}});
  add_common_flags(sim_copula, copula_common);
  sim_copula->callback(make_leaf_callback(
      epiproc::harness::Experiment::sim_copula, &copula_params, &copula_common));

  CLI::App* sim_taildep = sim->add_subcommand(
      "taildep",
      "Rank-based tail dependence estimator replicates: corner estimates, "
      "process extremes, and hull gaps");
  std::map<std::string, std::string> taildep_params;
  CommonFlags taildep_common;
  add_param_flags(
      sim_taildep, taildep_params,
      {{"model", "Tail model: max or indep (default max)"},
       {"n", "Sample size per replicate (default 100000)"},
       {"k", "Tail sample size (0 = floor(n^0.4), the default)"},
       {"T", "Upper edge of the evaluation box [0,T]^2 (default 3)"},
       {"grid", "Grid points per axis (default 31)"}});
  add_common_flags(sim_taildep, taildep_common);
  sim_taildep->callback(make_leaf_callback(
      epiproc::harness::Experiment::sim_taildep, &taildep_params,
      &taildep_common));

  CLI::App* sim_regression = sim->add_subcommand(
      "regression",
      "Residual empirical process replicates under a two-sided exponential "
      "error law with a density jump at zero");
  std::map<std::string, std::string> regression_params;
  CommonFlags regression_common;
  add_param_flags(
      sim_regression, regression_params,
      {{"theta-minus", "Scale of the negative error branch (default 1)"},
       {"theta-plus", "Scale of the positive error branch (default 4)"},
       {"n", "Sample size per replicate (default 100000)"},
       {"zmax", "Half-width of the z grid [-zmax, zmax] (default 10)"},
       {"grid", "Number of z grid points (default 201)"},
       {"window",
        "Half-width of the windows around the density jump and a continuity "
        "point (default 0.02)"}});
  sim_regression->add_flag_function(
      "--trajectory",
      [&regression_params](std::int64_t) {
        regression_params["trajectory"] = "1";
      },
      "Emit one residual-process path instead of replicate statistics");
  add_common_flags(sim_regression, regression_common);
  sim_regression->callback(make_leaf_callback(
      epiproc::harness::Experiment::sim_regression, &regression_params,
      &regression_common));

  // bootstrap band
  CLI::App* bootstrap =
      app.add_subcommand("bootstrap", "Resampled copula processes");
  bootstrap->require_subcommand(1);
  CLI::App* band = bootstrap->add_subcommand(
      "band",
      "Sup-norm confidence bands for the copula from weighted bootstrap "
      "replicates, with an optional coverage experiment");
  std::map<std::string, std::string> band_params;
  CommonFlags band_common;
  add_param_flags(
      band, band_params,
      {{"model", "Copula model: indep or mixture (default indep)"},
       {"lambda", "Mixture weight on comonotonicity (default 0.5)"},
       {"n", "Sample size per replicate (default 500)"},
       {"M", "Bootstrap draws per replicate (default 300)"},
       {"level", "Band confidence level (default 0.95)"},
       {"flavor", "Weight law: multiplier or multinomial (default multiplier)"},
       {"grid", "Grid points per axis on [0,1]^2 (default 41)"},
       {"coverage-reps",
        "When > 0, run that many coverage replicates instead of band "
        "summaries"}});
  add_common_flags(band, band_common);
  band->callback(make_leaf_callback(epiproc::harness::Experiment::bootstrap_band,
                                    &band_params, &band_common));

  // gof power
  CLI::App* gof = app.add_subcommand("gof", "Independence tests");
  gof->require_subcommand(1);
  CLI::App* power = gof->add_subcommand(
      "power",
      "Monte Carlo power of the quadratic and sup statistics against local "
      "departures from independence");
  std::map<std::string, std::string> power_params;
  CommonFlags power_common;
  power_common.reps = 1000;  // power needs real replicate counts to mean much
  add_param_flags(
      power, power_params,
      {{"n", "Sample size per replicate (default 400)"},
       {"deltas", "Comma-separated local departures (default 0,1,2,3,4)"},
       {"level", "Test level (default 0.05)"},
       {"grid", "Grid points per axis on [0,1]^2 (default 41)"},
       {"null-reps", "Null calibration replicates (default 2x reps)"}});
  add_common_flags(power, power_common);
  power->callback(make_leaf_callback(epiproc::harness::Experiment::gof_power,
                                     &power_params, &power_common));

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      if (selected.has_value()) {
        throw std::invalid_argument(
            "--config cannot be combined with a subcommand");
      }
      selected = epiproc::harness::load_config_file(config_path);
    }
    if (!selected.has_value()) {
      std::cout << app.help();
      return 0;
    }
    const epiproc::harness::RunManifest manifest =
        epiproc::harness::run(*selected);
    if (!manifest.stdout_line.empty()) {
      std::cout << manifest.stdout_line << "\n";
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}

#include "epiproc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "epiproc/copula.hpp"
#include "epiproc/gof.hpp"
#include "epiproc/gridfn.hpp"
#include "epiproc/hypi.hpp"
#include "epiproc/matrix.hpp"
#include "epiproc/parallel.hpp"
#include "epiproc/regress.hpp"
#include "epiproc/resample.hpp"
#include "epiproc/rng.hpp"
#include "epiproc/taildep.hpp"

namespace epiproc::harness {

namespace {

constexpr const char* kVersion = "0.1.0";

/// One long-format output record.
struct Row {
  std::size_t rep = 0;
  std::string statistic;
  double value = 0.0;
};

/// What an experiment hands back to the orchestrator.
struct RunOutput {
  std::vector<Row> rows;
  std::vector<gof::PowerRow> power_table;  // gof_power only
  std::string csv_header = "rep,statistic,value";
  std::string stdout_line;
  std::string seed_derivation;
};

struct ParamSpec {
  const char* key;
  const char* fallback;  // nullptr marks a required parameter
};

const std::vector<ParamSpec>& schema_for(Experiment e) {
  static const std::vector<ParamSpec> hypi_dist = {
      {"f", nullptr},      {"g", nullptr},    {"ylow", nullptr},
      {"yhigh", nullptr},  {"ypoints", "201"}, {"radius", "1"},
      {"backend", "dt"}};
  static const std::vector<ParamSpec> sim_copula = {
      {"model", "mixture"}, {"lambda", "0.5"}, {"n", "1000"},
      {"grid", "41"},       {"napprox", "2000"}, {"ylow", "-4"},
      {"yhigh", "4"},       {"ypoints", "321"}};
  static const std::vector<ParamSpec> bootstrap_band = {
      {"model", "indep"},     {"lambda", "0.5"}, {"n", "500"},
      {"M", "300"},           {"level", "0.95"}, {"flavor", "multiplier"},
      {"grid", "41"},         {"coverage-reps", "0"}};
  static const std::vector<ParamSpec> gof_power = {
      {"n", "400"},  {"deltas", "0,1,2,3,4"}, {"level", "0.05"},
      {"grid", "41"}, {"null-reps", "0"}};
  static const std::vector<ParamSpec> sim_taildep = {
      {"model", "max"}, {"n", "100000"}, {"k", "0"}, {"T", "3"}, {"grid", "31"}};
  static const std::vector<ParamSpec> sim_regression = {
      {"theta-minus", "1"}, {"theta-plus", "4"}, {"n", "100000"},
      {"zmax", "10"},       {"grid", "201"},     {"window", "0.02"},
      {"trajectory", "0"}};
  switch (e) {
    case Experiment::hypi_dist: return hypi_dist;
    case Experiment::sim_copula: return sim_copula;
    case Experiment::bootstrap_band: return bootstrap_band;
    case Experiment::gof_power: return gof_power;
    case Experiment::sim_taildep: return sim_taildep;
    case Experiment::sim_regression: return sim_regression;
  }
  throw std::logic_error("harness: unreachable experiment enum");
}

std::map<std::string, std::string> resolve_parameters(
    Experiment e, const std::map<std::string, std::string>& given) {
  const auto& schema = schema_for(e);
  for (const auto& [key, value] : given) {
    (void)value;
    const bool known =
        std::any_of(schema.begin(), schema.end(),
                    [&](const ParamSpec& s) { return key == s.key; });
    if (!known) {
      throw std::invalid_argument("harness: unknown parameter '" + key +
                                  "' for experiment '" + experiment_name(e) +
                                  "'");
    }
  }
  std::map<std::string, std::string> resolved;
  for (const auto& spec : schema) {
    const auto it = given.find(spec.key);
    if (it != given.end()) {
      resolved[spec.key] = it->second;
    } else if (spec.fallback != nullptr) {
      resolved[spec.key] = spec.fallback;
    } else {
      throw std::invalid_argument("harness: experiment '" + experiment_name(e) +
                                  "' requires parameter '" + spec.key + "'");
    }
  }
  return resolved;
}

const std::string& param_raw(const ExperimentConfig& cfg,
                             const std::string& key) {
  const auto it = cfg.parameters.find(key);
  if (it == cfg.parameters.end()) {
    throw std::logic_error("harness: parameter '" + key +
                           "' missing after resolution");
  }
  return it->second;
}

double param_double(const ExperimentConfig& cfg, const std::string& key) {
  const std::string& text = param_raw(cfg, key);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw std::invalid_argument("harness: parameter '" + key +
                                "' expects a finite number, got '" + text +
                                "'");
  }
  return v;
}

std::size_t param_size(const ExperimentConfig& cfg, const std::string& key) {
  const std::string& text = param_raw(cfg, key);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || text.find('-') != std::string::npos) {
    throw std::invalid_argument("harness: parameter '" + key +
                                "' expects a nonnegative integer, got '" +
                                text + "'");
  }
  return static_cast<std::size_t>(v);
}

bool param_flag(const ExperimentConfig& cfg, const std::string& key) {
  const std::string& text = param_raw(cfg, key);
  if (text == "0" || text == "false") return false;
  if (text == "1" || text == "true") return true;
  throw std::invalid_argument("harness: parameter '" + key +
                              "' expects 0 or 1, got '" + text + "'");
}

std::vector<double> param_double_list(const ExperimentConfig& cfg,
                                      const std::string& key) {
  const std::string& text = param_raw(cfg, key);
  std::vector<double> out;
  std::stringstream stream(text);
  std::string piece;
  while (std::getline(stream, piece, ',')) {
    char* end = nullptr;
    const double v = std::strtod(piece.c_str(), &end);
    if (end == piece.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw std::invalid_argument("harness: parameter '" + key +
                                  "' expects comma-separated numbers, got '" +
                                  text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw std::invalid_argument("harness: parameter '" + key +
                                "' must list at least one number");
  }
  return out;
}

copula::CopulaModel copula_from_params(const ExperimentConfig& cfg) {
  const std::string& name = param_raw(cfg, "model");
  if (name == "indep") return copula::independence_copula(2);
  if (name == "mixture") return copula::mixture_copula(param_double(cfg, "lambda"));
  throw std::invalid_argument(
      "harness: copula model must be 'indep' or 'mixture', got '" + name + "'");
}

/// Largest pointwise gap between the radius-1 usc and lsc hulls of f; a
/// replicate-level smoothness summary of the realized process.
double hull_gap(const gridfn::GridFunction& f) {
  const gridfn::GridFunction upper = gridfn::usc_hull(f, 1);
  const gridfn::GridFunction lower = gridfn::lsc_hull(f, 1);
  double gap = 0.0;
  for (std::size_t i = 0; i < upper.values().size(); ++i) {
    gap = std::max(gap, upper[i] - lower[i]);
  }
  return gap;
}

double sup_abs(const gridfn::GridFunction& f) {
  return std::max(std::fabs(f.min_value()), std::fabs(f.max_value()));
}

std::string format_coordinate(double z) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6g", z);
  return std::string(buffer);
}

/// Flatten per-replicate row blocks in replicate order.
std::vector<Row> flatten(std::vector<std::vector<Row>> blocks) {
  std::vector<Row> rows;
  for (auto& block : blocks) {
    rows.insert(rows.end(), std::make_move_iterator(block.begin()),
                std::make_move_iterator(block.end()));
  }
  return rows;
}

RunOutput run_hypi_dist(const ExperimentConfig& cfg) {
  const gridfn::GridFunction f = gridfn::read_csv_file(param_raw(cfg, "f"));
  const gridfn::GridFunction g = gridfn::read_csv_file(param_raw(cfg, "g"));
  if (f.domain() != g.domain()) {
    throw std::invalid_argument("hypi dist: f and g live on different grids");
  }
  const std::string& backend_name = param_raw(cfg, "backend");
  hypi::HausdorffBackend backend;
  if (backend_name == "brute") {
    backend = hypi::HausdorffBackend::brute_force;
  } else if (backend_name == "dt") {
    backend = hypi::HausdorffBackend::distance_transform;
  } else {
    throw std::invalid_argument(
        "hypi dist: backend must be 'brute' or 'dt', got '" + backend_name +
        "'");
  }
  const hypi::HypiConfig hypi_cfg(param_double(cfg, "ylow"),
                                  param_double(cfg, "yhigh"),
                                  param_size(cfg, "ypoints"),
                                  param_size(cfg, "radius"), backend);
  const double d_hypi = hypi::hypi_distance(f, g, hypi_cfg);
  const double d_sup = gridfn::sup_distance(f, g);
  const double d_l1 = gridfn::lp_distance(f, g, 1.0);
  const double d_l2 = gridfn::lp_distance(f, g, 2.0);

  RunOutput out;
  out.rows = {{0, "d_hypi", d_hypi},
              {0, "d_sup", d_sup},
              {0, "d_l1", d_l1},
              {0, "d_l2", d_l2}};
  out.stdout_line = "d_hypi=" + gridfn::format_double(d_hypi) +
                    " d_sup=" + gridfn::format_double(d_sup) +
                    " d_l1=" + gridfn::format_double(d_l1) +
                    " d_l2=" + gridfn::format_double(d_l2);
  out.seed_derivation = "deterministic; no random draws";
  return out;
}

RunOutput run_sim_copula(const ExperimentConfig& cfg) {
  const copula::CopulaModel model = copula_from_params(cfg);
  const std::size_t n = param_size(cfg, "n");
  const std::size_t grid_points = param_size(cfg, "grid");
  const std::size_t n_approx = param_size(cfg, "napprox");
  const hypi::HypiConfig hypi_cfg(param_double(cfg, "ylow"),
                                  param_double(cfg, "yhigh"),
                                  param_size(cfg, "ypoints"));
  const gridfn::GridDomain grid = gridfn::unit_cube_domain(2, grid_points);
  const std::vector<double> center = {0.5, 0.5};
  const double truth_at_center = model.eval(center);
  const double root_n = std::sqrt(static_cast<double>(n));

  auto replicate = [&](std::size_t r) {
    rng::Rng rng(rng::split_seed(cfg.seed, r));
    const Matrix raw = model.sample(n, rng);
    const copula::PseudoSample s = copula::pseudo_observations(raw);
    const gridfn::GridFunction proc =
        copula::empirical_copula_process(s, model, grid);
    const double at_center =
        root_n * (copula::empirical_copula(s, center) - truth_at_center);
    const copula::LimitDraw limit =
        copula::simulate_limit(model, grid, n_approx, rng);
    const double d = hypi::hypi_distance(proc, limit.realization, hypi_cfg);
    return std::vector<Row>{{r, "proc_at_0.5_0.5", at_center},
                            {r, "gap", hull_gap(proc)},
                            {r, "dhypi_to_limit_draw", d}};
  };

  RunOutput out;
  out.rows = flatten(parallel::map_indexed<std::vector<Row>>(
      cfg.reps, cfg.threads, replicate));
  out.seed_derivation =
      "replicate r draws data then one limit realization from "
      "Rng(split_seed(seed, r))";
  return out;
}

RunOutput run_bootstrap_band(const ExperimentConfig& cfg) {
  const copula::CopulaModel model = copula_from_params(cfg);
  const std::size_t n = param_size(cfg, "n");
  const std::size_t m_count = param_size(cfg, "M");
  const double level = param_double(cfg, "level");
  const std::size_t grid_points = param_size(cfg, "grid");
  const std::size_t coverage_reps = param_size(cfg, "coverage-reps");
  const std::string& flavor = param_raw(cfg, "flavor");
  if (flavor != "multiplier" && flavor != "multinomial") {
    throw std::invalid_argument(
        "bootstrap band: flavor must be 'multiplier' or 'multinomial', got '" +
        flavor + "'");
  }
  const gridfn::GridDomain grid = gridfn::unit_cube_domain(2, grid_points);
  const double root_n = std::sqrt(static_cast<double>(n));

  // Truth on the grid, needed only by the coverage experiment.
  std::vector<double> truth;
  if (coverage_reps > 0) {
    truth.resize(grid.total_points());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto multi = grid.unflatten(i);
      std::vector<double> u(grid.dim());
      for (std::size_t j = 0; j < grid.dim(); ++j) {
        u[j] = grid.coordinate(j, multi[j]);
      }
      truth[i] = model.eval(u);
    }
  }

  auto replicate = [&](std::size_t r) {
    rng::Rng rng(rng::split_seed(cfg.seed, r));
    const Matrix raw = model.sample(n, rng);
    const resample::BootstrapDraws draws =
        flavor == "multiplier"
            ? resample::multiplier_bootstrap(raw, grid, m_count, rng)
            : resample::multinomial_bootstrap(raw, grid, m_count, rng);
    const double b = resample::confidence_band(draws, level);
    std::vector<Row> rows;
    if (coverage_reps > 0) {
      double worst = 0.0;
      for (std::size_t i = 0; i < truth.size(); ++i) {
        worst = std::max(worst, std::fabs(draws.base_process[i] - truth[i]));
      }
      rows.push_back({r, "covered", worst <= b / root_n ? 1.0 : 0.0});
    } else {
      rows.push_back({r, "critical_value", b});
    }
    rows.push_back({r, "band_halfwidth", b / root_n});
    return rows;
  };

  const std::size_t outer = coverage_reps > 0 ? coverage_reps : cfg.reps;
  RunOutput out;
  out.rows = flatten(
      parallel::map_indexed<std::vector<Row>>(outer, cfg.threads, replicate));
  out.seed_derivation =
      "replicate r draws data then all bootstrap weights from "
      "Rng(split_seed(seed, r))";
  return out;
}

RunOutput run_gof_power(const ExperimentConfig& cfg) {
  const std::size_t n = param_size(cfg, "n");
  const std::vector<double> deltas = param_double_list(cfg, "deltas");
  const double level = param_double(cfg, "level");
  const std::size_t grid_points = param_size(cfg, "grid");
  std::size_t null_reps = param_size(cfg, "null-reps");
  if (null_reps == 0) null_reps = 2 * cfg.reps;
  const gridfn::GridDomain grid = gridfn::unit_cube_domain(2, grid_points);

  RunOutput out;
  out.csv_header = "delta,reject_rate_T,reject_rate_S,mc_se";
  out.seed_derivation =
      "null replicate r uses split_seed(seed, r); replicate r at deltas[i] "
      "uses split_seed(seed, null_reps + i*reps + r)";
  if (cfg.reps == 0) return out;
  out.power_table = gof::power_curve(deltas, n, grid, level, cfg.reps,
                                     null_reps, cfg.seed, cfg.threads);
  return out;
}

RunOutput run_sim_taildep(const ExperimentConfig& cfg) {
  const std::string& name = param_raw(cfg, "model");
  taildep::TailModel model;
  if (name == "max") {
    model = taildep::tail_model_max();
  } else if (name == "indep") {
    model = taildep::tail_model_indep();
  } else {
    throw std::invalid_argument(
        "harness: tail model must be 'max' or 'indep', got '" + name + "'");
  }
  const std::size_t n = param_size(cfg, "n");
  std::size_t k = param_size(cfg, "k");
  if (k == 0) k = static_cast<std::size_t>(std::floor(std::pow(
                   static_cast<double>(n), 0.4)));
  const double t_max = param_double(cfg, "T");
  const std::size_t grid_points = param_size(cfg, "grid");
  const gridfn::GridDomain grid({0.0, 0.0}, {t_max, t_max},
                                {grid_points, grid_points});
  const double root_k = std::sqrt(static_cast<double>(k));
  const std::vector<double> corner = {1.0, 1.0};
  const std::vector<double> off_diag = {0.5, 1.5};

  auto replicate = [&](std::size_t r) {
    rng::Rng rng(rng::split_seed(cfg.seed, r));
    const Matrix raw = model.sample(n, rng);
    const gridfn::GridFunction proc =
        taildep::estimator_process(raw, model, k, grid);
    const double lhat_corner = taildep::stable_tail_estimator(raw, k, corner);
    const double proc_corner = root_k * (lhat_corner - model.L(corner));
    const double proc_off =
        root_k *
        (taildep::stable_tail_estimator(raw, k, off_diag) - model.L(off_diag));
    return std::vector<Row>{{r, "lhat_at_1_1", lhat_corner},
                            {r, "proc_at_1_1", proc_corner},
                            {r, "proc_at_0.5_1.5", proc_off},
                            {r, "sup_abs_proc", sup_abs(proc)},
                            {r, "gap", hull_gap(proc)}};
  };

  RunOutput out;
  out.rows = flatten(parallel::map_indexed<std::vector<Row>>(
      cfg.reps, cfg.threads, replicate));
  out.seed_derivation = "replicate r uses Rng(split_seed(seed, r))";
  return out;
}

RunOutput run_sim_regression(const ExperimentConfig& cfg) {
  const regress::MixedExponential model = regress::mixed_exponential(
      param_double(cfg, "theta-minus"), param_double(cfg, "theta-plus"));
  const std::size_t n = param_size(cfg, "n");
  const double z_max = param_double(cfg, "zmax");
  const std::size_t grid_points = param_size(cfg, "grid");
  const double h = param_double(cfg, "window");
  const bool trajectory = param_flag(cfg, "trajectory");
  const regress::XDesign design = regress::gaussian_design(1);
  const gridfn::GridDomain z_grid({-z_max}, {z_max}, {grid_points});
  const auto true_cdf = [&model](double z) { return model.cdf(z); };
  const double root_n = std::sqrt(static_cast<double>(n));

  // One replicate under the null model beta = 0: simulate, fit, and hand
  // back the fitted-residual sample plus the process on the z grid.
  auto simulate_fit = [&](std::size_t r) {
    rng::Rng rng(rng::split_seed(cfg.seed, r));
    Matrix x = design.sample(n, rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = model.sample(rng);
    const regress::RegressionSample s(std::move(x), std::move(y));
    const regress::OlsFit fit = regress::ols_fit(s);
    std::vector<double> sorted = regress::residuals(s, fit.beta_hat);
    std::sort(sorted.begin(), sorted.end());
    regress::ExtendedProcess proc =
        regress::residual_process(s, fit.beta_hat, true_cdf, z_grid);
    return std::make_pair(std::move(sorted), std::move(proc));
  };

  RunOutput out;
  if (trajectory) {
    // Emit a single fitted-residual process path for plotting.
    const auto [sorted, proc] = simulate_fit(0);
    (void)sorted;
    out.rows.push_back({0, "proc_at_-inf", proc.neg_inf_value});
    for (std::size_t i = 0; i < z_grid.shape()[0]; ++i) {
      out.rows.push_back(
          {0, "proc_at_" + format_coordinate(z_grid.coordinate(0, i)),
           proc.interior[i]});
    }
    out.rows.push_back({0, "proc_at_+inf", proc.pos_inf_value});
    out.seed_derivation = "single path from Rng(split_seed(seed, 0))";
    return out;
  }

  auto replicate = [&](std::size_t r) {
    const auto [sorted, proc] = simulate_fit(r);
    const auto near_zero = regress::window_extremum(sorted, true_cdf, -h, h);
    const auto near_half =
        regress::window_extremum(sorted, true_cdf, 0.5 - h, 0.5 + h);
    const auto magnitude = [root_n](const std::pair<double, double>& ext) {
      return root_n * std::max(std::fabs(ext.first), std::fabs(ext.second));
    };
    return std::vector<Row>{
        {r, "max_abs_near_0", magnitude(near_zero)},
        {r, "min_near_0", root_n * near_zero.first},
        {r, "max_abs_near_half", magnitude(near_half)},
        {r, "min_near_half", root_n * near_half.first},
        {r, "sup_abs", sup_abs(proc.interior)}};
  };

  out.rows = flatten(parallel::map_indexed<std::vector<Row>>(
      cfg.reps, cfg.threads, replicate));
  out.seed_derivation =
      "replicate r draws the design then the errors from "
      "Rng(split_seed(seed, r))";
  return out;
}

RunOutput dispatch(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::hypi_dist: return run_hypi_dist(cfg);
    case Experiment::sim_copula: return run_sim_copula(cfg);
    case Experiment::bootstrap_band: return run_bootstrap_band(cfg);
    case Experiment::gof_power: return run_gof_power(cfg);
    case Experiment::sim_taildep: return run_sim_taildep(cfg);
    case Experiment::sim_regression: return run_sim_regression(cfg);
  }
  throw std::logic_error("harness: unreachable experiment enum");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("harness: cannot open output file '" + path +
                             "'");
  }
  return file;
}

void write_csv(const std::string& path, const RunOutput& out) {
  std::ofstream file = open_output(path);
  file << out.csv_header << "\n";
  for (const auto& row : out.power_table) {
    file << gridfn::format_double(row.delta) << ","
         << gridfn::format_double(row.reject_rate_T) << ","
         << gridfn::format_double(row.reject_rate_S) << ","
         << gridfn::format_double(row.mc_se) << "\n";
  }
  for (const auto& row : out.rows) {
    file << row.rep << "," << row.statistic << ","
         << gridfn::format_double(row.value) << "\n";
  }
  if (!file) {
    throw std::runtime_error("harness: failed writing output file '" + path +
                             "'");
  }
}

void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["experiment"] = experiment_name(m.resolved.experiment);
  j["parameters"] = m.resolved.parameters;
  j["seed"] = m.resolved.seed;
  j["reps"] = m.resolved.reps;
  j["threads"] = m.resolved.threads;
  j["resolved_threads"] = m.resolved_threads;
  j["out"] = m.resolved.out_path;
  j["version"] = m.version;
  j["wall_seconds"] = m.wall_seconds;
  j["seed_derivation"] = m.seed_derivation;
  j["first_replicate_seeds"] = m.first_replicate_seeds;
  if (!m.stdout_line.empty()) j["stdout_line"] = m.stdout_line;
  std::ofstream file = open_output(path);
  file << j.dump(2) << "\n";
  if (!file) {
    throw std::runtime_error("harness: failed writing manifest file '" + path +
                             "'");
  }
}

}  // namespace

Experiment experiment_from_name(const std::string& name) {
  if (name == "hypi_dist") return Experiment::hypi_dist;
  if (name == "sim_copula") return Experiment::sim_copula;
  if (name == "bootstrap_band") return Experiment::bootstrap_band;
  if (name == "gof_power") return Experiment::gof_power;
  if (name == "sim_taildep") return Experiment::sim_taildep;
  if (name == "sim_regression") return Experiment::sim_regression;
  throw std::invalid_argument("harness: unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::hypi_dist: return "hypi_dist";
    case Experiment::sim_copula: return "sim_copula";
    case Experiment::bootstrap_band: return "bootstrap_band";
    case Experiment::gof_power: return "gof_power";
    case Experiment::sim_taildep: return "sim_taildep";
    case Experiment::sim_regression: return "sim_regression";
  }
  throw std::logic_error("harness: unreachable experiment enum");
}

RunManifest run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig resolved = config;
  resolved.parameters =
      resolve_parameters(config.experiment, config.parameters);

  const RunOutput out = dispatch(resolved);

  RunManifest manifest;
  manifest.resolved = resolved;
  manifest.resolved_threads = parallel::resolve_threads(resolved.threads);
  manifest.version = kVersion;
  manifest.seed_derivation = out.seed_derivation;
  manifest.stdout_line = out.stdout_line;
  if (resolved.experiment != Experiment::hypi_dist) {
    for (std::uint64_t r = 0; r < 4; ++r) {
      manifest.first_replicate_seeds.push_back(
          rng::split_seed(resolved.seed, r));
    }
  }
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  if (!resolved.out_path.empty()) {
    write_csv(resolved.out_path, out);
    write_manifest(resolved.out_path + ".manifest.json", manifest);
  }
  return manifest;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("config: cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(file);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::invalid_argument("config: " + path + ": " + err.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: " + path +
                                ": top level must be a JSON object");
  }
  static const std::vector<std::string> known = {
      "experiment", "parameters", "seed", "reps", "threads", "out"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!j.contains("experiment") || !j["experiment"].is_string()) {
    throw std::invalid_argument(
        "config: 'experiment' must be present and a string");
  }
  ExperimentConfig cfg;
  cfg.experiment = experiment_from_name(j["experiment"].get<std::string>());
  if (j.contains("parameters")) {
    if (!j["parameters"].is_object()) {
      throw std::invalid_argument("config: 'parameters' must be an object");
    }
    for (const auto& [key, value] : j["parameters"].items()) {
      if (value.is_string()) {
        cfg.parameters[key] = value.get<std::string>();
      } else if (value.is_number() || value.is_boolean()) {
        cfg.parameters[key] = value.dump();
      } else {
        throw std::invalid_argument("config: parameter '" + key +
                                    "' must be a string, number, or boolean");
      }
    }
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("reps")) cfg.reps = j["reps"].get<std::size_t>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<std::size_t>();
  if (j.contains("out")) cfg.out_path = j["out"].get<std::string>();
  return cfg;
}

}  // namespace epiproc::harness

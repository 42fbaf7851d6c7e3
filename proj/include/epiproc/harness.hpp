#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace epiproc::harness {

enum class Experiment {
  hypi_dist,
  sim_copula,
  bootstrap_band,
  gof_power,
  sim_taildep,
  sim_regression,
};

Experiment experiment_from_name(const std::string& name);
std::string experiment_name(Experiment e);

/// One experiment invocation. `parameters` holds the experiment-specific
/// flags as raw strings keyed by their long flag names; they are validated
/// against the experiment's schema (unknown keys are errors, missing ones
/// take documented defaults) before any work starts.
struct ExperimentConfig {
  Experiment experiment = Experiment::sim_copula;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::size_t reps = 100;
  std::size_t threads = 0;  // 0 = all hardware threads
  std::string out_path;     // empty = no files written
};

/// Echo of a completed run: the fully resolved configuration (every default
/// filled in), plus enough provenance to reproduce each number. Written as
/// JSON next to the output CSV as `<out>.manifest.json`.
struct RunManifest {
  ExperimentConfig resolved;
  std::size_t resolved_threads = 1;
  std::string version;
  double wall_seconds = 0.0;
  std::string seed_derivation;
  std::vector<std::uint64_t> first_replicate_seeds;
  /// Single-line summary for experiments that report to stdout
  /// (the distance printer); empty otherwise.
  std::string stdout_line;
};

/// Validate, dispatch to the experiment, write the CSV and manifest files
/// when an output path is set, and return the manifest. reps = 0 writes a
/// header-only CSV. Throws std::invalid_argument / std::runtime_error with
/// one-line messages on bad configs or I/O failures.
RunManifest run(const ExperimentConfig& config);

/// Load a config from a JSON file with the same schema as the CLI flags:
/// {"experiment": ..., "parameters": {...}, "seed": ..., "reps": ...,
///  "threads": ..., "out": ...}. Unknown top-level keys are errors.
ExperimentConfig load_config_file(const std::string& path);

}  // namespace epiproc::harness

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "io.hpp"
#include "solvers.hpp"

namespace ttr {

/// Stream tags for deriving the independent sub-seeds of one problem
/// instance from its master seed. Keeping X* and the corruption on their
/// own streams means no measurement row shares randomness with them.
struct ProblemSeeds {
  std::uint64_t ensemble;
  std::uint64_t xstar;
  std::uint64_t support;
  std::uint64_t value;
};
ProblemSeeds problem_seeds(std::uint64_t master_seed);

struct ProblemConfig {
  std::vector<Index> dims;
  std::vector<Index> ranks;
  Index m = 0;
  std::uint64_t master_seed = 0;
  double p_s = 0.0;
  double outlier_sigma2 = 10.0;
  bool has_support_seed = false;
  bool has_value_seed = false;
  std::uint64_t support_seed = 0;
  std::uint64_t value_seed = 0;
  std::string storage = "auto";
};

ProblemConfig parse_problem_config(const std::string& json_text);

/// Writes problem.json (PRB v1), xstar.ttf and y.bin into out_dir.
ProblemBundle make_problem(const ProblemConfig& config,
                           const std::string& out_dir);

struct RecoverOptions {
  std::string solver = "psubgm";  // psubgm | frsubgm
  double lambda = 0.5;
  double q = 0.9;
  Index iters = 1000;
  std::string init = "truncated";  // truncated | provided
  double alpha = -1.0;             // < 0: use the bundle's p_s
  std::string init_file;
  Index trace_every = 1;
  double target_rel_error = 0.0;
  std::string sigma_bar_mode = "from_init";
  double sigma_bar_override = 0.0;
  bool trace_factor_dist = false;
};

RecoverOptions parse_recover_options(const std::string& json_text);

struct RecoverOutcome {
  SolveResult result;
  double final_recovery_error = 0.0;  // squared relative error
};

/// Loads a bundle, initializes, runs the chosen solver and writes
/// result.ttf plus trace.csv into out_dir.
RecoverOutcome recover(const std::string& bundle_path,
                       const RecoverOptions& options,
                       const std::string& out_dir);

struct ExperimentSpec {
  std::vector<Index> orders{3};
  std::vector<Index> dims{4};
  std::vector<Index> ranks{2};
  std::vector<Index> measurements{1000};
  std::vector<double> outlier_fractions{0.3};
  std::vector<double> lambdas{0.5};
  std::vector<double> qs{0.9};
  std::vector<std::string> solvers{"psubgm"};
  Index trials = 20;
  double success_threshold = 1e-5;  // on squared relative error
  Index max_iters = 1000;
  Index trace_every = 10;
  double init_alpha = -1.0;  // < 0: match the cell's p_s
  double outlier_sigma2 = 10.0;
  std::uint64_t master_seed = 1;
};

ExperimentSpec parse_experiment_spec(const std::string& json_text);
nlohmann::json experiment_spec_to_json(const ExperimentSpec& spec);

struct CellParams {
  Index index = 0;
  Index order = 3;
  Index dim = 4;
  Index rank = 2;
  Index m = 1000;
  double p_s = 0.3;
  double lambda = 0.5;
  double q = 0.9;
  std::string solver = "psubgm";
};

std::vector<CellParams> enumerate_cells(const ExperimentSpec& spec);

struct TrialResult {
  double final_rel_error = 0.0;
  double final_sq_error = 0.0;
  bool success = false;
  bool aborted = false;
  std::vector<TraceRecord> trace;
};

TrialResult run_trial(const CellParams& cell, const ExperimentSpec& spec,
                      Index trial);

/// Runs the sweep, one seeded problem per (cell, trial); per-cell mean
/// traces land as CSV next to summary.json. Completed cells recorded in
/// manifest.json are skipped on rerun; a manifest that cannot be read or
/// belongs to a different spec refuses to resume. max_cells > 0 limits how
/// many cells run in this call (used to exercise resuming).
nlohmann::json run_experiment(const ExperimentSpec& spec,
                              const std::string& out_dir,
                              Index max_cells = -1);

/// Probe report wrapping rip_probe and sharpness_probe.
nlohmann::json rip_check(const std::string& config_json);

/// Renders rel_error traces (log-y line chart) and success-rate grids from
/// a results directory into SVG files under out_dir.
void render_plots(const std::string& results_dir, const std::string& out_dir);

}  // namespace ttr

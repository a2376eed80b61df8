#include "harness.hpp"

#include "errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>

#include "analysis.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;

namespace ttr {

namespace {

constexpr const char* kManifestFormat = "TTRX1";

void read_shape(const nlohmann::json& j, std::vector<Index>& dims,
                std::vector<Index>& ranks) {
  if (j.contains("dims")) {
    dims = j.at("dims").get<std::vector<Index>>();
    ranks = j.at("ranks").get<std::vector<Index>>();
  } else {
    const Index n = j.at("N").get<Index>();
    const Index d = j.at("d").get<Index>();
    const Index r = j.at("r").get<Index>();
    dims.assign(n, d);
    ranks.assign(n - 1, r);
  }
  validate_ranks(dims, ranks);
}

SigmaBarMode parse_sigma_bar_mode(const std::string& name) {
  if (name == "from_init") return SigmaBarMode::FromInit;
  if (name == "true_value") return SigmaBarMode::TrueValue;
  if (name == "override") return SigmaBarMode::UserOverride;
  throw ConfigError("unknown sigma_bar_mode: " + name);
}

DenseTensor load_ground_truth(const fs::path& file) {
  if (file.extension() == ".ttf") return read_ttf(file.string()).to_dense();
  return read_dtf(file.string());
}

std::string cell_trace_name(Index index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cell_%04lld_trace.csv",
                static_cast<long long>(index));
  return buf;
}

nlohmann::json cell_params_json(const CellParams& c) {
  nlohmann::json j;
  j["index"] = c.index;
  j["N"] = c.order;
  j["d"] = c.dim;
  j["r"] = c.rank;
  j["m"] = c.m;
  j["p_s"] = c.p_s;
  j["lambda"] = c.lambda;
  j["q"] = c.q;
  j["solver"] = c.solver;
  return j;
}

}  // namespace

ProblemSeeds problem_seeds(std::uint64_t master_seed) {
  return ProblemSeeds{derive_seed(master_seed, 1), derive_seed(master_seed, 2),
                      derive_seed(master_seed, 3), derive_seed(master_seed, 4)};
}

ProblemConfig parse_problem_config(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  ProblemConfig c;
  read_shape(j, c.dims, c.ranks);
  c.m = j.at("m").get<Index>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.p_s = j.value("p_s", 0.0);
  c.outlier_sigma2 = j.value("outlier_sigma2", 10.0);
  if (j.contains("support_seed")) {
    c.has_support_seed = true;
    c.support_seed = j.at("support_seed").get<std::uint64_t>();
  }
  if (j.contains("value_seed")) {
    c.has_value_seed = true;
    c.value_seed = j.at("value_seed").get<std::uint64_t>();
  }
  c.storage = j.value("storage", "auto");
  parse_storage(c.storage);
  return c;
}

ProblemBundle make_problem(const ProblemConfig& config,
                           const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ProblemSeeds seeds = problem_seeds(config.master_seed);

  ProblemBundle bundle;
  bundle.dims = config.dims;
  bundle.ranks = config.ranks;
  bundle.m = config.m;
  bundle.master_seed = config.master_seed;
  bundle.p_s = config.p_s;
  bundle.outlier_sigma2 = config.outlier_sigma2;
  bundle.support_seed =
      config.has_support_seed ? config.support_seed : seeds.support;
  bundle.value_seed = config.has_value_seed ? config.value_seed : seeds.value;
  bundle.xstar_file = "xstar.ttf";
  bundle.y_file = "y.bin";
  bundle.storage = config.storage;

  const TTTensor xstar = random_tt(config.dims, config.ranks, seeds.xstar);
  const DenseTensor xdense = xstar.to_dense();
  const GaussianEnsemble a(config.m, config.dims, seeds.ensemble,
                           parse_storage(config.storage));
  CorruptionModel model;
  model.p_s = config.p_s;
  model.outlier_sigma2 = config.outlier_sigma2;
  model.support_seed = bundle.support_seed;
  model.value_seed = bundle.value_seed;
  const Measurements meas = corrupt(a.apply(xdense), model);

  const fs::path dir(out_dir);
  write_ttf((dir / bundle.xstar_file).string(), xstar);
  write_doubles((dir / bundle.y_file).string(), meas.y);
  write_bundle((dir / "problem.json").string(), bundle);
  return bundle;
}

RecoverOptions parse_recover_options(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  RecoverOptions o;
  o.solver = j.value("solver", o.solver);
  o.lambda = j.value("lambda", o.lambda);
  o.q = j.value("q", o.q);
  o.iters = j.value("iters", o.iters);
  o.init = j.value("init", o.init);
  o.alpha = j.value("alpha", o.alpha);
  o.init_file = j.value("init_file", o.init_file);
  o.trace_every = j.value("trace_every", o.trace_every);
  o.target_rel_error = j.value("target_rel_error", o.target_rel_error);
  o.sigma_bar_mode = j.value("sigma_bar_mode", o.sigma_bar_mode);
  o.sigma_bar_override = j.value("sigma_bar_override", o.sigma_bar_override);
  o.trace_factor_dist = j.value("trace_factor_dist", o.trace_factor_dist);
  return o;
}

RecoverOutcome recover(const std::string& bundle_path,
                       const RecoverOptions& options,
                       const std::string& out_dir) {
  if (options.solver != "psubgm" && options.solver != "frsubgm")
    throw ConfigError("unknown solver: " + options.solver);
  const ProblemBundle bundle = read_bundle(bundle_path);
  const fs::path base = fs::path(bundle_path).parent_path();

  const DenseTensor xstar = load_ground_truth(base / bundle.xstar_file);
  const Eigen::VectorXd y = read_doubles((base / bundle.y_file).string());
  if (y.size() != bundle.m)
    throw std::runtime_error("measurement file length disagrees with bundle");

  const ProblemSeeds seeds = problem_seeds(bundle.master_seed);
  const GaussianEnsemble a(bundle.m, bundle.dims, seeds.ensemble,
                           parse_storage(bundle.storage));

  TTTensor init;
  if (options.init == "truncated") {
    const double alpha = options.alpha < 0.0 ? bundle.p_s : options.alpha;
    init = truncated_spectral_init(a, y, bundle.ranks, alpha);
  } else if (options.init == "provided") {
    if (options.init_file.empty())
      throw ConfigError("init=provided needs init_file");
    init = read_ttf(options.init_file);
    if (options.solver == "frsubgm") init = left_orthogonalize(init);
  } else {
    throw ConfigError("unknown init mode: " + options.init);
  }

  SolverConfig cfg;
  cfg.schedule = StepSchedule{options.lambda, options.q};
  cfg.max_iters = options.iters;
  cfg.trace_every = options.trace_every;
  cfg.target_rel_error = options.target_rel_error;
  cfg.sigma_bar_mode = parse_sigma_bar_mode(options.sigma_bar_mode);
  cfg.sigma_bar_override = options.sigma_bar_override;
  cfg.trace_factor_dist = options.trace_factor_dist;

  RecoverOutcome outcome;
  outcome.result =
      options.solver == "psubgm"
          ? psubgm_run(a, y, bundle.ranks, init, cfg, &xstar)
          : frsubgm_run(a, y, bundle.ranks, init, cfg, &xstar);
  outcome.final_recovery_error =
      recovery_error(outcome.result.tt.to_dense(), xstar);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_ttf((dir / "result.ttf").string(), outcome.result.tt);
  write_trace_csv((dir / "trace.csv").string(), outcome.result.trace);
  return outcome;
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  ExperimentSpec s;
  s.orders = j.value("N", s.orders);
  s.dims = j.value("d", s.dims);
  s.ranks = j.value("r", s.ranks);
  s.measurements = j.value("m", s.measurements);
  s.outlier_fractions = j.value("p_s", s.outlier_fractions);
  s.lambdas = j.value("lambda", s.lambdas);
  s.qs = j.value("q", s.qs);
  s.solvers = j.value("solvers", s.solvers);
  s.trials = j.value("trials", s.trials);
  s.success_threshold = j.value("success_threshold", s.success_threshold);
  s.max_iters = j.value("max_iters", s.max_iters);
  s.trace_every = j.value("trace_every", s.trace_every);
  s.init_alpha = j.value("init_alpha", s.init_alpha);
  s.outlier_sigma2 = j.value("outlier_sigma2", s.outlier_sigma2);
  s.master_seed = j.value("master_seed", s.master_seed);
  for (const std::string& solver : s.solvers)
    if (solver != "psubgm" && solver != "frsubgm")
      throw ConfigError("unknown solver: " + solver);
  if (s.trials < 1) throw ConfigError("trials must be >= 1");
  return s;
}

nlohmann::json experiment_spec_to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["N"] = s.orders;
  j["d"] = s.dims;
  j["r"] = s.ranks;
  j["m"] = s.measurements;
  j["p_s"] = s.outlier_fractions;
  j["lambda"] = s.lambdas;
  j["q"] = s.qs;
  j["solvers"] = s.solvers;
  j["trials"] = s.trials;
  j["success_threshold"] = s.success_threshold;
  j["max_iters"] = s.max_iters;
  j["trace_every"] = s.trace_every;
  j["init_alpha"] = s.init_alpha;
  j["outlier_sigma2"] = s.outlier_sigma2;
  j["master_seed"] = s.master_seed;
  return j;
}

std::vector<CellParams> enumerate_cells(const ExperimentSpec& s) {
  std::vector<CellParams> cells;
  Index index = 0;
  for (Index n : s.orders)
    for (Index d : s.dims)
      for (Index r : s.ranks)
        for (Index m : s.measurements)
          for (double p : s.outlier_fractions)
            for (double lambda : s.lambdas)
              for (double q : s.qs)
                for (const std::string& solver : s.solvers) {
                  CellParams c;
                  c.index = index++;
                  c.order = n;
                  c.dim = d;
                  c.rank = r;
                  c.m = m;
                  c.p_s = p;
                  c.lambda = lambda;
                  c.q = q;
                  c.solver = solver;
                  cells.push_back(c);
                }
  return cells;
}

TrialResult run_trial(const CellParams& cell, const ExperimentSpec& spec,
                      Index trial) {
  const std::vector<Index> dims(cell.order, cell.dim);
  const std::vector<Index> ranks(cell.order - 1, cell.rank);
  const std::uint64_t trial_master =
      derive_seed(derive_seed(spec.master_seed, cell.index), trial);
  const ProblemSeeds seeds = problem_seeds(trial_master);

  const DenseTensor xstar = random_tt(dims, ranks, seeds.xstar).to_dense();
  const GaussianEnsemble a(cell.m, dims, seeds.ensemble);
  CorruptionModel model;
  model.p_s = cell.p_s;
  model.outlier_sigma2 = spec.outlier_sigma2;
  model.support_seed = seeds.support;
  model.value_seed = seeds.value;
  const Eigen::VectorXd y = corrupt(a.apply(xstar), model).y;

  const double alpha = spec.init_alpha < 0.0 ? cell.p_s : spec.init_alpha;
  const TTTensor init = truncated_spectral_init(a, y, ranks, alpha);

  SolverConfig cfg;
  cfg.schedule = StepSchedule{cell.lambda, cell.q};
  cfg.max_iters = spec.max_iters;
  cfg.trace_every = spec.trace_every;
  const SolveResult res =
      cell.solver == "psubgm"
          ? psubgm_run(a, y, ranks, init, cfg, &xstar)
          : frsubgm_run(a, y, ranks, init, cfg, &xstar);

  TrialResult out;
  out.aborted = res.status == SolverStatus::Aborted;
  out.final_sq_error = recovery_error(res.tt.to_dense(), xstar);
  out.final_rel_error = std::sqrt(out.final_sq_error);
  out.success = !out.aborted && out.final_sq_error <= spec.success_threshold;
  out.trace = res.trace;
  return out;
}

nlohmann::json run_experiment(const ExperimentSpec& spec,
                              const std::string& out_dir, Index max_cells) {
  fs::create_directories(out_dir);
  const std::vector<CellParams> cells = enumerate_cells(spec);
  const nlohmann::json spec_json = experiment_spec_to_json(spec);
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";

  nlohmann::json manifest;
  if (fs::exists(manifest_path)) {
    try {
      manifest = nlohmann::json::parse(read_text_file(manifest_path.string()));
    } catch (const std::exception&) {
      throw std::runtime_error(
          "refusing to resume: manifest.json cannot be parsed");
    }
    if (manifest.value("format", "") != kManifestFormat ||
        !manifest.contains("cells") || !manifest["cells"].is_object() ||
        manifest.value("spec", nlohmann::json()) != spec_json)
      throw std::runtime_error(
          "refusing to resume: manifest does not match this spec");
  } else {
    manifest = {{"format", kManifestFormat},
                {"spec", spec_json},
                {"cells", nlohmann::json::object()}};
  }

  nlohmann::json timings = nlohmann::json::object();
  Index ran = 0;
  for (const CellParams& cell : cells) {
    const std::string key = std::to_string(cell.index);
    if (manifest["cells"].contains(key)) continue;
    if (max_cells >= 0 && ran >= max_cells) break;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<TrialResult> results(spec.trials);
    parallel_chunks(spec.trials, 1, [&](Index, Index lo, Index hi) {
      for (Index trial = lo; trial < hi; ++trial)
        results[trial] = run_trial(cell, spec, trial);
    });
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    Index successes = 0, aborts = 0;
    double sum_rel = 0.0, sum_sq = 0.0;
    std::size_t rows = results[0].trace.size();
    for (const TrialResult& r : results) {
      successes += r.success ? 1 : 0;
      aborts += r.aborted ? 1 : 0;
      sum_rel += r.final_rel_error;
      sum_sq += r.final_sq_error;
      rows = std::min(rows, r.trace.size());
    }
    std::vector<TraceRecord> mean_trace(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      TraceRecord rec;
      rec.t = results[0].trace[i].t;
      rec.mu = results[0].trace[i].mu;
      double obj = 0.0, rel = 0.0;
      for (const TrialResult& r : results) {
        obj += r.trace[i].objective;
        rel += r.trace[i].rel_error;
      }
      rec.objective = obj / static_cast<double>(spec.trials);
      rec.rel_error = rel / static_cast<double>(spec.trials);
      mean_trace[i] = rec;
    }
    const std::string trace_file = cell_trace_name(cell.index);
    write_trace_csv((fs::path(out_dir) / trace_file).string(), mean_trace);

    nlohmann::json cell_json;
    cell_json["params"] = cell_params_json(cell);
    cell_json["success_rate"] =
        static_cast<double>(successes) / static_cast<double>(spec.trials);
    cell_json["mean_final_rel_error"] =
        sum_rel / static_cast<double>(spec.trials);
    cell_json["mean_final_sq_error"] =
        sum_sq / static_cast<double>(spec.trials);
    cell_json["aborted_trials"] = aborts;
    cell_json["trace_file"] = trace_file;
    manifest["cells"][key] = cell_json;
    write_text_file(manifest_path.string(), manifest.dump(2) + "\n");

    timings[key] = wall;
    ++ran;
  }

  nlohmann::json summary;
  summary["format"] = kManifestFormat;
  summary["spec"] = spec_json;
  summary["cells"] = nlohmann::json::array();
  bool complete = true;
  for (const CellParams& cell : cells) {
    const std::string key = std::to_string(cell.index);
    if (manifest["cells"].contains(key)) {
      summary["cells"].push_back(manifest["cells"][key]);
    } else {
      complete = false;
    }
  }
  summary["complete"] = complete;
  write_text_file((fs::path(out_dir) / "summary.json").string(),
                  summary.dump(2) + "\n");
  if (!timings.empty())
    write_text_file((fs::path(out_dir) / "timings.json").string(),
                    timings.dump(2) + "\n");
  return summary;
}

nlohmann::json rip_check(const std::string& config_json) {
  const nlohmann::json j = nlohmann::json::parse(config_json);
  std::vector<Index> dims, ranks;
  read_shape(j, dims, ranks);
  const Index m = j.at("m").get<Index>();
  const Index trials = j.value("trials", Index(50));
  const std::uint64_t seed = j.value("seed", std::uint64_t(1));

  const GaussianEnsemble a(m, dims, derive_seed(seed, 1));
  const RipProbeResult rip = rip_probe(a, ranks, trials, derive_seed(seed, 5));

  nlohmann::json report;
  report["rip"] = {{"expected", kRipConstant},
                   {"mean", rip.mean},
                   {"min", rip.min},
                   {"max", rip.max},
                   {"mean_deviation", std::abs(rip.mean - kRipConstant)},
                   {"max_abs_deviation", rip.max_abs_deviation},
                   {"m", m},
                   {"trials", trials}};

  if (j.contains("p_s")) {
    const double p_s = j.at("p_s").get<double>();
    const double sigma2 = j.value("outlier_sigma2", 10.0);
    const ProblemSeeds seeds = problem_seeds(seed);
    const DenseTensor xstar = random_tt(dims, ranks, seeds.xstar).to_dense();
    CorruptionModel model{p_s, sigma2, seeds.support, seeds.value};
    const Eigen::VectorXd y = corrupt(a.apply(xstar), model).y;
    const SharpnessProbeResult sharp =
        sharpness_probe(a, y, xstar, ranks, trials, derive_seed(seed, 6));
    const double floor = (1.0 - 2.0 * p_s) * kRipConstant;
    report["sharpness"] = {{"min", sharp.min_ratio},
                           {"mean", sharp.mean_ratio},
                           {"max", sharp.max_ratio},
                           {"p_s", p_s},
                           {"theoretical_floor", floor}};
    if (floor <= 1e-12)
      report["note"] =
          "sharpness floor (1-2p_s)sqrt(2/pi) is nonpositive at p_s = 0.5; "
          "nonpositive minima are expected";
  }
  return report;
}

void render_plots(const std::string& results_dir, const std::string& out_dir) {
  std::vector<fs::path> csvs;
  bool has_summary = false;
  if (!fs::is_directory(results_dir))
    throw std::runtime_error("results directory does not exist: " +
                             results_dir);
  for (const auto& entry : fs::directory_iterator(results_dir)) {
    if (entry.path().extension() == ".csv") csvs.push_back(entry.path());
    if (entry.path().filename() == "summary.json") has_summary = true;
  }
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty() && !has_summary)
    throw std::runtime_error("no traces or summaries in " + results_dir);
  fs::create_directories(out_dir);

  if (!csvs.empty()) {
    std::vector<Series> series;
    for (const fs::path& p : csvs) {
      const std::vector<TraceRecord> trace = read_trace_csv(p.string());
      Series s;
      s.name = p.stem().string();
      bool any_rel = false;
      for (const TraceRecord& r : trace)
        if (!std::isnan(r.rel_error)) any_rel = true;
      for (const TraceRecord& r : trace) {
        const double v = any_rel ? r.rel_error : r.objective;
        if (!std::isnan(v)) s.points.push_back({static_cast<double>(r.t), v});
      }
      if (!s.points.empty()) series.push_back(std::move(s));
    }
    if (!series.empty())
      write_text_file(
          (fs::path(out_dir) / "traces.svg").string(),
          line_chart_svg(series, "relative error vs iteration", "t",
                         "rel_error"));
  }

  if (has_summary) {
    const nlohmann::json summary = nlohmann::json::parse(
        read_text_file((fs::path(results_dir) / "summary.json").string()));
    // success-rate grid per solver over (N, m), averaged over other axes
    std::map<std::string,
             std::map<std::pair<Index, Index>, std::pair<double, Index>>>
        grids;
    for (const auto& cell : summary.at("cells")) {
      const auto& p = cell.at("params");
      const std::string solver = p.at("solver").get<std::string>();
      const std::pair<Index, Index> key{p.at("N").get<Index>(),
                                        p.at("m").get<Index>()};
      auto& slot = grids[solver][key];
      slot.first += cell.at("success_rate").get<double>();
      slot.second += 1;
    }
    for (const auto& [solver, grid] : grids) {
      std::set<Index> ns, ms;
      for (const auto& [key, _] : grid) {
        ns.insert(key.first);
        ms.insert(key.second);
      }
      std::vector<std::string> row_labels, col_labels;
      for (Index n : ns) row_labels.push_back("N=" + std::to_string(n));
      for (Index m : ms) col_labels.push_back("m=" + std::to_string(m));
      std::vector<std::vector<double>> values;
      for (Index n : ns) {
        std::vector<double> row;
        for (Index m : ms) {
          const auto it = grid.find({n, m});
          row.push_back(it == grid.end()
                            ? 0.0
                            : it->second.first /
                                  static_cast<double>(it->second.second));
        }
        values.push_back(std::move(row));
      }
      write_text_file(
          (fs::path(out_dir) / ("success_" + solver + ".svg")).string(),
          heatmap_svg(row_labels, col_labels, values,
                      "success rate (" + solver + ")"));
    }
  }
}

}  // namespace ttr

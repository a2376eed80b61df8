// Command-line front end. Talks to the library exclusively through the
// C API in ttrecover.h; subcommand flags are packed into the JSON option
// strings the library consumes.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttrecover.h"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot read " << path << "\n";
    std::exit(1);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int finish(ttr_status status) {
  if (status == TTR_OK) return 0;
  std::cerr << "error: " << ttr_last_error() << "\n";
  return status == TTR_ERR_SOLVER_ABORT ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust tensor-train recovery from corrupted measurements"};
  app.require_subcommand(1);

  // make-problem
  std::string mp_config, mp_out;
  auto* mp = app.add_subcommand(
      "make-problem", "generate a seeded problem bundle (PRB v1)");
  mp->add_option("config", mp_config, "problem config JSON file")->required();
  mp->add_option("out", mp_out, "output directory")->required();

  // recover
  std::string rc_bundle, rc_out = "recover-out";
  std::string rc_solver = "psubgm", rc_init = "truncated", rc_init_file;
  std::string rc_sigma_mode = "from_init";
  double rc_lambda = 0.5, rc_q = 0.9, rc_alpha = -1.0, rc_target = 0.0;
  double rc_sigma_override = 0.0;
  long long rc_iters = 1000, rc_stride = 1;
  bool rc_factor_dist = false;
  auto* rc = app.add_subcommand("recover",
                                "run a solver on a problem bundle");
  rc->add_option("bundle", rc_bundle, "problem.json path")->required();
  rc->add_option("--solver", rc_solver, "psubgm | frsubgm");
  rc->add_option("--lambda", rc_lambda, "initial step size");
  rc->add_option("--q", rc_q, "geometric step decay");
  rc->add_option("--iters", rc_iters, "iteration count");
  rc->add_option("--init", rc_init, "truncated | provided");
  rc->add_option("--alpha", rc_alpha,
                 "truncation fraction (default: bundle p_s)");
  rc->add_option("--init-file", rc_init_file, "TTF start point for --init provided");
  rc->add_option("--trace-every", rc_stride, "trace stride");
  rc->add_option("--target-rel-error", rc_target, "early-stop threshold");
  rc->add_option("--sigma-bar-mode", rc_sigma_mode,
                 "from_init | true_value | override");
  rc->add_option("--sigma-bar-override", rc_sigma_override,
                 "sigma_bar^2 value for override mode");
  rc->add_flag("--trace-factor-dist", rc_factor_dist,
               "record the rotation-minimized factor distance");
  rc->add_option("--out", rc_out, "output directory");

  // experiment
  std::string ex_spec, ex_out;
  auto* ex = app.add_subcommand("experiment",
                                "run a Monte Carlo sweep (resumable)");
  ex->add_option("spec", ex_spec, "experiment spec JSON file")->required();
  ex->add_option("out", ex_out, "results directory")->required();

  // rip-check
  std::string rip_config, rip_out;
  auto* rip = app.add_subcommand(
      "rip-check", "probe the l1/l2 isometry and sharpness constants");
  rip->add_option("config", rip_config, "probe config JSON file")->required();
  rip->add_option("--out", rip_out, "also write the report JSON here");

  // plot
  std::string pl_results, pl_out;
  auto* pl = app.add_subcommand("plot", "render SVG charts from results");
  pl->add_option("results", pl_results, "results directory")->required();
  pl->add_option("--out", pl_out, "output directory (default: results dir)");

  CLI11_PARSE(app, argc, argv);

  if (mp->parsed())
    return finish(ttr_make_problem(slurp(mp_config).c_str(), mp_out.c_str()));

  if (rc->parsed()) {
    nlohmann::json opts;
    opts["solver"] = rc_solver;
    opts["lambda"] = rc_lambda;
    opts["q"] = rc_q;
    opts["iters"] = rc_iters;
    opts["init"] = rc_init;
    opts["alpha"] = rc_alpha;
    if (!rc_init_file.empty()) opts["init_file"] = rc_init_file;
    opts["trace_every"] = rc_stride;
    opts["target_rel_error"] = rc_target;
    opts["sigma_bar_mode"] = rc_sigma_mode;
    opts["sigma_bar_override"] = rc_sigma_override;
    opts["trace_factor_dist"] = rc_factor_dist;
    return finish(
        ttr_recover(rc_bundle.c_str(), opts.dump().c_str(), rc_out.c_str()));
  }

  if (ex->parsed())
    return finish(
        ttr_run_experiment(slurp(ex_spec).c_str(), ex_out.c_str()));

  if (rip->parsed()) {
    char* report = nullptr;
    const ttr_status status =
        ttr_rip_check(slurp(rip_config).c_str(), &report);
    if (status == TTR_OK && report) {
      std::cout << report << "\n";
      if (!rip_out.empty()) {
        std::ofstream f(rip_out, std::ios::binary);
        f << report << "\n";
      }
    }
    ttr_string_free(report);
    return finish(status);
  }

  if (pl->parsed()) {
    const std::string out = pl_out.empty() ? pl_results : pl_out;
    return finish(ttr_render_plots(pl_results.c_str(), out.c_str()));
  }
  return 1;
}

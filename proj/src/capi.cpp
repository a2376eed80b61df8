// extern "C" surface of the shared library. The C++ core throws; every
// boundary call catches, stores a thread-local message and maps the
// exception onto a status code.

#include "ttrecover.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "sensing.hpp"
#include "solvers.hpp"
#include "tensor.hpp"
#include "tt.hpp"

struct ttr_dense {
  ttr::DenseTensor v;
};
struct ttr_tt {
  ttr::TTTensor v;
};
struct ttr_ensemble {
  ttr::GaussianEnsemble v;
};
struct ttr_trace {
  std::vector<ttr::TraceRecord> v;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* what) { g_last_error = what ? what : ""; }

template <class Fn>
ttr_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ttr::StructureError& e) {
    set_error(e.what());
    return TTR_ERR_STRUCTURE;
  } catch (const ttr::ConfigError& e) {
    set_error(e.what());
    return TTR_ERR_CONFIG;
  } catch (const ttr::IOError& e) {
    set_error(e.what());
    return TTR_ERR_IO;
  } catch (const nlohmann::json::exception& e) {
    set_error(e.what());
    return TTR_ERR_CONFIG;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return TTR_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc& e) {
    set_error(e.what());
    return TTR_ERR_RUNTIME;
  } catch (const std::exception& e) {
    set_error(e.what());
    return TTR_ERR_RUNTIME;
  }
}

ttr_status require(bool cond, const char* message) {
  if (cond) return TTR_OK;
  set_error(message);
  return TTR_ERR_INVALID_ARGUMENT;
}

std::vector<ttr::Index> dims_vec(const int64_t* dims, int32_t order) {
  if (!dims || order < 2)
    throw std::invalid_argument("need at least two tensor extents");
  return {dims, dims + order};
}

std::vector<ttr::Index> ranks_vec(const int64_t* ranks, int32_t order) {
  if (!ranks) throw std::invalid_argument("ranks must not be null");
  return {ranks, ranks + order - 1};
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ttr::SolverConfig to_config(const ttr_solver_opts* opts) {
  ttr::SolverConfig cfg;
  if (!opts) return cfg;
  cfg.schedule = ttr::StepSchedule{opts->lambda, opts->q};
  cfg.max_iters = opts->max_iters;
  cfg.target_rel_error = opts->target_rel_error;
  cfg.trace_every = opts->trace_every;
  switch (opts->sigma_bar_mode) {
    case 0:
      cfg.sigma_bar_mode = ttr::SigmaBarMode::FromInit;
      break;
    case 1:
      cfg.sigma_bar_mode = ttr::SigmaBarMode::TrueValue;
      break;
    case 2:
      cfg.sigma_bar_mode = ttr::SigmaBarMode::UserOverride;
      break;
    default:
      throw std::invalid_argument("sigma_bar_mode must be 0, 1 or 2");
  }
  cfg.sigma_bar_override = opts->sigma_bar_override;
  return cfg;
}

ttr_status run_solver(bool factorized, const ttr_ensemble* e, const double* y,
                      const ttr_tt* x0, const ttr_solver_opts* opts,
                      const ttr_dense* x_star, ttr_tt** out,
                      ttr_trace** trace_out) {
  if (auto s = require(e && y && x0 && out, "null argument")) return s;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> ym(y, e->v.m());
    const ttr::SolverConfig cfg = to_config(opts);
    ttr::SolveResult res =
        factorized
            ? ttr::frsubgm_run(e->v, ym, x0->v.ranks(), x0->v, cfg,
                               x_star ? &x_star->v : nullptr)
            : ttr::psubgm_run(e->v, ym, x0->v.ranks(), x0->v, cfg,
                              x_star ? &x_star->v : nullptr);
    *out = new ttr_tt{std::move(res.tt)};
    if (trace_out) *trace_out = new ttr_trace{std::move(res.trace)};
    if (res.status == ttr::SolverStatus::Aborted) {
      set_error(res.message.c_str());
      return TTR_ERR_SOLVER_ABORT;
    }
    return TTR_OK;
  });
}

}  // namespace

extern "C" {

const char* ttr_last_error(void) { return g_last_error.c_str(); }

/* ---- dense ---- */

ttr_status ttr_dense_create(const int64_t* dims, int32_t order,
                            const double* data, ttr_dense** out) {
  if (auto s = require(out != nullptr, "null output")) return s;
  return guarded([&] {
    ttr::DenseTensor t(dims_vec(dims, order));
    if (data)
      std::memcpy(t.vec().data(), data, sizeof(double) * t.size());
    *out = new ttr_dense{std::move(t)};
    return TTR_OK;
  });
}

void ttr_dense_free(ttr_dense* t) { delete t; }

int32_t ttr_dense_order(const ttr_dense* t) {
  return t ? static_cast<int32_t>(t->v.order()) : 0;
}

void ttr_dense_dims(const ttr_dense* t, int64_t* dims_out) {
  if (!t || !dims_out) return;
  for (std::size_t i = 0; i < t->v.dims().size(); ++i)
    dims_out[i] = t->v.dims()[i];
}

int64_t ttr_dense_size(const ttr_dense* t) { return t ? t->v.size() : 0; }

const double* ttr_dense_data(const ttr_dense* t) {
  return t ? t->v.vec().data() : nullptr;
}

ttr_status ttr_dense_load(const char* path, ttr_dense** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] {
    *out = new ttr_dense{ttr::read_dtf(path)};
    return TTR_OK;
  });
}

ttr_status ttr_dense_save(const ttr_dense* t, const char* path) {
  if (auto s = require(t && path, "null argument")) return s;
  return guarded([&] {
    ttr::write_dtf(path, t->v);
    return TTR_OK;
  });
}

/* ---- tensor trains ---- */

void ttr_tt_free(ttr_tt* t) { delete t; }

int32_t ttr_tt_order(const ttr_tt* t) {
  return t ? static_cast<int32_t>(t->v.order()) : 0;
}

void ttr_tt_ranks(const ttr_tt* t, int64_t* ranks_out) {
  if (!t || !ranks_out) return;
  for (std::size_t i = 0; i < t->v.ranks().size(); ++i)
    ranks_out[i] = t->v.ranks()[i];
}

ttr_status ttr_tt_load(const char* path, ttr_tt** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] {
    *out = new ttr_tt{ttr::read_ttf(path)};
    return TTR_OK;
  });
}

ttr_status ttr_tt_save(const ttr_tt* t, const char* path) {
  if (auto s = require(t && path, "null argument")) return s;
  return guarded([&] {
    ttr::write_ttf(path, t->v);
    return TTR_OK;
  });
}

ttr_status ttr_tt_random(const int64_t* dims, int32_t order,
                         const int64_t* ranks, uint64_t seed, ttr_tt** out) {
  if (auto s = require(out != nullptr, "null output")) return s;
  return guarded([&] {
    *out = new ttr_tt{
        ttr::random_tt(dims_vec(dims, order), ranks_vec(ranks, order), seed)};
    return TTR_OK;
  });
}

ttr_status ttr_tt_svd(const ttr_dense* x, const int64_t* ranks, ttr_tt** out) {
  if (auto s = require(x && ranks && out, "null argument")) return s;
  return guarded([&] {
    *out = new ttr_tt{ttr::tt_svd(
        x->v, ranks_vec(ranks, static_cast<int32_t>(x->v.order())))};
    return TTR_OK;
  });
}

ttr_status ttr_tt_to_dense(const ttr_tt* t, ttr_dense** out) {
  if (auto s = require(t && out, "null argument")) return s;
  return guarded([&] {
    *out = new ttr_dense{t->v.to_dense()};
    return TTR_OK;
  });
}

/* ---- ensembles ---- */

ttr_status ttr_ensemble_create(int64_t m, const int64_t* dims, int32_t order,
                               uint64_t master_seed, int32_t storage,
                               ttr_ensemble** out) {
  if (auto s = require(out != nullptr, "null output")) return s;
  return guarded([&] {
    ttr::Storage mode = ttr::Storage::Auto;
    if (storage == 0) mode = ttr::Storage::Materialized;
    if (storage == 1) mode = ttr::Storage::Streamed;
    *out = new ttr_ensemble{
        ttr::GaussianEnsemble(m, dims_vec(dims, order), master_seed, mode)};
    return TTR_OK;
  });
}

void ttr_ensemble_free(ttr_ensemble* e) { delete e; }

ttr_status ttr_ensemble_apply(const ttr_ensemble* e, const ttr_dense* x,
                              double* y_out) {
  if (auto s = require(e && x && y_out, "null argument")) return s;
  return guarded([&] {
    const Eigen::VectorXd y = e->v.apply(x->v);
    std::memcpy(y_out, y.data(), sizeof(double) * y.size());
    return TTR_OK;
  });
}

ttr_status ttr_ensemble_adjoint(const ttr_ensemble* e, const double* z,
                                ttr_dense** out) {
  if (auto s = require(e && z && out, "null argument")) return s;
  return guarded([&] {
    *out = new ttr_dense{
        e->v.adjoint(Eigen::Map<const Eigen::VectorXd>(z, e->v.m()))};
    return TTR_OK;
  });
}

ttr_status ttr_corrupt(double* y, int64_t m, double p_s, double outlier_sigma2,
                       uint64_t support_seed, uint64_t value_seed,
                       int64_t* support_out, int64_t* support_count) {
  if (auto s = require(y && m > 0, "null or empty measurement vector"))
    return s;
  return guarded([&] {
    ttr::CorruptionModel model{p_s, outlier_sigma2, support_seed, value_seed};
    const ttr::Measurements meas =
        ttr::corrupt(Eigen::Map<const Eigen::VectorXd>(y, m), model);
    std::memcpy(y, meas.y.data(), sizeof(double) * m);
    if (support_out)
      for (std::size_t i = 0; i < meas.support.size(); ++i)
        support_out[i] = meas.support[i];
    if (support_count)
      *support_count = static_cast<int64_t>(meas.support.size());
    return TTR_OK;
  });
}

/* ---- solvers ---- */

void ttr_solver_opts_init(ttr_solver_opts* opts) {
  if (!opts) return;
  opts->lambda = 0.5;
  opts->q = 0.9;
  opts->max_iters = 1000;
  opts->target_rel_error = 0.0;
  opts->trace_every = 1;
  opts->sigma_bar_mode = 0;
  opts->sigma_bar_override = 0.0;
}

ttr_status ttr_psubgm_run(const ttr_ensemble* e, const double* y,
                          const ttr_tt* x0, const ttr_solver_opts* opts,
                          const ttr_dense* x_star, ttr_tt** out,
                          ttr_trace** trace_out) {
  return run_solver(false, e, y, x0, opts, x_star, out, trace_out);
}

ttr_status ttr_frsubgm_run(const ttr_ensemble* e, const double* y,
                           const ttr_tt* x0, const ttr_solver_opts* opts,
                           const ttr_dense* x_star, ttr_tt** out,
                           ttr_trace** trace_out) {
  return run_solver(true, e, y, x0, opts, x_star, out, trace_out);
}

ttr_status ttr_truncated_spectral_init(const ttr_ensemble* e, const double* y,
                                       const int64_t* ranks, double alpha,
                                       ttr_tt** out) {
  if (auto s = require(e && y && ranks && out, "null argument")) return s;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> ym(y, e->v.m());
    *out = new ttr_tt{ttr::truncated_spectral_init(
        e->v, ym,
        ranks_vec(ranks, static_cast<int32_t>(e->v.dims().size())), alpha)};
    return TTR_OK;
  });
}

ttr_status ttr_loss_l1(const ttr_ensemble* e, const ttr_dense* x,
                       const double* y, double* out) {
  if (auto s = require(e && x && y && out, "null argument")) return s;
  return guarded([&] {
    *out = ttr::loss_l1(e->v, x->v,
                        Eigen::Map<const Eigen::VectorXd>(y, e->v.m()));
    return TTR_OK;
  });
}

ttr_status ttr_recovery_error(const ttr_dense* x, const ttr_dense* x_star,
                              double* out) {
  if (auto s = require(x && x_star && out, "null argument")) return s;
  return guarded([&] {
    *out = ttr::recovery_error(x->v, x_star->v);
    return TTR_OK;
  });
}

/* ---- traces ---- */

int64_t ttr_trace_length(const ttr_trace* tr) {
  return tr ? static_cast<int64_t>(tr->v.size()) : 0;
}

ttr_status ttr_trace_row(const ttr_trace* tr, int64_t i, int64_t* t,
                         double* objective, double* rel_error, double* mu,
                         double* factor_dist2) {
  if (auto s = require(tr && i >= 0 && i < static_cast<int64_t>(tr->v.size()),
                       "trace row out of range"))
    return s;
  const ttr::TraceRecord& r = tr->v[static_cast<std::size_t>(i)];
  if (t) *t = r.t;
  if (objective) *objective = r.objective;
  if (rel_error) *rel_error = r.rel_error;
  if (mu) *mu = r.mu;
  if (factor_dist2) *factor_dist2 = r.factor_dist2;
  return TTR_OK;
}

ttr_status ttr_trace_save_csv(const ttr_trace* tr, const char* path) {
  if (auto s = require(tr && path, "null argument")) return s;
  return guarded([&] {
    ttr::write_trace_csv(path, tr->v);
    return TTR_OK;
  });
}

void ttr_trace_free(ttr_trace* tr) { delete tr; }

/* ---- harness ---- */

ttr_status ttr_make_problem(const char* config_json, const char* out_dir) {
  if (auto s = require(config_json && out_dir, "null argument")) return s;
  return guarded([&] {
    ttr::make_problem(ttr::parse_problem_config(config_json), out_dir);
    return TTR_OK;
  });
}

ttr_status ttr_recover(const char* bundle_path, const char* options_json,
                       const char* out_dir) {
  if (auto s = require(bundle_path && out_dir, "null argument")) return s;
  return guarded([&] {
    const ttr::RecoverOptions options =
        ttr::parse_recover_options(options_json ? options_json : "{}");
    const ttr::RecoverOutcome outcome =
        ttr::recover(bundle_path, options, out_dir);
    if (outcome.result.status == ttr::SolverStatus::Aborted) {
      set_error(outcome.result.message.c_str());
      return TTR_ERR_SOLVER_ABORT;
    }
    return TTR_OK;
  });
}

ttr_status ttr_run_experiment(const char* spec_json, const char* out_dir) {
  if (auto s = require(spec_json && out_dir, "null argument")) return s;
  return guarded([&] {
    ttr::run_experiment(ttr::parse_experiment_spec(spec_json), out_dir);
    return TTR_OK;
  });
}

ttr_status ttr_rip_check(const char* config_json, char** report_json_out) {
  if (auto s = require(config_json && report_json_out, "null argument"))
    return s;
  return guarded([&] {
    *report_json_out = dup_string(ttr::rip_check(config_json).dump(2));
    return TTR_OK;
  });
}

ttr_status ttr_render_plots(const char* results_dir, const char* out_dir) {
  if (auto s = require(results_dir && out_dir, "null argument")) return s;
  return guarded([&] {
    ttr::render_plots(results_dir, out_dir);
    return TTR_OK;
  });
}

ttr_status ttr_factor_distance_report(const ttr_tt* x, const ttr_tt* x_star,
                                      char** report_json_out) {
  if (auto s = require(x && x_star && report_json_out, "null argument"))
    return s;
  return guarded([&] {
    const ttr::Lemma5Check check = ttr::lemma5_check(x->v, x_star->v);
    *report_json_out = dup_string(ttr::lemma5_report_json(check));
    return TTR_OK;
  });
}

void ttr_string_free(char* s) { delete[] s; }

}  // extern "C"

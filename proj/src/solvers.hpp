#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sensing.hpp"
#include "tensor.hpp"
#include "tt.hpp"

namespace ttr {

/// Geometrically decaying step size mu_t = lambda * q^t. Evaluated through
/// pow rather than iterated multiplication so long runs do not drift.
struct StepSchedule {
  double lambda = 0.0;
  double q = 0.9;

  double mu(Index t) const {
    return lambda * std::pow(q, static_cast<double>(t));
  }
};

enum class SigmaBarMode {
  FromInit,     // estimate sigma_bar^2 from the initialization
  TrueValue,    // use sigma_bar^2(X*): requires ground truth
  UserOverride  // take SolverConfig::sigma_bar_override
};

struct SolverConfig {
  StepSchedule schedule;
  Index max_iters = 1000;
  double target_rel_error = 0.0;  // early stop; only active with x_star
  SigmaBarMode sigma_bar_mode = SigmaBarMode::FromInit;
  double sigma_bar_override = 0.0;
  Index trace_every = 1;
  bool trace_factor_dist = false;  // FRSubGM: record dist^2 per trace row
};

struct TraceRecord {
  Index t = 0;
  double objective = 0.0;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  double mu = 0.0;
  double factor_dist2 = std::numeric_limits<double>::quiet_NaN();
};

enum class SolverStatus { ReachedTarget, ReachedMaxIters, Aborted };

struct SolveResult {
  TTTensor tt;
  std::vector<TraceRecord> trace;
  SolverStatus status = SolverStatus::ReachedMaxIters;
  std::string message;
};

/// f(x) = (1/m) ||A(x) - y||_1.
double loss_l1(const GaussianEnsemble& a, const DenseTensor& x,
               const Eigen::VectorXd& y);

/// Entrywise three-valued sign of A(x) - y, with sign(0) = 0.
Eigen::VectorXd residual_signs(const GaussianEnsemble& a, const DenseTensor& x,
                               const Eigen::VectorXd& y);

/// (1/m) sum_k sign(<A_k, x> - y_k) A_k.
DenseTensor full_subgradient(const GaussianEnsemble& a, const DenseTensor& x,
                             const Eigen::VectorXd& y);

/// Projected subgradient method: dense l1 subgradient step followed by
/// TT-SVD truncation back to the target ranks.
SolveResult psubgm_run(const GaussianEnsemble& a, const Eigen::VectorXd& y,
                       const std::vector<Index>& ranks, const TTTensor& x0,
                       const SolverConfig& cfg,
                       const DenseTensor* x_star = nullptr);

/// Projection of U onto the tangent space of the Stiefel manifold at an
/// orthonormal L: U - L (U^T L + L^T U) / 2.
Eigen::MatrixXd stiefel_project(const Eigen::MatrixXd& l,
                                const Eigen::MatrixXd& u);

/// Polar retraction G (G^T G)^{-1/2}, computed from the SVD of G.
Eigen::MatrixXd polar_retract(const Eigen::MatrixXd& g);

/// Per-factor subgradients in left-unfolding shape, contracted from a
/// precomputed dense subgradient.
std::vector<Eigen::MatrixXd> factor_subgradients_from_dense(
    const DenseTensor& g, const TTTensor& tt);

std::vector<Eigen::MatrixXd> factor_subgradients(const GaussianEnsemble& a,
                                                 const TTTensor& tt,
                                                 const Eigen::VectorXd& y);

/// Factorized Riemannian subgradient method: tangent-projected steps with
/// polar retraction on factors 1..N-1, a plain subgradient step on factor N.
/// The first block uses the discrepant step mu_t / sigma_bar^2.
SolveResult frsubgm_run(const GaussianEnsemble& a, const Eigen::VectorXd& y,
                        const std::vector<Index>& ranks, const TTTensor& tt0,
                        const SolverConfig& cfg,
                        const DenseTensor* x_star = nullptr);

/// TT-SVD of the outlier-trimmed spectral estimate
/// (1/((1-alpha) m)) sum_k y_k A_k 1{|y_k| <= tau}, where tau is the
/// ceil(alpha m)-th largest |y_k| (alpha = 0 keeps everything).
TTTensor truncated_spectral_init(const GaussianEnsemble& a,
                                 const Eigen::VectorXd& y,
                                 const std::vector<Index>& ranks, double alpha);

/// Step schedules from the local-convergence theorems. Both throw,
/// naming the violated inequality, when the RIP/sharpness admissibility
/// conditions fail; both guarantee q < 1 on return.
StepSchedule theoretical_schedule_psubgm(double delta, double p_s, double c,
                                         double init_error);
StepSchedule theoretical_schedule_frsubgm(double delta, double p_s, Index n,
                                          const std::vector<Index>& ranks,
                                          double kappa, double init_dist);

}  // namespace ttr

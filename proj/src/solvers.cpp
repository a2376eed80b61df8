#include "solvers.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "analysis.hpp"

namespace ttr {

namespace {

double three_valued_sign(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;
}

Eigen::VectorXd signs_of(const Eigen::VectorXd& resid) {
  Eigen::VectorXd s(resid.size());
  for (Index k = 0; k < resid.size(); ++k) s[k] = three_valued_sign(resid[k]);
  return s;
}

constexpr double kOrthTol = 1e-8;

}  // namespace

double loss_l1(const GaussianEnsemble& a, const DenseTensor& x,
               const Eigen::VectorXd& y) {
  if (y.size() != a.m()) throw std::invalid_argument("measurement length mismatch");
  return (a.apply(x) - y).lpNorm<1>() / static_cast<double>(a.m());
}

Eigen::VectorXd residual_signs(const GaussianEnsemble& a, const DenseTensor& x,
                               const Eigen::VectorXd& y) {
  if (y.size() != a.m()) throw std::invalid_argument("measurement length mismatch");
  return signs_of(a.apply(x) - y);
}

DenseTensor full_subgradient(const GaussianEnsemble& a, const DenseTensor& x,
                             const Eigen::VectorXd& y) {
  DenseTensor g = a.adjoint(residual_signs(a, x, y));
  g.vec() /= static_cast<double>(a.m());
  return g;
}

Eigen::MatrixXd stiefel_project(const Eigen::MatrixXd& l,
                                const Eigen::MatrixXd& u) {
  if (l.rows() != u.rows() || l.cols() != u.cols())
    throw std::invalid_argument("tangent projection shape mismatch");
  const Eigen::MatrixXd gram = l.transpose() * l;
  if ((gram - Eigen::MatrixXd::Identity(l.cols(), l.cols())).norm() > kOrthTol)
    throw std::invalid_argument(
        "tangent projection requires an orthonormal base point");
  return u - 0.5 * l * (u.transpose() * l + l.transpose() * u);
}

Eigen::MatrixXd polar_retract(const Eigen::MatrixXd& g) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() <= 1e-12)
    throw std::runtime_error("polar retraction: rank-deficient step matrix");
  return svd.matrixU() * svd.matrixV().transpose();
}

std::vector<Eigen::MatrixXd> factor_subgradients_from_dense(
    const DenseTensor& g, const TTTensor& tt) {
  if (g.dims() != tt.dims())
    throw std::invalid_argument("subgradient/train dimension mismatch");
  const Index n = tt.order();

  // Trailing contractions: rights[f] covers factors f..N-1.
  std::vector<Eigen::MatrixXd> rights(n + 1);
  rights[n] = Eigen::MatrixXd::Ones(1, 1);
  rights[n - 1] = Eigen::Map<const Eigen::MatrixXd>(
      tt.factor(n - 1).data(), tt.rank_before(n - 1), tt.dims()[n - 1]);
  for (Index f = n - 2; f >= 1; --f) {
    const Index d = tt.dims()[f];
    const Index cols_prev = rights[f + 1].cols();
    Eigen::MatrixXd next(tt.rank_before(f), d * cols_prev);
    for (Index s = 0; s < d; ++s) {
      const Eigen::MatrixXd block = tt.slice(f, s) * rights[f + 1];
      for (Index c = 0; c < cols_prev; ++c) next.col(c * d + s) = block.col(c);
    }
    rights[f] = std::move(next);
  }

  std::vector<Eigen::MatrixXd> grads(n);
  Eigen::MatrixXd bprev;  // left interface over factors 0..f-1
  Index p = 1;            // its row count d_0...d_{f-1}
  for (Index f = 0; f < n; ++f) {
    const Index d = tt.dims()[f];
    const Index r_prev = tt.rank_before(f);
    const Index r_next = tt.rank_after(f);
    const Index rest = g.size() / (p * d);

    // T = D_1(f) * [cut-f unfolding of g]: r_prev x (d_f * rest).
    Eigen::Map<const Eigen::MatrixXd> gm(g.vec().data(), p, d * rest);
    Eigen::MatrixXd tmat;
    if (f == 0)
      tmat = gm;
    else
      tmat.noalias() = bprev.transpose() * gm;

    // Column group s of T is D_1(f) E(s); finish with D_2(f) = rights^T.
    const Eigen::MatrixXd& rf = rights[f + 1];
    Eigen::MatrixXd grad(r_prev * d, r_next);
    for (Index s = 0; s < d; ++s) {
      Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>> e_slice(
          tmat.data() + s * r_prev, r_prev, rest,
          Eigen::OuterStride<>(r_prev * d));
      grad.middleRows(s * r_prev, r_prev).noalias() = e_slice * rf.transpose();
    }
    grads[f] = std::move(grad);

    if (f + 1 < n) {
      Eigen::MatrixXd bnext(p * d, r_next);
      if (f == 0) {
        bnext = tt.factor(0);
      } else {
        for (Index s = 0; s < d; ++s)
          bnext.middleRows(s * p, p).noalias() = bprev * tt.slice(f, s);
      }
      bprev = std::move(bnext);
      p *= d;
    }
  }
  return grads;
}

std::vector<Eigen::MatrixXd> factor_subgradients(const GaussianEnsemble& a,
                                                 const TTTensor& tt,
                                                 const Eigen::VectorXd& y) {
  return factor_subgradients_from_dense(full_subgradient(a, tt.to_dense(), y),
                                        tt);
}

SolveResult psubgm_run(const GaussianEnsemble& a, const Eigen::VectorXd& y,
                       const std::vector<Index>& ranks, const TTTensor& x0,
                       const SolverConfig& cfg, const DenseTensor* x_star) {
  if (x0.dims() != a.dims())
    throw std::invalid_argument("initialization dimension mismatch");
  if (x0.ranks() != ranks)
    throw std::invalid_argument("initialization does not have the target ranks");
  if (y.size() != a.m())
    throw std::invalid_argument("measurement length mismatch");
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");

  const double m = static_cast<double>(a.m());
  double norm_star = 0.0;
  if (x_star) {
    norm_star = x_star->frobenius_norm();
    if (norm_star <= 0.0)
      throw std::invalid_argument("ground truth must be nonzero");
  }
  const Index stride = std::max<Index>(1, cfg.trace_every);

  SolveResult out;
  TTTensor tt = x0;
  for (Index t = 0; t <= cfg.max_iters; ++t) {
    const DenseTensor dense = tt.to_dense();
    const Eigen::VectorXd resid = a.apply(dense) - y;
    const double obj = resid.lpNorm<1>() / m;
    const double rel =
        x_star ? (dense.vec() - x_star->vec()).norm() / norm_star
               : std::numeric_limits<double>::quiet_NaN();
    const double mu = cfg.schedule.mu(t);
    const bool record = (t % stride == 0) || t == cfg.max_iters;
    if (record) out.trace.push_back({t, obj, rel, mu, std::numeric_limits<double>::quiet_NaN()});

    if (!std::isfinite(obj)) {
      if (!record) out.trace.push_back({t, obj, rel, mu, std::numeric_limits<double>::quiet_NaN()});
      out.status = SolverStatus::Aborted;
      out.message = "objective became non-finite at iteration " +
                    std::to_string(t);
      break;
    }
    if (x_star && cfg.target_rel_error > 0.0 && rel <= cfg.target_rel_error) {
      if (!record) out.trace.push_back({t, obj, rel, mu, std::numeric_limits<double>::quiet_NaN()});
      out.status = SolverStatus::ReachedTarget;
      break;
    }
    if (t == cfg.max_iters) break;

    DenseTensor g = a.adjoint(signs_of(resid));
    DenseTensor z(dense.dims(), dense.vec() - (mu / m) * g.vec());
    tt = tt_svd(z, ranks);
  }
  out.tt = std::move(tt);
  return out;
}

SolveResult frsubgm_run(const GaussianEnsemble& a, const Eigen::VectorXd& y,
                        const std::vector<Index>& ranks, const TTTensor& tt0,
                        const SolverConfig& cfg, const DenseTensor* x_star) {
  if (tt0.dims() != a.dims())
    throw std::invalid_argument("initialization dimension mismatch");
  if (tt0.ranks() != ranks)
    throw std::invalid_argument("initialization does not have the target ranks");
  if (y.size() != a.m())
    throw std::invalid_argument("measurement length mismatch");
  if (tt0.orthogonality_residual() > kOrthTol)
    throw std::invalid_argument("FRSubGM requires a left-orthogonal start");

  double sigma_bar2 = 0.0;
  switch (cfg.sigma_bar_mode) {
    case SigmaBarMode::TrueValue: {
      if (!x_star)
        throw std::invalid_argument(
            "sigma_bar_mode=true_value requires the ground truth");
      const double s = spectral_summary(*x_star, ranks).sigma_max;
      sigma_bar2 = s * s;
      break;
    }
    case SigmaBarMode::FromInit: {
      const double s = spectral_summary(tt0.to_dense(), ranks).sigma_max;
      sigma_bar2 = s * s;
      break;
    }
    case SigmaBarMode::UserOverride:
      sigma_bar2 = cfg.sigma_bar_override;
      break;
  }
  if (!(sigma_bar2 > 0.0))
    throw std::invalid_argument("sigma_bar^2 must be positive");

  const double m = static_cast<double>(a.m());
  double norm_star = 0.0;
  TTTensor tt_star_lo;
  double sigma_bar_star = 0.0;
  if (x_star) {
    norm_star = x_star->frobenius_norm();
    if (norm_star <= 0.0)
      throw std::invalid_argument("ground truth must be nonzero");
    if (cfg.trace_factor_dist) {
      tt_star_lo = tt_svd(*x_star, ranks);
      sigma_bar_star = spectral_summary(*x_star, ranks).sigma_max;
    }
  }
  const Index stride = std::max<Index>(1, cfg.trace_every);
  const Index n = tt0.order();

  SolveResult out;
  TTTensor tt = tt0;
  for (Index t = 0; t <= cfg.max_iters; ++t) {
    const DenseTensor dense = tt.to_dense();
    const Eigen::VectorXd resid = a.apply(dense) - y;
    const double obj = resid.lpNorm<1>() / m;
    const double rel =
        x_star ? (dense.vec() - x_star->vec()).norm() / norm_star
               : std::numeric_limits<double>::quiet_NaN();
    const double mu = cfg.schedule.mu(t);
    const bool record = (t % stride == 0) || t == cfg.max_iters;
    double fd2 = std::numeric_limits<double>::quiet_NaN();
    if (record && cfg.trace_factor_dist && x_star)
      fd2 = factor_distance(tt, tt_star_lo, sigma_bar_star).dist2;
    if (record) out.trace.push_back({t, obj, rel, mu, fd2});

    if (!std::isfinite(obj)) {
      if (!record) out.trace.push_back({t, obj, rel, mu, fd2});
      out.status = SolverStatus::Aborted;
      out.message = "objective became non-finite at iteration " +
                    std::to_string(t);
      break;
    }
    if (x_star && cfg.target_rel_error > 0.0 && rel <= cfg.target_rel_error) {
      if (!record) out.trace.push_back({t, obj, rel, mu, fd2});
      out.status = SolverStatus::ReachedTarget;
      break;
    }
    if (t == cfg.max_iters) break;

    DenseTensor g = a.adjoint(signs_of(resid));
    g.vec() /= m;
    const std::vector<Eigen::MatrixXd> subs =
        factor_subgradients_from_dense(g, tt);
    try {
      for (Index i = 0; i + 1 < n; ++i) {
        const Eigen::MatrixXd step =
            stiefel_project(tt.factor(i), subs[i]) * (mu / sigma_bar2);
        tt.factor(i) = polar_retract(tt.factor(i) - step);
      }
    } catch (const std::runtime_error& e) {
      out.status = SolverStatus::Aborted;
      out.message = std::string(e.what()) + " at iteration " +
                    std::to_string(t);
      break;
    }
    tt.factor(n - 1) -= mu * subs[n - 1];
  }
  out.tt = std::move(tt);
  return out;
}

TTTensor truncated_spectral_init(const GaussianEnsemble& a,
                                 const Eigen::VectorXd& y,
                                 const std::vector<Index>& ranks,
                                 double alpha) {
  if (y.size() != a.m())
    throw std::invalid_argument("measurement length mismatch");
  if (alpha < 0.0 || alpha >= 1.0)
    throw std::invalid_argument("truncation fraction must lie in [0, 1)");
  const Index m = a.m();

  Eigen::VectorXd w = y;
  if (alpha > 0.0) {
    const Index k = static_cast<Index>(
        std::ceil(alpha * static_cast<double>(m)));
    std::vector<double> mags(m);
    for (Index i = 0; i < m; ++i) mags[i] = std::abs(y[i]);
    std::nth_element(mags.begin(), mags.begin() + (k - 1), mags.end(),
                     std::greater<double>());
    const double tau = mags[k - 1];
    Index kept = 0;
    for (Index i = 0; i < m; ++i) {
      if (std::abs(y[i]) <= tau)
        ++kept;
      else
        w[i] = 0.0;
    }
    if (kept == 0)
      throw std::runtime_error("truncation removed every measurement");
  }
  w /= (1.0 - alpha) * static_cast<double>(m);
  return tt_svd(a.adjoint(w), ranks);
}

StepSchedule theoretical_schedule_psubgm(double delta, double p_s, double c,
                                         double init_error) {
  const double sq = kRipConstant;
  if (p_s < 0.0 || p_s > 0.5)
    throw std::invalid_argument("p_s must lie in [0, 0.5]");
  if (init_error <= 0.0)
    throw std::invalid_argument("initialization error must be positive");
  const double c_max =
      3.0 * (1.0 - 2.0 * p_s) * (1.0 - 2.0 * p_s) /
      (1.0 + 12.0 * p_s - 12.0 * p_s * p_s);
  if (c < 0.0 || c >= c_max)
    throw std::invalid_argument(
        "violated: c < 3(1-2p_s)^2 / (1+12p_s-12p_s^2)");
  const double root = std::sqrt(4.0 * c / (3.0 + 3.0 * c));
  const double bound = (1.0 - 2.0 * p_s - root) / (1.0 + root) * sq;
  if (delta < 0.0 || delta >= bound)
    throw std::invalid_argument(
        "violated: delta_{2r} < (1-2p_s-sqrt(4c/(3+3c)))/(1+sqrt(4c/(3+3c))) "
        "* sqrt(2/pi)");
  const double num = (1.0 - 2.0 * p_s) * sq - delta;
  const double den = sq + delta;
  StepSchedule sched;
  sched.lambda = num / (2.0 * den * den) * init_error;
  sched.q = std::sqrt((1.0 + c) *
                      (1.0 - 3.0 * num * num / (4.0 * den * den)));
  if (!(sched.q < 1.0))
    throw std::logic_error("schedule decay q must be below 1");
  return sched;
}

StepSchedule theoretical_schedule_frsubgm(double delta, double p_s, Index n,
                                          const std::vector<Index>& ranks,
                                          double kappa, double init_dist) {
  const double sq = kRipConstant;
  if (p_s < 0.0 || p_s > 0.5)
    throw std::invalid_argument("p_s must lie in [0, 0.5]");
  if (static_cast<Index>(ranks.size()) != n - 1)
    throw std::invalid_argument("expected N-1 internal ranks");
  if (kappa < 1.0) throw std::invalid_argument("kappa must be >= 1");
  if (init_dist <= 0.0)
    throw std::invalid_argument("initial factor distance must be positive");
  const double bound = (1.0 - 2.0 * p_s) * sq;
  if (delta < 0.0 || delta >= bound)
    throw std::invalid_argument(
        "violated: delta_{(N+1)r} <= (1-2p_s) * sqrt(2/pi)");
  // N + 1 + sum of r_2..r_{N-1}.
  double rank_sum = static_cast<double>(n) + 1.0;
  for (std::size_t i = 1; i < ranks.size(); ++i)
    rank_sum += static_cast<double>(ranks[i]);
  const double num = bound - delta;
  const double den = sq + delta;
  const double scale = 9.0 * static_cast<double>(n) - 5.0;
  StepSchedule sched;
  sched.lambda = num /
                 (std::sqrt(2.0 * rank_sum) * scale * den * den * kappa) *
                 init_dist;
  sched.q = std::sqrt(
      1.0 - num * num / (8.0 * rank_sum * scale * den * den * kappa * kappa));
  if (!(sched.q < 1.0))
    throw std::logic_error("schedule decay q must be below 1");
  return sched;
}

}  // namespace ttr

#include "analysis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "rng.hpp"
#include "solvers.hpp"

namespace ttr {

namespace {

constexpr double kOrthTol = 1e-8;
constexpr Index kMaxSweeps = 200;

Eigen::MatrixXd procrustes(const Eigen::MatrixXd& k) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

double objective(const TTTensor& tt, const TTTensor& ts,
                 const std::vector<Eigen::MatrixXd>& rotations,
                 double sigma_bar2) {
  const std::vector<Eigen::MatrixXd> lr = rotated_factors(ts, rotations);
  const Index n = tt.order();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double w = (i + 1 < n) ? sigma_bar2 : 1.0;
    total += w * (tt.factor(i) - lr[i]).squaredNorm();
  }
  return total;
}

// Cross-covariance whose Procrustes maximizer is the optimal R at cut c
// with every other rotation held fixed; R_{c+1} couples the two factor
// terms it appears in.
Eigen::MatrixXd cross_for_cut(const TTTensor& tt, const TTTensor& ts,
                              const std::vector<Eigen::MatrixXd>& rotations,
                              Index c, double sigma_bar2) {
  const Index n = tt.order();
  const Index r = tt.ranks()[c];
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(r, r);
  for (Index s = 0; s < tt.dims()[c]; ++s) {
    Eigen::MatrixXd b = ts.slice(c, s);
    if (c > 0) b = rotations[c - 1].transpose() * b;
    k.noalias() += sigma_bar2 * b.transpose() * tt.slice(c, s);
  }
  const double w = (c + 2 < n) ? sigma_bar2 : 1.0;
  for (Index s = 0; s < tt.dims()[c + 1]; ++s) {
    Eigen::MatrixXd b = ts.slice(c + 1, s);
    if (c + 2 < n) b = b * rotations[c + 1];
    k.noalias() += w * b * tt.slice(c + 1, s).transpose();
  }
  return k;
}

struct SweepOutcome {
  std::vector<Eigen::MatrixXd> rotations;
  double dist2 = 0.0;
  bool converged = false;
  Index sweeps = 0;
  std::vector<double> history;
};

SweepOutcome alternate(const TTTensor& tt, const TTTensor& ts,
                       std::vector<Eigen::MatrixXd> rotations,
                       double sigma_bar2) {
  SweepOutcome out;
  double prev = objective(tt, ts, rotations, sigma_bar2);
  for (Index sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (Index c = 0; c + 1 < tt.order(); ++c)
      rotations[c] = procrustes(cross_for_cut(tt, ts, rotations, c, sigma_bar2));
    const double cur = objective(tt, ts, rotations, sigma_bar2);
    out.history.push_back(cur);
    out.sweeps = sweep + 1;
    const double improvement = prev - cur;
    if (improvement < 1e-10 * std::max(prev, 1e-300) || cur < 1e-28) {
      out.converged = true;
      prev = cur;
      break;
    }
    prev = cur;
  }
  out.rotations = std::move(rotations);
  out.dist2 = prev;
  return out;
}

void check_pair(const TTTensor& tt, const TTTensor& ts) {
  if (tt.dims() != ts.dims() || tt.ranks() != ts.ranks())
    throw std::invalid_argument("factor distance needs matching dims/ranks");
  if (tt.orthogonality_residual() > kOrthTol ||
      ts.orthogonality_residual() > kOrthTol)
    throw std::invalid_argument("factor distance needs left-orthogonal inputs");
}

}  // namespace

double recovery_error(const DenseTensor& x, const DenseTensor& x_star) {
  if (x.dims() != x_star.dims())
    throw std::invalid_argument("recovery_error shape mismatch");
  const double denom = x_star.vec().squaredNorm();
  if (denom <= 0.0) throw std::invalid_argument("ground truth must be nonzero");
  return (x.vec() - x_star.vec()).squaredNorm() / denom;
}

std::vector<Eigen::MatrixXd> rotated_factors(
    const TTTensor& ts, const std::vector<Eigen::MatrixXd>& rotations) {
  const Index n = ts.order();
  if (static_cast<Index>(rotations.size()) != n - 1)
    throw std::invalid_argument("expected N-1 rotations");
  std::vector<Eigen::MatrixXd> out(n);
  for (Index i = 0; i < n; ++i) {
    const Index rp = ts.rank_before(i);
    const Index ra = ts.rank_after(i);
    Eigen::MatrixXd l(rp * ts.dims()[i], ra);
    for (Index s = 0; s < ts.dims()[i]; ++s) {
      Eigen::MatrixXd b = ts.slice(i, s);
      if (i > 0) b = rotations[i - 1].transpose() * b;
      if (i + 1 < n) b = b * rotations[i];
      l.middleRows(s * rp, rp) = b;
    }
    out[i] = std::move(l);
  }
  return out;
}

FactorDistanceReport factor_distance(const TTTensor& tt,
                                     const TTTensor& tt_star,
                                     double sigma_bar) {
  check_pair(tt, tt_star);
  if (!(sigma_bar > 0.0))
    throw std::invalid_argument("sigma_bar must be positive");
  const double sigma_bar2 = sigma_bar * sigma_bar;
  const Index n = tt.order();

  std::vector<Eigen::MatrixXd> identity(n - 1);
  for (Index c = 0; c + 1 < n; ++c)
    identity[c] = Eigen::MatrixXd::Identity(tt.ranks()[c], tt.ranks()[c]);

  // Greedy left-to-right start: pick each R from its own factor term alone.
  std::vector<Eigen::MatrixXd> greedy = identity;
  for (Index c = 0; c + 1 < n; ++c) {
    const Index r = tt.ranks()[c];
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(r, r);
    for (Index s = 0; s < tt.dims()[c]; ++s) {
      Eigen::MatrixXd b = tt_star.slice(c, s);
      if (c > 0) b = greedy[c - 1].transpose() * b;
      k.noalias() += b.transpose() * tt.slice(c, s);
    }
    greedy[c] = procrustes(k);
  }

  SweepOutcome a = alternate(tt, tt_star, std::move(identity), sigma_bar2);
  SweepOutcome b = alternate(tt, tt_star, std::move(greedy), sigma_bar2);
  const SweepOutcome& best = (b.dist2 < a.dist2) ? b : a;

  FactorDistanceReport report;
  report.dist2 = best.dist2;
  report.rotations = best.rotations;
  report.converged = best.converged;
  report.sweeps = best.sweeps;
  report.history = best.history;
  return report;
}

Lemma5Check lemma5_check(const TTTensor& tt, const TTTensor& tt_star) {
  check_pair(tt, tt_star);
  const DenseTensor dx = tt.to_dense();
  const DenseTensor ds = tt_star.to_dense();
  const SpectralSummary sum_x = spectral_summary(dx, tt.ranks());
  const SpectralSummary sum_s = spectral_summary(ds, tt.ranks());

  Lemma5Check out;
  out.precondition =
      sum_x.sigma_max * sum_x.sigma_max <=
      2.25 * sum_s.sigma_max * sum_s.sigma_max;

  const FactorDistanceReport fd =
      factor_distance(tt, tt_star, sum_s.sigma_max);
  out.dist2 = fd.dist2;
  out.sweeps = fd.sweeps;
  out.converged = fd.converged;
  out.fro_err2 = (dx.vec() - ds.vec()).squaredNorm();

  const Index n = tt.order();
  double rank_sum = static_cast<double>(n) + 1.0;
  for (std::size_t i = 1; i < tt.ranks().size(); ++i)
    rank_sum += static_cast<double>(tt.ranks()[i]);
  const double kappa = sum_s.kappa;
  out.lower_bound = fd.dist2 / (8.0 * rank_sum * kappa * kappa);
  out.upper_bound = 2.25 * static_cast<double>(n) * fd.dist2;
  out.lower_ok = out.fro_err2 >= out.lower_bound * (1.0 - 1e-9);
  out.upper_ok = out.fro_err2 <= out.upper_bound * (1.0 + 1e-9) + 1e-300;
  return out;
}

std::string lemma5_report_json(const Lemma5Check& check) {
  nlohmann::json j;
  j["dist2"] = check.dist2;
  j["sweeps"] = check.sweeps;
  j["converged"] = check.converged;
  j["lemma5_lower_ok"] = check.lower_ok;
  j["lemma5_upper_ok"] = check.upper_ok;
  return j.dump();
}

double regularity_inner_product(
    const TTTensor& tt, const TTTensor& tt_star,
    const std::vector<Eigen::MatrixXd>& rotations,
    const std::vector<Eigen::MatrixXd>& subgradients) {
  const Index n = tt.order();
  if (static_cast<Index>(subgradients.size()) != n)
    throw std::invalid_argument("expected one subgradient per factor");
  const std::vector<Eigen::MatrixXd> lr = rotated_factors(tt_star, rotations);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd diff = tt.factor(i) - lr[i];
    const Eigen::MatrixXd dir =
        (i + 1 < n) ? stiefel_project(tt.factor(i), subgradients[i])
                    : subgradients[i];
    total += diff.cwiseProduct(dir).sum();
  }
  return total;
}

RegularityProbeResult regularity_probe(const GaussianEnsemble& a,
                                       const Eigen::VectorXd& y,
                                       const DenseTensor& x_star,
                                       const std::vector<Index>& ranks,
                                       Index trials, double radius,
                                       std::uint64_t seed) {
  if (trials < 1)
    throw std::invalid_argument("regularity_probe needs trials >= 1");
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  const TTTensor ts = tt_svd(x_star, ranks);
  const double sbar = spectral_summary(x_star, ranks).sigma_max;
  const Index n = ts.order();
  const double eta =
      radius / (static_cast<double>(n) * std::max(1.0, sbar));

  RegularityProbeResult out;
  out.min_inner = std::numeric_limits<double>::infinity();
  double total = 0.0;
  Index used = 0;
  for (Index trial = 0; trial < trials; ++trial) {
    SplitMix64 gen(derive_seed(seed, trial));
    std::vector<Eigen::MatrixXd> factors = ts.factors();
    for (Index i = 0; i + 1 < n; ++i) {
      Eigen::MatrixXd noise(factors[i].rows(), factors[i].cols());
      for (Index c = 0; c < noise.cols(); ++c)
        for (Index r = 0; r < noise.rows(); ++r)
          noise(r, c) = gen.next_normal();
      Eigen::MatrixXd tangent = stiefel_project(ts.factor(i), noise);
      const double norm = tangent.norm();
      if (norm > 0.0) tangent /= norm;
      factors[i] = polar_retract(ts.factor(i) + eta * tangent);
    }
    Eigen::MatrixXd tail(factors[n - 1].rows(), 1);
    for (Index r = 0; r < tail.rows(); ++r) tail(r, 0) = gen.next_normal();
    const double tail_norm = tail.norm();
    if (tail_norm > 0.0) tail /= tail_norm;
    factors[n - 1] = ts.factor(n - 1) + eta * tail;

    TTTensor tt(ts.dims(), ts.ranks(), std::move(factors), true);
    if ((tt.to_dense().vec() - x_star.vec()).norm() < 1e-15) {
      ++out.skipped;
      continue;
    }
    const std::vector<Eigen::MatrixXd> subs = factor_subgradients(a, tt, y);
    const FactorDistanceReport fd = factor_distance(tt, ts, sbar);
    const double value = regularity_inner_product(tt, ts, fd.rotations, subs);
    out.samples.push_back(value);
    out.min_inner = std::min(out.min_inner, value);
    total += value;
    ++used;
  }
  if (used > 0) out.mean_inner = total / static_cast<double>(used);
  return out;
}

}  // namespace ttr

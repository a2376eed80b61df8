#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sensing.hpp"
#include "tensor.hpp"
#include "tt.hpp"

namespace ttr {

/// ||x - x*||_F^2 / ||x*||_F^2, the success metric of the experiments.
double recovery_error(const DenseTensor& x, const DenseTensor& x_star);

struct FactorDistanceReport {
  double dist2 = 0.0;
  std::vector<Eigen::MatrixXd> rotations;  // R_1..R_{N-1}, each orthogonal
  bool converged = false;
  Index sweeps = 0;
  std::vector<double> history;  // objective after each sweep
};

/// Rotation-invariant factor distance between two left-orthogonal trains:
/// min over orthogonal R_1..R_{N-1} of
///   sum_{i<N} sigma_bar^2 ||L(X_i) - L_R(X_i*)||_F^2
///   + ||L(X_N) - L_R(X_N*)||_2^2.
/// Adjacent rotations couple, so the joint problem is solved by alternating
/// per-cut orthogonal Procrustes, restarted once from a greedy left-to-right
/// sweep; the achieved value upper-bounds the true minimum.
FactorDistanceReport factor_distance(const TTTensor& tt,
                                     const TTTensor& tt_star,
                                     double sigma_bar);

/// Star factors with the gauge rotations applied:
/// block s of entry i is R_{i-1}^T X_i*(s) R_i.
std::vector<Eigen::MatrixXd> rotated_factors(
    const TTTensor& tt_star, const std::vector<Eigen::MatrixXd>& rotations);

struct Lemma5Check {
  double dist2 = 0.0;
  double fro_err2 = 0.0;
  double lower_bound = 0.0;  // dist2 / (8 (N+1+sum r_i) kappa^2)
  double upper_bound = 0.0;  // (9N/4) dist2
  bool lower_ok = false;     // advisory: achieved dist2 only upper-bounds
  bool upper_ok = false;     // assertable direction
  bool precondition = false;  // sigma_bar^2(X) <= 9 sigma_bar^2(X*) / 4
  Index sweeps = 0;
  bool converged = false;
};

Lemma5Check lemma5_check(const TTTensor& tt, const TTTensor& tt_star);

/// JSON text for a factor-distance report:
/// {dist2, sweeps, converged, lemma5_lower_ok, lemma5_upper_ok}.
std::string lemma5_report_json(const Lemma5Check& check);

/// Riemannian correlation sample: sum_i <L(X_i) - L_R(X_i*),
/// P_i(dF/dL_i)> with tangent projection on factors 1..N-1 and the
/// identity on factor N.
double regularity_inner_product(
    const TTTensor& tt, const TTTensor& tt_star,
    const std::vector<Eigen::MatrixXd>& rotations,
    const std::vector<Eigen::MatrixXd>& subgradients);

struct RegularityProbeResult {
  double min_inner = 0.0;
  double mean_inner = 0.0;
  std::vector<double> samples;
  Index skipped = 0;
};

/// Samples the Riemannian correlation at random left-orthogonal trains near
/// x_star (tangent perturbation of each factor, polar retraction back).
RegularityProbeResult regularity_probe(const GaussianEnsemble& a,
                                       const Eigen::VectorXd& y,
                                       const DenseTensor& x_star,
                                       const std::vector<Index>& ranks,
                                       Index trials, double radius,
                                       std::uint64_t seed);

}  // namespace ttr

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tensor.hpp"

namespace ttr {

/// Tensor-train representation: a chain of order-3 factors, factor i of
/// shape r_{i-1} x d_i x r_i with r_0 = r_N = 1. Factors are kept as their
/// left unfoldings L(X_i): the (r_{i-1} d_i) x r_i matrix stacking the
/// slices X_i(1),...,X_i(d_i) vertically, which is also the column-major
/// flattening of (alpha, s_i).
class TTTensor {
 public:
  TTTensor() = default;
  TTTensor(std::vector<Index> dims, std::vector<Index> ranks,
           std::vector<Eigen::MatrixXd> factors, bool left_orthogonal = false);

  const std::vector<Index>& dims() const { return dims_; }
  /// Internal ranks r_1..r_{N-1}.
  const std::vector<Index>& ranks() const { return ranks_; }
  Index order() const { return static_cast<Index>(dims_.size()); }
  Index rank_before(Index i) const { return i == 0 ? 1 : ranks_[i - 1]; }
  Index rank_after(Index i) const {
    return i + 1 == order() ? 1 : ranks_[i];
  }

  const Eigen::MatrixXd& factor(Index i) const { return factors_[i]; }
  Eigen::MatrixXd& factor(Index i) { return factors_[i]; }
  const std::vector<Eigen::MatrixXd>& factors() const { return factors_; }

  /// Slice X_i(s): the r_{i-1} x r_i block of L(X_i) for symbol s (0-based).
  Eigen::Block<const Eigen::MatrixXd> slice(Index i, Index s) const {
    return factors_[i].block(rank_before(i) * s, 0, rank_before(i),
                             rank_after(i));
  }

  bool left_orthogonal() const { return left_orthogonal_; }
  void set_left_orthogonal(bool v) { left_orthogonal_ = v; }

  DenseTensor to_dense() const;
  Index parameter_count() const;

  /// max over i < N of ||L(X_i)^T L(X_i) - I||_F.
  double orthogonality_residual() const;

 private:
  std::vector<Index> dims_;
  std::vector<Index> ranks_;
  std::vector<Eigen::MatrixXd> factors_;
  bool left_orthogonal_ = false;
};

/// X^{<=i}: the (d_1...d_i) x r_i matrix whose row (s_1...s_i) is
/// X_1(s_1)...X_i(s_i), rows in vectorization order. i in [1, N].
Eigen::MatrixXd left_interface(const TTTensor& tt, Index i);

/// Contraction of the trailing factors from..N-1 (0-based): a matrix of
/// shape rank_before(from) x (d_{from} ... d_{N-1}) whose columns are the
/// slice products X_{from}(s)...X_{N-1}(s'), columns in vectorization
/// order. from == N yields the 1x1 identity.
Eigen::MatrixXd right_interface(const TTTensor& tt, Index from);

struct TTSVDDiagnostics {
  std::vector<double> tail_norms;  // discarded singular mass per sweep step
  double error_bound = 0.0;        // sqrt(sum of squared tails)
};

/// Sequential-SVD truncation of a dense tensor to the given internal ranks.
/// Output is left-orthogonal; singular-vector signs are fixed so the
/// largest-magnitude entry of each kept left singular vector is positive
/// (ties to the lowest index).
TTTensor tt_svd(const DenseTensor& x, const std::vector<Index>& ranks,
                TTSVDDiagnostics* diag = nullptr);

/// QR sweep producing an equivalent left-orthogonal train.
TTTensor left_orthogonalize(const TTTensor& tt);

struct SpectralSummary {
  std::vector<Eigen::VectorXd> per_cut_sigmas;
  double sigma_min = 0.0;  // min over cuts of the r_i-th singular value
  double sigma_max = 0.0;  // max over cuts of the top singular value
  double kappa = 1.0;      // sigma_max / sigma_min, inf when rank-deficient
  bool rank_deficient = false;
};

SpectralSummary spectral_summary(const DenseTensor& x,
                                 const std::vector<Index>& ranks);

/// Unit-Frobenius-norm random train: seeded i.i.d. normal dense tensor,
/// TT-SVD to the target ranks, rescale the last factor.
TTTensor random_tt(const std::vector<Index>& dims,
                   const std::vector<Index>& ranks, std::uint64_t seed);

/// Left unfolding of an order-3 factor given as a dense {r_prev, d, r}
/// tensor, and its inverse.
Eigen::MatrixXd left_unfold(const DenseTensor& factor3);
DenseTensor left_refold(const Eigen::MatrixXd& mat, Index r_prev, Index d,
                        Index r);

void validate_ranks(const std::vector<Index>& dims,
                    const std::vector<Index>& ranks);

}  // namespace ttr

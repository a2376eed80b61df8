#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tensor.hpp"
#include "tt.hpp"

namespace ttr {

enum class Storage { Auto, Materialized, Streamed };

/// Gaussian measurement operator: m sensing tensors A_k with i.i.d.
/// standard normal entries. A_k is a pure function of (master_seed, k), so
/// the materialized and streamed modes produce identical measurements;
/// streaming exists because large shapes (e.g. d=40, N=3, m=12000) do not
/// fit in memory.
class GaussianEnsemble {
 public:
  GaussianEnsemble(Index m, std::vector<Index> dims, std::uint64_t master_seed,
                   Storage storage = Storage::Auto);

  Index m() const { return m_; }
  const std::vector<Index>& dims() const { return dims_; }
  Index ambient_size() const { return size_; }
  std::uint64_t master_seed() const { return seed_; }
  bool materialized() const { return materialized_; }

  /// Regenerates the entries of A_k in vectorization order.
  void fill_row(Index k, double* buf) const;

  /// y_k = <A_k, x>; entry order and summation order are fixed.
  Eigen::VectorXd apply(const DenseTensor& x) const;

  /// sum_k z_k A_k, accumulated over fixed-size row blocks in block order.
  DenseTensor adjoint(const Eigen::VectorXd& z) const;

 private:
  Index m_ = 0;
  std::vector<Index> dims_;
  Index size_ = 0;
  std::uint64_t seed_ = 0;
  bool materialized_ = false;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows_;
};

struct CorruptionModel {
  double p_s = 0.0;            // outlier fraction, must lie in [0, 0.5]
  double outlier_sigma2 = 10;  // variance of the outlier law
  std::uint64_t support_seed = 0;
  std::uint64_t value_seed = 0;
};

struct Measurements {
  Eigen::VectorXd y;
  std::vector<Index> support;  // diagnostics only; solvers never read it
};

/// Adds N(0, outlier_sigma2) outliers on a uniformly drawn support of size
/// round(p_s * m), half-up rounding.
Measurements corrupt(const Eigen::VectorXd& y_clean,
                     const CorruptionModel& model);

struct RipProbeResult {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double max_abs_deviation = 0.0;  // from sqrt(2/pi)
  std::vector<double> samples;
};

inline constexpr double kRipConstant = 0.79788456080286535588;  // sqrt(2/pi)

/// Samples (1/m)||A(X)||_1 over unit-norm random TT tensors.
RipProbeResult rip_probe(const GaussianEnsemble& a,
                         const std::vector<Index>& ranks, Index trials,
                         std::uint64_t seed);

struct SharpnessProbeResult {
  double min_ratio = 0.0;
  double mean_ratio = 0.0;
  double max_ratio = 0.0;
  Index skipped = 0;  // samples with X == X*
};

/// Samples [f(X) - f(X*)] / ||X - X*||_F over unit-norm random TT tensors.
SharpnessProbeResult sharpness_probe(const GaussianEnsemble& a,
                                     const Eigen::VectorXd& y,
                                     const DenseTensor& x_star,
                                     const std::vector<Index>& ranks,
                                     Index trials, std::uint64_t seed);

}  // namespace ttr

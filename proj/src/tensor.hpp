#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace ttr {

using Index = std::int64_t;

/// Order-N dense tensor stored in first-index-fastest vectorization order:
/// element (s_1,...,s_N) (0-based) sits at s_1 + d_1 s_2 + d_1 d_2 s_3 + ...
/// All unfoldings are plain reshapes of this one buffer.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<Index> dims);
  DenseTensor(std::vector<Index> dims, Eigen::VectorXd data);

  const std::vector<Index>& dims() const { return dims_; }
  Index order() const { return static_cast<Index>(dims_.size()); }
  Index size() const { return data_.size(); }

  Eigen::VectorXd& vec() { return data_; }
  const Eigen::VectorXd& vec() const { return data_; }

  double at(const std::vector<Index>& idx) const {
    return data_[linear_index(dims_, idx)];
  }
  double& at(const std::vector<Index>& idx) {
    return data_[linear_index(dims_, idx)];
  }

  /// Matrix view with modes 1..cut as rows and the rest as columns
  /// (cut in [1, N-1]). Zero-copy: the vectorization order factors exactly.
  Eigen::Map<const Eigen::MatrixXd> unfolding(Index cut) const;

  double frobenius_norm() const { return data_.norm(); }

  static Index linear_index(const std::vector<Index>& dims,
                            const std::vector<Index>& idx);
  static std::vector<Index> multi_index(const std::vector<Index>& dims,
                                        Index pos);
  static Index element_count(const std::vector<Index>& dims);

 private:
  std::vector<Index> dims_;
  Eigen::VectorXd data_;
};

/// Rebuild a tensor from its cut-i unfolding.
DenseTensor refold(const Eigen::MatrixXd& mat, const std::vector<Index>& dims,
                   Index cut);

}  // namespace ttr

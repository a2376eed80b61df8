#include "tensor.hpp"

#include <stdexcept>
#include <string>

namespace ttr {

Index DenseTensor::element_count(const std::vector<Index>& dims) {
  Index n = 1;
  for (Index d : dims) {
    if (d <= 0) throw std::invalid_argument("tensor extents must be positive");
    n *= d;
  }
  return n;
}

DenseTensor::DenseTensor(std::vector<Index> dims)
    : dims_(std::move(dims)),
      data_(Eigen::VectorXd::Zero(element_count(dims_))) {}

DenseTensor::DenseTensor(std::vector<Index> dims, Eigen::VectorXd data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (data_.size() != element_count(dims_))
    throw std::invalid_argument("tensor data length does not match extents");
}

Index DenseTensor::linear_index(const std::vector<Index>& dims,
                                const std::vector<Index>& idx) {
  if (idx.size() != dims.size())
    throw std::invalid_argument("multi-index order mismatch");
  Index pos = 0;
  Index stride = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= dims[i])
      throw std::out_of_range("multi-index out of range");
    pos += stride * idx[i];
    stride *= dims[i];
  }
  return pos;
}

std::vector<Index> DenseTensor::multi_index(const std::vector<Index>& dims,
                                            Index pos) {
  std::vector<Index> idx(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    idx[i] = pos % dims[i];
    pos /= dims[i];
  }
  return idx;
}

Eigen::Map<const Eigen::MatrixXd> DenseTensor::unfolding(Index cut) const {
  if (cut < 1 || cut >= order())
    throw std::out_of_range("unfolding cut must be in [1, N-1], got " +
                            std::to_string(cut));
  Index rows = 1;
  for (Index i = 0; i < cut; ++i) rows *= dims_[i];
  return {data_.data(), rows, size() / rows};
}

DenseTensor refold(const Eigen::MatrixXd& mat, const std::vector<Index>& dims,
                   Index cut) {
  DenseTensor out(dims);
  if (mat.size() != out.size())
    throw std::invalid_argument("refold shape mismatch");
  Index rows = 1;
  for (Index i = 0; i < cut; ++i) rows *= dims[i];
  if (mat.rows() != rows) throw std::invalid_argument("refold row mismatch");
  Eigen::Map<Eigen::MatrixXd>(out.vec().data(), mat.rows(), mat.cols()) = mat;
  return out;
}

}  // namespace ttr

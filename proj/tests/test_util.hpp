#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "rng.hpp"
#include "tensor.hpp"
#include "tt.hpp"

namespace ttr::test {

inline Eigen::MatrixXd random_matrix(Index rows, Index cols, SplitMix64& gen) {
  Eigen::MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = gen.next_normal();
  return m;
}

inline Eigen::MatrixXd random_orthogonal(Index n, SplitMix64& gen) {
  const Eigen::MatrixXd a = random_matrix(n, n, gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

inline DenseTensor random_dense(const std::vector<Index>& dims,
                                SplitMix64& gen) {
  DenseTensor x(dims);
  for (Index i = 0; i < x.size(); ++i) x.vec()[i] = gen.next_normal();
  return x;
}

/// Random train with arbitrary (generally non-orthogonal) factors.
inline TTTensor random_raw_tt(const std::vector<Index>& dims,
                              const std::vector<Index>& ranks,
                              SplitMix64& gen) {
  const Index n = static_cast<Index>(dims.size());
  std::vector<Eigen::MatrixXd> factors(n);
  for (Index i = 0; i < n; ++i) {
    const Index rp = i == 0 ? 1 : ranks[i - 1];
    const Index ra = i + 1 == n ? 1 : ranks[i];
    factors[i] = random_matrix(rp * dims[i], ra, gen);
  }
  return TTTensor(dims, ranks, std::move(factors));
}

/// Scalar-loop oracle for the entrywise matrix-product form: multiplies the
/// slice chain for one multi-index, independent of the library's
/// reconstruction path.
inline double chain_entry(const TTTensor& tt, const std::vector<Index>& idx) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
  for (Index i = 0; i < tt.order(); ++i) acc = (acc * tt.slice(i, idx[i])).eval();
  return acc(0, 0);
}

/// Telescoping expansion oracle:
/// A_1...A_N - A*_1...A*_N = sum_i A*_1..A*_{i-1} (A_i - A*_i) A_{i+1}..A_N.
inline Eigen::MatrixXd telescoping_sum(
    const std::vector<Eigen::MatrixXd>& a,
    const std::vector<Eigen::MatrixXd>& a_star) {
  const std::size_t n = a.size();
  Eigen::MatrixXd total =
      Eigen::MatrixXd::Zero(a.front().rows(), a.back().cols());
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.front().rows(),
                                                     a.front().rows());
    for (std::size_t j = 0; j < i; ++j) term = (term * a_star[j]).eval();
    term = (term * (a[i] - a_star[i])).eval();
    for (std::size_t j = i + 1; j < n; ++j) term = (term * a[j]).eval();
    total += term;
  }
  return total;
}

inline Eigen::MatrixXd chain_product(const std::vector<Eigen::MatrixXd>& a) {
  Eigen::MatrixXd acc = a.front();
  for (std::size_t i = 1; i < a.size(); ++i) acc = (acc * a[i]).eval();
  return acc;
}

}  // namespace ttr::test

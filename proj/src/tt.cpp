#include "tt.hpp"

#include "errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rng.hpp"

namespace ttr {

namespace {

// Deterministic full SVD; BDC only pays off once the matrix is nontrivial.
void svd_of(const Eigen::MatrixXd& m, Eigen::MatrixXd& u, Eigen::VectorXd& s,
            Eigen::MatrixXd& v) {
  if (std::min(m.rows(), m.cols()) > 16) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  }
}

// Flip column signs so the largest-magnitude entry is positive, ties broken
// by lowest index; keeps factor-level regression tests deterministic.
void fix_column_signs(Eigen::MatrixXd& u) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index argmax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best) {
        best = a;
        argmax = i;
      }
    }
    if (u(argmax, j) < 0.0) u.col(j) = -u.col(j);
  }
}

// Extend an orthonormal block to `cols` orthonormal columns. Only reached
// when a requested rank exceeds the numerical rank available mid-sweep.
Eigen::MatrixXd complete_orthonormal(const Eigen::MatrixXd& u, Index cols) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(u.rows(), cols);
  const Eigen::MatrixXd r =
      qr.matrixQR().topLeftCorner(u.cols(), u.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < u.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  q.leftCols(u.cols()) = u;
  return q;
}

}  // namespace

void validate_ranks(const std::vector<Index>& dims,
                    const std::vector<Index>& ranks) {
  const Index n = static_cast<Index>(dims.size());
  if (n < 2) throw std::invalid_argument("tensor order must be at least 2");
  if (static_cast<Index>(ranks.size()) != n - 1)
    throw std::invalid_argument("expected N-1 internal ranks");
  Index left = 1;
  Index right = DenseTensor::element_count(dims);
  for (Index i = 0; i + 1 < n; ++i) {
    left *= dims[i];
    right /= dims[i];
    if (ranks[i] <= 0) throw std::invalid_argument("ranks must be positive");
    if (ranks[i] > std::min(left, right))
      throw StructureError(
          "rank " + std::to_string(ranks[i]) + " at cut " +
          std::to_string(i + 1) + " exceeds unfolding dimension " +
          std::to_string(std::min(left, right)));
  }
}

TTTensor::TTTensor(std::vector<Index> dims, std::vector<Index> ranks,
                   std::vector<Eigen::MatrixXd> factors, bool left_orthogonal)
    : dims_(std::move(dims)),
      ranks_(std::move(ranks)),
      factors_(std::move(factors)),
      left_orthogonal_(left_orthogonal) {
  const Index n = order();
  if (static_cast<Index>(ranks_.size()) != n - 1)
    throw std::invalid_argument("expected N-1 internal ranks");
  if (static_cast<Index>(factors_.size()) != n)
    throw std::invalid_argument("expected N factors");
  for (Index i = 0; i < n; ++i) {
    if (factors_[i].rows() != rank_before(i) * dims_[i] ||
        factors_[i].cols() != rank_after(i))
      throw StructureError(
          "factor " + std::to_string(i + 1) +
          " shape disagrees with adjacent ranks: expected " +
          std::to_string(rank_before(i) * dims_[i]) + "x" +
          std::to_string(rank_after(i)));
  }
}

DenseTensor TTTensor::to_dense() const {
  Eigen::MatrixXd b = left_interface(*this, order());
  return DenseTensor(dims_, Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                                b.data(), b.size())));
}

Index TTTensor::parameter_count() const {
  Index n = 0;
  for (const auto& f : factors_) n += f.size();
  return n;
}

double TTTensor::orthogonality_residual() const {
  double worst = 0.0;
  for (Index i = 0; i + 1 < order(); ++i) {
    const Eigen::MatrixXd g = factors_[i].transpose() * factors_[i];
    worst = std::max(
        worst,
        (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).norm());
  }
  return worst;
}

Eigen::MatrixXd left_interface(const TTTensor& tt, Index upto) {
  if (upto < 1 || upto > tt.order())
    throw std::out_of_range("left_interface index out of range");
  Eigen::MatrixXd b = tt.factor(0);
  for (Index i = 1; i < upto; ++i) {
    const Index p = b.rows();
    Eigen::MatrixXd next(p * tt.dims()[i], tt.rank_after(i));
    for (Index s = 0; s < tt.dims()[i]; ++s)
      next.middleRows(s * p, p).noalias() = b * tt.slice(i, s);
    b.swap(next);
  }
  return b;
}

Eigen::MatrixXd right_interface(const TTTensor& tt, Index from) {
  const Index n = tt.order();
  if (from < 0 || from > n)
    throw std::out_of_range("right_interface index out of range");
  if (from == n) return Eigen::MatrixXd::Ones(1, 1);
  // Start with the last factor: column s is the vector X_N(s).
  const Index rl = tt.rank_before(n - 1);
  Eigen::MatrixXd r = Eigen::Map<const Eigen::MatrixXd>(
      tt.factor(n - 1).data(), rl, tt.dims()[n - 1]);
  for (Index i = n - 2; i >= from; --i) {
    const Index d = tt.dims()[i];
    const Index cols_prev = r.cols();
    Eigen::MatrixXd next(tt.rank_before(i), d * cols_prev);
    for (Index s = 0; s < d; ++s) {
      const Eigen::MatrixXd block = tt.slice(i, s) * r;
      for (Index c = 0; c < cols_prev; ++c) next.col(c * d + s) = block.col(c);
    }
    r.swap(next);
  }
  return r;
}

TTTensor tt_svd(const DenseTensor& x, const std::vector<Index>& ranks,
                TTSVDDiagnostics* diag) {
  validate_ranks(x.dims(), ranks);
  const Index n = x.order();
  std::vector<Eigen::MatrixXd> factors(n);
  if (diag) {
    diag->tail_norms.assign(n - 1, 0.0);
    diag->error_bound = 0.0;
  }

  Eigen::MatrixXd carry = Eigen::Map<const Eigen::MatrixXd>(
      x.vec().data(), x.dims()[0], x.size() / x.dims()[0]);
  Index r_prev = 1;
  double bound_sq = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    // carry holds the (r_{i-1} d_i) x (d_{i+1}...d_N) sweep matrix.
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
    svd_of(carry, u, s, v);
    const Index avail = s.size();
    const Index r = ranks[i];
    const Index keep = std::min<Index>(r, avail);

    Eigen::MatrixXd uk = u.leftCols(keep);
    fix_column_signs(uk);
    if (keep < r) uk = complete_orthonormal(uk, r);

    double tail_sq = 0.0;
    for (Index j = keep; j < avail; ++j) tail_sq += s[j] * s[j];
    if (diag) diag->tail_norms[i] = std::sqrt(tail_sq);
    bound_sq += tail_sq;

    factors[i] = uk;
    Eigen::MatrixXd reduced = uk.transpose() * carry;  // r x (d_{i+1}...d_N)
    const Index d_next = x.dims()[i + 1];
    carry = Eigen::Map<const Eigen::MatrixXd>(reduced.data(), r * d_next,
                                              reduced.size() / (r * d_next));
    r_prev = r;
  }
  factors[n - 1] = Eigen::Map<const Eigen::MatrixXd>(
      carry.data(), r_prev * x.dims()[n - 1], 1);
  if (diag) diag->error_bound = std::sqrt(bound_sq);
  return TTTensor(x.dims(), ranks, std::move(factors), true);
}

TTTensor left_orthogonalize(const TTTensor& tt) {
  const Index n = tt.order();
  std::vector<Eigen::MatrixXd> factors(tt.factors());
  for (Index i = 0; i + 1 < n; ++i) {
    Eigen::MatrixXd& l = factors[i];
    if (l.rows() < l.cols())
      throw StructureError(
          "factor " + std::to_string(i + 1) +
          " cannot be orthonormalized: rank exceeds r_prev*d");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(l);
    Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(l.rows(), l.cols());
    Eigen::MatrixXd r = qr.matrixQR()
                            .topLeftCorner(l.cols(), l.cols())
                            .triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < r.rows(); ++j) {
      if (r(j, j) < 0.0) {
        r.row(j) = -r.row(j);
        q.col(j) = -q.col(j);
      }
    }
    l = q;
    // Push R into the next factor slice by slice.
    Eigen::MatrixXd& nxt = factors[i + 1];
    const Index ri = l.cols();
    for (Index s = 0; s < tt.dims()[i + 1]; ++s)
      nxt.middleRows(s * ri, ri) = r * nxt.middleRows(s * ri, ri);
  }
  return TTTensor(tt.dims(), tt.ranks(), std::move(factors), true);
}

SpectralSummary spectral_summary(const DenseTensor& x,
                                 const std::vector<Index>& ranks) {
  validate_ranks(x.dims(), ranks);
  SpectralSummary out;
  out.sigma_min = std::numeric_limits<double>::infinity();
  out.sigma_max = 0.0;
  for (Index cut = 1; cut < x.order(); ++cut) {
    const Eigen::MatrixXd m = x.unfolding(cut);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd& s = svd.singularValues();
    out.per_cut_sigmas.push_back(s);
    out.sigma_max = std::max(out.sigma_max, s[0]);
    out.sigma_min = std::min(out.sigma_min, s[ranks[cut - 1] - 1]);
  }
  // Numerically zero at the declared rank counts as deficient.
  if (out.sigma_min <= out.sigma_max * 1e-14) {
    out.rank_deficient = true;
    out.kappa = std::numeric_limits<double>::infinity();
  } else {
    out.kappa = out.sigma_max / out.sigma_min;
  }
  return out;
}

TTTensor random_tt(const std::vector<Index>& dims,
                   const std::vector<Index>& ranks, std::uint64_t seed) {
  validate_ranks(dims, ranks);
  DenseTensor x(dims);
  SplitMix64 gen(seed);
  for (Index i = 0; i < x.size(); ++i) x.vec()[i] = gen.next_normal();
  TTTensor tt = tt_svd(x, ranks);
  const Index n = tt.order();
  const double norm = tt.factor(n - 1).norm();  // = ||dense||_F, left-orthogonal
  if (norm == 0.0) throw std::runtime_error("degenerate random tensor draw");
  tt.factor(n - 1) /= norm;
  return tt;
}

Eigen::MatrixXd left_unfold(const DenseTensor& factor3) {
  if (factor3.order() != 3)
    throw std::invalid_argument("left_unfold expects an order-3 factor");
  const auto& d = factor3.dims();
  return Eigen::Map<const Eigen::MatrixXd>(factor3.vec().data(), d[0] * d[1],
                                           d[2]);
}

DenseTensor left_refold(const Eigen::MatrixXd& mat, Index r_prev, Index d,
                        Index r) {
  if (mat.rows() != r_prev * d || mat.cols() != r)
    throw std::invalid_argument("left_refold shape mismatch");
  return DenseTensor({r_prev, d, r},
                     Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                         mat.data(), mat.size())));
}

}  // namespace ttr

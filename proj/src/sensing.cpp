#include "sensing.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"

namespace ttr {

namespace {

constexpr Index kRowBlock = 1024;
// Materialize up to ~512 MiB of sensing rows; beyond that, stream.
constexpr Index kMaterializeCap = Index(512) * 1024 * 1024 / 8;

}  // namespace

GaussianEnsemble::GaussianEnsemble(Index m, std::vector<Index> dims,
                                   std::uint64_t master_seed, Storage storage)
    : m_(m),
      dims_(std::move(dims)),
      size_(DenseTensor::element_count(dims_)),
      seed_(master_seed) {
  if (m_ <= 0) throw std::invalid_argument("measurement count must be positive");
  switch (storage) {
    case Storage::Materialized:
      materialized_ = true;
      break;
    case Storage::Streamed:
      materialized_ = false;
      break;
    case Storage::Auto:
      materialized_ = m_ * size_ <= kMaterializeCap;
      break;
  }
  if (materialized_) {
    rows_.resize(m_, size_);
    parallel_chunks(m_, kRowBlock, [&](Index, Index lo, Index hi) {
      for (Index k = lo; k < hi; ++k) fill_row(k, rows_.row(k).data());
    });
  }
}

void GaussianEnsemble::fill_row(Index k, double* buf) const {
  SplitMix64 gen(derive_seed(seed_, static_cast<std::uint64_t>(k)));
  for (Index i = 0; i < size_; ++i) buf[i] = gen.next_normal();
}

Eigen::VectorXd GaussianEnsemble::apply(const DenseTensor& x) const {
  if (x.dims() != dims_)
    throw std::invalid_argument("ensemble/tensor dimension mismatch");
  Eigen::VectorXd y(m_);
  const Eigen::VectorXd& v = x.vec();
  if (materialized_) {
    parallel_chunks(m_, kRowBlock, [&](Index, Index lo, Index hi) {
      for (Index k = lo; k < hi; ++k)
        y[k] = Eigen::Map<const Eigen::VectorXd>(rows_.row(k).data(), size_)
                   .dot(v);
    });
  } else {
    parallel_chunks(m_, kRowBlock, [&](Index, Index lo, Index hi) {
      Eigen::VectorXd row(size_);
      for (Index k = lo; k < hi; ++k) {
        fill_row(k, row.data());
        y[k] = Eigen::Map<const Eigen::VectorXd>(row.data(), size_).dot(v);
      }
    });
  }
  return y;
}

DenseTensor GaussianEnsemble::adjoint(const Eigen::VectorXd& z) const {
  if (z.size() != m_)
    throw std::invalid_argument("adjoint weight length mismatch");
  const Index nblocks = (m_ + kRowBlock - 1) / kRowBlock;
  // Per-block partials, reduced in block order: bit-stable at any thread
  // count and identical between storage modes.
  std::vector<Eigen::VectorXd> partial(nblocks);
  if (materialized_) {
    parallel_chunks(m_, kRowBlock, [&](Index c, Index lo, Index hi) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(size_);
      for (Index k = lo; k < hi; ++k)
        acc += z[k] * Eigen::Map<const Eigen::VectorXd>(rows_.row(k).data(),
                                                        size_);
      partial[c] = std::move(acc);
    });
  } else {
    parallel_chunks(m_, kRowBlock, [&](Index c, Index lo, Index hi) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(size_);
      Eigen::VectorXd row(size_);
      for (Index k = lo; k < hi; ++k) {
        fill_row(k, row.data());
        acc += z[k] * Eigen::Map<const Eigen::VectorXd>(row.data(), size_);
      }
      partial[c] = std::move(acc);
    });
  }
  DenseTensor out(dims_);
  for (Index c = 0; c < nblocks; ++c) out.vec() += partial[c];
  return out;
}

Measurements corrupt(const Eigen::VectorXd& y_clean,
                     const CorruptionModel& model) {
  if (model.p_s < 0.0 || model.p_s > 0.5)
    throw ConfigError("outlier fraction p_s must lie in [0, 0.5]");
  if (model.outlier_sigma2 < 0.0)
    throw ConfigError("outlier variance must be nonnegative");
  const Index m = y_clean.size();
  const Index count = static_cast<Index>(std::llround(model.p_s * m));

  Measurements out;
  out.y = y_clean;
  if (count == 0) return out;

  // Partial Fisher-Yates draw of `count` distinct indices.
  std::vector<Index> pool(m);
  for (Index i = 0; i < m; ++i) pool[i] = i;
  SplitMix64 sup(model.support_seed);
  for (Index i = 0; i < count; ++i) {
    const Index j = i + static_cast<Index>(sup.next_u64() %
                                           static_cast<std::uint64_t>(m - i));
    std::swap(pool[i], pool[j]);
  }
  out.support.assign(pool.begin(), pool.begin() + count);
  std::sort(out.support.begin(), out.support.end());

  const double sigma = std::sqrt(model.outlier_sigma2);
  SplitMix64 val(model.value_seed);
  for (Index k : out.support) out.y[k] += sigma * val.next_normal();
  return out;
}

RipProbeResult rip_probe(const GaussianEnsemble& a,
                         const std::vector<Index>& ranks, Index trials,
                         std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("rip_probe needs trials >= 1");
  RipProbeResult out;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -std::numeric_limits<double>::infinity();
  out.samples.reserve(trials);
  double sum = 0.0;
  for (Index t = 0; t < trials; ++t) {
    const TTTensor x = random_tt(a.dims(), ranks, derive_seed(seed, t));
    const double sample =
        a.apply(x.to_dense()).lpNorm<1>() / static_cast<double>(a.m());
    out.samples.push_back(sample);
    sum += sample;
    out.min = std::min(out.min, sample);
    out.max = std::max(out.max, sample);
  }
  out.mean = sum / static_cast<double>(trials);
  for (double s : out.samples)
    out.max_abs_deviation =
        std::max(out.max_abs_deviation, std::abs(s - kRipConstant));
  return out;
}

SharpnessProbeResult sharpness_probe(const GaussianEnsemble& a,
                                     const Eigen::VectorXd& y,
                                     const DenseTensor& x_star,
                                     const std::vector<Index>& ranks,
                                     Index trials, std::uint64_t seed) {
  if (trials < 1)
    throw std::invalid_argument("sharpness_probe needs trials >= 1");
  const double m = static_cast<double>(a.m());
  const double f_star = (a.apply(x_star) - y).lpNorm<1>() / m;

  SharpnessProbeResult out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  Index used = 0;
  for (Index t = 0; t < trials; ++t) {
    const DenseTensor x =
        random_tt(a.dims(), ranks, derive_seed(seed, t)).to_dense();
    const double denom = (x.vec() - x_star.vec()).norm();
    if (denom < 1e-15) {
      ++out.skipped;
      continue;
    }
    const double ratio = ((a.apply(x) - y).lpNorm<1>() / m - f_star) / denom;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
    sum += ratio;
    ++used;
  }
  if (used > 0) out.mean_ratio = sum / static_cast<double>(used);
  return out;
}

}  // namespace ttr

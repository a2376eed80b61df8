#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "test_util.hpp"

using namespace ttr;

TEST_CASE("vectorization order round-trips every multi-index") {
  const std::vector<std::vector<Index>> shapes = {
      {2, 2}, {3, 2}, {2, 3, 4}, {4, 3, 2, 2}, {2, 2, 2, 2, 2}, {4, 4, 4, 2, 3}};
  for (const auto& dims : shapes) {
    const Index total = DenseTensor::element_count(dims);
    std::vector<bool> seen(total, false);
    std::vector<Index> idx(dims.size(), 0);
    // walk all multi-indices, first index fastest
    for (Index pos = 0; pos < total; ++pos) {
      const Index lin = DenseTensor::linear_index(dims, idx);
      CHECK_FALSE(seen[lin]);
      seen[lin] = true;
      CHECK(DenseTensor::multi_index(dims, lin) == idx);
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (++idx[i] < dims[i]) break;
        idx[i] = 0;
      }
    }
  }
}

TEST_CASE("explicit position formula") {
  // element (s1,s2,s3) lives at s1 + d1(s2-1) + d1 d2 (s3-1), 1-based
  const std::vector<Index> dims = {3, 4, 5};
  CHECK(DenseTensor::linear_index(dims, {0, 0, 0}) == 0);
  CHECK(DenseTensor::linear_index(dims, {2, 1, 3}) == 2 + 3 * 1 + 12 * 3);
}

TEST_CASE("tt_to_dense: all-ones factors give the all-ones tensor") {
  const std::vector<Index> dims = {2, 3, 2};
  std::vector<Eigen::MatrixXd> factors;
  for (Index d : dims) factors.push_back(Eigen::MatrixXd::Ones(d, 1));
  const TTTensor tt(dims, {1, 1}, std::move(factors));
  const DenseTensor x = tt.to_dense();
  for (Index i = 0; i < x.size(); ++i) CHECK(x.vec()[i] == doctest::Approx(1.0));
}

TEST_CASE("tt_to_dense: explicit 2x2 chain product") {
  const double a = 1.5, b = -2.0, c = 0.25, d = 4.0;
  Eigen::MatrixXd l1(2, 2);
  l1 << 1, 0, 0, 1;  // slices [1 0] and [0 1]
  Eigen::MatrixXd l2(4, 1);
  l2 << a, b, c, d;  // slices [a;b] and [c;d]
  const TTTensor tt({2, 2}, {2}, {l1, l2});
  const DenseTensor x = tt.to_dense();
  CHECK(x.at({0, 0}) == doctest::Approx(a));
  CHECK(x.at({1, 0}) == doctest::Approx(b));
  CHECK(x.at({0, 1}) == doctest::Approx(c));
  CHECK(x.at({1, 1}) == doctest::Approx(d));
}

TEST_CASE("tt_to_dense agrees with the entrywise chain oracle") {
  SplitMix64 gen(2024);
  const std::vector<Index> dims = {4, 4, 4};
  const std::vector<Index> ranks = {2, 2};
  const TTTensor tt = test::random_raw_tt(dims, ranks, gen);
  const DenseTensor x = tt.to_dense();
  for (Index pos = 0; pos < x.size(); ++pos) {
    const auto idx = DenseTensor::multi_index(dims, pos);
    CHECK(x.vec()[pos] ==
          doctest::Approx(test::chain_entry(tt, idx)).epsilon(1e-12));
  }
}

TEST_CASE("tt_to_dense rejects mismatched adjacent ranks") {
  Eigen::MatrixXd l1 = Eigen::MatrixXd::Ones(2, 2);
  Eigen::MatrixXd l2 = Eigen::MatrixXd::Ones(3 * 2, 1);  // expects r_prev = 3
  CHECK_THROWS_AS(TTTensor({2, 2}, {2}, {l1, l2}), StructureError);
}

TEST_CASE("unfold: 2x2x2 counting tensor") {
  Eigen::VectorXd data(8);
  for (Index i = 0; i < 8; ++i) data[i] = static_cast<double>(i + 1);
  const DenseTensor x({2, 2, 2}, data);

  const Eigen::MatrixXd u1 = x.unfolding(1);
  Eigen::MatrixXd want1(2, 4);
  want1 << 1, 3, 5, 7, 2, 4, 6, 8;
  CHECK((u1 - want1).norm() == doctest::Approx(0.0));

  const Eigen::MatrixXd u2 = x.unfolding(2);
  Eigen::MatrixXd want2(4, 2);
  want2 << 1, 5, 2, 6, 3, 7, 4, 8;
  CHECK((u2 - want2).norm() == doctest::Approx(0.0));

  CHECK_THROWS(x.unfolding(0));
  CHECK_THROWS(x.unfolding(3));
}

TEST_CASE("unfold then refold is the identity") {
  SplitMix64 gen(7);
  const DenseTensor x = test::random_dense({3, 4, 2, 3}, gen);
  for (Index cut = 1; cut < x.order(); ++cut) {
    const DenseTensor back = refold(x.unfolding(cut), x.dims(), cut);
    CHECK((back.vec() - x.vec()).norm() == 0.0);
  }
}

TEST_CASE("tt_svd: exact-rank input is reconstructed to 1e-9") {
  const std::vector<Index> dims = {4, 4, 4};
  const std::vector<Index> ranks = {2, 2};
  const DenseTensor x = random_tt(dims, ranks, 99).to_dense();
  const TTTensor out = tt_svd(x, ranks);
  const double rel =
      (out.to_dense().vec() - x.vec()).norm() / x.vec().norm();
  CHECK(rel <= 1e-9);
  CHECK(out.left_orthogonal());
  CHECK(out.orthogonality_residual() <= 1e-10);
}

TEST_CASE("tt_svd: rank-1 outer product is exact") {
  SplitMix64 gen(5);
  const std::vector<Index> dims = {3, 4, 5};
  Eigen::VectorXd u = test::random_matrix(3, 1, gen);
  Eigen::VectorXd v = test::random_matrix(4, 1, gen);
  Eigen::VectorXd w = test::random_matrix(5, 1, gen);
  DenseTensor x(dims);
  for (Index k = 0; k < 5; ++k)
    for (Index j = 0; j < 4; ++j)
      for (Index i = 0; i < 3; ++i)
        x.at({i, j, k}) = u[i] * v[j] * w[k];
  const TTTensor out = tt_svd(x, {1, 1});
  const double rel =
      (out.to_dense().vec() - x.vec()).norm() / x.vec().norm();
  CHECK(rel <= 1e-9);
}

TEST_CASE("tt_svd: reported tail bound dominates the measured residual") {
  SplitMix64 gen(11);
  const DenseTensor x = test::random_dense({4, 4, 4}, gen);
  TTSVDDiagnostics diag;
  const TTTensor out = tt_svd(x, {2, 2}, &diag);
  const double measured = (out.to_dense().vec() - x.vec()).norm();
  CHECK(measured <= diag.error_bound * (1.0 + 1e-10) + 1e-12);
  CHECK(diag.tail_norms.size() == 2);
}

TEST_CASE("tt_svd: 100 seeded exact-rank instances reconstruct to 1e-9") {
  Index count = 0;
  for (Index n : {3, 4})
    for (Index d : {3, 4, 5, 6})
      for (Index r : {1, 2, 3}) {
        if (r > d) continue;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
          const std::vector<Index> dims(n, d);
          const std::vector<Index> ranks(n - 1, r);
          const DenseTensor x =
              random_tt(dims, ranks, derive_seed(31337, seed * 100 + count))
                  .to_dense();
          const TTTensor out = tt_svd(x, ranks);
          const double rel =
              (out.to_dense().vec() - x.vec()).norm() / x.vec().norm();
          CHECK(rel <= 1e-9);
          ++count;
        }
      }
  CHECK(count >= 100);
}

TEST_CASE("tt_svd rejects ranks beyond the unfolding dimension") {
  SplitMix64 gen(3);
  const DenseTensor x = test::random_dense({2, 2, 2}, gen);
  CHECK_THROWS_AS(tt_svd(x, {3, 1}), StructureError);
}

TEST_CASE("left_orthogonalize preserves the dense tensor") {
  SplitMix64 gen(13);
  const std::vector<Index> dims = {3, 4, 3, 2};
  const std::vector<Index> ranks = {2, 3, 2};
  const TTTensor tt = test::random_raw_tt(dims, ranks, gen);
  const TTTensor ortho = left_orthogonalize(tt);
  const Eigen::VectorXd before = tt.to_dense().vec();
  const Eigen::VectorXd after = ortho.to_dense().vec();
  CHECK((before - after).norm() / before.norm() <= 1e-10);
  CHECK(ortho.orthogonality_residual() <= 1e-10);
}

TEST_CASE("left_orthogonalize: idempotent up to rotation") {
  const TTTensor tt = random_tt({4, 4, 4}, {2, 2}, 17);  // already orthogonal
  const TTTensor again = left_orthogonalize(tt);
  CHECK((again.to_dense().vec() - tt.to_dense().vec()).norm() <= 1e-12);
  CHECK(again.orthogonality_residual() <= 1e-12);
}

TEST_CASE("left_orthogonalize: gauge scaling is invisible in the dense tensor") {
  SplitMix64 gen(19);
  TTTensor tt = test::random_raw_tt({3, 3, 3}, {2, 2}, gen);
  const Eigen::VectorXd reference = left_orthogonalize(tt).to_dense().vec();
  tt.factor(0) *= 5.0;
  tt.factor(1) *= 0.2;
  const Eigen::VectorXd scaled = left_orthogonalize(tt).to_dense().vec();
  CHECK((scaled - reference).norm() / reference.norm() <= 1e-12);
}

TEST_CASE("gauge invariance: inserting R, R^T between factors") {
  SplitMix64 gen(23);
  const std::vector<Index> dims = {3, 4, 3};
  const std::vector<Index> ranks = {2, 2};
  TTTensor tt = test::random_raw_tt(dims, ranks, gen);
  const Eigen::VectorXd before = tt.to_dense().vec();
  const Eigen::MatrixXd r = test::random_orthogonal(2, gen);
  tt.factor(0) = tt.factor(0) * r;
  for (Index s = 0; s < dims[1]; ++s)
    tt.factor(1).middleRows(s * 2, 2) = r.transpose() *
                                        tt.factor(1).middleRows(s * 2, 2);
  CHECK((tt.to_dense().vec() - before).norm() <= 1e-12 * before.norm());
}

TEST_CASE("left-orthogonal norm identity") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    const TTTensor tt = random_tt({3, 4, 5}, {2, 3}, seed);
    const double dense_norm = tt.to_dense().frobenius_norm();
    const double last_norm = tt.factor(tt.order() - 1).norm();
    CHECK(dense_norm ==
          doctest::Approx(last_norm).epsilon(1e-10));
  }
}

TEST_CASE("telescoping expansion for random matrix chains") {
  SplitMix64 gen(29);
  for (int n = 2; n <= 5; ++n) {
    std::vector<Index> sizes(n + 1);
    sizes[0] = 1;
    sizes[n] = 1;
    for (int i = 1; i < n; ++i)
      sizes[i] = 2 + static_cast<Index>(gen.next_u64() % 3);
    std::vector<Eigen::MatrixXd> a, a_star;
    for (int i = 0; i < n; ++i) {
      a.push_back(test::random_matrix(sizes[i], sizes[i + 1], gen));
      a_star.push_back(test::random_matrix(sizes[i], sizes[i + 1], gen));
    }
    const Eigen::MatrixXd direct =
        test::chain_product(a) - test::chain_product(a_star);
    const Eigen::MatrixXd expanded = test::telescoping_sum(a, a_star);
    CHECK((direct - expanded).norm() <= 1e-12 * (1.0 + direct.norm()));
  }
}

TEST_CASE("left_unfold of an order-3 factor and its inverse") {
  // slices [1,2] and [3,4] of a 1x2x2 factor
  DenseTensor f({1, 2, 2});
  f.at({0, 0, 0}) = 1;
  f.at({0, 0, 1}) = 2;
  f.at({0, 1, 0}) = 3;
  f.at({0, 1, 1}) = 4;
  const Eigen::MatrixXd l = left_unfold(f);
  Eigen::MatrixXd want(2, 2);
  want << 1, 2, 3, 4;
  CHECK((l - want).norm() == 0.0);

  const DenseTensor back = left_refold(l, 1, 2, 2);
  CHECK((back.vec() - f.vec()).norm() == 0.0);

  // identity-slice factor with d = 1
  const Index r = 3;
  DenseTensor ident({r, 1, r});
  for (Index i = 0; i < r; ++i) ident.at({i, 0, i}) = 1.0;
  CHECK((left_unfold(ident) - Eigen::MatrixXd::Identity(r, r)).norm() == 0.0);
}

TEST_CASE("left_refold round-trips a random factor") {
  SplitMix64 gen(37);
  const DenseTensor f = test::random_dense({2, 3, 4}, gen);
  const DenseTensor back = left_refold(left_unfold(f), 2, 3, 4);
  CHECK((back.vec() - f.vec()).norm() == 0.0);
}

TEST_CASE("spectral_summary: rank-1 unit tensor") {
  TTTensor tt = random_tt({3, 3, 3}, {1, 1}, 41);
  const SpectralSummary s = spectral_summary(tt.to_dense(), {1, 1});
  CHECK(s.sigma_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.sigma_max == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.kappa == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral_summary: superdiagonal 2x2x2") {
  DenseTensor x({2, 2, 2});
  x.at({0, 0, 0}) = 3.0;
  x.at({1, 1, 1}) = 1.0;
  const SpectralSummary s = spectral_summary(x, {2, 2});
  CHECK(s.sigma_max == doctest::Approx(3.0));
  CHECK(s.sigma_min == doctest::Approx(1.0));
  CHECK(s.kappa == doctest::Approx(3.0));
  CHECK_FALSE(s.rank_deficient);
}

TEST_CASE("spectral_summary: homogeneous under positive scaling") {
  SplitMix64 gen(43);
  const DenseTensor x = test::random_dense({3, 3, 3}, gen);
  const SpectralSummary s1 = spectral_summary(x, {2, 2});
  DenseTensor scaled(x.dims(), 2.5 * x.vec());
  const SpectralSummary s2 = spectral_summary(scaled, {2, 2});
  CHECK(s2.sigma_min == doctest::Approx(2.5 * s1.sigma_min).epsilon(1e-12));
  CHECK(s2.sigma_max == doctest::Approx(2.5 * s1.sigma_max).epsilon(1e-12));
  CHECK(s2.kappa == doctest::Approx(s1.kappa).epsilon(1e-12));
}

TEST_CASE("spectral_summary flags rank deficiency at the declared rank") {
  const DenseTensor x = random_tt({3, 3, 3}, {1, 1}, 47).to_dense();
  const SpectralSummary s = spectral_summary(x, {2, 2});
  CHECK(s.rank_deficient);
  CHECK(std::isinf(s.kappa));
}

TEST_CASE("random_tt: deterministic, unit norm, left-orthogonal") {
  const TTTensor a = random_tt({4, 4, 4}, {2, 2}, 123);
  const TTTensor b = random_tt({4, 4, 4}, {2, 2}, 123);
  for (Index i = 0; i < a.order(); ++i)
    CHECK((a.factor(i) - b.factor(i)).norm() == 0.0);

  CHECK(a.to_dense().frobenius_norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.orthogonality_residual() <= 1e-10);

  const TTTensor c = random_tt({4, 4, 4}, {2, 2}, 124);
  CHECK((a.to_dense().vec() - c.to_dense().vec()).norm() > 1e-3);
}

/*
 * Copyright 2026 The tailfair Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracle_values.hpp"
#include "tailfair/synthesis.hpp"
#include "test_support.hpp"

using namespace tailfair;

namespace {

std::vector<Label> repeated_labels(int K, std::size_t per_class) {
  std::vector<Label> y;
  for (int k = 0; k < K; ++k) y.insert(y.end(), per_class, k);
  return y;
}

void check_row_stochastic(const NoiseTransition& t) {
  const Matrix& m = t.matrix();
  CHECK((m.array() >= 0.0).all());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    CHECK(std::abs(m.row(i).sum() - 1.0) <= kRowSumTolerance);
  }
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("longtail_counts matches frozen values") {
  const auto check = [](const LongTailSpec& s, const auto& want) {
    const auto got = longtail_counts(s);
    REQUIRE(got.size() == want.size());
    CHECK(std::equal(got.begin(), got.end(), want.begin()));
  };
  check({5000, 100.0, 10}, oracle::kLongTail_5000_10_100);
  check({5000, 50.0, 10}, oracle::kLongTail_5000_10_50);
  check({5000, 10.0, 10}, oracle::kLongTail_5000_10_10);
  check({5000, 100.0, 100}, oracle::kLongTail_5000_100_100);
  check({37, 3.7, 7}, oracle::kLongTail_37_7_3p7);
}

TEST_CASE("longtail_counts is nonincreasing with the requested ends") {
  for (double r : {1.0, 2.0, 10.0, 100.0, 250.0}) {
    const auto c = longtail_counts({5000, r, 10});
    CHECK(c.front() == 5000);
    CHECK(std::is_sorted(c.rbegin(), c.rend()));
    CHECK(c.back() == static_cast<std::size_t>(std::floor(5000.0 / r)));
  }
  const auto clamp = longtail_counts({3, 100.0, 4});
  CHECK(clamp.back() == 1);
}

TEST_CASE("transition builders are row-stochastic") {
  check_row_stochastic(identity_transition(5));
  for (double rho : {0.0, 0.2, 0.5, 0.9}) check_row_stochastic(sym_transition(10, rho));
  const auto c = longtail_counts({5000, 100.0, 10});
  std::vector<double> priors(c.begin(), c.end());
  const double total = std::accumulate(priors.begin(), priors.end(), 0.0);
  for (auto& p : priors) p /= total;
  for (double rho : {0.1, 0.2, 0.4}) {
    const auto t = imb_transition(10, rho, priors);
    check_row_stochastic(t);
    CHECK(t.matrix().diagonal().isConstant(1.0 - rho, 1e-12));
    // Flips favor the frequent classes.
    CHECK(t(9, 0) > t(9, 8));
  }
  check_row_stochastic(binary_transition(0.3, 0.1));
  CHECK(binary_transition(0.3, 0.1)(kNegative, kPositive) == 0.3);
  CHECK(binary_transition(0.3, 0.1)(kPositive, kNegative) == 0.1);
}

TEST_CASE("sym transition off-diagonal value") {
  const auto t = sym_transition(10, 0.2);
  CHECK(t(0, 0) == doctest::Approx(0.8));
  CHECK(t(3, 7) == doctest::Approx(oracle::kSymOffDiag_10_0p2).epsilon(1e-15));
  CHECK(t.max_off_diagonal() == doctest::Approx(oracle::kSymOffDiag_10_0p2));
}

TEST_CASE("from_matrix rejects non-stochastic input") {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.3, 0.6;
  CHECK_THROWS_AS(NoiseTransition::from_matrix(m), Error);
  m << 1.2, -0.2, 0.0, 1.0;
  CHECK_THROWS_AS(NoiseTransition::from_matrix(m), Error);
  m << 1.0 - 1e-13, 1e-13, 0.0, 1.0;
  CHECK_NOTHROW(NoiseTransition::from_matrix(m));
}

TEST_CASE("identity noise returns the clean labels") {
  const auto y = repeated_labels(7, 30);
  CHECK(apply_noise(y, identity_transition(7), 11) == y);
}

TEST_CASE("sym noise flip rates within three standard errors") {
  const std::size_t per = 10000;
  const auto y = repeated_labels(10, per);
  const auto noisy = apply_noise(y, sym_transition(10, 0.2), 42);
  for (int k = 0; k < 10; ++k) {
    std::size_t flips = 0;
    std::vector<std::size_t> into(10, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] != k) continue;
      if (noisy[i] != k) ++flips;
      ++into[static_cast<std::size_t>(noisy[i])];
    }
    CHECK(std::abs(static_cast<double>(flips) / per - 0.2) <= testing::three_se(0.2, per));
    for (int j = 0; j < 10; ++j) {
      if (j == k) continue;
      const double q = oracle::kSymOffDiag_10_0p2;
      // 90 cells per seed: 4 SE keeps the family-wise false alarm rate near 0.5%.
      CHECK(std::abs(static_cast<double>(into[j]) / per - q) <= 4.0 / 3.0 * testing::three_se(q, per));
    }
  }
}

TEST_CASE("imb noise empirical transition matches the matrix") {
  const std::size_t per = 20000;
  const auto y = repeated_labels(4, per);
  const std::vector<double> priors{0.4, 0.3, 0.2, 0.1};
  const auto t = imb_transition(4, 0.3, priors);
  const auto noisy = apply_noise(y, t, 8);
  Matrix counts = Matrix::Zero(4, 4);
  for (std::size_t i = 0; i < y.size(); ++i) counts(y[i], noisy[i]) += 1.0;
  counts /= static_cast<double>(per);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs(counts(i, j) - t(i, j)) <= 4.0 / 3.0 * testing::three_se(t(i, j), per) + 1e-12);
}

TEST_CASE("generators are deterministic in the seed") {
  const auto y = repeated_labels(5, 200);
  CHECK(apply_noise(y, sym_transition(5, 0.4), 3) == apply_noise(y, sym_transition(5, 0.4), 3));
  CHECK(apply_noise(y, sym_transition(5, 0.4), 3) != apply_noise(y, sym_transition(5, 0.4), 4));

  const Matrix centers = class_centers(5, 8, 3.0, 17);
  CHECK(centers == class_centers(5, 8, 3.0, 17));
  CHECK(std::abs(centers.row(2).norm() - 3.0) < 1e-12);
  const std::vector<std::size_t> per(5, 40);
  const auto a = gaussian_blobs(centers, per, 1.0, 5);
  const auto b = gaussian_blobs(centers, per, 1.0, 5);
  CHECK(a.features() == b.features());
  CHECK(a.noisy_labels() == b.noisy_labels());

  const auto big = gaussian_blobs(centers, std::vector<std::size_t>(5, 1000), 1.0, 5);
  const auto s1 = subsample_longtail(big, {1000, 20.0, 5}, 77);
  const auto s2 = subsample_longtail(big, {1000, 20.0, 5}, 77);
  CHECK(s1.features() == s2.features());

  GaussianMixtureSpec gs;
  gs.count_plus = 300;
  gs.count_minus = 200;
  const auto m1 = gaussian_mixture(gs, 9);
  CHECK(m1.features() == gaussian_mixture(gs, 9).features());
  CHECK(m1.groups()->ids() == gaussian_mixture(gs, 9).groups()->ids());
}

TEST_CASE("subsample_longtail realizes the profile and keeps row order") {
  const Matrix centers = class_centers(10, 2, 3.0, 1);
  auto full = gaussian_blobs(centers, std::vector<std::size_t>(10, 5000), 1.0, 2);
  // Tag each row with its original index so order can be checked.
  RowMatrix x = full.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = static_cast<double>(i);
  full = LabeledCorpus(x, full.clean_labels(), full.noisy_labels(), 10);
  const auto lt = subsample_longtail(full, {5000, 100.0, 10}, 4);
  std::vector<std::size_t> counts(10, 0);
  for (Label y : *lt.clean_labels()) ++counts[static_cast<std::size_t>(y)];
  CHECK(std::equal(counts.begin(), counts.end(), oracle::kLongTail_5000_10_100.begin()));
  for (Eigen::Index i = 1; i < lt.features().rows(); ++i)
    CHECK(lt.features()(i - 1, 0) < lt.features()(i, 0));
  CHECK_THROWS_WITH_AS(subsample_longtail(full, {6000, 100.0, 10}, 4),
                       "insufficient class population", Error);
}

TEST_CASE("gaussian mixture tail fraction matches the normal tail") {
  GaussianMixtureSpec gs;
  gs.count_plus = 100000;
  gs.count_minus = 100000;
  const auto m = gaussian_mixture(gs, 123);
  const auto& g = *m.groups();
  std::vector<std::size_t> pop(4, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    ++pop[static_cast<std::size_t>(g[i])];
    const double x = m.features()(static_cast<Eigen::Index>(i), 0);
    const Label y = (*m.clean_labels())[i];
    const bool head = g[i] == kHeadPlus || g[i] == kHeadMinus;
    CHECK(is_head(gs, x, y) == head);
  }
  const double n = 100000.0;
  const double q = oracle::kPhiMinus1;
  CHECK(std::abs(pop[kTailPlus] / n - q) <= testing::three_se(q, n));
  CHECK(std::abs(pop[kTailMinus] / n - q) <= testing::three_se(q, n));
  CHECK((*m.clean_labels())[0] == kPositive);
  CHECK(m.noisy_labels() == *m.clean_labels());
}

TEST_CASE("population noise flips each population at its own rate") {
  GaussianMixtureSpec gs;
  gs.count_plus = 60000;
  gs.count_minus = 60000;
  const auto m = gaussian_mixture(gs, 5);
  const auto head = binary_transition(0.05, 0.1);
  const auto tail = binary_transition(0.2, 0.3);
  const auto noisy = population_noise(m, head, tail, 6);
  std::vector<double> n(4, 0.0), f(4, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto p = static_cast<std::size_t>((*m.groups())[i]);
    n[p] += 1.0;
    if (noisy.noisy_labels()[i] != (*m.clean_labels())[i]) f[p] += 1.0;
  }
  const double want[4] = {0.1, 0.3, 0.05, 0.2};
  for (int p = 0; p < 4; ++p)
    CHECK(std::abs(f[p] / n[p] - want[p]) <= testing::three_se(want[p], n[p]));
  CHECK_THROWS_WITH_AS(population_noise(m, binary_transition(0.5, 0.1), tail, 6),
                       "noise rate too large", Error);
}

TEST_CASE("empirical priors") {
  const std::vector<Label> y{0, 0, 1, 2, 2, 2};
  const auto p = empirical_priors(y, 4);
  CHECK(p[0] == doctest::Approx(1.0 / 3));
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[3] == 0.0);
}

}

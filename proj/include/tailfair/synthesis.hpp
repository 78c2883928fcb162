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

#pragma once

// Long-tailed corpus generation and label-noise injection.

#include <cstdint>
#include <span>
#include <vector>

#include "tailfair/core.hpp"
#include "tailfair/datamodel.hpp"

namespace tailfair {

// Row-stochastic K x K matrix, entry (i, j) = P(noisy = j | clean = i).
class NoiseTransition {
 public:
  // Throws unless entries are nonnegative and each row sums to 1 within 1e-12.
  static NoiseTransition from_matrix(Matrix entries);

  const Matrix& matrix() const { return entries_; }
  int class_count() const { return static_cast<int>(entries_.rows()); }
  double operator()(Label clean, Label noisy) const { return entries_(clean, noisy); }
  double max_off_diagonal() const;

 private:
  explicit NoiseTransition(Matrix entries) : entries_(std::move(entries)) {}
  Matrix entries_;
};

inline constexpr double kRowSumTolerance = 1e-12;

NoiseTransition identity_transition(int class_count);

// Symmetric flipping: diagonal 1 - rho, off-diagonal rho / (K - 1).
NoiseTransition sym_transition(int class_count, double rho);

// Flips biased toward frequent classes: T[i][j] = priors[j] * rho / (1 - priors[i]).
NoiseTransition imb_transition(int class_count, double rho, std::span<const double> priors);

// Binary transition with rows ordered (negative, positive):
//   [[1 - rho_minus, rho_minus], [rho_plus, 1 - rho_plus]].
NoiseTransition binary_transition(double rho_minus, double rho_plus);

struct LongTailSpec {
  std::size_t base_count = 0;
  double imbalance_ratio = 1.0;
  int class_count = 2;
};

// count[k] = floor(n / r^(k / (K - 1))) for 0-based k, clamped below at 1.
std::vector<std::size_t> longtail_counts(const LongTailSpec& spec);

// Per-class uniform sampling without replacement down to longtail_counts(spec)
// using the clean labels. Surviving rows keep their original relative order.
LabeledCorpus subsample_longtail(const LabeledCorpus& corpus, const LongTailSpec& spec,
                                 std::uint64_t seed);

// Each noisy label drawn independently from row T[clean].
std::vector<Label> apply_noise(std::span<const Label> clean_labels, const NoiseTransition& t,
                               std::uint64_t seed);

// Clean-label frequencies, used as the default priors of the imbalanced model.
std::vector<double> empirical_priors(std::span<const Label> labels, int class_count);

// Binary labels: index 0 is the negative class, index 1 the positive class.
inline constexpr Label kNegative = 0;
inline constexpr Label kPositive = 1;

// Head/tail population ids produced by gaussian_mixture.
enum Population : GroupId {
  kHeadPlus = 0,
  kTailPlus = 1,
  kHeadMinus = 2,
  kTailMinus = 3,
};
inline constexpr int kPopulationCount = 4;

struct GaussianMixtureSpec {
  double mu_plus = 5.0;
  double mu_minus = -5.0;
  double sigma = 1.0;
  double eta = 1.0;
  std::size_t count_plus = 0;
  std::size_t count_minus = 0;
};

// Whether x lies in the head of class y: (x - mu_y) / sigma * sign(y) >= -eta.
bool is_head(const GaussianMixtureSpec& spec, double x, Label y);

// One-dimensional binary mixture with the four-way head/tail assignment.
// Positive samples come first. Noisy labels start equal to clean labels.
LabeledCorpus gaussian_mixture(const GaussianMixtureSpec& spec, std::uint64_t seed);

// Flips head rows by `head` and tail rows by `tail` (both 2 x 2). Throws
// "noise rate too large" when an off-diagonal entry reaches 0.5.
LabeledCorpus population_noise(const LabeledCorpus& corpus, const NoiseTransition& head,
                               const NoiseTransition& tail, std::uint64_t seed);

// Isotropic Gaussian class blobs used as the stand-in feature source for
// multi-class experiments. Centers are drawn on a sphere of radius
// `separation`.
Matrix class_centers(int class_count, Eigen::Index dim, double separation, std::uint64_t seed);
LabeledCorpus gaussian_blobs(const Matrix& centers, std::span<const std::size_t> per_class,
                             double sigma, std::uint64_t seed);

}  // namespace tailfair

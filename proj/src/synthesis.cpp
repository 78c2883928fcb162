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

#include "tailfair/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tailfair/rng.hpp"

namespace tailfair {

NoiseTransition NoiseTransition::from_matrix(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw Error("transition matrix must be square");
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const double v = entries(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw Error("transition entry outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error("transition row " + std::to_string(i) + " does not sum to 1");
    }
  }
  return NoiseTransition(std::move(entries));
}

double NoiseTransition::max_off_diagonal() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      if (i != j) m = std::max(m, entries_(i, j));
    }
  }
  return m;
}

NoiseTransition identity_transition(int class_count) {
  return NoiseTransition::from_matrix(Matrix::Identity(class_count, class_count));
}

NoiseTransition sym_transition(int class_count, double rho) {
  if (class_count < 2) throw Error("sym transition needs K >= 2");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error("noise rate outside [0, 1)");
  Matrix t = Matrix::Constant(class_count, class_count, rho / (class_count - 1));
  t.diagonal().setConstant(1.0 - rho);
  return NoiseTransition::from_matrix(std::move(t));
}

NoiseTransition imb_transition(int class_count, double rho, std::span<const double> priors) {
  if (class_count < 2) throw Error("imb transition needs K >= 2");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error("noise rate outside [0, 1)");
  if (priors.size() != static_cast<std::size_t>(class_count)) {
    throw Error("prior count differs from class count");
  }
  for (double p : priors) {
    if (!(p > 0.0)) throw Error("priors must be positive");
    if (1.0 - p <= 1e-12) throw Error("degenerate prior");
  }
  const double total = std::accumulate(priors.begin(), priors.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw Error("priors must sum to 1");

  Matrix t(class_count, class_count);
  for (int i = 0; i < class_count; ++i) {
    // Normalize by the realized off-diagonal mass so rounding in the priors
    // cannot break the row sum.
    const double off_mass = total - priors[static_cast<std::size_t>(i)];
    for (int j = 0; j < class_count; ++j) {
      t(i, j) = i == j ? 1.0 - rho : priors[static_cast<std::size_t>(j)] * rho / off_mass;
    }
  }
  return NoiseTransition::from_matrix(std::move(t));
}

NoiseTransition binary_transition(double rho_minus, double rho_plus) {
  Matrix t(2, 2);
  t << 1.0 - rho_minus, rho_minus, rho_plus, 1.0 - rho_plus;
  return NoiseTransition::from_matrix(std::move(t));
}

std::vector<std::size_t> longtail_counts(const LongTailSpec& spec) {
  if (spec.imbalance_ratio < 1.0) throw Error("imbalance ratio must be >= 1");
  if (spec.base_count < 1) throw Error("base count must be >= 1");
  if (spec.class_count < 1) throw Error("class count must be >= 1");
  std::vector<std::size_t> counts(static_cast<std::size_t>(spec.class_count));
  const long double n = static_cast<long double>(spec.base_count);
  const long double r = spec.imbalance_ratio;
  for (int k = 0; k < spec.class_count; ++k) {
    const long double exponent =
        spec.class_count == 1 ? 0.0L
                              : static_cast<long double>(k) / (spec.class_count - 1);
    const long double c = std::floor(n / std::pow(r, exponent));
    counts[static_cast<std::size_t>(k)] = std::max<std::size_t>(1, static_cast<std::size_t>(c));
  }
  return counts;
}

LabeledCorpus subsample_longtail(const LabeledCorpus& corpus, const LongTailSpec& spec,
                                 std::uint64_t seed) {
  if (!corpus.has_clean_labels()) throw Error("long-tail subsampling needs clean labels");
  if (spec.class_count != corpus.class_count()) throw Error("class count mismatch");
  const auto targets = longtail_counts(spec);

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(spec.class_count));
  const auto& clean = *corpus.clean_labels();
  for (std::size_t i = 0; i < clean.size(); ++i) members[static_cast<std::size_t>(clean[i])].push_back(i);

  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < members.size(); ++k) {
    auto& pool = members[k];
    const std::size_t target = targets[k];
    if (pool.size() < target) throw Error("insufficient class population");
    Rng rng(seed, Stream::kLongTail, k);
    for (std::size_t i = 0; i < target; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    }
    kept.insert(kept.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(target));
  }
  std::sort(kept.begin(), kept.end());
  return corpus.select_rows(kept);
}

namespace {

Label draw_from_row(const NoiseTransition& t, Label clean, Rng& rng) {
  const double u = rng.uniform();
  double cdf = 0.0;
  const int K = t.class_count();
  for (Label j = 0; j < K; ++j) {
    cdf += t(clean, j);
    if (u < cdf) return j;
  }
  // u landed in the rounding slack above the last partial sum.
  for (Label j = K - 1; j >= 0; --j) {
    if (t(clean, j) > 0.0) return j;
  }
  return clean;
}

}  // namespace

std::vector<Label> apply_noise(std::span<const Label> clean_labels, const NoiseTransition& t,
                               std::uint64_t seed) {
  Rng rng(seed, Stream::kNoise);
  std::vector<Label> noisy(clean_labels.size());
  for (std::size_t i = 0; i < clean_labels.size(); ++i) {
    const Label y = clean_labels[i];
    if (y < 0 || y >= t.class_count()) throw Error("label out of range");
    noisy[i] = draw_from_row(t, y, rng);
  }
  return noisy;
}

std::vector<double> empirical_priors(std::span<const Label> labels, int class_count) {
  std::vector<double> priors(static_cast<std::size_t>(class_count), 0.0);
  for (Label y : labels) priors[static_cast<std::size_t>(y)] += 1.0;
  for (double& p : priors) p /= static_cast<double>(labels.size());
  return priors;
}

bool is_head(const GaussianMixtureSpec& spec, double x, Label y) {
  const double sign = y == kPositive ? 1.0 : -1.0;
  return (x - (y == kPositive ? spec.mu_plus : spec.mu_minus)) / spec.sigma * sign >= -spec.eta;
}

LabeledCorpus gaussian_mixture(const GaussianMixtureSpec& spec, std::uint64_t seed) {
  if (!(spec.sigma > 0.0)) throw Error("sigma must be positive");
  if (!(spec.mu_plus > spec.mu_minus)) throw Error("mu_plus must exceed mu_minus");
  if (!(spec.eta >= 0.0)) throw Error("eta must be nonnegative");
  const std::size_t n = spec.count_plus + spec.count_minus;
  RowMatrix x(static_cast<Eigen::Index>(n), 1);
  std::vector<Label> labels(n);
  std::vector<GroupId> groups(n);
  Rng rng(seed, Stream::kFeatures);
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = i < spec.count_plus ? kPositive : kNegative;
    const double v = rng.normal(y == kPositive ? spec.mu_plus : spec.mu_minus, spec.sigma);
    x(static_cast<Eigen::Index>(i), 0) = v;
    labels[i] = y;
    const bool head = is_head(spec, v, y);
    groups[i] = y == kPositive ? (head ? kHeadPlus : kTailPlus) : (head ? kHeadMinus : kTailMinus);
  }
  return LabeledCorpus(std::move(x), labels, labels, 2,
                       GroupAssignment(std::move(groups), kPopulationCount));
}

LabeledCorpus population_noise(const LabeledCorpus& corpus, const NoiseTransition& head,
                               const NoiseTransition& tail, std::uint64_t seed) {
  if (head.class_count() != 2 || tail.class_count() != 2) {
    throw Error("population noise needs 2 x 2 transitions");
  }
  if (head.max_off_diagonal() >= 0.5 || tail.max_off_diagonal() >= 0.5) {
    throw Error("noise rate too large");
  }
  if (!corpus.has_clean_labels() || !corpus.has_groups() ||
      corpus.groups()->group_count() != kPopulationCount) {
    throw Error("population noise needs a head/tail corpus");
  }
  const auto& clean = *corpus.clean_labels();
  const auto& groups = *corpus.groups();
  Rng rng(seed, Stream::kNoise);
  std::vector<Label> noisy(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const bool is_tail = groups[i] == kTailPlus || groups[i] == kTailMinus;
    noisy[i] = draw_from_row(is_tail ? tail : head, clean[i], rng);
  }
  return corpus.with_noisy_labels(std::move(noisy));
}

Matrix class_centers(int class_count, Eigen::Index dim, double separation, std::uint64_t seed) {
  Rng rng(seed, Stream::kClassCenters);
  Matrix centers(class_count, dim);
  for (int k = 0; k < class_count; ++k) {
    for (Eigen::Index j = 0; j < dim; ++j) centers(k, j) = rng.normal();
    const double norm = centers.row(k).norm();
    if (norm > 0.0) centers.row(k) *= separation / norm;
  }
  return centers;
}

LabeledCorpus gaussian_blobs(const Matrix& centers, std::span<const std::size_t> per_class,
                             double sigma, std::uint64_t seed) {
  if (per_class.size() != static_cast<std::size_t>(centers.rows())) {
    throw Error("per-class count list differs from center count");
  }
  const std::size_t n = std::accumulate(per_class.begin(), per_class.end(), std::size_t{0});
  RowMatrix x(static_cast<Eigen::Index>(n), centers.cols());
  std::vector<Label> labels(n);
  std::size_t row = 0;
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    Rng rng(seed, Stream::kFeatures, k);
    for (std::size_t i = 0; i < per_class[k]; ++i, ++row) {
      for (Eigen::Index j = 0; j < centers.cols(); ++j) {
        x(static_cast<Eigen::Index>(row), j) =
            rng.normal(centers(static_cast<Eigen::Index>(k), j), sigma);
      }
      labels[row] = static_cast<Label>(k);
    }
  }
  return LabeledCorpus(std::move(x), labels, labels, static_cast<int>(centers.rows()));
}

}  // namespace tailfair

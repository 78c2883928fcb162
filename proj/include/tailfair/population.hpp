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

// Sub-population assignment: k-means over features, two-group score split,
// and plain-text loaders.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tailfair/core.hpp"
#include "tailfair/datamodel.hpp"

namespace tailfair {

struct KMeansResult {
  Matrix centroids;  // N x d
  GroupAssignment assignment;
  double inertia = 0.0;
  // Inertia after each Lloyd step, starting with the seeded centroids.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

struct KMeansOptions {
  int max_iters = 100;
  double tol = 1e-8;
};

// k-means++ seeding followed by Lloyd iterations. The returned assignment is
// always nearest-centroid (lowest index on ties) for the returned centroids.
KMeansResult kmeans_groups(const RowMatrix& features, int group_count, std::uint64_t seed,
                           const KMeansOptions& options = {});

// Index of the nearest row of `centroids` to `point`, lowest index on ties.
template <typename Point>
int nearest_centroid(const Matrix& centroids, const Eigen::MatrixBase<Point>& point,
                     double* squared_distance = nullptr) {
  int best = 0;
  double best_d = (centroids.row(0) - point).squaredNorm();
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (squared_distance != nullptr) *squared_distance = best_d;
  return best;
}

// Group 0 holds the round(head_fraction * n) highest scores, group 1 the
// rest. Equal scores keep sample order, earlier samples first.
GroupAssignment split_two_groups(std::span<const double> scores, double head_fraction);

// One non-negative integer per line; N is inferred as max + 1.
GroupAssignment load_groups(const std::string& path, std::size_t expected_rows);
std::vector<double> load_scores(const std::string& path, std::size_t expected_rows);

}  // namespace tailfair

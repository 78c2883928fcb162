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

#include "tailfair/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tailfair/rng.hpp"
#include "tailfair/text_io.hpp"

namespace tailfair {
namespace {

Matrix seed_plus_plus(const RowMatrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centroids(k, x.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  Eigen::Index pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total <= 0.0) {
        pick = 0;
        while (chosen[static_cast<std::size_t>(pick)]) ++pick;
      } else {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += d2[static_cast<std::size_t>(i)];
          if (d2[static_cast<std::size_t>(i)] > 0.0 && target < acc) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {  // rounding put target past the last partial sum
          for (Eigen::Index i = n - 1; i >= 0; --i) {
            if (d2[static_cast<std::size_t>(i)] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      }
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - x.row(pick)).squaredNorm());
    }
  }
  return centroids;
}

double assign(const RowMatrix& x, const Matrix& centroids, std::vector<GroupId>& labels,
              std::vector<double>& dist) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double d = 0.0;
    labels[static_cast<std::size_t>(i)] = nearest_centroid(centroids, x.row(i), &d);
    dist[static_cast<std::size_t>(i)] = d;
    inertia += d;
  }
  return inertia;
}

void update_centroids(const RowMatrix& x, const std::vector<GroupId>& labels,
                      std::vector<double>& dist, Matrix& centroids) {
  const Eigen::Index k = centroids.rows();
  Matrix sums = Matrix::Zero(k, x.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      continue;
    }
    // Empty cluster: move it onto the worst-fit point, then zero that point's
    // distance so a second empty cluster picks a different one.
    const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
    centroids.row(c) = x.row(far);
    dist[static_cast<std::size_t>(far)] = 0.0;
  }
}

}  // namespace

KMeansResult kmeans_groups(const RowMatrix& features, int group_count, std::uint64_t seed,
                           const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (group_count < 1) throw Error("N must be >= 1");
  if (static_cast<std::size_t>(group_count) > n) throw Error("N exceeds n");

  Rng rng(seed, Stream::kKMeansInit);
  KMeansResult result;
  result.centroids = seed_plus_plus(features, group_count, rng);

  std::vector<GroupId> labels(n);
  std::vector<double> dist(n);
  double inertia = assign(features, result.centroids, labels, dist);
  result.inertia_trace.push_back(inertia);

  for (int it = 0; it < options.max_iters; ++it) {
    update_centroids(features, labels, dist, result.centroids);
    std::vector<GroupId> next(n);
    const double next_inertia = assign(features, result.centroids, next, dist);
    result.inertia_trace.push_back(next_inertia);
    result.iterations = it + 1;
    const bool unchanged = next == labels;
    const double improvement = inertia - next_inertia;
    labels = std::move(next);
    inertia = next_inertia;
    if (unchanged || improvement < options.tol) break;
  }

  result.inertia = inertia;
  result.assignment = GroupAssignment(std::move(labels), group_count);
  return result;
}

GroupAssignment split_two_groups(std::span<const double> scores, double head_fraction) {
  if (!(head_fraction > 0.0 && head_fraction < 1.0)) throw Error("head fraction outside (0, 1)");
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error("non-finite score");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto head = static_cast<std::size_t>(std::lround(head_fraction * static_cast<double>(n)));
  std::vector<GroupId> ids(n, 1);
  for (std::size_t i = 0; i < head; ++i) ids[order[i]] = 0;
  return GroupAssignment(std::move(ids), 2);
}

namespace {

std::vector<std::string_view> nonblank_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

GroupAssignment load_groups(const std::string& path, std::size_t expected_rows) {
  const std::string text = read_text_file(path);
  const auto lines = nonblank_lines(text);
  std::vector<GroupId> ids;
  ids.reserve(lines.size());
  GroupId max_id = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    long long v = 0;
    try {
      v = parse_int(lines[i]);
    } catch (const Error&) {
      throw Error("non-integer line " + std::to_string(i + 1) + " in " + path);
    }
    if (v < 0) throw Error("negative id at line " + std::to_string(i + 1) + " in " + path);
    ids.push_back(static_cast<GroupId>(v));
    max_id = std::max(max_id, ids.back());
  }
  if (ids.size() != expected_rows) {
    throw Error("length mismatch: " + std::to_string(ids.size()) + " group ids for " +
                std::to_string(expected_rows) + " rows");
  }
  const int group_count = ids.empty() ? 1 : max_id + 1;
  return GroupAssignment(std::move(ids), group_count);
}

std::vector<double> load_scores(const std::string& path, std::size_t expected_rows) {
  const std::string text = read_text_file(path);
  std::vector<double> scores;
  for (auto line : nonblank_lines(text)) scores.push_back(parse_double(line));
  if (scores.size() != expected_rows) {
    throw Error("length mismatch: " + std::to_string(scores.size()) + " scores for " +
                std::to_string(expected_rows) + " rows");
  }
  return scores;
}

}  // namespace tailfair

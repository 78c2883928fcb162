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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tailfair/core.hpp"

namespace tailfair {

// Per-sample sub-population index in [0, group_count).
class GroupAssignment {
 public:
  GroupAssignment() = default;
  GroupAssignment(std::vector<GroupId> group_ids, int group_count)
      : group_ids_(std::move(group_ids)), group_count_(group_count) {}

  const std::vector<GroupId>& ids() const { return group_ids_; }
  int group_count() const { return group_count_; }
  std::size_t size() const { return group_ids_.size(); }
  GroupId operator[](std::size_t i) const { return group_ids_[i]; }

  // Members per group; ids outside [0, group_count) are not counted.
  std::vector<std::size_t> member_counts() const;

 private:
  std::vector<GroupId> group_ids_;
  int group_count_ = 1;
};

// The dataset record every module consumes. Immutable once built; the
// with_* helpers return modified copies.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;
  LabeledCorpus(RowMatrix features, std::optional<std::vector<Label>> clean_labels,
                std::vector<Label> noisy_labels, int class_count,
                std::optional<GroupAssignment> groups = std::nullopt);

  const RowMatrix& features() const { return features_; }
  const std::optional<std::vector<Label>>& clean_labels() const { return clean_labels_; }
  const std::vector<Label>& noisy_labels() const { return noisy_labels_; }
  int class_count() const { return class_count_; }
  const std::optional<GroupAssignment>& groups() const { return groups_; }

  std::size_t size() const { return noisy_labels_.size(); }
  Eigen::Index dim() const { return features_.cols(); }
  bool has_clean_labels() const { return clean_labels_.has_value(); }
  bool has_groups() const { return groups_.has_value(); }

  // Clean labels when present, otherwise the noisy ones.
  const std::vector<Label>& reference_labels() const {
    return clean_labels_ ? *clean_labels_ : noisy_labels_;
  }

  LabeledCorpus with_noisy_labels(std::vector<Label> noisy) const;
  LabeledCorpus with_groups(std::optional<GroupAssignment> groups) const;
  // Rows in the given order (indices may repeat).
  LabeledCorpus select_rows(const std::vector<std::size_t>& rows) const;

 private:
  RowMatrix features_;
  std::optional<std::vector<Label>> clean_labels_;
  std::vector<Label> noisy_labels_;
  int class_count_ = 2;
  std::optional<GroupAssignment> groups_;
};

struct Violation {
  std::optional<std::size_t> row;
  std::string message;
};

// Empty when every invariant holds.
std::vector<Violation> validate_corpus(const LabeledCorpus& corpus);

struct CorpusSummary {
  std::vector<std::size_t> per_class_counts;
  std::vector<std::size_t> per_group_counts;
  // max count / min nonzero count; absent when every class is empty.
  std::optional<double> empirical_imbalance_ratio;
  // Fraction of rows with noisy != clean; absent without clean labels.
  std::optional<double> empirical_noise_rate;
};

// Class counts tally clean labels when present, noisy labels otherwise.
CorpusSummary corpus_stats(const LabeledCorpus& corpus);

// CSV with header feat_0..feat_{d-1},clean_label,noisy_label,group_id (absent
// columns omitted) plus a JSON sidecar next to it carrying K, N, d, n.
std::string metadata_path_for(const std::string& csv_path);
void write_corpus(const std::string& csv_path, const LabeledCorpus& corpus);
LabeledCorpus read_corpus(const std::string& csv_path);

}  // namespace tailfair

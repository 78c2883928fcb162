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

#include "tailfair/datamodel.hpp"

#include <algorithm>
#include <sstream>

namespace tailfair {

std::vector<std::size_t> GroupAssignment::member_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(group_count_, 0)), 0);
  for (GroupId g : group_ids_) {
    if (g >= 0 && g < group_count_) ++counts[static_cast<std::size_t>(g)];
  }
  return counts;
}

LabeledCorpus::LabeledCorpus(RowMatrix features,
                             std::optional<std::vector<Label>> clean_labels,
                             std::vector<Label> noisy_labels, int class_count,
                             std::optional<GroupAssignment> groups)
    : features_(std::move(features)),
      clean_labels_(std::move(clean_labels)),
      noisy_labels_(std::move(noisy_labels)),
      class_count_(class_count),
      groups_(std::move(groups)) {}

LabeledCorpus LabeledCorpus::with_noisy_labels(std::vector<Label> noisy) const {
  LabeledCorpus out = *this;
  out.noisy_labels_ = std::move(noisy);
  return out;
}

LabeledCorpus LabeledCorpus::with_groups(std::optional<GroupAssignment> groups) const {
  LabeledCorpus out = *this;
  out.groups_ = std::move(groups);
  return out;
}

LabeledCorpus LabeledCorpus::select_rows(const std::vector<std::size_t>& rows) const {
  RowMatrix features(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<Label> noisy(rows.size());
  std::optional<std::vector<Label>> clean;
  if (clean_labels_) clean.emplace(rows.size());
  std::optional<GroupAssignment> groups;
  std::vector<GroupId> ids;
  if (groups_) ids.resize(rows.size());

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    features.row(static_cast<Eigen::Index>(i)) = features_.row(static_cast<Eigen::Index>(r));
    noisy[i] = noisy_labels_[r];
    if (clean) (*clean)[i] = (*clean_labels_)[r];
    if (groups_) ids[i] = (*groups_)[r];
  }
  if (groups_) groups.emplace(std::move(ids), groups_->group_count());
  return LabeledCorpus(std::move(features), std::move(clean), std::move(noisy),
                       class_count_, std::move(groups));
}

namespace {

std::string row_message(const char* what, std::size_t row) {
  std::ostringstream os;
  os << what << " at row " << row;
  return os.str();
}

void check_labels(const std::vector<Label>& labels, int class_count, const char* what,
                  std::vector<Violation>& out) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      out.push_back({i, row_message(what, i)});
    }
  }
}

}  // namespace

std::vector<Violation> validate_corpus(const LabeledCorpus& corpus) {
  std::vector<Violation> out;
  const std::size_t n = corpus.size();
  if (corpus.class_count() < 2) {
    out.push_back({std::nullopt, "class count below 2"});
  }
  if (static_cast<std::size_t>(corpus.features().rows()) != n) {
    out.push_back({std::nullopt, "feature row count mismatch"});
  }
  check_labels(corpus.noisy_labels(), corpus.class_count(), "label out of range", out);
  if (corpus.clean_labels()) {
    if (corpus.clean_labels()->size() != n) {
      out.push_back({std::nullopt, "clean label length mismatch"});
    }
    check_labels(*corpus.clean_labels(), corpus.class_count(), "clean label out of range", out);
  }
  if (corpus.groups()) {
    const GroupAssignment& g = *corpus.groups();
    if (g.group_count() < 1) out.push_back({std::nullopt, "group count below 1"});
    if (g.size() != n) out.push_back({std::nullopt, "assignment length mismatch"});
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] < 0 || g[i] >= g.group_count()) {
        out.push_back({i, row_message("group id out of range", i)});
      }
    }
  }
  return out;
}

CorpusSummary corpus_stats(const LabeledCorpus& corpus) {
  CorpusSummary s;
  s.per_class_counts.assign(static_cast<std::size_t>(corpus.class_count()), 0);
  for (Label y : corpus.reference_labels()) ++s.per_class_counts[static_cast<std::size_t>(y)];
  if (corpus.groups()) s.per_group_counts = corpus.groups()->member_counts();

  std::size_t max_count = 0;
  std::size_t min_nonzero = 0;
  for (std::size_t c : s.per_class_counts) {
    max_count = std::max(max_count, c);
    if (c > 0 && (min_nonzero == 0 || c < min_nonzero)) min_nonzero = c;
  }
  if (min_nonzero > 0) {
    s.empirical_imbalance_ratio =
        static_cast<double>(max_count) / static_cast<double>(min_nonzero);
  }

  if (corpus.clean_labels()) {
    const auto& clean = *corpus.clean_labels();
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) flipped += clean[i] != corpus.noisy_labels()[i];
    s.empirical_noise_rate =
        clean.empty() ? 0.0 : static_cast<double>(flipped) / static_cast<double>(clean.size());
  }
  return s;
}

}  // namespace tailfair

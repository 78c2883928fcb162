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

#include "tailfair/influence.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace tailfair {

LabeledCorpus remove_group(const LabeledCorpus& corpus, GroupId group) {
  if (!corpus.has_groups()) throw Error("missing group assignment");
  const auto& groups = *corpus.groups();
  if (group < 0 || group >= groups.group_count()) throw Error("unknown group " + std::to_string(group));
  std::vector<std::size_t> keep;
  keep.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] != group) keep.push_back(i);
  }
  return corpus.select_rows(keep);
}

namespace {

InfluenceReport compare(const Evaluation& full, const Evaluation& ablated, GroupId group,
                        std::uint64_t seed) {
  InfluenceReport r;
  r.removed_group = group;
  r.seed = seed;
  r.overall_delta = full.accuracy - ablated.accuracy;
  r.acc_p.resize(full.per_group.size());
  for (std::size_t g = 0; g < r.acc_p.size(); ++g) r.acc_p[g] = full.per_group[g] - ablated.per_group[g];
  r.acc_c.resize(full.per_class.size());
  for (std::size_t k = 0; k < r.acc_c.size(); ++k) r.acc_c[k] = full.per_class[k] - ablated.per_class[k];
  r.infl.resize(full.sample_prob.size());
  for (std::size_t j = 0; j < r.infl.size(); ++j) r.infl[j] = full.sample_prob[j] - ablated.sample_prob[j];
  return r;
}

Evaluation train_ablated(const LabeledCorpus& train_corpus, const LabeledCorpus& eval_corpus,
                         GroupId group, const ModelSpec& spec, const TrainConfig& config) {
  const LabeledCorpus reduced = remove_group(train_corpus, group);
  if (reduced.size() == 0) throw Error("group covers entire corpus");
  return evaluate(train(reduced, eval_corpus, spec, config).params, eval_corpus);
}

}  // namespace

InfluenceReport influence_of_group(const LabeledCorpus& train_corpus, const LabeledCorpus& eval_corpus,
                                   GroupId group, const ModelSpec& spec, const TrainConfig& config) {
  auto reports = influence_sweep(train_corpus, eval_corpus, {group}, spec, config, 1);
  return std::move(reports.front());
}

std::vector<InfluenceReport> influence_sweep(const LabeledCorpus& train_corpus,
                                             const LabeledCorpus& eval_corpus,
                                             const std::vector<GroupId>& groups,
                                             const ModelSpec& spec, const TrainConfig& config,
                                             unsigned jobs) {
  if (groups.empty()) return {};
  if (!eval_corpus.has_groups()) throw Error("eval corpus needs a group assignment");
  if (!train_corpus.has_groups()) throw Error("missing group assignment");
  for (GroupId g : groups) {
    if (g < 0 || g >= train_corpus.groups()->group_count()) throw Error("unknown group " + std::to_string(g));
  }

  const Evaluation full = evaluate(train(train_corpus, eval_corpus, spec, config).params, eval_corpus);

  std::vector<InfluenceReport> reports(groups.size());
  std::vector<std::exception_ptr> errors(groups.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < groups.size(); i = next++) {
      try {
        reports[i] = compare(full, train_ablated(train_corpus, eval_corpus, groups[i], spec, config),
                             groups[i], config.seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(groups.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

BoxSummary box_summary(std::vector<double> values) {
  BoxSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  const double iqr = s.q3 - s.q1;
  s.lower_fence = s.q1 - 1.5 * iqr;
  s.upper_fence = s.q3 + 1.5 * iqr;
  for (double v : values) {
    if (v < s.lower_fence || v > s.upper_fence) s.outliers.push_back(v);
  }
  return s;
}

}  // namespace tailfair

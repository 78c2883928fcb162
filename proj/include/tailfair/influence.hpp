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

// Leave-one-population-out retraining: how removing a group from training
// changes per-group, per-class and per-sample evaluation results.

#include <vector>

#include "tailfair/datamodel.hpp"
#include "tailfair/trainer.hpp"

namespace tailfair {

// Rows whose group differs from `group`; ids are kept, so the group simply
// becomes empty. Throws "unknown group".
LabeledCorpus remove_group(const LabeledCorpus& corpus, GroupId group);

struct InfluenceReport {
  GroupId removed_group = 0;
  std::vector<double> acc_p;  // per eval group: full - ablated accuracy
  std::vector<double> acc_c;  // per class
  std::vector<double> infl;   // per eval sample: full - ablated probability of the clean label
  double overall_delta = 0.0;
  std::uint64_t seed = 0;
};

// Trains on the full and on the ablated corpus with the same config and
// seed. Throws "group covers entire corpus" when nothing would remain.
InfluenceReport influence_of_group(const LabeledCorpus& train_corpus, const LabeledCorpus& eval_corpus,
                                   GroupId group, const ModelSpec& spec, const TrainConfig& config);

// One report per listed group, in list order. The full model is trained once;
// ablations run on up to `jobs` threads and do not depend on scheduling.
std::vector<InfluenceReport> influence_sweep(const LabeledCorpus& train_corpus,
                                             const LabeledCorpus& eval_corpus,
                                             const std::vector<GroupId>& groups,
                                             const ModelSpec& spec, const TrainConfig& config,
                                             unsigned jobs = 1);

// Box-plot summary with Tukey fences at 1.5 IQR. Quartiles interpolate
// linearly between order statistics.
struct BoxSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::vector<double> outliers;
  std::size_t count = 0;
};

BoxSummary box_summary(std::vector<double> values);

}  // namespace tailfair

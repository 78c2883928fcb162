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

// Mini-batch SGD for small softmax classifiers on the combined objective.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailfair/core.hpp"
#include "tailfair/datamodel.hpp"
#include "tailfair/objectives.hpp"

namespace tailfair {

enum class ModelKind { kLinear, kOneHidden };

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::kLinear;
  Eigen::Index input_dim = 1;
  Eigen::Index hidden_dim = 0;  // one_hidden only
  int class_count = 2;
};

// linear:     z = w1 x + b1
// one_hidden: z = w2 tanh(w1 x + b1) + b2
struct ModelParams {
  ModelSpec spec;
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  RowMatrix logits(const RowMatrix& x) const;
  bool operator==(const ModelParams& other) const;
};

// Weights uniform in +-1/sqrt(fan_in), biases zero.
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed);

// Decision threshold of a two-class linear model on one feature: the x where
// both logits tie.
double binary_linear_threshold(const ModelParams& params);

struct LrSchedule {
  double initial = 0.1;
  std::vector<int> decay_epochs;  // 0-based epochs at which the rate is multiplied
  double decay_factor = 0.1;

  double at(int epoch) const;
};

struct TrainConfig {
  int epochs = 10;
  std::size_t batch_size = 128;
  LrSchedule lr;
  double momentum = 0.9;
  double weight_decay = 0.0;  // applied to weights, not biases
  std::uint64_t seed = 0;
  FrConfig fr;
  LossConfig loss;
};

struct Evaluation {
  double accuracy = 0.0;
  std::vector<double> per_class;  // 0 for classes absent from the corpus
  std::vector<double> per_group;  // empty without an assignment
  std::vector<std::size_t> class_counts;
  std::vector<std::size_t> group_counts;
  std::vector<double> sample_prob;  // softmax mass on each row's reference label
  std::vector<Label> predictions;
};

// Argmax prediction, lowest index on ties, scored against clean labels (noisy
// labels when the corpus has none).
Evaluation evaluate(const ModelParams& params, const LabeledCorpus& corpus);

struct EpochRecord {
  double base_loss = 0.0;     // sample-weighted mean over the epoch's batches
  double fr_penalty = 0.0;    // mean over the epoch's batches
  double train_accuracy = 0.0;  // against noisy labels, at epoch end
  double eval_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  Evaluation final_eval;
  double best_eval_accuracy = 0.0;
  int best_epoch = 0;
  ModelParams params;
};

TrainReport train(const LabeledCorpus& corpus, const LabeledCorpus& eval_corpus,
                  const ModelSpec& spec, const TrainConfig& config);

// One JSON object per epoch followed by a summary line.
std::string report_to_jsonl(const TrainReport& report);

// Text format: a header line with the spec, then for each tensor a line
// "name rows cols" followed by its entries one per line, row-major.
std::string params_to_text(const ModelParams& params);
ModelParams params_from_text(const std::string& text);

}  // namespace tailfair

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

#include "tailfair/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "tailfair/rng.hpp"
#include "tailfair/synthesis.hpp"
#include "tailfair/text_io.hpp"

namespace tailfair {

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::kLinear;
  if (name == "one_hidden") return ModelKind::kOneHidden;
  throw Error("unknown model kind '" + name + "'");
}

std::string model_kind_name(ModelKind kind) {
  return kind == ModelKind::kLinear ? "linear" : "one_hidden";
}

RowMatrix ModelParams::logits(const RowMatrix& x) const {
  if (x.cols() != spec.input_dim) throw Error("feature dimension differs from model input");
  RowMatrix a = (x * w1.transpose()).rowwise() + b1.transpose();
  if (spec.kind == ModelKind::kLinear) return a;
  const RowMatrix h = a.array().tanh().matrix();
  return (h * w2.transpose()).rowwise() + b2.transpose();
}

bool ModelParams::operator==(const ModelParams& o) const {
  return spec.kind == o.spec.kind && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2;
}

namespace {

void fill_uniform(Matrix& w, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
  }
}

void check_spec(const ModelSpec& s) {
  if (s.input_dim < 1 || s.class_count < 2) throw Error("model dimensions must be >= 1");
  if (s.kind == ModelKind::kOneHidden && s.hidden_dim < 1) throw Error("hidden_dim must be >= 1");
}

}  // namespace

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  Rng rng(seed, Stream::kModelInit);
  ModelParams p;
  p.spec = spec;
  const Eigen::Index first_out = spec.kind == ModelKind::kLinear ? spec.class_count : spec.hidden_dim;
  p.w1.resize(first_out, spec.input_dim);
  fill_uniform(p.w1, 1.0 / std::sqrt(static_cast<double>(spec.input_dim)), rng);
  p.b1 = Vector::Zero(first_out);
  if (spec.kind == ModelKind::kOneHidden) {
    p.w2.resize(spec.class_count, spec.hidden_dim);
    fill_uniform(p.w2, 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim)), rng);
    p.b2 = Vector::Zero(spec.class_count);
  }
  return p;
}

double binary_linear_threshold(const ModelParams& p) {
  if (p.spec.kind != ModelKind::kLinear || p.spec.class_count != 2 || p.spec.input_dim != 1) {
    throw Error("threshold needs a two-class linear model on one feature");
  }
  const double dw = p.w1(1, 0) - p.w1(0, 0);
  if (dw == 0.0) throw Error("threshold undefined for equal weights");
  return -(p.b1(1) - p.b1(0)) / dw;
}

double LrSchedule::at(int epoch) const {
  double lr = initial;
  for (int e : decay_epochs) {
    if (epoch >= e) lr *= decay_factor;
  }
  return lr;
}

Evaluation evaluate(const ModelParams& params, const LabeledCorpus& corpus) {
  const int K = params.spec.class_count;
  const auto& labels = corpus.reference_labels();
  const std::size_t n = corpus.size();
  Evaluation ev;
  ev.per_class.assign(static_cast<std::size_t>(K), 0.0);
  ev.class_counts.assign(static_cast<std::size_t>(K), 0);
  ev.sample_prob.resize(n);
  ev.predictions.resize(n);
  const bool grouped = corpus.has_groups();
  if (grouped) {
    ev.per_group.assign(static_cast<std::size_t>(corpus.groups()->group_count()), 0.0);
    ev.group_counts.assign(ev.per_group.size(), 0);
  }
  if (n == 0) return ev;

  const RowMatrix z = params.logits(corpus.features());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::Index best = 0;
    z.row(row).maxCoeff(&best);  // first maximal index
    const Label y = labels[i];
    const bool hit = best == y;
    ev.predictions[i] = static_cast<Label>(best);
    ev.sample_prob[i] = softmax_probs(z.row(row))(y);
    correct += hit;
    ev.per_class[static_cast<std::size_t>(y)] += hit;
    ++ev.class_counts[static_cast<std::size_t>(y)];
    if (grouped) {
      const auto g = static_cast<std::size_t>((*corpus.groups())[i]);
      ev.per_group[g] += hit;
      ++ev.group_counts[g];
    }
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  for (std::size_t k = 0; k < ev.per_class.size(); ++k) {
    if (ev.class_counts[k] > 0) ev.per_class[k] /= static_cast<double>(ev.class_counts[k]);
  }
  for (std::size_t g = 0; g < ev.per_group.size(); ++g) {
    if (ev.group_counts[g] > 0) ev.per_group[g] /= static_cast<double>(ev.group_counts[g]);
  }
  return ev;
}

namespace {

struct Gradient {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

// Forward pass, objective, and backpropagation for one batch.
BatchObjective batch_step(const ModelParams& p, const RowMatrix& x, std::span<const Label> y,
                          std::span<const GroupId> g, const TrainConfig& cfg,
                          const PeerPairing* peers, Gradient& grad) {
  const RowMatrix a = (x * p.w1.transpose()).rowwise() + p.b1.transpose();
  if (p.spec.kind == ModelKind::kLinear) {
    BatchObjective obj = batch_objective(a, y, g, cfg.loss, cfg.fr, peers);
    grad.w1 = obj.logit_grad.transpose() * x;
    grad.b1 = obj.logit_grad.colwise().sum().transpose();
    return obj;
  }
  const RowMatrix h = a.array().tanh().matrix();
  const RowMatrix z = (h * p.w2.transpose()).rowwise() + p.b2.transpose();
  BatchObjective obj = batch_objective(z, y, g, cfg.loss, cfg.fr, peers);
  grad.w2 = obj.logit_grad.transpose() * h;
  grad.b2 = obj.logit_grad.colwise().sum().transpose();
  const RowMatrix da = ((obj.logit_grad * p.w2).array() * (1.0 - h.array().square())).matrix();
  grad.w1 = da.transpose() * x;
  grad.b1 = da.colwise().sum().transpose();
  return obj;
}

double train_accuracy(const ModelParams& p, const LabeledCorpus& corpus) {
  const RowMatrix z = p.logits(corpus.features());
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    z.row(i).maxCoeff(&best);
    correct += best == corpus.noisy_labels()[static_cast<std::size_t>(i)];
  }
  return z.rows() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(z.rows());
}

template <typename P, typename G>
void sgd_update(P& param, P& velocity, const G& grad, double lr, double momentum, double decay) {
  velocity = momentum * velocity + grad + decay * param;
  param -= lr * velocity;
}

}  // namespace

TrainReport train(const LabeledCorpus& corpus, const LabeledCorpus& eval_corpus,
                  const ModelSpec& spec, const TrainConfig& cfg_in) {
  check_spec(spec);
  if (cfg_in.epochs < 1) throw Error("epochs must be >= 1");
  if (cfg_in.batch_size < 1) throw Error("batch size must be >= 1");
  if (!(cfg_in.momentum >= 0.0 && cfg_in.momentum < 1.0)) throw Error("momentum outside [0, 1)");
  if (cfg_in.weight_decay < 0.0) throw Error("weight decay must be >= 0");
  if (corpus.size() == 0) throw Error("empty training corpus");
  if (corpus.dim() != spec.input_dim || eval_corpus.dim() != spec.input_dim) {
    throw Error("feature dimension differs from model input");
  }
  if (corpus.class_count() != spec.class_count) throw Error("class count differs from model");

  TrainConfig cfg = cfg_in;
  validate_loss_config(cfg.loss, spec.class_count);
  if (cfg.loss.kind == LossKind::kLogitAdjusted && cfg.loss.priors.empty()) {
    cfg.loss.priors = empirical_priors(corpus.noisy_labels(), spec.class_count);
    for (double p : cfg.loss.priors) {
      if (!(p > 0.0)) throw Error("logit adjustment needs every class in the training labels");
    }
  }
  const bool fr_on = cfg.fr.active();
  if (fr_on && !corpus.has_groups()) throw Error("missing group assignment");

  TrainReport report;
  report.params = init_params(spec, cfg.seed);
  ModelParams& p = report.params;
  Gradient v{Matrix::Zero(p.w1.rows(), p.w1.cols()), Vector::Zero(p.b1.size()),
             Matrix::Zero(p.w2.rows(), p.w2.cols()), Vector::Zero(p.b2.size())};

  const std::size_t n = corpus.size();
  const auto& x_all = corpus.features();
  const auto& y_all = corpus.noisy_labels();
  std::vector<Label> y_batch;
  std::vector<GroupId> g_batch;
  std::vector<Eigen::Index> rows;
  Gradient grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr.at(epoch);
    const auto order = Rng(cfg.seed, Stream::kEpochShuffle, static_cast<std::uint64_t>(epoch)).permutation(n);
    double loss_sum = 0.0;
    double penalty_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batches) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::size_t m = end - start;
      rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
      y_batch.resize(m);
      g_batch.clear();
      for (std::size_t i = 0; i < m; ++i) {
        y_batch[i] = y_all[static_cast<std::size_t>(rows[i])];
        if (fr_on) g_batch.push_back((*corpus.groups())[static_cast<std::size_t>(rows[i])]);
      }
      const RowMatrix xb = x_all(rows, Eigen::all);
      std::optional<PeerPairing> peers;
      if (cfg.loss.kind == LossKind::kPeer) {
        peers = draw_peer_pairing(m, cfg.seed, (static_cast<std::uint64_t>(epoch) << 32) | batches);
      }
      const BatchObjective obj =
          batch_step(p, xb, y_batch, g_batch, cfg, peers ? &*peers : nullptr, grad);
      if (!std::isfinite(obj.total())) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                    std::to_string(batches));
      }
      loss_sum += obj.base_loss * static_cast<double>(m);
      penalty_sum += obj.penalty;

      sgd_update(p.w1, v.w1, grad.w1, lr, cfg.momentum, cfg.weight_decay);
      sgd_update(p.b1, v.b1, grad.b1, lr, cfg.momentum, 0.0);
      if (spec.kind == ModelKind::kOneHidden) {
        sgd_update(p.w2, v.w2, grad.w2, lr, cfg.momentum, cfg.weight_decay);
        sgd_update(p.b2, v.b2, grad.b2, lr, cfg.momentum, 0.0);
      }
    }
    EpochRecord rec;
    rec.base_loss = loss_sum / static_cast<double>(n);
    rec.fr_penalty = penalty_sum / static_cast<double>(batches);
    rec.train_accuracy = train_accuracy(p, corpus);
    rec.eval_accuracy = evaluate(p, eval_corpus).accuracy;
    if (epoch == 0 || rec.eval_accuracy > report.best_eval_accuracy) {
      report.best_eval_accuracy = rec.eval_accuracy;
      report.best_epoch = epoch;
    }
    report.epochs.push_back(rec);
  }
  report.final_eval = evaluate(p, eval_corpus);
  return report;
}

std::string report_to_jsonl(const TrainReport& r) {
  std::string out;
  for (std::size_t e = 0; e < r.epochs.size(); ++e) {
    nlohmann::ordered_json j;
    j["epoch"] = e;
    j["base_loss"] = r.epochs[e].base_loss;
    j["fr_penalty"] = r.epochs[e].fr_penalty;
    j["train_accuracy_noisy"] = r.epochs[e].train_accuracy;
    j["eval_accuracy"] = r.epochs[e].eval_accuracy;
    out += j.dump() + "\n";
  }
  nlohmann::ordered_json s;
  s["summary"] = true;
  s["final_accuracy"] = r.final_eval.accuracy;
  s["best_accuracy"] = r.best_eval_accuracy;
  s["best_epoch"] = r.best_epoch;
  s["per_class_accuracy"] = r.final_eval.per_class;
  s["per_group_accuracy"] = r.final_eval.per_group;
  out += s.dump() + "\n";
  return out;
}

namespace {

void put_tensor(std::ostringstream& os, const std::string& name, const Matrix& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << format_double(m(i, j)) << '\n';
  }
}

}  // namespace

std::string params_to_text(const ModelParams& p) {
  std::ostringstream os;
  os << "tailfair-params kind=" << model_kind_name(p.spec.kind) << " input_dim=" << p.spec.input_dim
     << " hidden_dim=" << p.spec.hidden_dim << " class_count=" << p.spec.class_count << '\n';
  put_tensor(os, "w1", p.w1);
  put_tensor(os, "b1", p.b1);
  if (p.spec.kind == ModelKind::kOneHidden) {
    put_tensor(os, "w2", p.w2);
    put_tensor(os, "b2", p.b2);
  }
  return os.str();
}

ModelParams params_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string magic;
  is >> magic;
  if (magic != "tailfair-params") throw Error("not a parameter file");
  ModelParams p;
  for (int f = 0; f < 4; ++f) {
    std::string kv;
    is >> kv;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("malformed parameter header");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "kind") p.spec.kind = parse_model_kind(val);
    else if (key == "input_dim") p.spec.input_dim = parse_int(val);
    else if (key == "hidden_dim") p.spec.hidden_dim = parse_int(val);
    else if (key == "class_count") p.spec.class_count = static_cast<int>(parse_int(val));
    else throw Error("unknown parameter header key '" + key + "'");
  }
  auto read_tensor = [&](const std::string& expected) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    is >> name >> rows >> cols;
    if (!is || name != expected) throw Error("expected tensor " + expected);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        std::string tok;
        is >> tok;
        if (!is) throw Error("truncated tensor " + expected);
        m(i, j) = parse_double(tok);
      }
    }
    return m;
  };
  p.w1 = read_tensor("w1");
  p.b1 = read_tensor("b1");
  if (p.spec.kind == ModelKind::kOneHidden) {
    p.w2 = read_tensor("w2");
    p.b2 = read_tensor("b2");
  }
  return p;
}

}  // namespace tailfair

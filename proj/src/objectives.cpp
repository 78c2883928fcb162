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

#include "tailfair/objectives.hpp"

#include <algorithm>
#include <numeric>

#include "tailfair/rng.hpp"

namespace tailfair {

LossKind parse_loss_kind(const std::string& name) {
  if (name == "ce") return LossKind::kCe;
  if (name == "ls") return LossKind::kLs;
  if (name == "nls") return LossKind::kNls;
  if (name == "focal") return LossKind::kFocal;
  if (name == "logit_adj") return LossKind::kLogitAdjusted;
  if (name == "peer") return LossKind::kPeer;
  throw Error("unknown loss kind '" + name + "'");
}

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kCe: return "ce";
    case LossKind::kLs: return "ls";
    case LossKind::kNls: return "nls";
    case LossKind::kFocal: return "focal";
    case LossKind::kLogitAdjusted: return "logit_adj";
    case LossKind::kPeer: return "peer";
  }
  return "ce";
}

void validate_loss_config(const LossConfig& c, int class_count) {
  switch (c.kind) {
    case LossKind::kCe: break;
    case LossKind::kLs: require(c.alpha >= 0.0 && c.alpha < 1.0, "LS alpha must lie in [0, 1)"); break;
    case LossKind::kNls: require(c.nls_alpha < 0.0, "NLS alpha must be negative"); break;
    case LossKind::kFocal: require(c.gamma >= 0.0, "focal gamma must be >= 0"); break;
    case LossKind::kLogitAdjusted: {
      require(c.tau >= 0.0, "logit adjustment tau must be >= 0");
      if (!c.priors.empty()) {
        require(c.priors.size() == static_cast<std::size_t>(class_count), "prior count differs from K");
        double sum = 0.0;
        for (double p : c.priors) {
          require(p > 0.0, "priors must be positive");
          sum += p;
        }
        require(std::abs(sum - 1.0) <= 1e-9, "priors must sum to 1");
      }
      break;
    }
    case LossKind::kPeer: require(c.peer_weight >= 0.0, "peer weight must be >= 0"); break;
  }
}

double sample_loss(const Vector& z, Label y, const LossConfig& c) {
  switch (c.kind) {
    case LossKind::kLs: return ls_loss(z, y, c.alpha);
    case LossKind::kNls: return nls_loss(z, y, c.nls_alpha);
    case LossKind::kFocal: return focal_loss(z, y, c.gamma);
    case LossKind::kLogitAdjusted: return logit_adjusted_loss(z, y, c.priors, c.tau);
    case LossKind::kCe:
    case LossKind::kPeer: return ce_loss(z, y);
  }
  return ce_loss(z, y);
}

Vector sample_loss_grad(const Vector& z, Label y, const LossConfig& c) {
  switch (c.kind) {
    case LossKind::kLs: require(c.alpha >= 0.0 && c.alpha < 1.0, "LS alpha must lie in [0, 1)");
      return smoothed_ce_grad(z, y, c.alpha);
    case LossKind::kNls: require(c.nls_alpha < 0.0, "NLS alpha must be negative");
      return smoothed_ce_grad(z, y, c.nls_alpha);
    case LossKind::kFocal: return focal_grad(z, y, c.gamma);
    case LossKind::kLogitAdjusted: return logit_adjusted_grad(z, y, c.priors, c.tau);
    case LossKind::kCe:
    case LossKind::kPeer: return ce_grad(z, y);
  }
  return ce_grad(z, y);
}

double FrConfig::lambda_for(GroupId g) const {
  if (lambdas.size() == 1) return lambdas.front();
  if (g < 0 || static_cast<std::size_t>(g) >= lambdas.size()) {
    throw Error("no lambda for group " + std::to_string(g));
  }
  return lambdas[static_cast<std::size_t>(g)];
}

bool FrConfig::active() const {
  for (double l : lambdas) {
    if (l < 0.0) throw Error("invalid hyperparameter: lambda must be >= 0");
  }
  return std::any_of(lambdas.begin(), lambdas.end(), [](double l) { return l > 0.0; });
}

namespace {

// Group means minus the overall mean. Values are taken relative to the first
// sample so a constant input yields exact zeros.
struct GroupGaps {
  std::vector<double> gap;
  std::vector<std::size_t> members;
};

GroupGaps group_gaps(std::span<const double> q, std::span<const GroupId> g) {
  if (q.size() != g.size()) throw Error("probability and group id counts differ");
  GroupGaps out;
  if (q.empty()) return out;
  GroupId max_id = 0;
  for (GroupId id : g) {
    if (id < 0) throw Error("negative group id");
    max_id = std::max(max_id, id);
  }
  const auto n_groups = static_cast<std::size_t>(max_id) + 1;
  std::vector<double> sums(n_groups, 0.0);
  out.members.assign(n_groups, 0);
  const double ref = q[0];
  double total = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double d = q[j] - ref;
    sums[static_cast<std::size_t>(g[j])] += d;
    ++out.members[static_cast<std::size_t>(g[j])];
    total += d;
  }
  const double overall = total / static_cast<double>(q.size());
  out.gap.assign(n_groups, 0.0);
  for (std::size_t i = 0; i < n_groups; ++i) {
    if (out.members[i] > 0) out.gap[i] = sums[i] / static_cast<double>(out.members[i]) - overall;
  }
  return out;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double fr_penalty(std::span<const double> q, std::span<const GroupId> g, const FrConfig& config) {
  const GroupGaps gg = group_gaps(q, g);
  double penalty = 0.0;
  for (std::size_t i = 0; i < gg.gap.size(); ++i) {
    if (gg.members[i] == 0) continue;
    penalty += config.lambda_for(static_cast<GroupId>(i)) * std::abs(gg.gap[i]);
  }
  return penalty;
}

Vector fr_penalty_grad(std::span<const double> q, std::span<const GroupId> g, const FrConfig& config) {
  const GroupGaps gg = group_gaps(q, g);
  const auto m = static_cast<double>(q.size());
  // Every active group contributes -lambda_i sign(gap_i) / M to all samples.
  double common = 0.0;
  std::vector<double> own(gg.gap.size(), 0.0);
  for (std::size_t i = 0; i < gg.gap.size(); ++i) {
    if (gg.members[i] == 0) continue;
    const double w = config.lambda_for(static_cast<GroupId>(i)) * sign(gg.gap[i]);
    common -= w / m;
    own[i] = w / static_cast<double>(gg.members[i]);
  }
  Vector grad(static_cast<Eigen::Index>(q.size()));
  for (std::size_t j = 0; j < q.size(); ++j) {
    grad(static_cast<Eigen::Index>(j)) = own[static_cast<std::size_t>(g[j])] + common;
  }
  return grad;
}

double combined_objective(std::span<const double> base_losses, std::span<const double> q,
                          std::span<const GroupId> g, const FrConfig& config) {
  if (base_losses.empty()) throw Error("empty batch");
  const double mean =
      std::accumulate(base_losses.begin(), base_losses.end(), 0.0) / static_cast<double>(base_losses.size());
  return mean + fr_penalty(q, g, config);
}

PeerPairing draw_peer_pairing(std::size_t m, std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, Stream::kPeerPairing, index);
  PeerPairing pairing;
  pairing.logit_rows = rng.permutation(m);
  pairing.label_rows = rng.permutation(m);
  return pairing;
}

BatchObjective batch_objective(const RowMatrix& logits, std::span<const Label> labels,
                               std::span<const GroupId> group_ids, const LossConfig& loss,
                               const FrConfig& fr, const PeerPairing* peers) {
  const Eigen::Index m = logits.rows();
  if (m == 0) throw Error("empty batch");
  if (labels.size() != static_cast<std::size_t>(m)) throw Error("label count differs from batch size");
  const double inv_m = 1.0 / static_cast<double>(m);

  BatchObjective out;
  out.logit_grad = RowMatrix::Zero(m, logits.cols());
  const bool peer = loss.kind == LossKind::kPeer;
  if (peer && (peers == nullptr || peers->logit_rows.size() != static_cast<std::size_t>(m) ||
               peers->label_rows.size() != static_cast<std::size_t>(m))) {
    throw Error("peer loss needs a pairing of the batch");
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector z = logits.row(i).transpose();
    const Label y = labels[static_cast<std::size_t>(i)];
    total += sample_loss(z, y, loss);
    out.logit_grad.row(i) += inv_m * sample_loss_grad(z, y, loss).transpose();
    if (peer) {
      require(loss.peer_weight >= 0.0, "peer weight must be >= 0");
      const auto a = static_cast<Eigen::Index>(peers->logit_rows[static_cast<std::size_t>(i)]);
      const Label b = labels[peers->label_rows[static_cast<std::size_t>(i)]];
      const Vector pz = logits.row(a).transpose();
      total -= loss.peer_weight * ce_loss(pz, b);
      out.logit_grad.row(a) -= inv_m * loss.peer_weight * ce_grad(pz, b).transpose();
    }
  }
  out.base_loss = total * inv_m;

  if (fr.active()) {
    if (group_ids.size() != static_cast<std::size_t>(m)) throw Error("missing group assignment");
    std::vector<double> q(static_cast<std::size_t>(m));
    std::vector<Vector> p(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      p[static_cast<std::size_t>(i)] = softmax_probs(logits.row(i));
      q[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)](labels[static_cast<std::size_t>(i)]);
    }
    out.penalty = fr_penalty(q, group_ids, fr);
    const Vector dq = fr_penalty_grad(q, group_ids, fr);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double qi = q[static_cast<std::size_t>(i)];
      const double scale = dq(i) * qi;
      if (scale == 0.0) continue;
      out.logit_grad.row(i) -= scale * p[static_cast<std::size_t>(i)].transpose();
      out.logit_grad(i, labels[static_cast<std::size_t>(i)]) += scale;
    }
  }
  return out;
}

}  // namespace tailfair

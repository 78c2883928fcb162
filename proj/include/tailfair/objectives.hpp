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

// Per-sample classification losses, the group-gap fairness penalty, and the
// mini-batch objective that combines them.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailfair/core.hpp"

namespace tailfair {

template <typename Derived>
VectorX<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  const S shift = logits.maxCoeff();
  const VectorX<S> z = (logits.derived().reshaped().array() - shift).matrix();
  return z.array() - std::log(z.array().exp().sum());
}

// Max-shifted normalization; sums to 1 for any finite input.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax_probs(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  const S shift = logits.maxCoeff();
  VectorX<S> e = (logits.derived().reshaped().array() - shift).exp().matrix();
  return e / e.sum();
}

enum class LossKind { kCe, kLs, kNls, kFocal, kLogitAdjusted, kPeer };

struct LossConfig {
  LossKind kind = LossKind::kCe;
  double alpha = 0.1;        // LS
  double nls_alpha = -0.2;   // NLS
  double gamma = 2.0;        // focal
  double tau = 1.0;          // logit adjustment
  double peer_weight = 1.0;  // peer loss
  std::vector<double> priors;  // logit adjustment; empty means uniform
};

LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);

// Throws "invalid hyperparameter" when the value for the configured kind is
// outside its range.
void validate_loss_config(const LossConfig& config, int class_count);

inline void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("invalid hyperparameter: ") + what);
}

template <typename D>
typename D::Scalar ce_loss(const Eigen::MatrixBase<D>& z, Label y) {
  return -log_softmax(z)(y);
}

template <typename D>
VectorX<typename D::Scalar> ce_grad(const Eigen::MatrixBase<D>& z, Label y) {
  VectorX<typename D::Scalar> g = softmax_probs(z);
  g(y) -= 1;
  return g;
}

// Cross-entropy against the target (1 - alpha) e_y + alpha / K. Shared by
// label smoothing (alpha in [0, 1)) and negative smoothing (alpha < 0).
template <typename D>
typename D::Scalar smoothed_ce_loss(const Eigen::MatrixBase<D>& z, Label y, double alpha) {
  using S = typename D::Scalar;
  const auto ls = log_softmax(z);
  const S k = static_cast<S>(ls.size());
  return -(1 - alpha) * ls(y) - alpha / k * ls.sum();
}

template <typename D>
VectorX<typename D::Scalar> smoothed_ce_grad(const Eigen::MatrixBase<D>& z, Label y, double alpha) {
  using S = typename D::Scalar;
  VectorX<S> g = softmax_probs(z);
  g.array() -= alpha / static_cast<S>(g.size());
  g(y) -= 1 - alpha;
  return g;
}

template <typename D>
typename D::Scalar ls_loss(const Eigen::MatrixBase<D>& z, Label y, double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, "LS alpha must lie in [0, 1)");
  return smoothed_ce_loss(z, y, alpha);
}

template <typename D>
typename D::Scalar nls_loss(const Eigen::MatrixBase<D>& z, Label y, double alpha) {
  require(alpha < 0.0, "NLS alpha must be negative");
  return smoothed_ce_loss(z, y, alpha);
}

template <typename D>
typename D::Scalar focal_loss(const Eigen::MatrixBase<D>& z, Label y, double gamma) {
  using S = typename D::Scalar;
  require(gamma >= 0.0, "focal gamma must be >= 0");
  const S log_q = log_softmax(z)(y);
  const S q = std::exp(log_q);
  return gamma == 0.0 ? -log_q : -std::pow(1 - q, gamma) * log_q;
}

// d/dz_k = q (delta_ky - p_k) dL/dq, with
// q dL/dq = gamma (1 - q)^(gamma - 1) q log q - (1 - q)^gamma.
template <typename D>
VectorX<typename D::Scalar> focal_grad(const Eigen::MatrixBase<D>& z, Label y, double gamma) {
  using S = typename D::Scalar;
  require(gamma >= 0.0, "focal gamma must be >= 0");
  VectorX<S> p = softmax_probs(z);
  const S log_q = log_softmax(z)(y);
  const S q = std::exp(log_q);
  const S one_minus_q = 1 - q;
  S q_dl_dq;
  if (gamma == 0.0) {
    q_dl_dq = -1;
  } else if (one_minus_q <= 0) {
    return VectorX<S>::Zero(p.size());
  } else {
    q_dl_dq = gamma * std::pow(one_minus_q, gamma - 1) * q * log_q - std::pow(one_minus_q, gamma);
  }
  VectorX<S> g = -p * q_dl_dq;
  g(y) += q_dl_dq;
  return g;
}

// Cross-entropy on z + tau log(priors); every logit is shifted by its class
// prior. Empty priors mean uniform, which makes this plain cross-entropy.
template <typename D>
VectorX<typename D::Scalar> adjusted_logits(const Eigen::MatrixBase<D>& z,
                                            std::span<const double> priors, double tau) {
  using S = typename D::Scalar;
  VectorX<S> a = z.derived().reshaped();
  if (priors.empty() || tau == 0.0) return a;
  require(priors.size() == static_cast<std::size_t>(a.size()), "prior count differs from K");
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    require(priors[static_cast<std::size_t>(k)] > 0.0, "priors must be positive");
    a(k) += tau * std::log(priors[static_cast<std::size_t>(k)]);
  }
  return a;
}

template <typename D>
typename D::Scalar logit_adjusted_loss(const Eigen::MatrixBase<D>& z, Label y,
                                       std::span<const double> priors, double tau) {
  require(tau >= 0.0, "logit adjustment tau must be >= 0");
  return ce_loss(adjusted_logits(z, priors, tau), y);
}

template <typename D>
VectorX<typename D::Scalar> logit_adjusted_grad(const Eigen::MatrixBase<D>& z, Label y,
                                                std::span<const double> priors, double tau) {
  require(tau >= 0.0, "logit adjustment tau must be >= 0");
  return ce_grad(adjusted_logits(z, priors, tau), y);
}

// ce(z, y) - weight * ce(peer_z, peer_y). The gradient with respect to the
// peer logits is -weight * ce_grad(peer_z, peer_y).
template <typename D, typename P>
typename D::Scalar peer_loss(const Eigen::MatrixBase<D>& z, Label y, const Eigen::MatrixBase<P>& peer_z,
                             Label peer_y, double weight) {
  require(weight >= 0.0, "peer weight must be >= 0");
  return ce_loss(z, y) - weight * ce_loss(peer_z, peer_y);
}

// Loss and gradient for every kind except peer, which needs a partner sample.
double sample_loss(const Vector& z, Label y, const LossConfig& config);
Vector sample_loss_grad(const Vector& z, Label y, const LossConfig& config);

// Lambda per group: one shared value, or one value per group id.
struct FrConfig {
  std::vector<double> lambdas{0.0};

  double lambda_for(GroupId g) const;
  bool active() const;
  static FrConfig shared(double lambda) { return FrConfig{{lambda}}; }
};

// sum_i lambda_i |mean_{group i}(q) - mean_all(q)| over groups present in
// scope, q being the predicted probability of each sample's noisy label.
double fr_penalty(std::span<const double> noisy_label_probs, std::span<const GroupId> group_ids,
                  const FrConfig& config);

// d penalty / d q_j. The absolute value contributes 0 at an exact tie.
Vector fr_penalty_grad(std::span<const double> noisy_label_probs,
                       std::span<const GroupId> group_ids, const FrConfig& config);

double combined_objective(std::span<const double> base_losses,
                          std::span<const double> noisy_label_probs,
                          std::span<const GroupId> group_ids, const FrConfig& config);

struct PeerPairing {
  std::vector<std::size_t> logit_rows;
  std::vector<std::size_t> label_rows;
};

// Two independent uniform permutations of [0, m).
PeerPairing draw_peer_pairing(std::size_t m, std::uint64_t seed, std::uint64_t index);

struct BatchObjective {
  double base_loss = 0.0;  // mean over the batch
  double penalty = 0.0;
  RowMatrix logit_grad;    // d(base_loss + penalty) / d logits, M x K
  double total() const { return base_loss + penalty; }
};

// Objective over one mini-batch of logits (M x K). `group_ids` may be empty
// when the penalty is inactive; `peers` is required for the peer loss.
BatchObjective batch_objective(const RowMatrix& logits, std::span<const Label> noisy_labels,
                               std::span<const GroupId> group_ids, const LossConfig& loss,
                               const FrConfig& fr, const PeerPairing* peers = nullptr);

}  // namespace tailfair

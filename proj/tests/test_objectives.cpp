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

#include <doctest.h>

#include <array>

#include "gradient_check.hpp"
#include "oracle_values.hpp"
#include "tailfair/objectives.hpp"

using namespace tailfair;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("softmax is shift invariant and stable") {
  const Vector z = vec({1000.0, 999.0, -1000.0});
  const Vector p = softmax_probs(z);
  CHECK(p.allFinite());
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK((softmax_probs(Vector(z.array() - 1000.0)) - p).norm() < 1e-15);
  CHECK(std::isfinite(ce_loss(z, 2)));
  CHECK(ce_loss(z, 2) == doctest::Approx(2000.0 + std::log1p(std::exp(-1.0))));
}

TEST_CASE("special cases reduce to cross-entropy") {
  const Vector z = vec({0.3, -1.2, 2.0, 0.1});
  for (Label y = 0; y < 4; ++y) {
    const double ce = ce_loss(z, y);
    CHECK(ls_loss(z, y, 0.0) == doctest::Approx(ce).epsilon(1e-14));
    CHECK(focal_loss(z, y, 0.0) == doctest::Approx(ce).epsilon(1e-14));
    CHECK(logit_adjusted_loss(z, y, std::span<const double>{}, 1.0) == doctest::Approx(ce));
    const std::array<double, 4> uniform{0.25, 0.25, 0.25, 0.25};
    CHECK(logit_adjusted_loss(z, y, uniform, 1.0) == doctest::Approx(ce).epsilon(1e-14));
    CHECK(logit_adjusted_loss(z, y, uniform, 0.0) == doctest::Approx(ce).epsilon(1e-14));
  }
}

TEST_CASE("uniform logits give log K") {
  const Vector z = Vector::Zero(10);
  CHECK(ce_loss(z, 3) == doctest::Approx(std::log(10.0)));
  CHECK(ls_loss(z, 3, 0.4) == doctest::Approx(std::log(10.0)));
  CHECK(nls_loss(z, 3, -0.4) == doctest::Approx(std::log(10.0)));
}

TEST_CASE("focal loss never exceeds cross-entropy") {
  const Vector z = vec({0.5, 1.5, -0.7});
  for (double g : {0.5, 1.0, 2.0, 5.0}) CHECK(focal_loss(z, 1, g) <= ce_loss(z, 1));
}

TEST_CASE("logit adjustment with skewed priors favors tail labels in the loss") {
  const Vector z = Vector::Zero(3);
  const std::array<double, 3> priors{0.7, 0.2, 0.1};
  CHECK(logit_adjusted_loss(z, 2, priors, 1.0) > logit_adjusted_loss(z, 0, priors, 1.0));
}

TEST_CASE("hyperparameter validation") {
  const Vector z = Vector::Zero(3);
  CHECK_THROWS_AS(ls_loss(z, 0, 1.0), Error);
  CHECK_THROWS_AS(ls_loss(z, 0, -0.1), Error);
  CHECK_THROWS_AS(nls_loss(z, 0, 0.0), Error);
  CHECK_THROWS_AS(focal_loss(z, 0, -1.0), Error);
  CHECK_THROWS_AS(logit_adjusted_loss(z, 0, std::span<const double>{}, -1.0), Error);
  LossConfig c;
  c.kind = LossKind::kLogitAdjusted;
  c.priors = {0.5, 0.6, -0.1};
  CHECK_THROWS_WITH_AS(validate_loss_config(c, 3), "invalid hyperparameter: priors must be positive", Error);
  CHECK_THROWS_AS(FrConfig::shared(-1.0).active(), Error);
  for (const char* name : {"ce", "ls", "nls", "focal", "logit_adj", "peer"})
    CHECK(loss_kind_name(parse_loss_kind(name)) == name);
  CHECK_THROWS_AS(parse_loss_kind("hinge"), Error);
}

TEST_CASE("per-sample gradients match central differences") {
  for (const auto& cfg : testing::every_loss_kind(4)) {
    if (cfg.kind == LossKind::kPeer) continue;
    const Vector z = vec({0.4, -0.9, 1.3, 0.2});
    for (Label y = 0; y < 4; ++y) {
      const Vector g = sample_loss_grad(z, y, cfg);
      Vector fd(4);
      for (int k = 0; k < 4; ++k) {
        Vector a = z, b = z;
        a(k) += 1e-6;
        b(k) -= 1e-6;
        fd(k) = (sample_loss(a, y, cfg) - sample_loss(b, y, cfg)) / 2e-6;
      }
      CHECK((g - fd).norm() / fd.norm() < 1e-6);
    }
  }
}

TEST_CASE("batch objective gradients match central differences") {
  for (const auto& cfg : testing::every_loss_kind()) {
    for (double lambda : {0.0, 0.8}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto inst = testing::random_instance(seed);
        INFO("kind " << loss_kind_name(cfg.kind) << " lambda " << lambda << " seed " << seed);
        CHECK(testing::gradient_relative_error(inst, cfg, FrConfig::shared(lambda)) < 1e-5);
      }
    }
  }
  // Distinct lambdas per group.
  const auto inst = testing::random_instance(99);
  CHECK(testing::gradient_relative_error(inst, {}, FrConfig{{0.2, 1.5, 0.7}}) < 1e-5);
}

TEST_CASE("fr penalty matches the frozen value") {
  const double got = fr_penalty(oracle::kPenaltyProbs, oracle::kPenaltyGroups, FrConfig::shared(0.7));
  CHECK(got == doctest::Approx(oracle::kPenaltyValue).epsilon(1e-14));
}

TEST_CASE("fr penalty invariants") {
  const std::vector<double> q{0.2, 0.4, 0.9, 0.1, 0.6};
  const std::vector<GroupId> one(5, 0);
  CHECK(fr_penalty(q, one, FrConfig::shared(3.0)) == 0.0);
  CHECK(fr_penalty(std::vector<double>(5, 0.37), std::vector<GroupId>{0, 1, 2, 1, 0},
                   FrConfig::shared(2.0)) == 0.0);
  const std::vector<GroupId> g{0, 1, 1, 0, 2};
  CHECK(fr_penalty(q, g, FrConfig::shared(0.0)) == 0.0);
  const double base = fr_penalty(q, g, FrConfig::shared(1.0));
  CHECK(base > 0.0);
  CHECK(fr_penalty(q, g, FrConfig::shared(2.5)) == doctest::Approx(2.5 * base));
  // Absent groups contribute nothing.
  const std::vector<GroupId> gap{0, 3, 3, 0, 5};
  CHECK(fr_penalty(q, gap, FrConfig::shared(1.0)) == doctest::Approx(base));
  // Gradient sums to zero: shifting every q leaves the gaps unchanged.
  CHECK(fr_penalty_grad(q, g, FrConfig::shared(1.3)).sum() == doctest::Approx(0.0));
  const std::vector<double> losses{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(combined_objective(losses, q, g, FrConfig::shared(1.0)) == doctest::Approx(3.0 + base));
}

TEST_CASE("batch objective with a single group equals the unpenalized objective") {
  auto inst = testing::random_instance(5);
  std::fill(inst.groups.begin(), inst.groups.end(), 0);
  const LossConfig ce;
  const auto a = batch_objective(inst.logits, inst.labels, inst.groups, ce, FrConfig::shared(0.0));
  const auto b = batch_objective(inst.logits, inst.labels, inst.groups, ce, FrConfig::shared(7.0));
  CHECK(b.penalty == 0.0);
  CHECK((a.logit_grad - b.logit_grad).norm() < 1e-15);
  CHECK_THROWS_WITH_AS(batch_objective(inst.logits, inst.labels, {}, ce, FrConfig::shared(1.0)),
                       "missing group assignment", Error);
}

TEST_CASE("peer pairing is a pair of permutations") {
  const auto p = draw_peer_pairing(20, 4, 2);
  auto a = p.logit_rows, b = p.label_rows;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(a[i] == i);
    CHECK(b[i] == i);
  }
  CHECK(draw_peer_pairing(20, 4, 2).logit_rows == p.logit_rows);
  CHECK(draw_peer_pairing(20, 4, 3).logit_rows != p.logit_rows);
}

}

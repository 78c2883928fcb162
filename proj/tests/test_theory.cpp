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

#include <numeric>

#include "mc_check.hpp"
#include "oracle_values.hpp"
#include "tailfair/theory.hpp"

using namespace tailfair;

namespace {

GaussianWorld world_of(const oracle::ErrorCase& c) {
  return GaussianWorld{c.mu_plus, c.mu_minus, c.sigma, c.eta, c.prior, c.rhp, c.rhm, c.rtp, c.rtm};
}

void check_close(double got, double want) {
  CHECK(std::abs(got - want) <= 1e-10 * std::abs(want) + 1e-300);
}

GaussianWorld asymmetric_world() {
  GaussianWorld w;
  w.rho_h_plus = 0.1;
  w.rho_h_minus = 0.05;
  w.rho_t_plus = 0.3;
  w.rho_t_minus = 0.2;
  return w;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("normal cdf helpers match frozen values") {
  CHECK(std_normal_cdf(-1.0) == doctest::Approx(oracle::kPhiMinus1).epsilon(1e-15));
  CHECK(std_normal_cdf(2.5) == doctest::Approx(oracle::kPhi2p5).epsilon(1e-15));
  CHECK(log_std_normal_cdf(-40.0) == doctest::Approx(oracle::kLogPhiMinus40).epsilon(1e-14));
  CHECK(log_std_normal_cdf(-8.0) == doctest::Approx(oracle::kLogPhiMinus8).epsilon(1e-14));
  for (double p : {1e-300, 1e-12, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-10})
    CHECK(std_normal_cdf(std_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("closed-form error probabilities match frozen values") {
  for (const auto& c : oracle::kErrorCases) {
    const auto w = world_of(c);
    INFO("theta " << c.theta << " mu+ " << c.mu_plus);
    const auto e = clean_error_probs(w, c.theta);
    check_close(e.h_plus, c.clean_hp);
    check_close(e.t_plus, c.clean_tp);
    check_close(e.h_minus, c.clean_hm);
    check_close(e.t_minus, c.clean_tm);
    const auto n = noisy_error_probs(w, c.theta);
    check_close(n.h_plus, c.noisy_hp);
    check_close(n.t_plus, c.noisy_tp);
    check_close(n.h_minus, c.noisy_hm);
    check_close(n.t_minus, c.noisy_tm);
    if (c.prior == 0.5) {
      const auto gh = theorem_objectives(w, c.theta);
      check_close(gh.g, c.g);
      check_close(gh.h, c.h);
    } else {
      CHECK_THROWS_WITH_AS(theorem_objectives(w, c.theta), "theorem requires balanced prior", Error);
    }
  }
  CHECK(std::abs(oracle::kErrorCases[0].clean_tp - oracle::kPhiMinus5OverPhiMinus1) < 1e-25);
}

TEST_CASE("error probabilities are continuous at the head boundary") {
  const auto w = asymmetric_world();
  for (double edge : {w.mu_plus - w.eta * w.sigma, w.mu_minus + w.eta * w.sigma}) {
    const auto a = clean_error_probs(w, std::nextafter(edge, -INFINITY));
    const auto b = clean_error_probs(w, std::nextafter(edge, INFINITY));
    const auto m = clean_error_probs(w, edge);
    for (Population p : {kHeadPlus, kTailPlus, kHeadMinus, kTailMinus}) {
      CHECK(std::abs(a[p] - b[p]) < 1e-12);
      CHECK(std::abs(a[p] - m[p]) < 1e-12);
    }
  }
}

TEST_CASE("errors stay in [0, 1] and positive-class errors grow with theta") {
  const auto w = asymmetric_world();
  const auto grid = linspace(-9.0, 9.0, 721);
  ErrorQuadruple prev = clean_error_probs(w, grid.front());
  for (double t : grid) {
    const auto e = clean_error_probs(w, t);
    const auto n = noisy_error_probs(w, t);
    for (Population p : {kHeadPlus, kTailPlus, kHeadMinus, kTailMinus}) {
      CHECK(e[p] >= 0.0);
      CHECK(e[p] <= 1.0);
      CHECK(n[p] >= 0.0);
      CHECK(n[p] <= 1.0);
    }
    CHECK(e.h_plus >= prev.h_plus);
    CHECK(e.t_plus >= prev.t_plus);
    CHECK(e.h_minus <= prev.h_minus);
    CHECK(e.t_minus <= prev.t_minus);
    prev = e;
  }
}

TEST_CASE("tail error gap moves with its expression within each branch") {
  GaussianWorld w;
  w.mu_plus = 2.0;
  w.mu_minus = -1.0;
  w.sigma = 1.3;
  w.eta = 0.7;
  const auto grid = linspace(-8.0, 8.0, 801);
  const double edge_plus = w.mu_plus - w.eta * w.sigma;
  const double edge_minus = w.mu_minus + w.eta * w.sigma;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto a = error_gap_direction(w, grid[i - 1]);
    const auto b = error_gap_direction(w, grid[i]);
    if ((grid[i - 1] < edge_plus) == (grid[i] < edge_plus)) {
      CHECK((b.gap_plus - a.gap_plus) * (b.expression_plus - a.expression_plus) >= 0.0);
    }
    if ((grid[i - 1] > edge_minus) == (grid[i] > edge_minus)) {
      CHECK((b.gap_minus - a.gap_minus) * (b.expression_minus - a.expression_minus) >= 0.0);
    }
    if (grid[i] < edge_plus && b.gap_plus != 0.0) {
      CHECK(b.sign_plus == (b.expression_plus > 0.0 ? 1 : -1));
    }
    if (grid[i] > edge_minus && b.gap_minus != 0.0) {
      CHECK(b.sign_minus == (b.expression_minus > 0.0 ? 1 : -1));
    }
  }
}

TEST_CASE("without noise the surrogate is half the clean objective") {
  GaussianWorld w;
  w.mu_plus = 1.5;
  w.mu_minus = -0.5;
  w.eta = 0.8;
  for (double t : linspace(-3.0, 4.0, 57)) {
    const auto gh = theorem_objectives(w, t);
    CHECK(gh.g == doctest::Approx(0.5 * gh.h).epsilon(1e-12));
  }
}

TEST_CASE("noisy errors equal half the clean errors at zero noise") {
  GaussianWorld w;
  for (double t : {-4.5, 0.0, 3.7}) {
    const auto e = clean_error_probs(w, t);
    const auto n = noisy_error_probs(w, t);
    for (Population p : {kHeadPlus, kTailPlus, kHeadMinus, kTailMinus})
      CHECK(n[p] == doctest::Approx(0.5 * e[p]).epsilon(1e-15));
  }
}

TEST_CASE("world validation") {
  GaussianWorld w;
  w.sigma = 0.0;
  CHECK_THROWS_AS(validate_world(w), Error);
  w = GaussianWorld{};
  w.rho_t_minus = 0.5;
  CHECK_THROWS_AS(validate_world(w), Error);
  w = GaussianWorld{};
  w.mu_plus = -6.0;
  CHECK_THROWS_AS(validate_world(w), Error);
  w = GaussianWorld{};
  w.eta = 40.0;
  CHECK_THROWS_WITH_AS(clean_error_probs(w, 0.0), "eta too small", Error);
}

TEST_CASE("Monte Carlo tallies agree with the closed forms") {
  GaussianWorld w;
  w.mu_plus = 1.0;
  w.mu_minus = -1.0;
  w.eta = 0.5;
  w.prior_plus = 0.4;
  w.rho_h_plus = 0.1;
  w.rho_h_minus = 0.2;
  w.rho_t_plus = 0.3;
  w.rho_t_minus = 0.15;
  for (double t : {-0.7, 0.1, 0.9}) {
    const auto clean = mc_error_probs(w, t, 200000, 5, false);
    const auto noisy = mc_error_probs(w, t, 200000, 5, true);
    CHECK(testing::compare_mc(w, t, clean, false).worst_z <= 3.0);
    CHECK(testing::compare_mc(w, t, noisy, true).worst_z <= 3.0);
    CHECK(clean.population_counts == noisy.population_counts);
  }
}

TEST_CASE("Monte Carlo noisy tallies equal the clean ones without noise") {
  GaussianWorld w;
  w.mu_plus = 1.0;
  w.mu_minus = -1.0;
  const auto clean = mc_error_probs(w, 0.2, 50000, 9, false);
  const auto noisy = mc_error_probs(w, 0.2, 50000, 9, true);
  CHECK(clean.own_class_hits == noisy.own_class_hits);
  CHECK(noisy.cross_class_hits == std::array<std::size_t, 4>{});
  CHECK_THROWS_WITH_AS(mc_error_probs(GaussianWorld{}, 0.0, 3, 1, false), "empty population", Error);
}

TEST_CASE("estimator bias examples") {
  const auto w = asymmetric_world();
  const PopulationCounts c{500, 100, 250, 50};
  // (rho+ mix - rho- mix) = (50 + 30) / 600 - (12.5 + 10) / 300 = 0.0583333
  CHECK(estimator_bias(w, c) == doctest::Approx(-5.0 * (80.0 / 600.0 - 22.5 / 300.0)));
  GaussianWorld sym;
  sym.rho_h_plus = sym.rho_h_minus = sym.rho_t_plus = sym.rho_t_minus = 0.2;
  CHECK(estimator_bias(sym, c) == 0.0);
  CHECK(estimator_bias(GaussianWorld{}, c) == 0.0);
}

TEST_CASE("contaminated mixture respects counts, regions and labels") {
  const auto w = asymmetric_world();
  const PopulationCounts c{500, 100, 250, 50};
  const auto corpus = contaminated_mixture(w, c, 17);
  CHECK(corpus.size() == 900);
  CHECK(corpus.groups()->member_counts() == std::vector<std::size_t>{500, 100, 250, 50});
  const GaussianMixtureSpec spec{w.mu_plus, w.mu_minus, w.sigma, w.eta, 0, 0};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto p = static_cast<Population>((*corpus.groups())[i]);
    const Label s = p == kHeadPlus || p == kTailPlus ? kPositive : kNegative;
    CHECK(corpus.noisy_labels()[i] == s);
    double x = corpus.features()(static_cast<Eigen::Index>(i), 0);
    if ((*corpus.clean_labels())[i] != s) x -= s == kPositive ? w.mu_minus - w.mu_plus : w.mu_plus - w.mu_minus;
    const bool head = p == kHeadPlus || p == kHeadMinus;
    CHECK(is_head(spec, x, s) == head);
  }
  CHECK(contaminated_mixture(w, c, 17).features() == corpus.features());
}

TEST_CASE("midpoint estimator") {
  RowMatrix x(4, 1);
  x << 1, 3, -2, -6;
  LabeledCorpus c(x, std::nullopt, {1, 1, 0, 0}, 2);
  CHECK(midpoint_estimator(c) == doctest::Approx(-1.0));
  CHECK_THROWS_WITH_AS(midpoint_estimator(c.with_noisy_labels({1, 1, 1, 1})), "empty noisy class", Error);
}

TEST_CASE("concentration bound matches frozen values and grows with delta") {
  const auto w = asymmetric_world();
  const PopulationCounts c{500, 100, 250, 50};
  CHECK(concentration_probability(w, c, 0.5) == doctest::Approx(oracle::kConcentration_0p5).epsilon(1e-13));
  CHECK(concentration_probability(w, c, 1.0) == doctest::Approx(oracle::kConcentration_1).epsilon(1e-13));
  CHECK(concentration_probability(w, c, 2.0) == doctest::Approx(oracle::kConcentration_2).epsilon(1e-12));
  double prev = -INFINITY;
  for (double d : linspace(0.1, 8.0, 80)) {
    const double v = concentration_probability(w, c, d);
    CHECK(v >= prev);
    CHECK(v < 1.0);
    prev = v;
  }
  const PopulationCounts bigger{5000, 1000, 2500, 500};
  CHECK(concentration_probability(w, bigger, 1.0) > concentration_probability(w, c, 1.0));
}

TEST_CASE("penalized argmin fixture") {
  GaussianWorld w;
  w.rho_t_minus = 0.4;
  const auto grid = linspace(-8.0, 8.0, 101);
  CHECK(penalized_grid_argmin(w, grid, 0.0) == doctest::Approx(oracle::kFixtureArgminLambda0).epsilon(1e-12));
  CHECK(penalized_grid_argmin(w, grid, 10.0) == doctest::Approx(oracle::kFixtureArgminLambda10).epsilon(1e-12));
  CHECK(std::abs(oracle::kFixtureArgminLambda10) < std::abs(oracle::kFixtureArgminLambda0));
}

TEST_CASE("argmin ties go to the point nearest the Bayes threshold") {
  // With all errors zero on a plateau the value ties across the middle of the grid.
  GaussianWorld w;
  w.mu_plus = 30.0;
  w.mu_minus = -30.0;
  const std::vector<double> grid{-2.0, -1.0, 1.0, 2.0};
  CHECK(penalized_grid_argmin(w, grid, 0.0) == -1.0);
}

TEST_CASE("linspace") {
  const auto v = linspace(-1.0, 1.0, 5);
  CHECK(v == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(linspace(2.0, 3.0, 1) == std::vector<double>{2.0});
}

}

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

// Binary Gaussian model with head/tail populations: closed-form error
// probabilities, a Monte Carlo oracle for them, the midpoint threshold
// estimator and its bias, and the noisy-risk objectives.
//
// Classifier: f(x) = +1 when x > theta, -1 otherwise.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tailfair/core.hpp"
#include "tailfair/datamodel.hpp"
#include "tailfair/synthesis.hpp"

namespace tailfair {

struct GaussianWorld {
  double mu_plus = 5.0;
  double mu_minus = -5.0;
  double sigma = 1.0;
  double eta = 1.0;
  double prior_plus = 0.5;
  double rho_h_plus = 0.0;
  double rho_h_minus = 0.0;
  double rho_t_plus = 0.0;
  double rho_t_minus = 0.0;
};

// Throws on mu_plus <= mu_minus, sigma <= 0, eta < 0, prior outside (0, 1)
// or a noise rate outside [0, 0.5).
void validate_world(const GaussianWorld& world);

// Head/tail transitions of the world, rows ordered (negative, positive).
NoiseTransition head_transition(const GaussianWorld& world);
NoiseTransition tail_transition(const GaussianWorld& world);

struct ErrorQuadruple {
  double h_plus = 0.0;
  double h_minus = 0.0;
  double t_plus = 0.0;
  double t_minus = 0.0;

  // Indexed by Population (H+, T+, H-, T-).
  double operator[](Population p) const;
  double& operator[](Population p);
};

double std_normal_cdf(double z);
// log Phi(z), finite far into the lower tail where Phi underflows.
double log_std_normal_cdf(double z);
// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

double bayes_threshold(const GaussianWorld& world);

// Per-population error of sign(x - theta) against clean labels. Throws
// "eta too small" when Phi(-eta) < 1e-300.
ErrorQuadruple clean_error_probs(const GaussianWorld& world, double theta);

// Sign of Err_T - Err_H per class, and the expression
// Phi((theta - mu) * s / sigma) * sign((mu - theta) * s - eta * sigma)
// (s = +1 for the positive class, -1 for the negative one). Within each
// branch of the piecewise error forms the gap and the expression move
// together; their signs agree on the branch away from the class mean.
struct GapDirection {
  int sign_plus = 0;
  int sign_minus = 0;
  double gap_plus = 0.0;
  double gap_minus = 0.0;
  double expression_plus = 0.0;
  double expression_minus = 0.0;
};
GapDirection error_gap_direction(const GaussianWorld& world, double theta);

// Error against noisy labels per population:
//   H+: p (1 - rho_H+) Err_H+ + (1 - p) rho_H- (1 - Err_H-)
//   H-: p rho_H+ (1 - Err_H+) + (1 - p) (1 - rho_H-) Err_H-
// and likewise for the tail populations.
ErrorQuadruple noisy_error_probs(const GaussianWorld& world, double theta);

struct McErrorEstimate {
  ErrorQuadruple estimate;
  ErrorQuadruple standard_error;
  // Sample counts of the clean populations, indexed by Population.
  std::array<std::size_t, 4> population_counts{};
  // Clean mode: mismatches f != y per population. Noisy mode: for entry
  // (s, G), rows of clean class s in G with noisy label s and f != s.
  std::array<std::size_t, 4> own_class_hits{};
  // Noisy mode only: rows of the opposite clean class in its own G
  // population with noisy label s and f != s.
  std::array<std::size_t, 4> cross_class_hits{};
};

// Draws Y ~ prior, x ~ N(mu_Y, sigma^2), tags head/tail, flips the label with
// the population's transition, and tallies errors. Noisy estimates combine
// the two clean strata with the known prior. Throws "empty population" when
// some population receives no sample.
McErrorEstimate mc_error_probs(const GaussianWorld& world, double theta, std::size_t n_samples,
                               std::uint64_t seed, bool noisy);

struct PopulationCounts {
  std::size_t h_plus = 1;
  std::size_t t_plus = 1;
  std::size_t h_minus = 1;
  std::size_t t_minus = 1;
};

double estimator_bias(const GaussianWorld& world, const PopulationCounts& counts);

// Half the sum of the class means under the noisy labels. Throws
// "empty noisy class".
double midpoint_estimator(const LabeledCorpus& corpus);

// Sampler of the bias argument: each population (s, G) receives exactly its
// pinned count of draws z ~ N(mu_s, sigma^2) truncated to G; with probability
// rho_G^s the point is moved to z + (mu_{-s} - mu_s) and its clean label
// becomes -s. Noisy labels are always s; groups are the population ids.
LabeledCorpus contaminated_mixture(const GaussianWorld& world, const PopulationCounts& counts,
                                   std::uint64_t seed);

// Lower bound on P(|theta~ - theta* - Bias| <= delta); may be negative.
double concentration_probability(const GaussianWorld& world, const PopulationCounts& counts,
                                 double delta);

// r = (1 - Phi(-eta)) / Phi(-eta).
double head_tail_ratio(double eta);

struct TheoremObjectives {
  double g = 0.0;
  double h = 0.0;
};

// G = r[(1 - rho_H) E~H+ + (1 + rho_H) E~H-] + [(1 - rho_T) E~T+ + (1 + rho_T) E~T-]
// H = r(E_H+ + E_H-) + (E_T+ + E_T-) - 2 r rho_H (E~H+ - E~H-) - rho_T (E~T+ - E~T-)
// with rho_H = rho_H+ - rho_H-, rho_T = rho_T+ - rho_T-. Throws "theorem
// requires balanced prior" unless prior_plus == 0.5.
TheoremObjectives theorem_objectives(const GaussianWorld& world, double theta);

// Gridpoint minimizing G + lambda (|E~H+ - E~H-| + |E~T+ - E~T-|); ties go to
// the point closest to the Bayes threshold, then the lower one.
double penalized_grid_argmin(const GaussianWorld& world, std::span<const double> grid,
                             double lambda);

// n evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace tailfair

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

#include "tailfair/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tailfair/rng.hpp"

namespace tailfair {

void validate_world(const GaussianWorld& w) {
  if (!(w.mu_plus > w.mu_minus)) throw Error("mu_plus must exceed mu_minus");
  if (!(w.sigma > 0.0)) throw Error("sigma must be positive");
  if (!(w.eta >= 0.0)) throw Error("eta must be nonnegative");
  if (!(w.prior_plus > 0.0 && w.prior_plus < 1.0)) throw Error("prior_plus outside (0, 1)");
  for (double rho : {w.rho_h_plus, w.rho_h_minus, w.rho_t_plus, w.rho_t_minus}) {
    if (!(rho >= 0.0 && rho < 0.5)) throw Error("noise rate outside [0, 0.5)");
  }
}

NoiseTransition head_transition(const GaussianWorld& w) {
  return binary_transition(w.rho_h_minus, w.rho_h_plus);
}

NoiseTransition tail_transition(const GaussianWorld& w) {
  return binary_transition(w.rho_t_minus, w.rho_t_plus);
}

double ErrorQuadruple::operator[](Population p) const {
  switch (p) {
    case kHeadPlus: return h_plus;
    case kTailPlus: return t_plus;
    case kHeadMinus: return h_minus;
    case kTailMinus: return t_minus;
  }
  return 0.0;
}

double& ErrorQuadruple::operator[](Population p) {
  switch (p) {
    case kHeadPlus: return h_plus;
    case kTailPlus: return t_plus;
    case kHeadMinus: return h_minus;
    case kTailMinus: break;
  }
  return t_minus;
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_std_normal_cdf(double z) {
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -37.0) return std::log(std_normal_cdf(z));
  // Mills-ratio expansion; the truncated series is accurate to ~1e-13 here.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) +
                        105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw Error("quantile probability outside [0, 1]");
  }
  // Acklam's rational approximation, then one Halley step on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = std_normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double bayes_threshold(const GaussianWorld& w) { return 0.5 * (w.mu_minus + w.mu_plus); }

namespace {

// Phi(a) / Phi(-eta) evaluated in log space.
double tail_ratio(double a, double log_phi_neg_eta) {
  return std::min(1.0, std::exp(log_std_normal_cdf(a) - log_phi_neg_eta));
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

ErrorQuadruple clean_error_probs(const GaussianWorld& w, double theta) {
  validate_world(w);
  const double phi_neg_eta = std_normal_cdf(-w.eta);
  if (phi_neg_eta < 1e-300) throw Error("eta too small");
  const double log_phi_neg_eta = log_std_normal_cdf(-w.eta);
  ErrorQuadruple e;

  const double a_plus = (theta - w.mu_plus) / w.sigma;
  if (theta <= w.mu_plus - w.eta * w.sigma) {
    e.h_plus = 0.0;
    e.t_plus = tail_ratio(a_plus, log_phi_neg_eta);
  } else {
    e.h_plus = std::clamp((std_normal_cdf(a_plus) - phi_neg_eta) / (1.0 - phi_neg_eta), 0.0, 1.0);
    e.t_plus = 1.0;
  }

  const double a_minus = (w.mu_minus - theta) / w.sigma;
  if (theta >= w.mu_minus + w.eta * w.sigma) {
    e.h_minus = 0.0;
    e.t_minus = tail_ratio(a_minus, log_phi_neg_eta);
  } else {
    e.h_minus = std::clamp((std_normal_cdf(a_minus) - phi_neg_eta) / (1.0 - phi_neg_eta), 0.0, 1.0);
    e.t_minus = 1.0;
  }
  return e;
}

GapDirection error_gap_direction(const GaussianWorld& w, double theta) {
  const ErrorQuadruple e = clean_error_probs(w, theta);
  GapDirection g;
  g.gap_plus = e.t_plus - e.h_plus;
  g.gap_minus = e.t_minus - e.h_minus;
  g.sign_plus = sign_of(g.gap_plus);
  g.sign_minus = sign_of(g.gap_minus);
  g.expression_plus = std_normal_cdf((theta - w.mu_plus) / w.sigma) *
                      sign_of((w.mu_plus - theta) - w.eta * w.sigma);
  g.expression_minus = std_normal_cdf((w.mu_minus - theta) / w.sigma) *
                       sign_of((theta - w.mu_minus) - w.eta * w.sigma);
  return g;
}

ErrorQuadruple noisy_error_probs(const GaussianWorld& w, double theta) {
  const ErrorQuadruple e = clean_error_probs(w, theta);
  const double p = w.prior_plus;
  ErrorQuadruple n;
  n.h_plus = p * (1.0 - w.rho_h_plus) * e.h_plus + (1.0 - p) * w.rho_h_minus * (1.0 - e.h_minus);
  n.h_minus = p * w.rho_h_plus * (1.0 - e.h_plus) + (1.0 - p) * (1.0 - w.rho_h_minus) * e.h_minus;
  n.t_plus = p * (1.0 - w.rho_t_plus) * e.t_plus + (1.0 - p) * w.rho_t_minus * (1.0 - e.t_minus);
  n.t_minus = p * w.rho_t_plus * (1.0 - e.t_plus) + (1.0 - p) * (1.0 - w.rho_t_minus) * e.t_minus;
  return n;
}

namespace {

Population population_of(Label y, bool head) {
  if (y == kPositive) return head ? kHeadPlus : kTailPlus;
  return head ? kHeadMinus : kTailMinus;
}

// The population of the same head/tail kind in the other class.
Population mirror(Population p) {
  switch (p) {
    case kHeadPlus: return kHeadMinus;
    case kTailPlus: return kTailMinus;
    case kHeadMinus: return kHeadPlus;
    case kTailMinus: break;
  }
  return kTailPlus;
}

Label class_of(Population p) { return p == kHeadPlus || p == kTailPlus ? kPositive : kNegative; }

double flip_rate(const GaussianWorld& w, Population p) {
  switch (p) {
    case kHeadPlus: return w.rho_h_plus;
    case kTailPlus: return w.rho_t_plus;
    case kHeadMinus: return w.rho_h_minus;
    case kTailMinus: break;
  }
  return w.rho_t_minus;
}

constexpr std::array<Population, 4> kAllPopulations{kHeadPlus, kTailPlus, kHeadMinus, kTailMinus};

}  // namespace

McErrorEstimate mc_error_probs(const GaussianWorld& w, double theta, std::size_t n_samples,
                               std::uint64_t seed, bool noisy) {
  validate_world(w);
  if (n_samples < 1) throw Error("n_samples must be >= 1");
  const GaussianMixtureSpec spec{w.mu_plus, w.mu_minus, w.sigma, w.eta, 0, 0};
  Rng rng(seed, Stream::kMonteCarlo);
  McErrorEstimate out;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Label y = rng.uniform() < w.prior_plus ? kPositive : kNegative;
    const double x = rng.normal(y == kPositive ? w.mu_plus : w.mu_minus, w.sigma);
    const double u = rng.uniform();
    const Population pop = population_of(y, is_head(spec, x, y));
    ++out.population_counts[pop];
    const Label f = x > theta ? kPositive : kNegative;
    if (!noisy) {
      out.own_class_hits[pop] += f != y;
      continue;
    }
    const Label noisy_y = u < flip_rate(w, pop) ? 1 - y : y;
    if (f == noisy_y) continue;
    if (noisy_y == y) {
      ++out.own_class_hits[pop];
    } else {
      ++out.cross_class_hits[mirror(pop)];
    }
  }
  for (Population p : kAllPopulations) {
    if (out.population_counts[p] == 0) throw Error("empty population");
  }

  for (Population p : kAllPopulations) {
    const double n1 = static_cast<double>(out.population_counts[p]);
    const double q1 = static_cast<double>(out.own_class_hits[p]) / n1;
    if (!noisy) {
      out.estimate[p] = q1;
      out.standard_error[p] = std::sqrt(q1 * (1.0 - q1) / n1);
      continue;
    }
    const Population m = mirror(p);
    const double n2 = static_cast<double>(out.population_counts[m]);
    const double q2 = static_cast<double>(out.cross_class_hits[p]) / n2;
    const double own_w = class_of(p) == kPositive ? w.prior_plus : 1.0 - w.prior_plus;
    const double cross_w = 1.0 - own_w;
    out.estimate[p] = own_w * q1 + cross_w * q2;
    out.standard_error[p] = std::sqrt(own_w * own_w * q1 * (1.0 - q1) / n1 +
                                      cross_w * cross_w * q2 * (1.0 - q2) / n2);
  }
  return out;
}

double estimator_bias(const GaussianWorld& w, const PopulationCounts& c) {
  const double hp = static_cast<double>(c.h_plus), tp = static_cast<double>(c.t_plus);
  const double hm = static_cast<double>(c.h_minus), tm = static_cast<double>(c.t_minus);
  const double plus = (w.rho_h_plus * hp + w.rho_t_plus * tp) / (hp + tp);
  const double minus = (w.rho_h_minus * hm + w.rho_t_minus * tm) / (hm + tm);
  return 0.5 * (w.mu_minus - w.mu_plus) * (plus - minus);
}

double midpoint_estimator(const LabeledCorpus& corpus) {
  if (corpus.dim() != 1) throw Error("midpoint estimator needs one feature");
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  const auto& y = corpus.noisy_labels();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != kPositive && y[i] != kNegative) throw Error("midpoint estimator needs binary labels");
    sum[y[i]] += corpus.features()(static_cast<Eigen::Index>(i), 0);
    ++count[y[i]];
  }
  if (count[0] == 0 || count[1] == 0) throw Error("empty noisy class");
  return 0.5 * (sum[kPositive] / static_cast<double>(count[kPositive]) +
                sum[kNegative] / static_cast<double>(count[kNegative]));
}

LabeledCorpus contaminated_mixture(const GaussianWorld& w, const PopulationCounts& c,
                                   std::uint64_t seed) {
  validate_world(w);
  const std::array<std::size_t, 4> counts{c.h_plus, c.t_plus, c.h_minus, c.t_minus};
  const std::size_t n = counts[0] + counts[1] + counts[2] + counts[3];
  RowMatrix x(static_cast<Eigen::Index>(n), 1);
  std::vector<Label> clean(n), noisy(n);
  std::vector<GroupId> groups(n);
  Rng rng(seed, Stream::kFeatures);
  const double phi_eta = std_normal_cdf(w.eta);
  const double phi_neg_eta = std_normal_cdf(-w.eta);
  std::size_t row = 0;
  for (Population p : kAllPopulations) {
    const Label s = class_of(p);
    const double mu = s == kPositive ? w.mu_plus : w.mu_minus;
    const double shift = s == kPositive ? w.mu_minus - w.mu_plus : w.mu_plus - w.mu_minus;
    for (std::size_t i = 0; i < counts[p]; ++i, ++row) {
      const double u = 1.0 - rng.uniform();  // (0, 1]
      // Standardized draw restricted to the population's region by inverting
      // the CDF on the matching side so both tails stay accurate.
      double z = 0.0;
      switch (p) {
        case kHeadPlus: z = -std_normal_quantile(u * phi_eta); break;      // z >= -eta
        case kTailPlus: z = std_normal_quantile(u * phi_neg_eta); break;   // z < -eta
        case kHeadMinus: z = std_normal_quantile(u * phi_eta); break;      // z <= eta
        case kTailMinus: z = -std_normal_quantile(u * phi_neg_eta); break; // z > eta
      }
      const bool flipped = rng.uniform() < flip_rate(w, p);
      x(static_cast<Eigen::Index>(row), 0) = mu + w.sigma * z + (flipped ? shift : 0.0);
      clean[row] = flipped ? 1 - s : s;
      noisy[row] = s;
      groups[row] = p;
    }
  }
  return LabeledCorpus(std::move(x), std::move(clean), std::move(noisy), 2,
                       GroupAssignment(std::move(groups), kPopulationCount));
}

double concentration_probability(const GaussianWorld& w, const PopulationCounts& c, double delta) {
  if (!(delta > 0.0)) throw Error("delta must be positive");
  const double hp = static_cast<double>(c.h_plus), tp = static_cast<double>(c.t_plus);
  const double hm = static_cast<double>(c.h_minus), tm = static_cast<double>(c.t_minus);
  const double ip = hp + tp, im = hm + tm;
  const double gap2 = (w.mu_plus - w.mu_minus) * (w.mu_plus - w.mu_minus);
  const double d2 = delta * delta;
  auto hoeffding = [&](double class_total, double part) {
    return 2.0 * std::exp(-8.0 * d2 * class_total * class_total / (25.0 * gap2 * part));
  };
  const double gaussian =
      2.0 * std::exp(-2.0 * d2 * (ip * im) / (25.0 * w.sigma * w.sigma * gap2 * (ip + im)));
  return 1.0 - hoeffding(ip, hp) - hoeffding(ip, tp) - hoeffding(im, hm) - hoeffding(im, tm) -
         gaussian;
}

double head_tail_ratio(double eta) {
  const double t = std_normal_cdf(-eta);
  if (t < 1e-300) throw Error("eta too small");
  return (1.0 - t) / t;
}

TheoremObjectives theorem_objectives(const GaussianWorld& w, double theta) {
  if (w.prior_plus != 0.5) throw Error("theorem requires balanced prior");
  const ErrorQuadruple e = clean_error_probs(w, theta);
  const ErrorQuadruple n = noisy_error_probs(w, theta);
  const double r = head_tail_ratio(w.eta);
  const double rho_h = w.rho_h_plus - w.rho_h_minus;
  const double rho_t = w.rho_t_plus - w.rho_t_minus;
  TheoremObjectives out;
  out.g = r * ((1.0 - rho_h) * n.h_plus + (1.0 + rho_h) * n.h_minus) +
          ((1.0 - rho_t) * n.t_plus + (1.0 + rho_t) * n.t_minus);
  out.h = r * (e.h_plus + e.h_minus) + (e.t_plus + e.t_minus) -
          2.0 * r * rho_h * (n.h_plus - n.h_minus) - rho_t * (n.t_plus - n.t_minus);
  return out;
}

double penalized_grid_argmin(const GaussianWorld& w, std::span<const double> grid, double lambda) {
  if (grid.empty()) throw Error("empty theta grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error("theta grid must be sorted");
  if (!(lambda >= 0.0)) throw Error("lambda must be >= 0");
  const double target = bayes_threshold(w);
  double best_theta = grid.front();
  double best_value = std::numeric_limits<double>::infinity();
  for (double theta : grid) {
    const ErrorQuadruple n = noisy_error_probs(w, theta);
    const double value = theorem_objectives(w, theta).g +
                         lambda * (std::abs(n.h_plus - n.h_minus) + std::abs(n.t_plus - n.t_minus));
    const bool closer = std::abs(theta - target) < std::abs(best_theta - target);
    if (value < best_value || (value == best_value && closer)) {
      best_value = value;
      best_theta = theta;
    }
  }
  return best_theta;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace tailfair

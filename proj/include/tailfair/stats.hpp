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

// Paired Student t-test and the accuracy-pair fixture runner.

#include <string>
#include <vector>

namespace tailfair {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student's t with `dof`
// degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct PairedSample {
  std::vector<double> baseline;
  std::vector<double> treated;
  std::string label;
};

struct TTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int degrees_of_freedom = 0;
  bool degenerate = false;  // every difference was zero
};

// Differences are treated - baseline. Throws "zero variance" when all
// differences are equal but nonzero.
TTestResult paired_t_test(const PairedSample& sample);

struct PairedTestRow {
  std::string method;
  std::string fr_type;
  std::string dataset;
  TTestResult result;
  bool significant = false;  // p < 0.1 and statistic > 0
};

// Fixture columns: method,fr_type,dataset,noise_type,rho,r,acc_base,acc_fr.
// One row per (method, fr_type, dataset) in order of first appearance.
// Throws "fixture malformed" on any parse problem.
std::vector<PairedTestRow> run_table2(const std::string& fixture_path);
std::vector<PairedTestRow> run_table2_text(const std::string& fixture_csv);

// p to three decimals, "<0.0005" below that.
std::string format_p_value(double p);

// CSV with header method,fr_type,dataset,statistic,p_value,significant.
std::string ttest_rows_to_csv(const std::vector<PairedTestRow>& rows);

}  // namespace tailfair

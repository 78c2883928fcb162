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

#include "tailfair/stats.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "tailfair/core.hpp"
#include "tailfair/text_io.hpp"

namespace tailfair {
namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast only on one side of the mean; use symmetry.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw Error("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

TTestResult paired_t_test(const PairedSample& s) {
  if (s.baseline.size() != s.treated.size()) throw Error("paired lists differ in length");
  const std::size_t m = s.baseline.size();
  if (m < 2) throw Error("paired test needs at least 2 pairs");
  std::vector<double> d(m);
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    d[k] = s.treated[k] - s.baseline[k];
    sum += d[k];
  }
  const double mean = sum / static_cast<double>(m);
  double ss = 0.0;
  bool all_zero = true;
  for (double v : d) {
    ss += (v - mean) * (v - mean);
    all_zero = all_zero && v == 0.0;
  }
  TTestResult r;
  r.degrees_of_freedom = static_cast<int>(m) - 1;
  if (all_zero) {
    r.degenerate = true;
    return r;
  }
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  if (sd == 0.0) throw Error("zero variance");
  r.statistic = mean / (sd / std::sqrt(static_cast<double>(m)));
  r.p_value = student_t_two_sided_p(r.statistic, r.degrees_of_freedom);
  return r;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<PairedTestRow> run_table2_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("fixture malformed: empty file");
  const auto header = split_csv_line(line);
  const std::vector<std::string> needed{"method", "fr_type", "dataset", "acc_base", "acc_fr"};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& n : needed) {
    if (!col.count(n)) throw Error("fixture malformed: missing column " + n);
  }

  std::vector<PairedTestRow> rows;
  std::vector<PairedSample> samples;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw Error("fixture malformed: line " + std::to_string(line_no) + " has " +
                  std::to_string(f.size()) + " fields");
    }
    const std::string key = f[col["method"]] + '\x1f' + f[col["fr_type"]] + '\x1f' + f[col["dataset"]];
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back(PairedTestRow{f[col["method"]], f[col["fr_type"]], f[col["dataset"]], {}, false});
      samples.emplace_back();
    }
    try {
      samples[it->second].baseline.push_back(parse_double(f[col["acc_base"]]));
      samples[it->second].treated.push_back(parse_double(f[col["acc_fr"]]));
    } catch (const Error&) {
      throw Error("fixture malformed: non-numeric accuracy on line " + std::to_string(line_no));
    }
  }
  if (rows.empty()) throw Error("fixture malformed: no data rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (samples[i].baseline.size() < 2) throw Error("fixture malformed: fewer than 2 pairs for a row");
    rows[i].result = paired_t_test(samples[i]);
    rows[i].significant = rows[i].result.p_value < 0.1 && rows[i].result.statistic > 0.0;
  }
  return rows;
}

std::vector<PairedTestRow> run_table2(const std::string& fixture_path) {
  std::string text;
  try {
    text = read_text_file(fixture_path);
  } catch (const Error& e) {
    throw Error(std::string("fixture malformed: ") + e.what());
  }
  return run_table2_text(text);
}

std::string format_p_value(double p) {
  if (p < 0.0005) return "<0.0005";
  return format_fixed(p, 3);
}

std::string ttest_rows_to_csv(const std::vector<PairedTestRow>& rows) {
  std::string out = "method,fr_type,dataset,statistic,p_value,significant\n";
  for (const auto& r : rows) {
    out += r.method + ',' + r.fr_type + ',' + r.dataset + ',' + format_fixed(r.result.statistic, 3) +
           ',' + format_p_value(r.result.p_value) + ',' + (r.significant ? "yes" : "no") + '\n';
  }
  return out;
}

}  // namespace tailfair

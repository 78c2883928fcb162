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

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "tailfair/datamodel.hpp"
#include "tailfair/text_io.hpp"

namespace tailfair {

std::string metadata_path_for(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return csv_path + ".meta.json";
  }
  return csv_path.substr(0, dot) + ".meta.json";
}

void write_corpus(const std::string& csv_path, const LabeledCorpus& corpus) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + csv_path);

  const Eigen::Index d = corpus.dim();
  std::string line;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j) line += ',';
    line += "feat_" + std::to_string(j);
  }
  auto append_col = [&line](const char* name) {
    if (!line.empty()) line += ',';
    line += name;
  };
  if (corpus.has_clean_labels()) append_col("clean_label");
  append_col("noisy_label");
  if (corpus.has_groups()) append_col("group_id");
  out << line << '\n';

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j) line += ',';
      line += format_double(corpus.features()(static_cast<Eigen::Index>(i), j));
    }
    auto append = [&line](long v) {
      if (!line.empty()) line += ',';
      line += std::to_string(v);
    };
    if (corpus.has_clean_labels()) append((*corpus.clean_labels())[i]);
    append(corpus.noisy_labels()[i]);
    if (corpus.has_groups()) append((*corpus.groups())[i]);
    out << line << '\n';
  }
  if (!out) throw Error("write failed: " + csv_path);

  nlohmann::ordered_json meta;
  meta["K"] = corpus.class_count();
  meta["N"] = corpus.has_groups() ? corpus.groups()->group_count() : 0;
  meta["d"] = d;
  meta["n"] = corpus.size();
  meta["has_clean_labels"] = corpus.has_clean_labels();
  meta["has_groups"] = corpus.has_groups();
  write_text_file(metadata_path_for(csv_path), meta.dump(2) + "\n");
}

namespace {

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

LabeledCorpus read_corpus(const std::string& csv_path) {
  const std::string meta_path = metadata_path_for(csv_path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed metadata " + meta_path + ": " + e.what());
  }
  const int K = meta.at("K").get<int>();
  const int N = meta.value("N", 0);
  const Eigen::Index d = meta.at("d").get<Eigen::Index>();
  const std::size_t n = meta.at("n").get<std::size_t>();

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error("cannot open corpus: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty corpus file: " + csv_path);
  const auto header = split_commas(line);
  Eigen::Index n_feat = 0;
  int clean_col = -1, noisy_col = -1, group_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view h = header[c];
    if (h.starts_with("feat_")) {
      ++n_feat;
    } else if (h == "clean_label") {
      clean_col = static_cast<int>(c);
    } else if (h == "noisy_label") {
      noisy_col = static_cast<int>(c);
    } else if (h == "group_id") {
      group_col = static_cast<int>(c);
    } else {
      throw Error("unknown corpus column '" + std::string(h) + "' in " + csv_path);
    }
  }
  if (noisy_col < 0) throw Error("corpus lacks noisy_label column: " + csv_path);
  if (n_feat != d) throw Error("feature count disagrees with metadata: " + csv_path);

  RowMatrix features(static_cast<Eigen::Index>(n), d);
  std::vector<Label> noisy(n);
  std::optional<std::vector<Label>> clean;
  if (clean_col >= 0) clean.emplace(n);
  std::vector<GroupId> groups;
  if (group_col >= 0) groups.resize(n);

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= n) throw Error("more rows than metadata declares: " + csv_path);
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error("wrong field count at data row " + std::to_string(row) + " of " + csv_path);
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      features(static_cast<Eigen::Index>(row), j) = parse_double(fields[static_cast<std::size_t>(j)]);
    }
    noisy[row] = static_cast<Label>(parse_int(fields[static_cast<std::size_t>(noisy_col)]));
    if (clean) (*clean)[row] = static_cast<Label>(parse_int(fields[static_cast<std::size_t>(clean_col)]));
    if (group_col >= 0) groups[row] = static_cast<GroupId>(parse_int(fields[static_cast<std::size_t>(group_col)]));
    ++row;
  }
  if (row != n) throw Error("fewer rows than metadata declares: " + csv_path);

  std::optional<GroupAssignment> assignment;
  if (group_col >= 0) assignment.emplace(std::move(groups), N);
  return LabeledCorpus(std::move(features), std::move(clean), std::move(noisy), K,
                       std::move(assignment));
}

}  // namespace tailfair

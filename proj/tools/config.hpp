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

// Experiment configuration: a JSON tree of sections with defaults, a config
// file merged on top, then `section.key=value` overrides.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tailfair::cli {

using Json = nlohmann::ordered_json;

Json default_config();

// Deep-merges `overlay` into `base`. Keys absent from `base` are rejected so
// typos fail loudly.
void merge_config(Json& base, const Json& overlay, const std::string& path = "");

// Applies "section.key=value". The value is parsed as JSON when possible and
// kept as a string otherwise.
void apply_override(Json& config, const std::string& assignment);

Json load_config(const std::string& path, const std::vector<std::string>& overrides);

// FNV-1a over the compact dump of the resolved config.
std::uint64_t config_hash(const Json& config);

template <typename T>
T get(const Json& config, const std::string& dotted) {
  const Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) throw std::runtime_error("missing config key " + dotted);
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("config key " + dotted + " has the wrong type");
  }
}

}  // namespace tailfair::cli

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

#include "config.hpp"

#include <fstream>
#include <stdexcept>

namespace tailfair::cli {

Json default_config() {
  return Json::parse(R"({
    "synth": {
      "n": 500, "K": 10, "r": 10.0, "dim": 16, "separation": 3.0, "sigma": 1.0,
      "noise": "sym", "rho": 0.2, "noise_order": "post", "eval_per_class": 200, "seed": 1
    },
    "data": { "train": "", "eval": "" },
    "groups": {
      "method": "kmeans", "N": 5, "head_fraction": 0.8333333333333334,
      "score_file": "", "eval_score_file": "", "group_file": "", "eval_group_file": "",
      "max_iters": 100, "tol": 1e-8, "seed": 1
    },
    "model": { "kind": "linear", "hidden_dim": 32 },
    "train": {
      "epochs": 20, "batch": 128, "lr": 0.1, "lr_decay_epochs": [], "lr_decay_factor": 0.1,
      "momentum": 0.9, "weight_decay": 0.0005, "seed": 1
    },
    "loss": { "kind": "ce", "alpha": null, "gamma": 2.0, "tau": 1.0, "peer_weight": 1.0 },
    "fr": { "lambda": 0.0 },
    "influence": { "groups": null },
    "theory": {
      "mu_plus": 5.0, "mu_minus": -5.0, "sigma": 1.0, "eta": 1.0, "prior_plus": 0.5,
      "rho_h_plus": 0.1, "rho_h_minus": 0.05, "rho_t_plus": 0.3, "rho_t_minus": 0.2,
      "grid_points": 101, "grid_lo": null, "grid_hi": null,
      "mc_samples": 1000000, "mc_theta": 0.0, "lambdas": [0.0, 1.0, 10.0], "seed": 1
    },
    "ttest": { "fixture": "" },
    "output": { "dir": "out" }
  })");
}

void merge_config(Json& base, const Json& overlay, const std::string& path) {
  if (!overlay.is_object()) throw std::runtime_error("config " + (path.empty() ? "root" : path) + " must be an object");
  for (const auto& [key, value] : overlay.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw std::runtime_error("unknown config key " + full);
    if (base[key].is_object()) {
      merge_config(base[key], value, full);
    } else {
      base[key] = value;
    }
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::runtime_error("override '" + assignment + "' is not KEY=VALUE");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  // Build a one-key overlay along the dotted path.
  Json overlay = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t start = 0;;) {
    const auto dot = rest.find('.', start);
    parts.push_back(rest.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    Json wrapped = Json::object();
    wrapped[*it] = std::move(overlay);
    overlay = std::move(wrapped);
  }
  merge_config(config, overlay);
}

Json load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json config = default_config();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    Json file;
    try {
      file = Json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("config " + path + " is not valid JSON: " + e.what());
    }
    merge_config(config, file);
  }
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

std::uint64_t config_hash(const Json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace tailfair::cli

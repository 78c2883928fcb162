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

// tailfair command-line driver.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "config.hpp"
#include "tailfair/datamodel.hpp"
#include "tailfair/influence.hpp"
#include "tailfair/population.hpp"
#include "tailfair/rng.hpp"
#include "tailfair/stats.hpp"
#include "tailfair/synthesis.hpp"
#include "tailfair/text_io.hpp"
#include "tailfair/theory.hpp"
#include "tailfair/trainer.hpp"

#ifndef TAILFAIR_DATA_DIR
#define TAILFAIR_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using tailfair::cli::Json;
using tailfair::cli::get;

namespace tailfair::cli {
namespace {

struct Run {
  Json config;
  fs::path out_dir;
  unsigned jobs = 1;
  std::string command;
  std::vector<std::string> outputs;

  void write(const std::string& name, const std::string& text) {
    write_text_file((out_dir / name).string(), text);
    outputs.push_back(name);
  }
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(Run& run, std::uint64_t seed) {
  Json m;
  m["command"] = run.command;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash(run.config)));
  m["config_hash"] = hash;
  m["seed"] = seed;
  m["tailfair_version"] = TAILFAIR_VERSION;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                       "." + std::to_string(EIGEN_MINOR_VERSION);
  m["outputs"] = run.outputs;
  m["config"] = run.config;
  m["timestamp"] = utc_timestamp();
  write_text_file((run.out_dir / "manifest.json").string(), m.dump(2) + "\n");
}

// ---------------------------------------------------------------- corpora

struct Corpora {
  LabeledCorpus train;
  LabeledCorpus eval;
};

Corpora synthesize(const Json& c) {
  const auto K = get<int>(c, "synth.K");
  const auto n = get<std::size_t>(c, "synth.n");
  const auto r = get<double>(c, "synth.r");
  const auto seed = get<std::uint64_t>(c, "synth.seed");
  const auto rho = get<double>(c, "synth.rho");
  const auto noise = get<std::string>(c, "synth.noise");
  const auto order = get<std::string>(c, "synth.noise_order");
  if (order != "pre" && order != "post") throw Error("synth.noise_order must be pre or post");

  const Matrix centers = class_centers(K, get<Eigen::Index>(c, "synth.dim"), get<double>(c, "synth.separation"), seed);
  const double sigma = get<double>(c, "synth.sigma");
  const std::vector<std::size_t> balanced(static_cast<std::size_t>(K), n);
  LabeledCorpus train = gaussian_blobs(centers, balanced, sigma, seed);

  const LongTailSpec lt{n, r, K};
  const auto counts = longtail_counts(lt);
  double total = 0.0;
  for (auto v : counts) total += static_cast<double>(v);
  // Class frequencies of the long-tailed corpus, whichever order is used.
  std::vector<double> priors;
  for (auto v : counts) priors.push_back(static_cast<double>(v) / total);

  std::optional<NoiseTransition> t;
  if (noise == "sym") t = sym_transition(K, rho);
  else if (noise == "imb") t = imb_transition(K, rho, priors);
  else if (noise != "none") throw Error("synth.noise must be sym, imb or none");

  auto add_noise = [&](const LabeledCorpus& corpus) {
    if (!t) return corpus;
    return corpus.with_noisy_labels(apply_noise(*corpus.clean_labels(), *t, seed));
  };
  if (order == "pre") {
    train = subsample_longtail(add_noise(train), lt, seed);
  } else {
    train = add_noise(subsample_longtail(train, lt, seed));
  }

  const std::vector<std::size_t> eval_counts(static_cast<std::size_t>(K), get<std::size_t>(c, "synth.eval_per_class"));
  LabeledCorpus eval = gaussian_blobs(centers, eval_counts, sigma, derive_seed(seed, Stream::kEvalFeatures));
  return {std::move(train), std::move(eval)};
}

void attach_groups(const Json& c, Corpora& data) {
  const auto method = get<std::string>(c, "groups.method");
  if (method == "none") return;
  if (method == "kmeans") {
    KMeansOptions opt{get<int>(c, "groups.max_iters"), get<double>(c, "groups.tol")};
    const auto km = kmeans_groups(data.train.features(), get<int>(c, "groups.N"), get<std::uint64_t>(c, "groups.seed"), opt);
    std::vector<GroupId> eval_ids(data.eval.size());
    for (std::size_t i = 0; i < eval_ids.size(); ++i) {
      eval_ids[i] = nearest_centroid(km.centroids, data.eval.features().row(static_cast<Eigen::Index>(i)));
    }
    const int N = km.assignment.group_count();
    data.train = data.train.with_groups(km.assignment);
    data.eval = data.eval.with_groups(GroupAssignment(std::move(eval_ids), N));
  } else if (method == "two_group") {
    const double f = get<double>(c, "groups.head_fraction");
    data.train = data.train.with_groups(
        split_two_groups(load_scores(get<std::string>(c, "groups.score_file"), data.train.size()), f));
    data.eval = data.eval.with_groups(
        split_two_groups(load_scores(get<std::string>(c, "groups.eval_score_file"), data.eval.size()), f));
  } else if (method == "file") {
    GroupAssignment tr = load_groups(get<std::string>(c, "groups.group_file"), data.train.size());
    GroupAssignment ev = load_groups(get<std::string>(c, "groups.eval_group_file"), data.eval.size());
    const int N = std::max(tr.group_count(), ev.group_count());
    data.train = data.train.with_groups(GroupAssignment(tr.ids(), N));
    data.eval = data.eval.with_groups(GroupAssignment(ev.ids(), N));
  } else if (method == "class") {
    data.train = data.train.with_groups(GroupAssignment(data.train.reference_labels(), data.train.class_count()));
    data.eval = data.eval.with_groups(GroupAssignment(data.eval.reference_labels(), data.eval.class_count()));
  } else if (method != "keep") {
    throw Error("groups.method must be kmeans, two_group, file, class, keep or none");
  }
  for (const auto* corpus : {&data.train, &data.eval}) {
    const auto v = validate_corpus(*corpus);
    if (!v.empty()) throw Error("invalid corpus: " + v.front().message);
  }
}

Corpora load_or_synthesize(const Json& c) {
  const auto train_path = get<std::string>(c, "data.train");
  const auto eval_path = get<std::string>(c, "data.eval");
  Corpora data;
  if (train_path.empty() != eval_path.empty()) throw Error("data.train and data.eval must be set together");
  if (train_path.empty()) {
    data = synthesize(c);
  } else {
    data = {read_corpus(train_path), read_corpus(eval_path)};
  }
  attach_groups(c, data);
  return data;
}

// ---------------------------------------------------------------- training config

ModelSpec model_spec(const Json& c, const LabeledCorpus& corpus) {
  ModelSpec s;
  s.kind = parse_model_kind(get<std::string>(c, "model.kind"));
  s.input_dim = corpus.dim();
  s.hidden_dim = get<Eigen::Index>(c, "model.hidden_dim");
  s.class_count = corpus.class_count();
  return s;
}

TrainConfig train_config(const Json& c) {
  TrainConfig t;
  t.epochs = get<int>(c, "train.epochs");
  t.batch_size = get<std::size_t>(c, "train.batch");
  t.lr.initial = get<double>(c, "train.lr");
  t.lr.decay_epochs = get<std::vector<int>>(c, "train.lr_decay_epochs");
  t.lr.decay_factor = get<double>(c, "train.lr_decay_factor");
  t.momentum = get<double>(c, "train.momentum");
  t.weight_decay = get<double>(c, "train.weight_decay");
  t.seed = get<std::uint64_t>(c, "train.seed");
  t.loss.kind = parse_loss_kind(get<std::string>(c, "loss.kind"));
  const Json& alpha = c["loss"]["alpha"];
  if (!alpha.is_null()) {
    t.loss.alpha = alpha.get<double>();
    t.loss.nls_alpha = alpha.get<double>();
  }
  t.loss.gamma = get<double>(c, "loss.gamma");
  t.loss.tau = get<double>(c, "loss.tau");
  t.loss.peer_weight = get<double>(c, "loss.peer_weight");
  const Json& lambda = c["fr"]["lambda"];
  t.fr.lambdas = lambda.is_array() ? lambda.get<std::vector<double>>() : std::vector<double>{lambda.get<double>()};
  return t;
}

std::string accuracy_csv(const char* key, const std::vector<double>& acc, const std::vector<std::size_t>& counts) {
  std::string out = std::string(key) + ",count,accuracy\n";
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(counts[i]) + ',' + format_double(acc[i]) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------- commands

void cmd_synth(Run& run) {
  Corpora data = load_or_synthesize(run.config);
  write_corpus((run.out_dir / "train.csv").string(), data.train);
  write_corpus((run.out_dir / "eval.csv").string(), data.eval);
  run.outputs.insert(run.outputs.end(), {"train.csv", "train.meta.json", "eval.csv", "eval.meta.json"});
  const auto s = corpus_stats(data.train);
  Json j;
  j["train_rows"] = data.train.size();
  j["eval_rows"] = data.eval.size();
  j["per_class_counts"] = s.per_class_counts;
  j["per_group_counts"] = s.per_group_counts;
  j["imbalance_ratio"] = s.empirical_imbalance_ratio ? Json(*s.empirical_imbalance_ratio) : Json(nullptr);
  j["noise_rate"] = s.empirical_noise_rate ? Json(*s.empirical_noise_rate) : Json(nullptr);
  run.write("synth_summary.json", j.dump(2) + "\n");
  write_manifest(run, get<std::uint64_t>(run.config, "synth.seed"));
}

void cmd_train(Run& run) {
  const Corpora data = load_or_synthesize(run.config);
  const TrainReport report = train(data.train, data.eval, model_spec(run.config, data.train), train_config(run.config));
  run.write("report.jsonl", report_to_jsonl(report));
  run.write("params.txt", params_to_text(report.params));
  run.write("eval_per_class.csv", accuracy_csv("class", report.final_eval.per_class, report.final_eval.class_counts));
  if (!report.final_eval.per_group.empty()) {
    run.write("eval_per_group.csv", accuracy_csv("group", report.final_eval.per_group, report.final_eval.group_counts));
  }
  write_manifest(run, get<std::uint64_t>(run.config, "train.seed"));
}

Json box_json(const BoxSummary& b) {
  Json j;
  j["count"] = b.count;
  j["min"] = b.min;
  j["q1"] = b.q1;
  j["median"] = b.median;
  j["q3"] = b.q3;
  j["max"] = b.max;
  j["lower_fence"] = b.lower_fence;
  j["upper_fence"] = b.upper_fence;
  j["outliers"] = b.outliers;
  return j;
}

std::string series_csv(const char* key, const char* value, const std::vector<double>& v) {
  std::string out = std::string(key) + ',' + value + '\n';
  for (std::size_t i = 0; i < v.size(); ++i) out += std::to_string(i) + ',' + format_double(v[i]) + '\n';
  return out;
}

void cmd_influence(Run& run) {
  const Corpora data = load_or_synthesize(run.config);
  if (!data.train.has_groups()) throw Error("influence needs groups (groups.method)");
  std::vector<GroupId> groups;
  const Json& listed = run.config["influence"]["groups"];
  if (listed.is_null()) {
    for (GroupId g = 0; g < data.train.groups()->group_count(); ++g) groups.push_back(g);
  } else {
    groups = listed.get<std::vector<GroupId>>();
  }
  const auto reports = influence_sweep(data.train, data.eval, groups, model_spec(run.config, data.train),
                                       train_config(run.config), run.jobs);
  Json summary = Json::array();
  for (const auto& r : reports) {
    const std::string dir = "group_" + std::to_string(r.removed_group);
    fs::create_directories(run.out_dir / dir);
    run.write(dir + "/acc_p.csv", series_csv("group", "acc_p", r.acc_p));
    run.write(dir + "/acc_c.csv", series_csv("class", "acc_c", r.acc_c));
    run.write(dir + "/infl.csv", series_csv("sample", "infl", r.infl));
    Json j;
    j["removed_group"] = r.removed_group;
    j["overall_delta"] = r.overall_delta;
    j["seed"] = r.seed;
    j["acc_p"] = box_json(box_summary(r.acc_p));
    j["acc_c"] = box_json(box_summary(r.acc_c));
    j["infl"] = box_json(box_summary(r.infl));
    summary.push_back(j);
  }
  run.write("influence_summary.json", summary.dump(2) + "\n");
  write_manifest(run, get<std::uint64_t>(run.config, "train.seed"));
}

GaussianWorld world_from(const Json& c) {
  GaussianWorld w;
  w.mu_plus = get<double>(c, "theory.mu_plus");
  w.mu_minus = get<double>(c, "theory.mu_minus");
  w.sigma = get<double>(c, "theory.sigma");
  w.eta = get<double>(c, "theory.eta");
  w.prior_plus = get<double>(c, "theory.prior_plus");
  w.rho_h_plus = get<double>(c, "theory.rho_h_plus");
  w.rho_h_minus = get<double>(c, "theory.rho_h_minus");
  w.rho_t_plus = get<double>(c, "theory.rho_t_plus");
  w.rho_t_minus = get<double>(c, "theory.rho_t_minus");
  validate_world(w);
  return w;
}

void cmd_theory(Run& run) {
  const Json& c = run.config;
  const GaussianWorld w = world_from(c);
  const Json& lo_j = c["theory"]["grid_lo"];
  const Json& hi_j = c["theory"]["grid_hi"];
  const double lo = lo_j.is_null() ? w.mu_minus - 3.0 * w.sigma : lo_j.get<double>();
  const double hi = hi_j.is_null() ? w.mu_plus + 3.0 * w.sigma : hi_j.get<double>();
  const auto grid = linspace(lo, hi, get<std::size_t>(c, "theory.grid_points"));
  const bool balanced = w.prior_plus == 0.5;

  std::string csv = "theta,err_h_plus,err_t_plus,err_h_minus,err_t_minus,"
                    "noisy_err_h_plus,noisy_err_t_plus,noisy_err_h_minus,noisy_err_t_minus,G,H,G_minus_H\n";
  double spread_lo = std::numeric_limits<double>::infinity();
  double spread_hi = -spread_lo;
  for (double theta : grid) {
    const auto e = clean_error_probs(w, theta);
    const auto n = noisy_error_probs(w, theta);
    csv += format_double(theta);
    for (double v : {e.h_plus, e.t_plus, e.h_minus, e.t_minus, n.h_plus, n.t_plus, n.h_minus, n.t_minus}) {
      csv += ',' + format_double(v);
    }
    if (balanced) {
      const auto gh = theorem_objectives(w, theta);
      spread_lo = std::min(spread_lo, gh.g - gh.h);
      spread_hi = std::max(spread_hi, gh.g - gh.h);
      csv += ',' + format_double(gh.g) + ',' + format_double(gh.h) + ',' + format_double(gh.g - gh.h) + '\n';
    } else {
      csv += ",,,\n";
    }
  }
  run.write("theory_grid.csv", csv);

  Json s;
  s["bayes_threshold"] = bayes_threshold(w);
  if (balanced) {
    s["g_minus_h_spread"] = spread_hi - spread_lo;
    s["g_minus_h_constant"] = spread_hi - spread_lo <= 1e-9;
    Json argmins = Json::array();
    for (double lambda : c["theory"]["lambdas"].get<std::vector<double>>()) {
      argmins.push_back({{"lambda", lambda}, {"argmin", penalized_grid_argmin(w, grid, lambda)}});
    }
    s["penalized_argmin"] = argmins;
  }
  const double theta = get<double>(c, "theory.mc_theta");
  const auto samples = get<std::size_t>(c, "theory.mc_samples");
  const auto seed = get<std::uint64_t>(c, "theory.seed");
  Json mc;
  mc["theta"] = theta;
  mc["samples"] = samples;
  for (bool noisy : {false, true}) {
    const auto est = mc_error_probs(w, theta, samples, seed, noisy);
    const auto ref = noisy ? noisy_error_probs(w, theta) : clean_error_probs(w, theta);
    Json rows = Json::object();
    double worst = 0.0;
    for (Population p : {kHeadPlus, kTailPlus, kHeadMinus, kTailMinus}) {
      const double z = est.standard_error[p] > 0.0 ? std::abs(est.estimate[p] - ref[p]) / est.standard_error[p] : 0.0;
      worst = std::max(worst, z);
      rows[std::to_string(p)] = {{"closed_form", ref[p]}, {"monte_carlo", est.estimate[p]}, {"standard_error", est.standard_error[p]}};
    }
    mc[noisy ? "noisy" : "clean"] = rows;
    mc[noisy ? "noisy_max_z" : "clean_max_z"] = worst;
  }
  s["monte_carlo"] = mc;
  run.write("theory_summary.json", s.dump(2) + "\n");
  write_manifest(run, seed);
}

void cmd_ttest(Run& run) {
  std::string fixture = get<std::string>(run.config, "ttest.fixture");
  if (fixture.empty()) fixture = std::string(TAILFAIR_DATA_DIR) + "/accuracy_pairs.csv";
  const auto rows = run_table2(fixture);
  run.write("ttest_results.csv", ttest_rows_to_csv(rows));
  write_manifest(run, 0);
}

void cmd_compare(Run& run, const Json& config_b) {
  const Json& a_cfg = run.config;
  const Corpora data = load_or_synthesize(a_cfg);
  const Corpora data_b = load_or_synthesize(config_b);
  std::optional<TrainReport> ra, rb;
  auto job_a = [&] { ra = train(data.train, data.eval, model_spec(a_cfg, data.train), train_config(a_cfg)); };
  auto job_b = [&] { rb = train(data_b.train, data_b.eval, model_spec(config_b, data_b.train), train_config(config_b)); };
  if (run.jobs > 1) {
    std::exception_ptr err;
    std::jthread t([&] {
      try { job_b(); } catch (...) { err = std::current_exception(); }
    });
    job_a();
    t.join();
    if (err) std::rethrow_exception(err);
  } else {
    job_a();
    job_b();
  }
  auto pairs = [](const char* key, const std::vector<double>& a, const std::vector<double>& b,
                  const std::vector<std::size_t>& counts) {
    if (a.size() != b.size()) throw Error(std::string("runs disagree on ") + key + " count");
    std::string out = std::string(key) + ",count,acc_a,acc_b,diff\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
      out += std::to_string(i) + ',' + std::to_string(counts[i]) + ',' + format_double(a[i]) + ',' +
             format_double(b[i]) + ',' + format_double(b[i] - a[i]) + '\n';
    }
    return out;
  };
  run.write("compare_class.csv", pairs("class", ra->final_eval.per_class, rb->final_eval.per_class, ra->final_eval.class_counts));
  if (!ra->final_eval.per_group.empty() && !rb->final_eval.per_group.empty()) {
    run.write("compare_group.csv", pairs("group", ra->final_eval.per_group, rb->final_eval.per_group, ra->final_eval.group_counts));
  }
  Json j;
  j["accuracy_a"] = ra->final_eval.accuracy;
  j["accuracy_b"] = rb->final_eval.accuracy;
  j["config_b"] = config_b;
  run.write("compare_summary.json", j.dump(2) + "\n");
  write_manifest(run, get<std::uint64_t>(a_cfg, "train.seed"));
}

}  // namespace
}  // namespace tailfair::cli

int main(int argc, char** argv) {
  using namespace tailfair::cli;
  CLI::App app{"tailfair: label noise and long-tailed sub-population experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string output_dir;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", sets, "Override a config key, section.key=value (repeatable)");
  app.add_option("--seed", seed, "Seed for every stage (synth, groups, train, theory)");
  app.add_option("--jobs", jobs, "Worker threads for independent runs")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", output_dir, "Output directory (overrides output.dir)");

  auto* synth = app.add_subcommand("synth", "Write long-tailed noisy train and clean eval corpora");
  auto* train = app.add_subcommand("train", "Train a classifier and write its report");
  auto* influence = app.add_subcommand("influence", "Leave-one-group-out influence sweep");
  auto* theory = app.add_subcommand("theory", "Binary Gaussian closed forms and checks over a threshold grid");
  auto* ttest = app.add_subcommand("ttest", "Paired t-tests over the accuracy-pair fixture");
  std::string fixture;
  ttest->add_option("fixture", fixture, "Fixture CSV (default: shipped table)");
  auto* compare = app.add_subcommand("compare", "Per-class and per-group accuracy pairs of two configs");
  std::string config_b_path;
  std::vector<std::string> b_sets;
  compare->add_option("--config-b", config_b_path, "Config file merged on top of A to form B");
  compare->add_option("--b-set", b_sets, "Override applied to B only (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Run run;
    run.config = load_config(config_path, sets);
    if (seed) {
      for (const char* s : {"synth", "groups", "train", "theory"}) run.config[s]["seed"] = *seed;
    }
    if (!fixture.empty()) run.config["ttest"]["fixture"] = fixture;
    if (!output_dir.empty()) run.config["output"]["dir"] = output_dir;
    run.out_dir = get<std::string>(run.config, "output.dir");
    run.jobs = jobs;
    fs::create_directories(run.out_dir);

    if (*synth) {
      run.command = "synth";
      tailfair::cli::cmd_synth(run);
    } else if (*train) {
      run.command = "train";
      tailfair::cli::cmd_train(run);
    } else if (*influence) {
      run.command = "influence";
      tailfair::cli::cmd_influence(run);
    } else if (*theory) {
      run.command = "theory";
      tailfair::cli::cmd_theory(run);
    } else if (*ttest) {
      run.command = "ttest";
      tailfair::cli::cmd_ttest(run);
    } else if (*compare) {
      run.command = "compare";
      Json b = run.config;
      if (!config_b_path.empty()) {
        // Only the keys the B file sets override A.
        std::ifstream in(config_b_path);
        if (!in) throw std::runtime_error("cannot open config " + config_b_path);
        merge_config(b, Json::parse(in, nullptr, true, true));
      }
      for (const auto& o : b_sets) apply_override(b, o);
      tailfair::cli::cmd_compare(run, b);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "tailfair: error: " << msg << '\n';
    return 1;
  }
  return 0;
}

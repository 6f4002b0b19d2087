/* Copyright 2026 The confit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// confit: command-line driver for the few-shot classification pipeline.
//
//   confit stats      --data train.jsonl
//   confit split      --data train.jsonl --mode stratified --fraction 0.2 ...
//   confit augment    --train train.jsonl --out aug.jsonl --provider mock ...
//   confit train      --train train.jsonl --out model.confit ...
//   confit predict    --model model.confit --input test.jsonl --out preds.jsonl
//   confit eval       --model model.confit --test test.jsonl --seed 7
//   confit gridsearch --train train.jsonl --iterations 5 10 --lr 1e-5 ...
//   confit ablate     --train train.jsonl --test test.jsonl ...
//
// Exit status: 0 success, 1 runtime or training failure, 2 usage or
// validation error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "confit/artifact.hpp"
#include "confit/augment.hpp"
#include "confit/corpus.hpp"
#include "confit/eval.hpp"
#include "confit/http_provider.hpp"
#include "confit/pipeline.hpp"
#include "confit/tune.hpp"

namespace {

using namespace confit;
using json = nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Error tagged with the pipeline stage it came from.
struct StageFailure {
  std::string stage;
  std::string message;
  int exit_code;
};

template <typename F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError& e) {
    throw StageFailure{name, e.what(), kExitUsage};
  } catch (const std::exception& e) {
    throw StageFailure{name, e.what(), kExitRuntime};
  }
}

// ---------------------------------------------------------------------------
// Option groups shared by several subcommands

struct PipelineFlags {
  std::size_t iterations = 5;
  double lr = 1e-5;
  double lr_scale = 1e5;
  std::size_t epochs = 1;
  std::size_t batch_size = 16;
  std::size_t embed_dim = 64;
  std::size_t hash_dim = 32768;
  std::size_t max_seq_len = 512;
  std::size_t head_epochs = 100;
  double head_lr = 0.1;
  double l2 = 1e-4;

  PipelineConfig config(std::uint64_t seed) const {
    PipelineConfig cfg;
    cfg.encoder.tokenizer.max_seq_len = max_seq_len;
    cfg.encoder.hash_dim = hash_dim;
    cfg.encoder.embed_dim = embed_dim;
    cfg.contrastive.iterations = iterations;
    cfg.contrastive.learning_rate = lr;
    cfg.contrastive.lr_scale = lr_scale;
    cfg.contrastive.epochs = epochs;
    cfg.contrastive.batch_size = batch_size;
    cfg.head.epochs = head_epochs;
    cfg.head.learning_rate = head_lr;
    cfg.head.l2 = l2;
    cfg.set_seed(seed);
    return cfg;
  }
};

void add_pipeline_flags(CLI::App* app, PipelineFlags& f, bool scalar_grid_axes) {
  if (scalar_grid_axes) {
    app->add_option("--iterations", f.iterations, "pair-sampling rounds per example (R)")
        ->capture_default_str();
    app->add_option("--lr", f.lr, "contrastive learning rate (nominal)")->capture_default_str();
    app->add_option("--epochs", f.epochs, "contrastive epochs")->capture_default_str();
  }
  app->add_option("--lr-scale", f.lr_scale, "multiplier applied to --lr for the encoder step")
      ->capture_default_str();
  app->add_option("--batch-size", f.batch_size, "pairs per gradient step")->capture_default_str();
  app->add_option("--embed-dim", f.embed_dim, "sentence embedding size")->capture_default_str();
  app->add_option("--hash-dim", f.hash_dim, "feature hashing buckets (power of two)")
      ->capture_default_str();
  app->add_option("--max-seq-len", f.max_seq_len, "tokens kept per text")->capture_default_str();
  app->add_option("--head-epochs", f.head_epochs, "classification head epochs")
      ->capture_default_str();
  app->add_option("--head-lr", f.head_lr, "classification head learning rate")
      ->capture_default_str();
  app->add_option("--l2", f.l2, "classification head L2 penalty")->capture_default_str();
}

struct ProviderFlags {
  std::string provider = "mock";
  std::string provider_url;
  std::string targets;
  double multiplier = 1.0;
  double temperature = kDefaultTemperature;
  std::string prompt_template = std::string(kDefaultPromptTemplate);
  std::size_t parallelism = 1;
  std::size_t retries = 3;
  long timeout_ms = 30000;
};

void add_provider_flags(CLI::App* app, ProviderFlags& f) {
  app->add_option("--provider", f.provider, "paraphrase provider")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  app->add_option("--provider-url", f.provider_url,
                  "paraphrase service root (default: $CONFIT_PROVIDER_URL)");
  app->add_option("--targets", f.targets, "per-class target counts, e.g. A=1822,B=2524");
  app->add_option("--multiplier", f.multiplier,
                  "balance every class to max_count * multiplier (when --targets is absent)")
      ->capture_default_str();
  app->add_option("--temperature", f.temperature, "sampling temperature")->capture_default_str();
  app->add_option("--prompt-template", f.prompt_template, "prompt with one {text} placeholder")
      ->capture_default_str();
  app->add_option("--parallelism", f.parallelism, "concurrent paraphrase requests")
      ->capture_default_str();
  app->add_option("--retries", f.retries, "retries per request")->capture_default_str();
  app->add_option("--timeout-ms", f.timeout_ms, "per-request timeout")->capture_default_str();
}

std::unique_ptr<ParaphraseProvider> make_provider(const ProviderFlags& f) {
  if (f.provider == "mock") return std::make_unique<MockProvider>();
  HttpProviderOptions opts;
  opts.endpoint = f.provider_url;
  if (opts.endpoint.empty()) {
    if (const char* env = std::getenv(kProviderUrlEnv)) opts.endpoint = env;
  }
  if (opts.endpoint.empty()) {
    throw ArgumentError("--provider http needs --provider-url or $CONFIT_PROVIDER_URL");
  }
  opts.timeout = std::chrono::milliseconds(f.timeout_ms);
  opts.retry.max_retries = f.retries;
  return std::make_unique<HttpParaphraseProvider>(std::move(opts));
}

Dataset run_augmentation(const Dataset& train, const ProviderFlags& f, std::uint64_t seed) {
  const auto current = class_distribution(train);
  const auto plan = f.targets.empty() ? plan_balanced(current, f.multiplier)
                                      : plan_to_targets(current, parse_label_counts(f.targets));
  auto provider = make_provider(f);
  AugmentOptions opts;
  opts.seed = seed;
  opts.temperature = f.temperature;
  opts.prompt_template = f.prompt_template;
  opts.parallelism = f.parallelism;
  return augment_dataset(train, plan, *provider, opts);
}

void require_distinct(const std::vector<std::pair<std::string, std::string>>& paths) {
  namespace fs = std::filesystem;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      if (paths[i].second.empty() || paths[j].second.empty()) continue;
      if (fs::weakly_canonical(paths[i].second) == fs::weakly_canonical(paths[j].second)) {
        throw ArgumentError(paths[i].first + " and " + paths[j].first +
                            " must name different files");
      }
    }
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write \"" + path + "\"");
  out << text;
}

std::string dump(const json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

json distribution_json(const ClassDistribution& d) {
  json j = json::object();
  for (std::size_t c = 0; c < d.classes.size(); ++c) j[d.classes[c]] = d.counts[c];
  return j;
}

void print_distribution(const ClassDistribution& d) {
  for (std::size_t c = 0; c < d.classes.size(); ++c) {
    std::printf("  %-24s %8zu\n", d.classes[c].c_str(), d.counts[c]);
  }
  std::printf("  %-24s %8zu\n", "total", d.total());
}

/// Expands `--config FILE` into ordinary flags placed right after the
/// subcommand. A key already given on the command line is skipped, so flags
/// always win. File syntax: `key = value` per line, `#` or `;` comments,
/// list values separated by spaces or commas, `[section]` lines ignored.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file \"" + path + "\"");
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };

  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ": expected key = value", line_no);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    while (key.rfind('-', 0) == 0) key.erase(0, 1);
    if (key.empty() || key == "config") throw ParseError(path + ": bad key", line_no);
    if (given(key)) continue;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      extra.push_back("--" + key + "=" + value.substr(1, value.size() - 2));
      continue;
    }
    std::vector<std::string> items;
    std::string cur;
    for (const char ch : value + " ") {
      if (ch == ' ' || ch == ',' || ch == '\t') {
        if (!cur.empty()) items.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (items.size() == 1) {
      extra.push_back("--" + key + "=" + items[0]);
    } else {
      extra.push_back("--" + key);
      extra.insert(extra.end(), items.begin(), items.end());
    }
  }

  std::size_t sub = 1;
  while (sub < args.size() && args[sub].rfind('-', 0) == 0) ++sub;
  if (sub >= args.size()) return args;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confit: contrastive few-shot text classification toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  PipelineFlags pipe;
  ProviderFlags prov;

  // stats
  std::string stats_data;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "class distribution of a dataset");
  stats->add_option("--data,--train", stats_data, "dataset file (JSON-lines or .csv)")->required();
  stats->add_flag("--json", stats_json, "print JSON instead of a table");

  // split
  std::string split_data, split_mode = "stratified", split_out_a, split_out_b;
  double split_fraction = 0.2;
  double split_public = 0.3;
  auto* split = app.add_subcommand("split", "stratified holdout or public/private split");
  split->add_option("--data", split_data, "dataset file")->required();
  split->add_option("--mode", split_mode, "stratified | leaderboard")
      ->check(CLI::IsMember({"stratified", "leaderboard"}))
      ->capture_default_str();
  split->add_option("--fraction", split_fraction, "holdout fraction (stratified mode)")
      ->capture_default_str();
  split->add_option("--public-fraction", split_public, "public share (leaderboard mode)")
      ->capture_default_str();
  split->add_option("--seed", seed, "split seed")->capture_default_str();
  split->add_option("--out-a", split_out_a, "first part (kept / public)")->required();
  split->add_option("--out-b", split_out_b, "second part (holdout / private)")->required();

  // augment
  std::string aug_train, aug_out;
  auto* augment = app.add_subcommand("augment", "expand a training set with paraphrases");
  augment->add_option("--train", aug_train, "training dataset")->required();
  augment->add_option("--out", aug_out, "augmented dataset (JSON-lines)")->required();
  augment->add_option("--seed", seed, "run seed")->capture_default_str();
  add_provider_flags(augment, prov);

  // train
  std::string train_path, train_out, train_report, train_trajectory;
  double train_dev = 0.0;
  bool train_augment = false;
  auto* train = app.add_subcommand("train", "train encoder and head, write a CONFIT1 artifact");
  train->add_option("--train", train_path, "training dataset")->required();
  train->add_option("--out", train_out, "artifact path")->required();
  train->add_option("--report", train_report, "training report (JSON)");
  train->add_option("--trajectory", train_trajectory, "loss trajectory (CSV epoch,mean_loss)");
  train->add_option("--dev-fraction", train_dev, "stratified dev holdout, 0 for none")
      ->capture_default_str();
  train->add_option("--seed", seed, "run seed")->capture_default_str();
  train->add_flag("--augment", train_augment, "paraphrase-augment the training part first");
  add_pipeline_flags(train, pipe, true);
  add_provider_flags(train, prov);

  // predict
  std::string pred_model, pred_input, pred_out;
  bool pred_probs = false;
  auto* predict_cmd = app.add_subcommand("predict", "label texts with a trained artifact");
  predict_cmd->add_option("--model", pred_model, "CONFIT1 artifact")->required();
  predict_cmd->add_option("--input,--test", pred_input, "records with id and text")->required();
  predict_cmd->add_option("--out", pred_out, "predictions (JSON-lines); stdout when absent");
  predict_cmd->add_flag("--probabilities", pred_probs, "include class probabilities");

  // eval
  std::string eval_model, eval_preds, eval_test, eval_out;
  double eval_public = 0.3;
  auto* eval_cmd = app.add_subcommand("eval", "public/private leaderboard scoring");
  auto* eval_model_opt = eval_cmd->add_option("--model", eval_model, "CONFIT1 artifact");
  auto* eval_preds_opt =
      eval_cmd->add_option("--predictions", eval_preds, "predictions file instead of a model");
  eval_model_opt->excludes(eval_preds_opt);
  eval_cmd->add_option("--test", eval_test, "labeled test set")->required();
  eval_cmd->add_option("--seed", seed, "leaderboard split seed")->capture_default_str();
  eval_cmd->add_option("--public-fraction", eval_public, "public share")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "report (JSON)");

  // gridsearch
  std::string gs_train, gs_out;
  std::vector<std::size_t> gs_iterations{5, 10};
  std::vector<double> gs_lr{1e-5};
  std::vector<std::size_t> gs_epochs{1};
  double gs_dev = 0.2;
  std::size_t gs_parallelism = 1;
  auto* grid = app.add_subcommand("gridsearch", "sweep iterations x lr x epochs on a dev split");
  grid->add_option("--train", gs_train, "training dataset")->required();
  grid->add_option("--iterations", gs_iterations, "grid values for R")->capture_default_str();
  grid->add_option("--lr", gs_lr, "grid values for the learning rate")->capture_default_str();
  grid->add_option("--epochs", gs_epochs, "grid values for epochs")->capture_default_str();
  grid->add_option("--dev-fraction", gs_dev, "stratified dev holdout")->capture_default_str();
  grid->add_option("--seed", seed, "run seed")->capture_default_str();
  grid->add_option("--trials-parallel", gs_parallelism, "trials run concurrently")
      ->capture_default_str();
  grid->add_option("--out", gs_out, "sweep report (CSV)");
  add_pipeline_flags(grid, pipe, false);

  // ablate
  std::string ab_train, ab_aug, ab_test, ab_out;
  double ab_public = 0.3;
  double ab_dev = 0.2;
  auto* ablate = app.add_subcommand("ablate", "three-condition augmentation ablation");
  ablate->add_option("--train", ab_train, "original training dataset")->required();
  ablate->add_option("--augmented", ab_aug,
                     "augmented training dataset (built with --provider when absent)");
  ablate->add_option("--test", ab_test, "labeled test set")->required();
  ablate->add_option("--seed", seed, "run seed (also the leaderboard split seed)")
      ->capture_default_str();
  ablate->add_option("--public-fraction", ab_public, "public share")->capture_default_str();
  ablate->add_option("--dev-fraction", ab_dev, "holdout removed in the first condition")
      ->capture_default_str();
  ablate->add_option("--out", ab_out, "ablation report (CSV)");
  add_pipeline_flags(ablate, pipe, true);
  add_provider_flags(ablate, prov);

  std::string config_path;
  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--config", config_path, "key = value file of option defaults (flags win)");
  }

  try {
    auto args = expand_config(argc, argv);
    std::vector<const char*> cargv;
    for (const auto& a : args) cargv.push_back(a.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const UsageError& e) {
    std::fprintf(stderr, "confit: config: %s\n", e.what());
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*stats) {
      const auto d = stage("load", [&] { return load_dataset(stats_data); });
      const auto dist = class_distribution(d);
      if (stats_json) {
        std::cout << dump({{"path", stats_data},
                           {"examples", d.size()},
                           {"label_classes", d.label_classes()},
                           {"counts", distribution_json(dist)}});
      } else {
        std::printf("%s: %zu examples, %zu label classes\n", stats_data.c_str(), d.size(),
                    d.label_classes().size());
        print_distribution(dist);
      }
    } else if (*split) {
      stage("config", [&] {
        require_distinct({{"--data", split_data}, {"--out-a", split_out_a},
                          {"--out-b", split_out_b}});
      });
      const auto d = stage("load", [&] { return load_dataset(split_data); });
      const auto r = stage("split", [&] {
        return split_mode == "stratified" ? stratified_split(d, split_fraction, seed)
                                          : leaderboard_split(d, split_public, seed);
      });
      stage("write", [&] {
        save_dataset(split_out_a, r.part_a);
        save_dataset(split_out_b, r.part_b);
      });
      std::printf("%s split (seed %llu): %zu -> %s, %zu -> %s\n", split_mode.c_str(),
                  static_cast<unsigned long long>(seed), r.part_a.size(), split_out_a.c_str(),
                  r.part_b.size(), split_out_b.c_str());
      for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    } else if (*augment) {
      stage("config", [&] { require_distinct({{"--train", aug_train}, {"--out", aug_out}}); });
      const auto d = stage("load", [&] { return load_dataset(aug_train); });
      const auto out = stage("augment", [&] { return run_augmentation(d, prov, seed); });
      stage("write", [&] { save_dataset(aug_out, out); });
      std::printf("augmented %zu -> %zu examples\n", d.size(), out.size());
      print_distribution(class_distribution(out));
    } else if (*train) {
      stage("config", [&] {
        require_distinct({{"--train", train_path}, {"--out", train_out},
                          {"--report", train_report}, {"--trajectory", train_trajectory}});
        if (train_dev < 0.0 || train_dev >= 1.0) {
          throw ArgumentError("--dev-fraction must be 0 (none) or lie in (0, 1)");
        }
      });
      const auto cfg = stage("config", [&] { return pipe.config(seed); });
      const auto full = stage("load", [&] { return load_dataset(train_path); });
      std::optional<Dataset> dev;
      Dataset fit_set = full;
      if (train_dev > 0.0) {
        auto s = stage("split", [&] { return stratified_split(full, train_dev, seed); });
        fit_set = std::move(s.part_a);
        dev = std::move(s.part_b);
      }
      if (train_augment) {
        fit_set = stage("augment", [&] { return run_augmentation(fit_set, prov, seed); });
      }
      const auto trained = stage("train", [&] {
        return train_pipeline(fit_set, cfg, [](std::size_t epoch, double loss) {
          std::fprintf(stderr, "epoch %zu mean_loss %.6f\n", epoch + 1, loss);
        });
      });
      stage("write", [&] { save_classifier(train_out, trained.classifier); });

      json report = {{"artifact", train_out},
                     {"train_examples", fit_set.size()},
                     {"class_distribution", distribution_json(class_distribution(fit_set))},
                     {"pair_count", trained.pair_count},
                     {"loss_trajectory", trained.trajectory},
                     {"effective_learning_rate", cfg.contrastive.effective_learning_rate()},
                     {"head_learning_rate", trained.head_fit.learning_rate},
                     {"head_restarts", trained.head_fit.restarts},
                     {"head_final_loss", trained.head_fit.losses.back()}};
      if (dev) {
        const auto m = stage("eval", [&] { return evaluate(trained.classifier, *dev); });
        report["dev_examples"] = dev->size();
        report["dev_macro_f1"] = m.macro_f1;
      }
      stage("write", [&] {
        if (!train_report.empty()) write_text(train_report, dump(report));
        if (!train_trajectory.empty()) {
          std::string csv = "epoch,mean_loss\n";
          for (std::size_t e = 0; e < trained.trajectory.size(); ++e) {
            csv += std::to_string(e + 1) + "," + format_real(trained.trajectory[e]) + "\n";
          }
          write_text(train_trajectory, csv);
        }
      });
      std::cout << dump(report);
    } else if (*predict_cmd) {
      stage("config", [&] {
        require_distinct({{"--model", pred_model}, {"--input", pred_input}, {"--out", pred_out}});
      });
      const auto model = stage("load", [&] { return load_classifier(pred_model); });
      const auto records = stage("load", [&] { return read_records(pred_input); });
      std::ofstream file;
      if (!pred_out.empty()) {
        file.open(pred_out, std::ios::binary);
        if (!file) throw StageFailure{"write", "cannot write \"" + pred_out + "\"", kExitRuntime};
      }
      std::ostream& out = pred_out.empty() ? std::cout : file;
      stage("predict", [&] {
        for (const auto& rec : records) {
          const auto p = classify(model, rec.text);
          json j = {{"id", rec.id}, {"label", p.label}};
          if (pred_probs) {
            json probs = json::object();
            for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
              probs[model.head->class_order[c]] = p.probabilities[c];
            }
            j["probabilities"] = probs;
          }
          out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
        }
      });
    } else if (*eval_cmd) {
      stage("config", [&] {
        if (eval_model.empty() && eval_preds.empty()) {
          throw ArgumentError("eval needs --model or --predictions");
        }
        require_distinct({{"--model", eval_model}, {"--test", eval_test}, {"--out", eval_out}});
      });
      const auto test = stage("load", [&] { return load_dataset(eval_test); });
      PredictionMap preds;
      if (!eval_model.empty()) {
        const auto model = stage("load", [&] { return load_classifier(eval_model); });
        preds = stage("predict", [&] { return predict_map(model, test); });
      } else {
        preds = stage("load", [&] { return read_predictions(eval_preds); });
      }
      const auto report = stage("eval", [&] {
        const auto s = leaderboard_split(test, eval_public, seed);
        return leaderboard_eval(test, preds, s);
      });
      std::cout << format_leaderboard(report);
      if (!eval_out.empty()) stage("write", [&] { write_text(eval_out, dump(to_json(report))); });
    } else if (*grid) {
      stage("config", [&] { require_distinct({{"--train", gs_train}, {"--out", gs_out}}); });
      const auto d = stage("load", [&] { return load_dataset(gs_train); });
      const GridSpec spec{gs_iterations, gs_lr, gs_epochs};
      const auto sweep = stage("gridsearch", [&] {
        return grid_search(d, spec, pipe.config(seed), gs_dev, seed, gs_parallelism);
      });
      write_sweep_csv(std::cout, sweep);
      if (!gs_out.empty()) {
        stage("write", [&] {
          std::ofstream f(gs_out, std::ios::binary);
          if (!f) throw Error("cannot write \"" + gs_out + "\"");
          write_sweep_csv(f, sweep);
        });
      }
      std::fprintf(stderr, "dev split: %zu examples, fingerprint %016llx\n", sweep.dev_size,
                   static_cast<unsigned long long>(sweep.dev_fingerprint));
      if (!sweep.best) throw StageFailure{"gridsearch", "every trial failed", kExitRuntime};
      const auto& b = sweep.trials[*sweep.best];
      std::fprintf(stderr, "best: iterations %zu, lr %s, epochs %zu, dev macro F1 %.4f\n",
                   b.config.iterations, format_real(b.config.learning_rate).c_str(),
                   b.config.epochs, b.dev_macro_f1);
    } else if (*ablate) {
      stage("config", [&] {
        require_distinct({{"--train", ab_train}, {"--augmented", ab_aug}, {"--test", ab_test},
                          {"--out", ab_out}});
      });
      const auto base = stage("load", [&] { return load_dataset(ab_train); });
      const auto test = stage("load", [&] { return load_dataset(ab_test, base.label_classes()); });
      const auto augmented =
          ab_aug.empty()
              ? stage("augment", [&] { return run_augmentation(base, prov, seed); })
              : stage("load", [&] { return load_dataset(ab_aug, base.label_classes()); });
      const auto rows = stage("ablate", [&] {
        const auto s = leaderboard_split(test, ab_public, seed);
        return ablation_run(base, augmented, test, s, pipe.config(seed), ab_dev, seed);
      });
      write_ablation_csv(std::cout, rows);
      if (!ab_out.empty()) {
        stage("write", [&] {
          std::ofstream f(ab_out, std::ios::binary);
          if (!f) throw Error("cannot write \"" + ab_out + "\"");
          write_ablation_csv(f, rows);
        });
      }
      for (const auto& r : rows) {
        if (!r.ok) std::fprintf(stderr, "%s failed: %s\n", r.condition.c_str(), r.error.c_str());
      }
    }
  } catch (const StageFailure& f) {
    std::fprintf(stderr, "confit: %s: %s\n", f.stage.c_str(), f.message.c_str());
    return f.exit_code;
  }
  return 0;
}

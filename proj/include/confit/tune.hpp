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

#ifndef CONFIT_TUNE_HPP_
#define CONFIT_TUNE_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "confit/common.hpp"
#include "confit/corpus.hpp"
#include "confit/eval.hpp"
#include "confit/pipeline.hpp"

namespace confit {

struct GridSpec {
  std::vector<std::size_t> iterations;
  std::vector<double> learning_rates;
  std::vector<std::size_t> epochs;

  void validate() const {
    if (iterations.empty() || learning_rates.empty() || epochs.empty()) {
      throw ArgumentError("every grid axis needs at least one value");
    }
    for (const auto v : iterations) {
      if (v == 0) throw ArgumentError("grid iterations must be positive");
    }
    for (const auto v : epochs) {
      if (v == 0) throw ArgumentError("grid epochs must be positive");
    }
    for (const auto v : learning_rates) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError("grid learning rates must be positive");
    }
  }

  std::size_t size() const noexcept {
    return iterations.size() * learning_rates.size() * epochs.size();
  }

  /// Cell `index` in row-major order: iterations, then learning rate, then
  /// epochs varying fastest.
  ContrastiveConfig cell(std::size_t index, ContrastiveConfig base) const {
    const std::size_t ne = epochs.size();
    const std::size_t nl = learning_rates.size();
    base.epochs = epochs[index % ne];
    base.learning_rate = learning_rates[(index / ne) % nl];
    base.iterations = iterations[index / (ne * nl)];
    return base;
  }
};

struct TrialResult {
  std::size_t index = 0;
  ContrastiveConfig config;
  bool ok = false;
  std::string error;
  double dev_macro_f1 = 0.0;
  LossTrajectory trajectory;
};

struct SweepResult {
  std::vector<TrialResult> trials;  // enumeration order, failures included
  std::optional<std::size_t> best;
  std::uint64_t dev_fingerprint = 0;
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
};

/// FNV-1a over the sorted ids, each followed by a NUL byte.
inline std::uint64_t id_fingerprint(const Dataset& d) {
  std::vector<std::string> ids;
  ids.reserve(d.size());
  for (const auto& ex : d.examples()) ids.push_back(ex.id);
  std::sort(ids.begin(), ids.end());
  std::uint64_t h = kFnvOffset;
  for (const auto& id : ids) {
    h = fnv1a64(id, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return h;
}

/// Highest dev macro F1 among successful trials; the earliest wins ties.
inline std::optional<std::size_t> select_best(const std::vector<TrialResult>& trials) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!trials[i].ok) continue;
    if (!best || trials[i].dev_macro_f1 > trials[*best].dev_macro_f1) best = i;
  }
  return best;
}

namespace detail {

/// Runs fn(0..n-1) on up to `parallelism` threads.
template <typename Fn>
void run_indexed(std::size_t n, std::size_t parallelism, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::string describe(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace detail

/// One stratified dev split (fraction dev_fraction, seed) shared by every
/// trial. Each grid cell trains the full pipeline on the remaining part and
/// is scored by macro F1 on the dev part. A failing trial is recorded with
/// its error and the sweep continues.
inline SweepResult grid_search(const Dataset& train, const GridSpec& grid,
                               const PipelineConfig& base, double dev_fraction,
                               std::uint64_t seed, std::size_t parallelism = 1) {
  grid.validate();
  const auto split = stratified_split(train, dev_fraction, seed);
  SweepResult sweep;
  sweep.dev_fingerprint = id_fingerprint(split.part_b);
  sweep.train_size = split.part_a.size();
  sweep.dev_size = split.part_b.size();
  sweep.trials.resize(grid.size());

  detail::run_indexed(grid.size(), parallelism, [&](std::size_t i) {
    TrialResult& t = sweep.trials[i];
    t.index = i;
    PipelineConfig cfg = base;
    cfg.contrastive = grid.cell(i, base.contrastive);
    t.config = cfg.contrastive;
    try {
      auto trained = train_pipeline(split.part_a, cfg);
      t.trajectory = std::move(trained.trajectory);
      t.dev_macro_f1 = evaluate(trained.classifier, split.part_b).macro_f1;
      t.ok = true;
    } catch (...) {
      t.ok = false;
      t.error = detail::describe(std::current_exception());
    }
  });
  sweep.best = select_best(sweep.trials);
  return sweep;
}

// ---------------------------------------------------------------------------
// Ablation

inline constexpr std::array<std::string_view, 3> kAblationConditions = {
    "no_augmentation", "no_augmentation_full_train", "augmented"};

struct AblationRow {
  std::string condition;
  bool ok = false;
  std::string error;
  std::size_t train_size = 0;
  LeaderboardReport report;
};

/// Trains the full pipeline under the three data conditions and scores each
/// on the public/private split of `test`:
///   no_augmentation             base_train minus a stratified dev holdout
///   no_augmentation_full_train  all of base_train
///   augmented                   augmented_train
inline std::vector<AblationRow> ablation_run(const Dataset& base_train,
                                             const Dataset& augmented_train,
                                             const Dataset& test, const SplitResult& split,
                                             const PipelineConfig& cfg,
                                             double dev_fraction, std::uint64_t seed) {
  if (base_train.label_classes() != augmented_train.label_classes() ||
      base_train.label_classes() != test.label_classes()) {
    throw ValidationError("ablation datasets must share the same label classes");
  }
  if (split.part_a.size() + split.part_b.size() != test.size()) {
    throw ValidationError("leaderboard split does not partition the test set");
  }
  std::vector<AblationRow> rows(kAblationConditions.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& row = rows[r];
    row.condition = std::string(kAblationConditions[r]);
    try {
      Dataset train_set;
      switch (r) {
        case 0:
          train_set = stratified_split(base_train, dev_fraction, seed).part_a;
          break;
        case 1:
          train_set = base_train;
          break;
        default:
          train_set = augmented_train;
      }
      row.train_size = train_set.size();
      const auto trained = train_pipeline(train_set, cfg);
      row.report = leaderboard_eval(test, predict_map(trained.classifier, test), split);
      row.ok = true;
    } catch (...) {
      row.ok = false;
      row.error = detail::describe(std::current_exception());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Reports

/// Shortest round-trip decimal form.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "iterations,learning_rate,epochs,dev_macro_f1,status\n";
  for (const auto& t : sweep.trials) {
    out << t.config.iterations << ',' << format_real(t.config.learning_rate) << ','
        << t.config.epochs << ',' << (t.ok ? format_real(t.dev_macro_f1) : std::string()) << ','
        << (t.ok ? "ok" : "failed") << '\n';
  }
}

inline void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "condition,public_macro_f1,private_macro_f1\n";
  for (const auto& r : rows) {
    out << r.condition << ',';
    if (r.ok) {
      out << format_real(r.report.public_macro_f1) << ',' << format_real(r.report.private_macro_f1);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace confit

#endif  // CONFIT_TUNE_HPP_

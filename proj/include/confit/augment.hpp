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

#ifndef CONFIT_AUGMENT_HPP_
#define CONFIT_AUGMENT_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "confit/common.hpp"
#include "confit/corpus.hpp"

namespace confit {

inline constexpr std::string_view kDefaultPromptTemplate = "riformulare questo testo: {text}";
inline constexpr double kDefaultTemperature = 0.9;

struct ParaphraseRequest {
  std::string text;
  std::uint64_t seed = 0;
  double temperature = kDefaultTemperature;
  std::string prompt_template = std::string(kDefaultPromptTemplate);

  void validate() const {
    const auto first = prompt_template.find("{text}");
    if (first == std::string::npos || prompt_template.find("{text}", first + 1) != std::string::npos) {
      throw ArgumentError("prompt template must contain exactly one {text} placeholder");
    }
    if (!std::isfinite(temperature) || temperature < 0.0) {
      throw ArgumentError("temperature must be finite and non-negative");
    }
  }

  /// The template with its placeholder replaced by the source text.
  std::string prompt() const {
    validate();
    std::string out = prompt_template;
    out.replace(out.find("{text}"), 6, text);
    return out;
  }
};

class ParaphraseProvider {
 public:
  virtual ~ParaphraseProvider() = default;
  virtual std::string paraphrase(const ParaphraseRequest& req) = 0;
  /// True when equal (text, seed) always yield equal output.
  virtual bool deterministic() const { return false; }
  virtual std::string name() const = 0;
};

/// Whitespace tokens rotated left by seed mod n and rejoined with single
/// spaces. Preserves the token multiset.
inline std::string mock_paraphrase(const ParaphraseRequest& req) {
  std::vector<std::string_view> tokens;
  std::string_view s = req.text;
  std::size_t i = 0;
  auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  };
  while (i < s.size()) {
    while (i < s.size() && space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !space(s[i])) ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  if (tokens.empty()) return {};
  const auto shift = static_cast<std::ptrdiff_t>(req.seed % tokens.size());
  std::rotate(tokens.begin(), tokens.begin() + shift, tokens.end());
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k) out.push_back(' ');
    out.append(tokens[k]);
  }
  return out;
}

class MockProvider final : public ParaphraseProvider {
 public:
  std::string paraphrase(const ParaphraseRequest& req) override { return mock_paraphrase(req); }
  bool deterministic() const override { return true; }
  std::string name() const override { return "mock"; }
};

// ---------------------------------------------------------------------------
// Planning

/// Paraphrases to generate per label class.
struct AugmentationPlan {
  LabelCounts additions;

  std::size_t total() const noexcept { return additions.total(); }
};

/// additions[c] = targets[c] - current[c]. Classes without a target get no
/// additions; a target naming an unknown class or sitting below the current
/// count is rejected.
inline AugmentationPlan plan_to_targets(const ClassDistribution& current,
                                        const LabelCounts& targets) {
  for (const auto& cls : targets.classes) {
    if (!current.contains(cls)) {
      throw ValidationError("augmentation target for unknown class \"" + cls + "\"");
    }
  }
  AugmentationPlan plan;
  for (std::size_t c = 0; c < current.classes.size(); ++c) {
    const auto& cls = current.classes[c];
    const std::size_t have = current.counts[c];
    const std::size_t want = targets.contains(cls) ? targets.at(cls) : have;
    if (want < have) {
      throw ValidationError("augmentation target " + std::to_string(want) + " for class \"" +
                            cls + "\" is below its current count " + std::to_string(have));
    }
    plan.additions.set(cls, want - have);
  }
  return plan;
}

/// Every class is lifted to round_half_up(max_count * multiplier).
inline AugmentationPlan plan_balanced(const ClassDistribution& current, double multiplier) {
  if (!(multiplier >= 1.0) || !std::isfinite(multiplier)) {
    throw ArgumentError("balance multiplier must be a finite value >= 1");
  }
  if (current.classes.empty()) throw ValidationError("plan_balanced: empty distribution");
  const std::size_t mx = *std::max_element(current.counts.begin(), current.counts.end());
  const std::size_t target = round_half_up(static_cast<double>(mx) * multiplier);
  LabelCounts targets;
  for (const auto& cls : current.classes) targets.set(cls, target);
  return plan_to_targets(current, targets);
}

/// Parses "A=10,B=20" into label counts.
inline LabelCounts parse_label_counts(std::string_view spec) {
  LabelCounts out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const auto item = spec.substr(pos, comma == std::string_view::npos ? spec.npos : comma - pos);
    if (!item.empty()) {
      const auto eq = item.rfind('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
        throw ArgumentError("expected LABEL=COUNT, got \"" + std::string(item) + "\"");
      }
      const std::string digits(item.substr(eq + 1));
      if (digits.find_first_not_of("0123456789") != std::string::npos) {
        throw ArgumentError("count for \"" + std::string(item.substr(0, eq)) +
                            "\" is not a non-negative integer");
      }
      out.set(std::string(item.substr(0, eq)), std::stoull(digits));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expansion

struct AugmentOptions {
  std::uint64_t seed = 0;
  double temperature = kDefaultTemperature;
  std::string prompt_template = std::string(kDefaultPromptTemplate);
  /// Concurrent provider calls; results are assembled in plan order.
  std::size_t parallelism = 1;
};

/// Per-request seed for the k-th paraphrase of a source example.
inline std::uint64_t paraphrase_seed(std::uint64_t run_seed, std::string_view source_id,
                                     std::uint64_t k) noexcept {
  return derive_seed(run_seed, source_id, k);
}

struct AugmentationJob {
  std::size_t source = 0;  // index into the input dataset
  std::uint64_t k = 0;     // per-source paraphrase counter
};

/// The visiting schedule: for each class in label order, that class's
/// examples are shuffled with SplitMix64(derive_seed(seed, class)) and cycled
/// until additions[c] jobs exist. The k-th visit of a source yields id
/// "{source_id}#aug{k}".
inline std::vector<AugmentationJob> augmentation_schedule(const Dataset& d,
                                                          const AugmentationPlan& plan,
                                                          std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> members(d.label_classes().size());
  for (std::size_t i = 0; i < d.size(); ++i) members[d.class_index(d[i].label)].push_back(i);
  for (const auto& cls : plan.additions.classes) (void)d.class_index(cls);

  std::vector<AugmentationJob> jobs;
  for (std::size_t c = 0; c < d.label_classes().size(); ++c) {
    const auto& cls = d.label_classes()[c];
    const std::size_t want = plan.additions.contains(cls) ? plan.additions.at(cls) : 0;
    if (want == 0) continue;
    auto& pool = members[c];
    if (pool.empty()) {
      throw ValidationError("plan requests " + std::to_string(want) +
                            " paraphrases for class \"" + cls + "\", which has no examples");
    }
    SplitMix64 rng(derive_seed(seed, cls));
    shuffle(pool, rng);
    for (std::size_t v = 0; v < want; ++v) {
      jobs.push_back({pool[v % pool.size()], v / pool.size()});
    }
  }
  return jobs;
}

/// Originals first, unchanged and in order, followed by the paraphrases in
/// schedule order. Provider errors are reported for the earliest failing job
/// in schedule order.
inline Dataset augment_dataset(const Dataset& d, const AugmentationPlan& plan,
                               ParaphraseProvider& provider, const AugmentOptions& opts = {}) {
  const auto jobs = augmentation_schedule(d, plan, opts.seed);
  std::vector<std::string> texts(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());

  auto run_job = [&](std::size_t j) {
    const auto& src = d[jobs[j].source];
    ParaphraseRequest req{src.text, paraphrase_seed(opts.seed, src.id, jobs[j].k),
                          opts.temperature, opts.prompt_template};
    try {
      texts[j] = provider.paraphrase(req);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.parallelism, jobs.size()));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      run_job(j);
      if (failures[j]) break;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size() && !stop; j = next++) {
          run_job(j);
          if (failures[j]) stop = true;
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!failures[j]) continue;
    const auto& src = d[jobs[j].source];
    std::string reason;
    try {
      std::rethrow_exception(failures[j]);
    } catch (const std::exception& e) {
      reason = e.what();
    } catch (...) {
      reason = "unknown error";
    }
    throw AugmentationError("paraphrasing failed for class \"" + src.label + "\", source id \"" +
                            src.id + "\": " + reason);
  }

  std::vector<LabeledExample> out = d.examples();
  out.reserve(d.size() + jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& src = d[jobs[j].source];
    if (!src.text.empty() && texts[j].empty()) {
      throw AugmentationError("provider " + provider.name() +
                              " returned an empty paraphrase for class \"" + src.label +
                              "\", source id \"" + src.id + "\"");
    }
    out.push_back({src.id + "#aug" + std::to_string(jobs[j].k), std::move(texts[j]), src.label});
  }
  return Dataset(std::move(out), d.label_classes(), d.task_name());
}

}  // namespace confit

#endif  // CONFIT_AUGMENT_HPP_

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

#ifndef CONFIT_SYNTHETIC_HPP_
#define CONFIT_SYNTHETIC_HPP_

#include <cstdint>
#include <iterator>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confit/common.hpp"
#include "confit/corpus.hpp"

namespace confit {

// Seeded fixture corpora: each text mixes class-indicative words with words
// from a vocabulary shared by every class.

struct SyntheticClass {
  std::string label;
  std::size_t count = 0;
};

struct SyntheticSpec {
  std::vector<SyntheticClass> classes;
  std::size_t class_vocab = 6;     // indicative words per class
  std::size_t shared_vocab = 200;  // noise words shared by all classes
  std::size_t signal_min = 1;
  std::size_t signal_max = 2;
  std::size_t noise_min = 6;
  std::size_t noise_max = 12;
  /// Probability that a signal word is drawn from the example's own class
  /// rather than from a uniformly chosen other class.
  double purity = 1.0;
  std::string id_prefix = "s";
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string pseudo_word(SplitMix64& rng) {
  static constexpr std::string_view kOnsets[] = {"b", "c", "d", "f", "g", "l", "m", "n",
                                                 "p", "r", "s", "t", "v", "z", "br", "st"};
  static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u"};
  const std::size_t syllables = 2 + rng.uniform_index(3);
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w.append(kOnsets[rng.uniform_index(std::size(kOnsets))]);
    w.append(kVowels[rng.uniform_index(std::size(kVowels))]);
  }
  return w;
}

}  // namespace detail

/// Word lists for a spec: one indicative list per class, then the shared
/// list. All words are distinct. Depends only on the vocabulary sizes, the
/// class count and `vocab_seed`.
inline std::vector<std::vector<std::string>> synthetic_vocabulary(std::size_t n_classes,
                                                                  std::size_t class_vocab,
                                                                  std::size_t shared_vocab,
                                                                  std::uint64_t vocab_seed) {
  SplitMix64 rng(derive_seed(vocab_seed, "vocabulary"));
  std::set<std::string> used;
  auto fresh = [&] {
    for (;;) {
      auto w = detail::pseudo_word(rng);
      if (used.insert(w).second) return w;
    }
  };
  std::vector<std::vector<std::string>> lists(n_classes + 1);
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t k = 0; k < class_vocab; ++k) lists[c].push_back(fresh());
  }
  for (std::size_t k = 0; k < shared_vocab; ++k) lists[n_classes].push_back(fresh());
  return lists;
}

/// Builds the corpus. Vocabulary comes from synthetic_vocabulary(..., 0), so
/// corpora that differ only in `seed` or counts (train vs test) share words.
inline Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.classes.size() < 2) throw ArgumentError("synthetic corpus needs two classes");
  if (spec.signal_min > spec.signal_max || spec.noise_min > spec.noise_max) {
    throw ArgumentError("synthetic corpus: min exceeds max");
  }
  const std::size_t C = spec.classes.size();
  const auto vocab = synthetic_vocabulary(C, spec.class_vocab, spec.shared_vocab, 0);
  SplitMix64 rng(derive_seed(spec.seed, "texts"));
  auto between = [&](std::size_t lo, std::size_t hi) { return lo + rng.uniform_index(hi - lo + 1); };

  std::vector<LabeledExample> examples;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < C; ++c) labels.push_back(spec.classes[c].label);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < spec.classes[c].count; ++i) {
      std::vector<std::string> words;
      const std::size_t n_signal = between(spec.signal_min, spec.signal_max);
      for (std::size_t s = 0; s < n_signal; ++s) {
        std::size_t from = c;
        if (rng.uniform01() >= spec.purity) {
          from = rng.uniform_index(C - 1);
          if (from >= c) ++from;
        }
        words.push_back(vocab[from][rng.uniform_index(vocab[from].size())]);
      }
      const std::size_t n_noise = between(spec.noise_min, spec.noise_max);
      for (std::size_t s = 0; s < n_noise; ++s) {
        words.push_back(vocab[C][rng.uniform_index(vocab[C].size())]);
      }
      shuffle(words, rng);
      std::string text;
      for (const auto& w : words) {
        if (!text.empty()) text.push_back(' ');
        text.append(w);
      }
      examples.push_back({spec.id_prefix + std::to_string(examples.size()), std::move(text),
                          spec.classes[c].label});
    }
  }
  return Dataset(std::move(examples), std::move(labels), "synthetic");
}

}  // namespace confit

#endif  // CONFIT_SYNTHETIC_HPP_

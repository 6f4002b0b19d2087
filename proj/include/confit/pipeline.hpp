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

#ifndef CONFIT_PIPELINE_HPP_
#define CONFIT_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "confit/artifact.hpp"
#include "confit/contrastive.hpp"
#include "confit/corpus.hpp"
#include "confit/encoder.hpp"
#include "confit/eval.hpp"
#include "confit/head.hpp"

namespace confit {

struct EncoderSettings {
  TokenizerConfig tokenizer;
  std::size_t hash_dim = 32768;
  std::size_t embed_dim = 64;
  std::uint64_t init_seed = 0;
};

/// Everything needed to go from a labeled dataset to a classifier.
struct PipelineConfig {
  EncoderSettings encoder;
  ContrastiveConfig contrastive;
  HeadConfig head;

  /// Points every stage seed at `seed`; stages derive their own streams.
  void set_seed(std::uint64_t seed) {
    encoder.init_seed = seed;
    contrastive.seed = seed;
    head.seed = seed;
  }
};

struct TrainedPipeline {
  Classifier classifier;
  LossTrajectory trajectory;
  std::size_t pair_count = 0;
  HeadFit head_fit;
};

/// Encoder init, contrastive fine-tuning, then a head on the frozen
/// fine-tuned embeddings of the same training set.
inline TrainedPipeline train_pipeline(const Dataset& train, const PipelineConfig& cfg,
                                      const EpochCallback& on_epoch = {}) {
  auto encoder = init_encoder(cfg.encoder.tokenizer, cfg.encoder.hash_dim,
                              cfg.encoder.embed_dim, cfg.encoder.init_seed);
  auto stage1 = train_contrastive(std::move(encoder), train, cfg.contrastive, on_epoch);

  std::vector<Embedding> embeddings;
  std::vector<std::string> labels;
  embeddings.reserve(train.size());
  labels.reserve(train.size());
  for (const auto& ex : train.examples()) {
    embeddings.push_back(embed(stage1.model, ex.text));
    labels.push_back(ex.label);
  }
  auto fit = fit_head(embeddings, labels, train.label_classes(), cfg.head);
  TrainedPipeline out{Classifier{std::move(stage1.model), fit.model},
                      std::move(stage1.trajectory), stage1.pair_count, std::move(fit)};
  return out;
}

inline Prediction classify(const Classifier& c, std::string_view text) {
  if (!c.head) throw ModelError("artifact carries no classification head");
  return predict(c.encoder, *c.head, text);
}

template <typename Examples>
std::vector<PredictionRecord> predict_records(const Classifier& c, const Examples& examples) {
  std::vector<PredictionRecord> out;
  for (const auto& ex : examples) out.push_back({ex.id, classify(c, ex.text).label});
  return out;
}

inline PredictionMap predict_map(const Classifier& c, const Dataset& d) {
  PredictionMap out;
  for (const auto& ex : d.examples()) out.emplace(ex.id, classify(c, ex.text).label);
  return out;
}

/// Macro F1 (and friends) of the classifier on a labeled dataset.
inline MetricsReport evaluate(const Classifier& c, const Dataset& d) {
  return score_dataset(d, predict_map(c, d));
}

}  // namespace confit

#endif  // CONFIT_PIPELINE_HPP_

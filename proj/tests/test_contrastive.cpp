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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "confit/contrastive.hpp"
#include "confit/synthetic.hpp"
#include "support/oracles.hpp"

namespace {

using namespace confit;

Dataset keyword_corpus() {
  // Class A texts contain "alfa", class B texts "beta", plus shared filler.
  std::vector<LabeledExample> ex;
  SplitMix64 rng(4);
  for (int i = 0; i < 100; ++i) {
    std::string text = i < 50 ? "alfa" : "beta";
    for (int k = 0; k < 4; ++k) text += " n" + std::to_string(rng.uniform_index(30));
    ex.push_back({std::to_string(i), text, i < 50 ? "A" : "B"});
  }
  return Dataset(std::move(ex), {"A", "B"});
}

TEST(GeneratePairs, FourExamplesOneRound) {
  const auto d = oracle::counted({"A", "B"}, {2, 2});
  const auto pairs = generate_pairs(d, 1, 0);
  ASSERT_EQ(pairs.size(), 8u);
  int pos = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    EXPECT_EQ(p.a, i / 2);
    EXPECT_NE(p.a, p.b);
    EXPECT_EQ(p.target, i % 2 == 0 ? 1 : 0);
    EXPECT_EQ(d[p.a].label == d[p.b].label, p.target == 1);
    pos += p.target;
  }
  EXPECT_EQ(pos, 4);
}

TEST(GeneratePairs, TaskASizedCount) {
  const auto d = oracle::counted({"A", "B"}, {917, 925});
  EXPECT_EQ(generate_pairs(d, 5, 1).size(), 18420u);
}

TEST(GeneratePairs, RandomDatasetsProperties) {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t C = 2 + rng.uniform_index(4);
    std::vector<std::string> labels;
    std::vector<std::size_t> counts;
    for (std::size_t c = 0; c < C; ++c) {
      labels.push_back("c" + std::to_string(c));
      counts.push_back(2 + rng.uniform_index(20));
    }
    const auto d = oracle::counted(labels, counts);
    const std::size_t R = 1 + rng.uniform_index(6);
    const auto seed = rng.next();
    const auto pairs = generate_pairs(d, R, seed);
    ASSERT_EQ(pairs.size(), 2 * R * d.size());
    std::size_t pos = 0, neg = 0;
    for (const auto& p : pairs) {
      ASSERT_NE(p.a, p.b);
      const bool same = d[p.a].label == d[p.b].label;
      if (p.target == 1) {
        ASSERT_TRUE(same);
        ++pos;
      } else {
        ASSERT_FALSE(same);
        ++neg;
      }
    }
    EXPECT_EQ(pos, R * d.size());
    EXPECT_EQ(neg, R * d.size());
    EXPECT_EQ(generate_pairs(d, R, seed), pairs);
  }
}

TEST(GeneratePairs, Preconditions) {
  EXPECT_THROW(generate_pairs(oracle::counted({"A"}, {5}), 1, 0), ValidationError);
  EXPECT_THROW(generate_pairs(oracle::counted({"A", "B"}, {5, 0}), 1, 0), ValidationError);
  try {
    generate_pairs(oracle::counted({"Solo", "B"}, {1, 3}), 1, 0);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Solo"), std::string::npos);
  }
  EXPECT_THROW(generate_pairs(oracle::counted({"A", "B"}, {2, 2}), 0, 0), ArgumentError);
}

TEST(Cosine, Cases) {
  const std::vector<double> x = {1.0, 2.0, -3.0};
  EXPECT_NEAR(cosine(x, x), 1.0, 1e-15);
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_EQ(cosine(x, std::vector<double>(3, 0.0)), 0.0);
  EXPECT_THROW(cosine(x, std::vector<double>{1.0}), ArgumentError);
}

TEST(PairLoss, Cases) {
  const std::vector<double> e = {1.0, 0.0};
  EXPECT_EQ(pair_loss(e, e, 1), 0.0);
  EXPECT_EQ(pair_loss(e, std::vector<double>{0.0, 1.0}, 0), 0.0);
  const std::vector<double> half = {0.5, std::sqrt(3.0) / 2.0};
  EXPECT_NEAR(pair_loss(e, half, 1), 0.25, 1e-15);
}

TEST(EvaluateBatch, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    EXPECT_LT(oracle::contrastive_gradient_error(seed), 1e-4) << "seed " << seed;
  }
}

TEST(EvaluateBatch, LossSumMatchesDenseOracle) {
  const auto m = init_encoder(TokenizerConfig{}, 64, 4, 8);
  const std::vector<std::string> texts = {"a b", "c d e", "a e", "zz"};
  std::vector<SparseVector> feats;
  std::vector<std::vector<double>> xs;
  for (const auto& t : texts) {
    feats.push_back(m.features(t));
    xs.push_back(oracle::dense(feats.back(), 64));
  }
  const std::vector<SentencePair> pairs = {{0, 1, 1}, {2, 3, 0}, {1, 2, 0}};
  const auto eval = evaluate_batch(m, feats, pairs);
  EXPECT_NEAR(eval.loss_sum / 3.0, oracle::contrastive_loss(m.weights(), 64, 4, xs, pairs), 1e-12);
}

TEST(TrainContrastive, VanishingLearningRateLeavesModelUnchanged) {
  const auto d = keyword_corpus();
  const auto m0 = init_encoder(TokenizerConfig{}, 1024, 8, 1);
  ContrastiveConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 1e-300;
  cfg.lr_scale = 1.0;
  const auto out = train_contrastive(m0, d, cfg);
  EXPECT_EQ(out.model.weights(), m0.weights());
  ASSERT_EQ(out.trajectory.size(), 3u);
  // Epochs visit batches in different orders, so sums differ only by rounding.
  EXPECT_NEAR(out.trajectory[1], out.trajectory[0], 1e-12);
  EXPECT_NEAR(out.trajectory[2], out.trajectory[0], 1e-12);
}

TEST(TrainContrastive, KeywordCorpusLossDecreases) {
  const auto d = keyword_corpus();
  ContrastiveConfig cfg;
  cfg.epochs = 3;
  const auto out = train_contrastive(init_encoder(TokenizerConfig{}, 4096, 64, 3), d, cfg);
  ASSERT_EQ(out.trajectory.size(), 3u);
  EXPECT_LT(out.trajectory.back(), out.trajectory.front());
  EXPECT_EQ(out.pair_count, 2 * 5 * d.size());
  for (const double v : out.trajectory) EXPECT_TRUE(std::isfinite(v));
}

TEST(TrainContrastive, SeparatesClassesOnSyntheticCorpus) {
  SyntheticSpec spec;
  spec.classes = {{"A", 100}, {"B", 100}};
  spec.seed = 21;
  const auto d = make_synthetic(spec);
  const auto out = train_contrastive(init_encoder(TokenizerConfig{}, 32768, 64, 21), d,
                                     ContrastiveConfig{});
  std::vector<Embedding> e;
  for (const auto& ex : d.examples()) e.push_back(embed(out.model, ex.text));
  double within = 0, across = 0;
  std::size_t nw = 0, na = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const double c = cosine(e[i], e[j]);
      if (d[i].label == d[j].label) {
        within += c;
        ++nw;
      } else {
        across += c;
        ++na;
      }
    }
  }
  EXPECT_GT(within / nw - across / na, 0.2);
}

TEST(TrainContrastive, Deterministic) {
  const auto d = keyword_corpus();
  const auto m0 = init_encoder(TokenizerConfig{}, 1024, 8, 1);
  ContrastiveConfig cfg;
  cfg.seed = 99;
  const auto a = train_contrastive(m0, d, cfg);
  const auto b = train_contrastive(m0, d, cfg);
  EXPECT_EQ(a.model.weights(), b.model.weights());
  EXPECT_EQ(a.trajectory, b.trajectory);
}

TEST(TrainContrastive, SharedWeightsForBothSides) {
  // A pair of identical texts has cosine 1 whatever W is; a positive pair of
  // identical texts therefore contributes neither loss nor gradient.
  const auto m = init_encoder(TokenizerConfig{}, 64, 4, 2);
  const std::vector<SparseVector> feats = {m.features("same words"), m.features("same words")};
  const std::vector<SentencePair> batch = {{0, 1, 1}};
  const auto eval = evaluate_batch(m, feats, batch);
  EXPECT_NEAR(eval.loss_sum, 0.0, 1e-24);
  for (const auto& [bucket, row] : eval.gradient.rows) {
    for (const double g : row) EXPECT_NEAR(g, 0.0, 1e-12);
  }
}

TEST(TrainContrastive, DivergenceReportsBatch) {
  const auto d = keyword_corpus();
  ContrastiveConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.lr_scale = 1e10;
  try {
    train_contrastive(init_encoder(TokenizerConfig{}, 1024, 8, 1), d, cfg);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(ContrastiveConfig, Validation) {
  ContrastiveConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.effective_learning_rate(), 1.0);
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.learning_rate = -1;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

}  // namespace

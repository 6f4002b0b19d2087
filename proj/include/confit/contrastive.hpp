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

#ifndef CONFIT_CONTRASTIVE_HPP_
#define CONFIT_CONTRASTIVE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "confit/common.hpp"
#include "confit/corpus.hpp"
#include "confit/encoder.hpp"

namespace confit {

/// Two training examples and whether they share a label (target 1) or not
/// (target 0). Called "triplets" in the SetFit literature.
struct SentencePair {
  std::size_t a = 0;
  std::size_t b = 0;
  int target = 0;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct ContrastiveConfig {
  std::size_t iterations = 5;
  std::size_t epochs = 1;
  /// Nominal rate, in the units used for Transformer fine-tuning.
  double learning_rate = 1e-5;
  /// Multiplier turning the nominal rate into the step size applied to the
  /// linear encoder. The product is the effective rate.
  double lr_scale = 1e5;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;

  double effective_learning_rate() const noexcept { return learning_rate * lr_scale; }

  void validate() const {
    if (iterations == 0) throw ArgumentError("iterations must be positive");
    if (epochs == 0) throw ArgumentError("epochs must be positive");
    if (batch_size == 0) throw ArgumentError("batch_size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ArgumentError("learning_rate must be positive");
    }
    if (!(lr_scale > 0.0) || !std::isfinite(lr_scale)) {
      throw ArgumentError("lr_scale must be positive");
    }
  }
};

/// Mean pair loss per epoch.
using LossTrajectory = std::vector<double>;

/// For each of R rounds and each example i (rounds outermost), emits a
/// positive pair (i, j) with j uniform over i's class minus i, then a
/// negative pair (i, k) with k uniform over all examples of other classes.
/// Returns 2·R·N pairs in emission order.
inline std::vector<SentencePair> generate_pairs(const Dataset& d, std::size_t iterations,
                                                std::uint64_t seed) {
  if (iterations == 0) throw ArgumentError("iterations must be positive");
  const auto labels = d.label_indices();
  const std::size_t n_classes = d.label_classes().size();

  // Examples grouped by class; class c occupies [start[c], start[c+1]).
  std::vector<std::size_t> start(n_classes + 1, 0);
  for (const auto c : labels) ++start[c + 1];
  std::size_t non_empty = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const std::size_t n_c = start[c + 1];
    if (n_c == 1) {
      throw ValidationError("class \"" + d.label_classes()[c] +
                            "\" has a single example, so it has no positive partner");
    }
    if (n_c > 0) ++non_empty;
  }
  if (non_empty < 2) {
    throw ValidationError("pair generation needs at least two populated label classes");
  }
  for (std::size_t c = 0; c < n_classes; ++c) start[c + 1] += start[c];
  std::vector<std::size_t> grouped(labels.size());
  std::vector<std::size_t> own_slot(labels.size());
  {
    auto fill = start;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      own_slot[i] = fill[labels[i]] - start[labels[i]];
      grouped[fill[labels[i]]++] = i;
    }
  }

  SplitMix64 rng(seed);
  std::vector<SentencePair> pairs;
  pairs.reserve(2 * iterations * labels.size());
  for (std::size_t r = 0; r < iterations; ++r) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::size_t c = labels[i];
      const std::size_t lo = start[c];
      const std::size_t n_c = start[c + 1] - lo;

      std::size_t slot = rng.uniform_index(n_c - 1);
      if (slot >= own_slot[i]) ++slot;
      pairs.push_back({i, grouped[lo + slot], 1});

      std::size_t k = rng.uniform_index(labels.size() - n_c);
      if (k >= lo) k += n_c;
      pairs.push_back({i, grouped[k], 0});
    }
  }
  return pairs;
}

/// Cosine similarity; 0 when either vector is zero.
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ArgumentError("cosine: length mismatch (" + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()) + ")");
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return dot / (std::sqrt(uu) * std::sqrt(vv));
}

inline double pair_loss(std::span<const double> a, std::span<const double> b, int target) {
  const double diff = static_cast<double>(target) - cosine(a, b);
  return diff * diff;
}

/// Gradient rows keyed by hash bucket; buckets not present are zero.
struct SparseGradient {
  std::unordered_map<std::uint32_t, std::vector<double>> rows;

  double at(std::size_t bucket, std::size_t k) const {
    const auto it = rows.find(static_cast<std::uint32_t>(bucket));
    return it == rows.end() ? 0.0 : it->second[k];
  }
};

struct BatchEvaluation {
  double loss_sum = 0.0;
  SparseGradient gradient;  // of the mean loss over the batch
};

/// Mean pair loss over `batch` and its analytic gradient with respect to the
/// encoder weights. Both sides of every pair are projected with the same
/// weights; the gradient flows through the L2 normalization of each side.
///
/// With u = Wᵀx, e = u/|u|, c = e_a·e_b and L = (t - c)²:
///   dL/du_a = -2(t - c) (e_b - c e_a) / |u_a|
///   dL/dW   = x_a ⊗ dL/du_a + x_b ⊗ dL/du_b
/// A side with |u| = 0 contributes no gradient.
inline BatchEvaluation evaluate_batch(const EncoderModel& m,
                                      std::span<const SparseVector> features,
                                      std::span<const SentencePair> batch) {
  BatchEvaluation out;
  if (batch.empty()) return out;
  const std::size_t dim = m.embed_dim();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> ga(dim);
  std::vector<double> gb(dim);

  auto accumulate = [&](const SparseVector& x, const std::vector<double>& g) {
    for (const auto& [bucket, count] : x.entries) {
      auto& row = out.gradient.rows[bucket];
      if (row.empty()) row.assign(dim, 0.0);
      for (std::size_t k = 0; k < dim; ++k) row[k] += count * g[k];
    }
  };

  for (const auto& p : batch) {
    const SparseVector& xa = features[p.a];
    const SparseVector& xb = features[p.b];
    const auto ua = m.project(xa);
    const auto ub = m.project(xb);
    const double na = l2_norm(ua);
    const double nb = l2_norm(ub);
    double c = 0.0;
    if (na > 0.0 && nb > 0.0) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += ua[k] * ub[k];
      c = dot / (na * nb);
    }
    const double resid = static_cast<double>(p.target) - c;
    out.loss_sum += resid * resid;
    if (na == 0.0 || nb == 0.0) continue;
    const double scale = -2.0 * resid * inv_n;
    for (std::size_t k = 0; k < dim; ++k) {
      const double ea = ua[k] / na;
      const double eb = ub[k] / nb;
      ga[k] = scale * (eb - c * ea) / na;
      gb[k] = scale * (ea - c * eb) / nb;
    }
    accumulate(xa, ga);
    accumulate(xb, gb);
  }
  return out;
}

struct ContrastiveResult {
  EncoderModel model;
  LossTrajectory trajectory;
  std::size_t pair_count = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Fine-tunes the encoder on pairs from generate_pairs(d, iterations, seed).
/// Each epoch visits the pairs in a fresh seeded shuffle, in mini-batches of
/// batch_size (last partial batch kept), taking one gradient step per batch.
/// The recorded epoch loss is the mean of per-pair losses measured just
/// before each batch's step. Gradient accumulation is sequential in batch
/// order.
inline ContrastiveResult train_contrastive(EncoderModel model, const Dataset& d,
                                           const ContrastiveConfig& cfg,
                                           const EpochCallback& on_epoch = {}) {
  cfg.validate();
  const auto pairs = generate_pairs(d, cfg.iterations, derive_seed(cfg.seed, "pairs"));

  std::vector<SparseVector> features;
  features.reserve(d.size());
  for (const auto& ex : d.examples()) features.push_back(model.features(ex.text));

  const double lr = cfg.effective_learning_rate();
  const std::size_t dim = model.embed_dim();
  SplitMix64 order_rng(derive_seed(cfg.seed, "batches"));
  std::vector<std::size_t> order(pairs.size());
  std::vector<SentencePair> batch;
  batch.reserve(cfg.batch_size);
  LossTrajectory trajectory;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, order_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(pairs[order[i]]);
      auto eval = evaluate_batch(model, features, batch);
      if (!std::isfinite(eval.loss_sum)) {
        throw TrainingError("non-finite contrastive loss in epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch_index));
      }
      auto& w = model.mutable_weights();
      for (const auto& [bucket, g] : eval.gradient.rows) {
        for (const double v : g) {
          if (!std::isfinite(v)) {
            throw TrainingError("non-finite contrastive gradient in epoch " +
                                std::to_string(epoch) + ", batch " +
                                std::to_string(batch_index));
          }
        }
        double* row = w.data() + std::size_t{bucket} * dim;
        for (std::size_t k = 0; k < dim; ++k) row[k] -= lr * g[k];
      }
      epoch_loss += eval.loss_sum;
    }
    const double mean = pairs.empty() ? 0.0 : epoch_loss / static_cast<double>(pairs.size());
    trajectory.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return {std::move(model), std::move(trajectory), pairs.size()};
}

}  // namespace confit

#endif  // CONFIT_CONTRASTIVE_HPP_

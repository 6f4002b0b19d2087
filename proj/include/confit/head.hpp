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

#ifndef CONFIT_HEAD_HPP_
#define CONFIT_HEAD_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confit/common.hpp"
#include "confit/encoder.hpp"

namespace confit {

struct HeadConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  // Fitting is full-batch from zero weights; the seed is carried for config
  // symmetry with the other stages.
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs == 0) throw ArgumentError("head epochs must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ArgumentError("head learning_rate must be positive");
    }
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ArgumentError("head l2 must be non-negative");
  }
};

/// Softmax regression over sentence embeddings. weights is
/// num_classes x embed_dim, row-major.
struct HeadModel {
  std::vector<std::string> class_order;
  std::size_t embed_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  std::size_t num_classes() const noexcept { return class_order.size(); }

  static HeadModel zeros(std::vector<std::string> classes, std::size_t embed_dim) {
    HeadModel h;
    h.embed_dim = embed_dim;
    h.weights.assign(classes.size() * embed_dim, 0.0);
    h.bias.assign(classes.size(), 0.0);
    h.class_order = std::move(classes);
    return h;
  }

  std::vector<double> logits(std::span<const double> e) const {
    if (e.size() != embed_dim) {
      throw ModelError("head expects " + std::to_string(embed_dim) +
                       "-dimensional embeddings, got " + std::to_string(e.size()));
    }
    std::vector<double> z(num_classes());
    for (std::size_t c = 0; c < z.size(); ++c) {
      double s = bias[c];
      const double* w = weights.data() + c * embed_dim;
      for (std::size_t k = 0; k < embed_dim; ++k) s += w[k] * e[k];
      z[c] = s;
    }
    return z;
  }

  friend bool operator==(const HeadModel&, const HeadModel&) = default;
};

/// Max-shifted softmax.
inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.begin(), z.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

/// Index of the largest value; the first one wins ties.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

struct HeadObjective {
  double loss = 0.0;
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;
};

/// Mean cross-entropy plus (l2/2)‖weights‖², and its gradient.
inline HeadObjective head_objective(const HeadModel& h, std::span<const Embedding> x,
                                    std::span<const std::size_t> y, double l2) {
  const std::size_t C = h.num_classes();
  const std::size_t D = h.embed_dim;
  HeadObjective out;
  out.grad_weights.assign(C * D, 0.0);
  out.grad_bias.assign(C, 0.0);
  const double inv_n = x.empty() ? 0.0 : 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto z = h.logits(x[i]);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (const double v : z) sum += std::exp(v - mx);
    const double log_sum = mx + std::log(sum);
    out.loss += (log_sum - z[y[i]]) * inv_n;
    for (std::size_t c = 0; c < C; ++c) {
      const double r = (std::exp(z[c] - log_sum) - (c == y[i] ? 1.0 : 0.0)) * inv_n;
      out.grad_bias[c] += r;
      double* g = out.grad_weights.data() + c * D;
      for (std::size_t k = 0; k < D; ++k) g[k] += r * x[i][k];
    }
  }
  double sq = 0.0;
  for (std::size_t j = 0; j < h.weights.size(); ++j) {
    sq += h.weights[j] * h.weights[j];
    out.grad_weights[j] += l2 * h.weights[j];
  }
  out.loss += 0.5 * l2 * sq;
  return out;
}

struct HeadFit {
  HeadModel model;
  std::vector<double> losses;  // objective before each step, plus the final value
  double learning_rate = 0.0;  // rate actually used
  std::size_t restarts = 0;
};

/// Full-batch gradient descent from zero weights. If the objective ever
/// rises between steps the fit restarts with half the learning rate, at most
/// three times; the last attempt is kept either way.
inline HeadFit fit_head(std::span<const Embedding> embeddings,
                        std::span<const std::string> labels,
                        std::vector<std::string> class_order, const HeadConfig& cfg) {
  cfg.validate();
  if (embeddings.size() != labels.size()) {
    throw ArgumentError("train_head: " + std::to_string(embeddings.size()) +
                        " embeddings but " + std::to_string(labels.size()) + " labels");
  }
  if (embeddings.empty()) throw ValidationError("train_head: no training examples");
  const std::size_t dim = embeddings.front().size();
  std::vector<std::size_t> y;
  y.reserve(labels.size());
  std::set<std::size_t> distinct;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (embeddings[i].size() != dim) throw ArgumentError("train_head: ragged embeddings");
    const auto it = std::find(class_order.begin(), class_order.end(), labels[i]);
    if (it == class_order.end()) {
      throw ValidationError("train_head: label \"" + labels[i] + "\" not in class order");
    }
    y.push_back(static_cast<std::size_t>(it - class_order.begin()));
    distinct.insert(y.back());
  }
  if (distinct.size() < 2) {
    throw ValidationError("train_head: needs at least two distinct labels");
  }

  constexpr std::size_t kMaxRestarts = 3;
  double lr = cfg.learning_rate;
  HeadFit fit;
  for (std::size_t attempt = 0; attempt <= kMaxRestarts; ++attempt) {
    fit.model = HeadModel::zeros(class_order, dim);
    fit.losses.clear();
    fit.learning_rate = lr;
    fit.restarts = attempt;
    bool monotone = true;
    for (std::size_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
      const auto obj = head_objective(fit.model, embeddings, y, cfg.l2);
      if (!std::isfinite(obj.loss)) {
        throw TrainingError("non-finite head loss at epoch " + std::to_string(epoch));
      }
      if (!fit.losses.empty() && obj.loss > fit.losses.back() * (1.0 + 1e-12)) {
        monotone = false;
      }
      fit.losses.push_back(obj.loss);
      if (epoch == cfg.epochs) break;
      for (std::size_t j = 0; j < fit.model.weights.size(); ++j) {
        fit.model.weights[j] -= lr * obj.grad_weights[j];
      }
      for (std::size_t c = 0; c < fit.model.bias.size(); ++c) {
        fit.model.bias[c] -= lr * obj.grad_bias[c];
      }
    }
    if (monotone) break;
    lr *= 0.5;
  }
  return fit;
}

inline HeadModel train_head(std::span<const Embedding> embeddings,
                            std::span<const std::string> labels,
                            std::vector<std::string> class_order, const HeadConfig& cfg) {
  return fit_head(embeddings, labels, std::move(class_order), cfg).model;
}

struct Prediction {
  std::string label;
  std::vector<double> probabilities;  // aligned with the head's class_order
};

inline Prediction predict_embedding(const HeadModel& h, std::span<const double> e) {
  if (h.class_order.empty()) throw ModelError("head has no classes");
  auto p = softmax(h.logits(e));
  const std::size_t best = argmax(p);
  return {h.class_order[best], std::move(p)};
}

inline Prediction predict(const EncoderModel& enc, const HeadModel& h, std::string_view text) {
  if (enc.embed_dim() != h.embed_dim) {
    throw ModelError("encoder produces " + std::to_string(enc.embed_dim()) +
                     "-dimensional embeddings but the head expects " +
                     std::to_string(h.embed_dim));
  }
  return predict_embedding(h, embed(enc, text));
}

}  // namespace confit

#endif  // CONFIT_HEAD_HPP_

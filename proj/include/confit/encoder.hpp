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

#ifndef CONFIT_ENCODER_HPP_
#define CONFIT_ENCODER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confit/common.hpp"

namespace confit {

struct TokenizerConfig {
  std::size_t max_seq_len = 512;
  bool lowercase = true;
  std::size_t ngram_min = 3;
  std::size_t ngram_max = 5;

  void validate() const {
    if (max_seq_len < 1) throw ArgumentError("max_seq_len must be at least 1");
    if (ngram_min < 1) throw ArgumentError("ngram_min must be at least 1");
    if (ngram_min > ngram_max) throw ArgumentError("ngram_min must not exceed ngram_max");
  }

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

namespace detail {

inline bool is_space(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// ASCII plus the Latin-1 letters U+00C0..U+00DE (minus U+00D7), which covers
// accented Italian capitals.
inline std::string lowercase_utf8(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto c = static_cast<unsigned char>(out[i]);
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      const auto n = static_cast<unsigned char>(out[i + 1]);
      if (n >= 0x80 && n <= 0x9E && n != 0x97) out[i + 1] = static_cast<char>(n + 0x20);
      ++i;
    }
  }
  return out;
}

/// Byte offsets of code-point starts. Invalid lead or continuation bytes
/// count as one code point each.
inline std::vector<std::size_t> codepoint_offsets(std::string_view s) {
  std::vector<std::size_t> offsets;
  std::size_t i = 0;
  while (i < s.size()) {
    offsets.push_back(i);
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
    } else if (c >= 0xE0) {
      len = 3;
    } else if (c >= 0xC2 && c < 0xE0) {
      len = 2;
    }
    if (c >= 0xF5) len = 1;
    if (i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    i += len;
  }
  offsets.push_back(s.size());
  return offsets;
}

inline constexpr std::string_view kWordStart = "\xE2\x80\xB9";  // U+2039
inline constexpr std::string_view kWordEnd = "\xE2\x80\xBA";    // U+203A

}  // namespace detail

/// Whitespace tokens, lowercased when configured, truncated to the first
/// max_seq_len tokens.
inline std::vector<std::string> tokenize(const TokenizerConfig& cfg, std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size() && tokens.size() < cfg.max_seq_len) {
    while (i < text.size() && detail::is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !detail::is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      const auto tok = text.substr(start, i - start);
      tokens.push_back(cfg.lowercase ? detail::lowercase_utf8(tok) : std::string(tok));
    }
  }
  return tokens;
}

/// Sorted (bucket, count) entries with unique buckets.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double total() const noexcept {
    double s = 0.0;
    for (const auto& [_, v] : entries) s += v;
    return s;
  }
  bool empty() const noexcept { return entries.empty(); }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

inline std::uint32_t feature_bucket(std::string_view feature, std::size_t hash_dim) noexcept {
  return static_cast<std::uint32_t>(fnv1a64(feature) % hash_dim);
}

/// Word unigrams plus character n-grams of each token wrapped in "‹" "›",
/// hashed with FNV-1a-64 over the feature's UTF-8 bytes modulo hash_dim.
/// N-gram sizes are counted in code points.
inline SparseVector featurize(const TokenizerConfig& cfg, std::size_t hash_dim,
                              std::string_view text) {
  if (hash_dim < 2) throw ArgumentError("hash_dim must be at least 2");
  std::vector<std::uint32_t> buckets;
  std::string wrapped;
  for (const auto& tok : tokenize(cfg, text)) {
    buckets.push_back(feature_bucket(tok, hash_dim));
    wrapped.clear();
    wrapped.append(detail::kWordStart).append(tok).append(detail::kWordEnd);
    const auto offsets = detail::codepoint_offsets(wrapped);
    const std::size_t n_cp = offsets.size() - 1;
    for (std::size_t n = cfg.ngram_min; n <= cfg.ngram_max && n <= n_cp; ++n) {
      for (std::size_t s = 0; s + n <= n_cp; ++s) {
        const std::string_view gram(wrapped.data() + offsets[s], offsets[s + n] - offsets[s]);
        buckets.push_back(feature_bucket(gram, hash_dim));
      }
    }
  }
  std::sort(buckets.begin(), buckets.end());
  SparseVector out;
  for (const auto b : buckets) {
    if (!out.entries.empty() && out.entries.back().first == b) {
      out.entries.back().second += 1.0;
    } else {
      out.entries.emplace_back(b, 1.0);
    }
  }
  return out;
}

using Embedding = std::vector<double>;

/// Linear sentence encoder over hashed features. Row j of the weight matrix
/// (hash_dim x embed_dim, row-major) is the embedding contribution of bucket j.
class EncoderModel {
 public:
  EncoderModel(TokenizerConfig tokenizer, std::size_t hash_dim, std::size_t embed_dim,
               std::uint64_t init_seed, std::vector<double> weights)
      : tokenizer_(tokenizer),
        hash_dim_(hash_dim),
        embed_dim_(embed_dim),
        init_seed_(init_seed),
        weights_(std::move(weights)) {
    tokenizer_.validate();
    check_dims(hash_dim_, embed_dim_);
    if (weights_.size() != hash_dim_ * embed_dim_) {
      throw ModelError("encoder weight matrix has " + std::to_string(weights_.size()) +
                       " entries, expected " + std::to_string(hash_dim_ * embed_dim_));
    }
    if (!all_finite(weights_)) throw ModelError("encoder weights contain non-finite values");
  }

  static void check_dims(std::size_t hash_dim, std::size_t embed_dim) {
    if (hash_dim < 2 || (hash_dim & (hash_dim - 1)) != 0) {
      throw ArgumentError("hash_dim must be a power of two >= 2");
    }
    if (embed_dim < 2) throw ArgumentError("embed_dim must be at least 2");
  }

  const TokenizerConfig& tokenizer() const noexcept { return tokenizer_; }
  std::size_t hash_dim() const noexcept { return hash_dim_; }
  std::size_t embed_dim() const noexcept { return embed_dim_; }
  std::uint64_t init_seed() const noexcept { return init_seed_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::vector<double>& mutable_weights() noexcept { return weights_; }

  std::span<const double> row(std::size_t bucket) const {
    return {weights_.data() + bucket * embed_dim_, embed_dim_};
  }

  SparseVector features(std::string_view text) const {
    return featurize(tokenizer_, hash_dim_, text);
  }

  /// Wᵀx before normalization.
  std::vector<double> project(const SparseVector& x) const {
    std::vector<double> u(embed_dim_, 0.0);
    for (const auto& [bucket, count] : x.entries) {
      const double* w = weights_.data() + std::size_t{bucket} * embed_dim_;
      for (std::size_t k = 0; k < embed_dim_; ++k) u[k] += count * w[k];
    }
    return u;
  }

  friend bool operator==(const EncoderModel&, const EncoderModel&) = default;

 private:
  TokenizerConfig tokenizer_;
  std::size_t hash_dim_;
  std::size_t embed_dim_;
  std::uint64_t init_seed_;
  std::vector<double> weights_;
};

inline double l2_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

/// Unit-norm copy of v; the zero vector maps to itself.
inline Embedding normalized(std::vector<double> v) {
  const double n = l2_norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

/// Weights i.i.d. uniform in [-1/sqrt(embed_dim), 1/sqrt(embed_dim)], drawn
/// row-major from SplitMix64(seed).
inline EncoderModel init_encoder(const TokenizerConfig& cfg, std::size_t hash_dim,
                                 std::size_t embed_dim, std::uint64_t seed) {
  cfg.validate();
  EncoderModel::check_dims(hash_dim, embed_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  SplitMix64 rng(seed);
  std::vector<double> w(hash_dim * embed_dim);
  for (double& x : w) x = bound * (2.0 * rng.uniform01() - 1.0);
  return EncoderModel(cfg, hash_dim, embed_dim, seed, std::move(w));
}

inline Embedding embed_features(const EncoderModel& m, const SparseVector& x) {
  return normalized(m.project(x));
}

inline Embedding embed(const EncoderModel& m, std::string_view text) {
  return embed_features(m, m.features(text));
}

}  // namespace confit

#endif  // CONFIT_ENCODER_HPP_

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

#ifndef CONFIT_COMMON_HPP_
#define CONFIT_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace confit {

// Error hierarchy. The CLI maps UsageError subclasses to exit status 2 and
// everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public UsageError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : UsageError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input violates a data invariant (duplicate id, unknown label, ...).
class ValidationError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Argument outside its documented domain.
class ArgumentError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class AugmentationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Artifact cannot be loaded or does not fit the model it is combined with.
class ModelError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Portable randomness and hashing. Everything that consumes a seed goes
// through these so results are identical across compilers and platforms;
// <random> distributions are implementation-defined and are not used.

/// SplitMix64 generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw ArgumentError("uniform_index: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle, walking from the back.
template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(items[i - 1], items[j]);
  }
}

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = kFnvOffset) noexcept {
  for (const char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFFu;
    h *= kFnvPrime;
  }
  return h;
}

/// Seed derived from (base, tag, k): FNV-1a over the little-endian bytes of
/// base, the tag bytes and k, finalized with the SplitMix64 mixer.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                    std::uint64_t k = 0) noexcept {
  std::uint64_t h = fnv1a64_u64(base, kFnvOffset);
  h = fnv1a64(tag, h);
  h = fnv1a64_u64(k, h);
  return SplitMix64::mix(h);
}

/// floor(x + 1/2), with a relative slack so that products such as 15 * 0.3
/// that land a hair under k + 1/2 still round up.
inline std::size_t round_half_up(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw ArgumentError("round_half_up: expected a finite non-negative value");
  }
  const double slack = 1e-9 * std::max(1.0, x);
  return static_cast<std::size_t>(std::floor(x + 0.5 + slack));
}

inline bool all_finite(const std::vector<double>& v) noexcept {
  for (const double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace confit

#endif  // CONFIT_COMMON_HPP_

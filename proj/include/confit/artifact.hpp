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

#ifndef CONFIT_ARTIFACT_HPP_
#define CONFIT_ARTIFACT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confit/common.hpp"
#include "confit/encoder.hpp"
#include "confit/head.hpp"

namespace confit {

// Container layout, all integers and floats little-endian:
//
//   "CONFIT1"                magic, 7 bytes
//   u32  format version      (1)
//   u32  max_seq_len
//   u8   lowercase
//   u32  ngram_min
//   u32  ngram_max
//   u64  hash_dim
//   u64  embed_dim
//   u64  init_seed
//   f64  encoder weights     hash_dim * embed_dim, row-major
//   u8   has_head
//   -- when has_head --
//   u64  num_classes
//   per class: u32 byte length, UTF-8 bytes
//   f64  head weights        num_classes * embed_dim, row-major
//   f64  head bias           num_classes

inline constexpr std::string_view kArtifactMagic = "CONFIT1";
inline constexpr std::uint32_t kArtifactVersion = 1;

struct Classifier {
  EncoderModel encoder;
  std::optional<HeadModel> head;
};

namespace detail {

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const std::vector<double>& vs) {
    buf_.reserve(buf_.size() + 8 * vs.size());
    for (const double v : vs) f64(v);
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    const auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s(std::uint64_t n) {
    if (n > (data_.size() - pos_) / 8) need(data_.size() + 1);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = f64();
    return out;
  }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw ModelError("artifact is truncated");
  }
  std::uint64_t le(int n) {
    const auto b = bytes(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(b[i])} << (8 * i);
    return v;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_classifier(const Classifier& c) {
  detail::ByteWriter w;
  const auto& enc = c.encoder;
  w.bytes(kArtifactMagic);
  w.u32(kArtifactVersion);
  w.u32(static_cast<std::uint32_t>(enc.tokenizer().max_seq_len));
  w.u8(enc.tokenizer().lowercase ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(enc.tokenizer().ngram_min));
  w.u32(static_cast<std::uint32_t>(enc.tokenizer().ngram_max));
  w.u64(enc.hash_dim());
  w.u64(enc.embed_dim());
  w.u64(enc.init_seed());
  w.f64s(enc.weights());
  w.u8(c.head ? 1 : 0);
  if (c.head) {
    const auto& h = *c.head;
    if (h.embed_dim != enc.embed_dim()) {
      throw ModelError("head and encoder embedding sizes differ");
    }
    w.u64(h.num_classes());
    for (const auto& name : h.class_order) {
      w.u32(static_cast<std::uint32_t>(name.size()));
      w.bytes(name);
    }
    w.f64s(h.weights);
    w.f64s(h.bias);
  }
  return w.take();
}

inline Classifier deserialize_classifier(std::string_view data) {
  detail::ByteReader r(data);
  if (data.size() < kArtifactMagic.size() || r.bytes(kArtifactMagic.size()) != kArtifactMagic) {
    throw ModelError("not a CONFIT1 artifact (bad magic header)");
  }
  const auto version = r.u32();
  if (version != kArtifactVersion) {
    throw ModelError("unsupported artifact version " + std::to_string(version) +
                     " (this build reads version " + std::to_string(kArtifactVersion) + ")");
  }
  TokenizerConfig tok;
  tok.max_seq_len = r.u32();
  tok.lowercase = r.u8() != 0;
  tok.ngram_min = r.u32();
  tok.ngram_max = r.u32();
  const auto hash_dim = r.u64();
  const auto embed_dim = r.u64();
  const auto init_seed = r.u64();
  if (hash_dim == 0 || embed_dim == 0 || hash_dim > (std::uint64_t{1} << 32) ||
      embed_dim > (std::uint64_t{1} << 20)) {
    throw ModelError("artifact declares implausible dimensions");
  }
  auto weights = r.f64s(hash_dim * embed_dim);
  Classifier c{EncoderModel(tok, hash_dim, embed_dim, init_seed, std::move(weights)),
               std::nullopt};
  if (r.u8() != 0) {
    HeadModel h;
    h.embed_dim = embed_dim;
    const auto n_classes = r.u64();
    if (n_classes == 0 || n_classes > (std::uint64_t{1} << 20)) {
      throw ModelError("artifact declares an implausible class count");
    }
    for (std::uint64_t i = 0; i < n_classes; ++i) {
      const auto len = r.u32();
      h.class_order.emplace_back(r.bytes(len));
    }
    h.weights = r.f64s(n_classes * embed_dim);
    h.bias = r.f64s(n_classes);
    if (!all_finite(h.weights) || !all_finite(h.bias)) {
      throw ModelError("head parameters contain non-finite values");
    }
    c.head = std::move(h);
  }
  if (!r.at_end()) throw ModelError("trailing bytes after artifact payload");
  return c;
}

inline void save_classifier(const std::string& path, const Classifier& c) {
  const auto bytes = serialize_classifier(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write \"" + path + "\"");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing \"" + path + "\"");
}

inline Classifier load_classifier(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open artifact \"" + path + "\"");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_classifier(bytes);
}

}  // namespace confit

#endif  // CONFIT_ARTIFACT_HPP_

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

#ifndef CONFIT_CORPUS_HPP_
#define CONFIT_CORPUS_HPP_

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "confit/common.hpp"

namespace confit {

struct LabeledExample {
  std::string id;
  std::string text;
  std::string label;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Immutable, insertion-ordered collection of labeled examples over a
/// declared, ordered set of label classes.
class Dataset {
 public:
  Dataset() = default;

  /// Throws ValidationError when label_classes is empty or has duplicates,
  /// when an id repeats, or when an example's label is not declared.
  Dataset(std::vector<LabeledExample> examples,
          std::vector<std::string> label_classes, std::string task_name = {})
      : examples_(std::move(examples)),
        label_classes_(std::move(label_classes)),
        task_name_(std::move(task_name)) {
    if (label_classes_.empty()) {
      throw ValidationError("dataset declares no label classes");
    }
    for (std::size_t c = 0; c < label_classes_.size(); ++c) {
      if (!class_index_.emplace(label_classes_[c], c).second) {
        throw ValidationError("duplicate label class \"" + label_classes_[c] + "\"");
      }
    }
    std::unordered_set<std::string> seen;
    seen.reserve(examples_.size());
    for (const auto& ex : examples_) {
      if (!seen.insert(ex.id).second) {
        throw ValidationError("duplicate id \"" + ex.id + "\"");
      }
      if (!class_index_.contains(ex.label)) {
        throw ValidationError("example \"" + ex.id + "\" has label \"" + ex.label +
                              "\" outside the declared label classes");
      }
    }
  }

  const std::vector<LabeledExample>& examples() const noexcept { return examples_; }
  const std::vector<std::string>& label_classes() const noexcept { return label_classes_; }
  const std::string& task_name() const noexcept { return task_name_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }

  std::size_t class_index(const std::string& label) const {
    const auto it = class_index_.find(label);
    if (it == class_index_.end()) {
      throw ValidationError("unknown label \"" + label + "\"");
    }
    return it->second;
  }

  /// Class index of every example, in example order.
  std::vector<std::size_t> label_indices() const {
    std::vector<std::size_t> out;
    out.reserve(examples_.size());
    for (const auto& ex : examples_) out.push_back(class_index_.at(ex.label));
    return out;
  }

  /// Examples whose position is flagged in `keep`, original order preserved.
  Dataset select(const std::vector<bool>& keep) const {
    std::vector<LabeledExample> out;
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      if (keep.at(i)) out.push_back(examples_[i]);
    }
    return Dataset(std::move(out), label_classes_, task_name_);
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.examples_ == b.examples_ && a.label_classes_ == b.label_classes_ &&
           a.task_name_ == b.task_name_;
  }

 private:
  std::vector<LabeledExample> examples_;
  std::vector<std::string> label_classes_;
  std::string task_name_;
  std::unordered_map<std::string, std::size_t> class_index_;
};

/// Ordered label-class -> count map. Used for class distributions and for
/// augmentation plans.
struct LabelCounts {
  std::vector<std::string> classes;
  std::vector<std::size_t> counts;

  std::size_t at(const std::string& label) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == label) return counts[i];
    }
    throw ValidationError("no count for label class \"" + label + "\"");
  }

  bool contains(const std::string& label) const {
    return std::find(classes.begin(), classes.end(), label) != classes.end();
  }

  std::size_t total() const noexcept {
    std::size_t s = 0;
    for (const auto c : counts) s += c;
    return s;
  }

  void set(const std::string& label, std::size_t count) {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == label) {
        counts[i] = count;
        return;
      }
    }
    classes.push_back(label);
    counts.push_back(count);
  }

  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

using ClassDistribution = LabelCounts;

inline ClassDistribution class_distribution(const Dataset& d) {
  ClassDistribution dist;
  dist.classes = d.label_classes();
  dist.counts.assign(dist.classes.size(), 0);
  for (const auto& ex : d.examples()) ++dist.counts[d.class_index(ex.label)];
  return dist;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitResult {
  Dataset part_a;
  Dataset part_b;
  std::uint64_t seed = 0;
  double fraction = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void check_open_fraction(double fraction, const char* what) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError(std::string(what) + " must lie strictly between 0 and 1");
  }
}

inline SplitResult make_split(const Dataset& d, const std::vector<bool>& in_b,
                              std::uint64_t seed, double fraction) {
  std::vector<bool> in_a(in_b.size());
  for (std::size_t i = 0; i < in_b.size(); ++i) in_a[i] = !in_b[i];
  SplitResult r{d.select(in_a), d.select(in_b), seed, fraction, {}};
  if (r.part_a.empty()) r.warnings.push_back("first partition is empty");
  if (r.part_b.empty()) r.warnings.push_back("second partition is empty");
  return r;
}

}  // namespace detail

/// Per-class holdout: class c contributes round_half_up(n_c * fraction)
/// examples to part_b. Classes are visited in label-class order and each
/// class's indices are Fisher-Yates shuffled from one SplitMix64 stream
/// seeded with `seed`; the first k shuffled indices go to part_b. Both parts
/// keep the input order.
inline SplitResult stratified_split(const Dataset& d, double fraction,
                                    std::uint64_t seed) {
  detail::check_open_fraction(fraction, "stratified_split fraction");
  std::vector<std::vector<std::size_t>> by_class(d.label_classes().size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    by_class[d.class_index(d[i].label)].push_back(i);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) {
      throw ValidationError("stratified_split: class \"" + d.label_classes()[c] +
                            "\" has no examples");
    }
  }
  SplitMix64 rng(seed);
  std::vector<bool> in_b(d.size(), false);
  for (auto& members : by_class) {
    const std::size_t take = round_half_up(static_cast<double>(members.size()) * fraction);
    shuffle(members, rng);
    for (std::size_t k = 0; k < take && k < members.size(); ++k) in_b[members[k]] = true;
  }
  return detail::make_split(d, in_b, seed, fraction);
}

/// Unstratified public/private split of a test set. part_a is the public
/// slice of round_half_up(N * public_fraction) examples chosen by a seeded
/// shuffle of all indices; part_b is the private remainder.
inline SplitResult leaderboard_split(const Dataset& test, double public_fraction,
                                     std::uint64_t seed) {
  detail::check_open_fraction(public_fraction, "public_fraction");
  if (test.empty()) throw ValidationError("leaderboard_split: test set is empty");
  std::vector<std::size_t> order(test.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(seed);
  shuffle(order, rng);
  const std::size_t n_public =
      std::min(test.size(), round_half_up(static_cast<double>(test.size()) * public_fraction));
  std::vector<bool> is_private(test.size(), true);
  for (std::size_t k = 0; k < n_public; ++k) is_private[order[k]] = false;
  return detail::make_split(test, is_private, seed, public_fraction);
}

// ---------------------------------------------------------------------------
// Files. JSON-lines is the primary format; a CSV file with header
// `id,text,label` is accepted on ingest.

struct RawRecord {
  std::string id;
  std::string text;
  std::optional<std::string> label;
  std::size_t line = 0;
};

namespace detail {

inline bool is_csv_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

/// RFC 4180 style reader: quoted fields may hold commas, doubled quotes
/// and newlines. Returns rows with the line number each row started on.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv_rows(
    std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;
  char ch;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.emplace_back(row_line, std::move(row));
    row.clear();
  };
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) {
          throw ParseError("stray quote inside unquoted CSV field", line);
        }
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", row_line);
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::vector<RawRecord> read_csv_records(std::istream& in) {
  auto rows = read_csv_rows(in);
  std::vector<RawRecord> out;
  if (rows.empty()) return out;
  const auto& header = rows.front().second;
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto id_col = column("id");
  const auto text_col = column("text");
  const auto label_col = column("label");
  if (!id_col || !text_col) {
    throw ParseError("CSV header must name columns id,text[,label]", rows.front().first);
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " CSV fields, got " +
                           std::to_string(cells.size()),
                       line);
    }
    RawRecord rec{cells[*id_col], cells[*text_col], std::nullopt, line};
    if (label_col) rec.label = cells[*label_col];
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<RawRecord> read_jsonl_records(std::istream& in) {
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(std::move(line));
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", lineno);
    auto string_field = [&](const char* key, bool required) -> std::optional<std::string> {
      const auto it = j.find(key);
      if (it == j.end() || it->is_null()) {
        if (required) {
          throw ParseError(std::string("record lacks string field \"") + key + "\"", lineno);
        }
        return std::nullopt;
      }
      if (!it->is_string()) {
        throw ParseError(std::string("field \"") + key + "\" is not a string", lineno);
      }
      return it->get<std::string>();
    };
    RawRecord rec;
    rec.id = *string_field("id", true);
    rec.text = *string_field("text", true);
    rec.label = string_field("label", false);
    rec.line = lineno;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

/// Reads id/text records with an optional label, from JSON-lines or CSV
/// (chosen by a `.csv` extension).
inline std::vector<RawRecord> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open \"" + path + "\"");
  return detail::is_csv_path(path) ? detail::read_csv_records(in)
                                   : detail::read_jsonl_records(in);
}

/// Every record must carry a label. Label classes default to the sorted set
/// of observed labels.
inline Dataset dataset_from_records(
    const std::vector<RawRecord>& records,
    std::optional<std::vector<std::string>> label_classes = std::nullopt,
    std::string task_name = {}) {
  std::vector<LabeledExample> examples;
  examples.reserve(records.size());
  std::set<std::string> observed;
  for (const auto& rec : records) {
    if (!rec.label) {
      throw ValidationError("line " + std::to_string(rec.line) + ": record \"" + rec.id +
                            "\" has no label");
    }
    observed.insert(*rec.label);
    examples.push_back({rec.id, rec.text, *rec.label});
  }
  std::vector<std::string> classes =
      label_classes ? std::move(*label_classes)
                    : std::vector<std::string>(observed.begin(), observed.end());
  return Dataset(std::move(examples), std::move(classes), std::move(task_name));
}

inline Dataset load_dataset(const std::string& path,
                            std::optional<std::vector<std::string>> label_classes = std::nullopt) {
  return dataset_from_records(read_records(path), std::move(label_classes), path);
}

inline void write_jsonl(std::ostream& out, const Dataset& d) {
  for (const auto& ex : d.examples()) {
    const nlohmann::json j = {{"id", ex.id}, {"text", ex.text}, {"label", ex.label}};
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

inline void save_dataset(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write \"" + path + "\"");
  write_jsonl(out, d);
}

}  // namespace confit

#endif  // CONFIT_CORPUS_HPP_

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

#ifndef CONFIT_EVAL_HPP_
#define CONFIT_EVAL_HPP_

#include <cstddef>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "confit/common.hpp"
#include "confit/corpus.hpp"

namespace confit {

/// counts[gold][predicted], indexed in class_order.
struct ConfusionMatrix {
  std::vector<std::string> class_order;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const noexcept {
    std::size_t s = 0;
    for (const auto& row : counts) {
      for (const auto v : row) s += v;
    }
    return s;
  }
};

inline ConfusionMatrix confusion(std::span<const std::string> golds,
                                 std::span<const std::string> preds,
                                 const std::vector<std::string>& class_order) {
  if (golds.size() != preds.size()) {
    throw ArgumentError("confusion: " + std::to_string(golds.size()) + " gold labels but " +
                        std::to_string(preds.size()) + " predictions");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < class_order.size(); ++c) index.emplace(class_order[c], c);
  auto lookup = [&](const std::string& label) {
    const auto it = index.find(label);
    if (it == index.end()) throw ValidationError("unknown label \"" + label + "\"");
    return it->second;
  };
  ConfusionMatrix cm{class_order,
                     std::vector<std::vector<std::size_t>>(
                         class_order.size(), std::vector<std::size_t>(class_order.size(), 0))};
  for (std::size_t i = 0; i < golds.size(); ++i) ++cm.counts[lookup(golds[i])][lookup(preds[i])];
  return cm;
}

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  std::vector<std::string> class_order;
  std::vector<ClassScores> per_class;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;
};

inline double safe_ratio(double num, double den) noexcept { return den == 0.0 ? 0.0 : num / den; }

/// Per-class precision, recall and F1 with 0/0 taken as 0; macro F1 is the
/// unweighted mean over every class in class_order, present or not.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
  const std::size_t C = cm.class_order.size();
  MetricsReport r;
  r.class_order = cm.class_order;
  r.per_class.resize(C);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < C; ++c) {
    std::size_t tp = cm.counts[c][c];
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t o = 0; o < C; ++o) {
      if (o == c) continue;
      fp += cm.counts[o][c];
      fn += cm.counts[c][o];
    }
    correct += tp;
    auto& s = r.per_class[c];
    s.support = tp + fn;
    s.precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
    s.recall = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    s.f1 = safe_ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    r.macro_f1 += s.f1;
  }
  r.macro_f1 = C == 0 ? 0.0 : r.macro_f1 / static_cast<double>(C);
  r.total = cm.total();
  r.accuracy = safe_ratio(static_cast<double>(correct), static_cast<double>(r.total));
  return r;
}

using PredictionMap = std::unordered_map<std::string, std::string>;

/// Macro F1 of `preds` over the examples of `part`.
inline MetricsReport score_dataset(const Dataset& part, const PredictionMap& preds) {
  std::vector<std::string> golds;
  std::vector<std::string> predicted;
  golds.reserve(part.size());
  predicted.reserve(part.size());
  for (const auto& ex : part.examples()) {
    const auto it = preds.find(ex.id);
    if (it == preds.end()) throw ValidationError("no prediction for id \"" + ex.id + "\"");
    golds.push_back(ex.label);
    predicted.push_back(it->second);
  }
  return metrics(confusion(golds, predicted, part.label_classes()));
}

struct LeaderboardReport {
  double public_macro_f1 = 0.0;
  double private_macro_f1 = 0.0;
  std::size_t public_size = 0;
  std::size_t private_size = 0;
  MetricsReport public_metrics;
  MetricsReport private_metrics;
};

/// Scores the public (split.part_a) and private (split.part_b) slices of
/// `golds` independently.
inline LeaderboardReport leaderboard_eval(const Dataset& golds, const PredictionMap& preds,
                                          const SplitResult& split) {
  for (const auto& ex : golds.examples()) {
    if (!preds.contains(ex.id)) throw ValidationError("no prediction for id \"" + ex.id + "\"");
  }
  if (split.part_a.size() + split.part_b.size() != golds.size()) {
    throw ValidationError("leaderboard split does not partition the gold set");
  }
  LeaderboardReport r;
  r.public_metrics = score_dataset(split.part_a, preds);
  r.private_metrics = score_dataset(split.part_b, preds);
  r.public_macro_f1 = r.public_metrics.macro_f1;
  r.private_macro_f1 = r.private_metrics.macro_f1;
  r.public_size = split.part_a.size();
  r.private_size = split.part_b.size();
  return r;
}

// ---------------------------------------------------------------------------
// Reports and prediction files

inline nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < m.class_order.size(); ++c) {
    const auto& s = m.per_class[c];
    per_class[m.class_order[c]] = {{"precision", s.precision},
                                   {"recall", s.recall},
                                   {"f1", s.f1},
                                   {"support", s.support}};
  }
  return {{"per_class", per_class},
          {"macro_f1", m.macro_f1},
          {"accuracy", m.accuracy},
          {"total", m.total}};
}

inline nlohmann::json to_json(const LeaderboardReport& r) {
  return {{"public_macro_f1", r.public_macro_f1},
          {"private_macro_f1", r.private_macro_f1},
          {"public_size", r.public_size},
          {"private_size", r.private_size},
          {"public", to_json(r.public_metrics)},
          {"private", to_json(r.private_metrics)}};
}

inline std::string format_metrics(const MetricsReport& m) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %9s %9s %9s %8s\n", "class", "precision", "recall",
                "f1", "support");
  out += buf;
  for (std::size_t c = 0; c < m.class_order.size(); ++c) {
    const auto& s = m.per_class[c];
    std::snprintf(buf, sizeof buf, "%-24s %9.4f %9.4f %9.4f %8zu\n", m.class_order[c].c_str(),
                  s.precision, s.recall, s.f1, s.support);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "macro F1 %.4f  accuracy %.4f  (n = %zu)\n", m.macro_f1,
                m.accuracy, m.total);
  out += buf;
  return out;
}

inline std::string format_leaderboard(const LeaderboardReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "public  macro F1 %.4f  (n = %zu)\nprivate macro F1 %.4f  (n = %zu)\n",
                r.public_macro_f1, r.public_size, r.private_macro_f1, r.private_size);
  return buf;
}

struct PredictionRecord {
  std::string id;
  std::string label;
};

inline void write_predictions(std::ostream& out, std::span<const PredictionRecord> preds) {
  for (const auto& p : preds) {
    out << nlohmann::json{{"id", p.id}, {"label", p.label}}.dump(
               -1, ' ', false, nlohmann::json::error_handler_t::replace)
        << '\n';
  }
}

/// JSON-lines {"id": ..., "label": ...}. Duplicate ids are rejected.
inline PredictionMap read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open \"" + path + "\"");
  PredictionMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("label") || !j["id"].is_string() ||
        !j["label"].is_string()) {
      throw ParseError("prediction record needs string fields \"id\" and \"label\"", lineno);
    }
    if (!out.emplace(j["id"].get<std::string>(), j["label"].get<std::string>()).second) {
      throw ValidationError("duplicate prediction for id \"" + j["id"].get<std::string>() +
                            "\"");
    }
  }
  return out;
}

}  // namespace confit

#endif  // CONFIT_EVAL_HPP_

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

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "confit/corpus.hpp"
#include "support/oracles.hpp"

namespace {

using namespace confit;

const std::vector<std::string> kTaskA = {"Conspiratorial", "Non-Conspiratorial"};

TEST(LoadDataset, ReadsLabeledJsonLines) {
  oracle::TempDir dir("corpus");
  std::ostringstream body;
  for (int i = 0; i < 1842; ++i) {
    body << R"({"id": ")" << i << R"(", "text": "t )" << i << R"(", "label": ")"
         << (i < 917 ? "Non-Conspiratorial" : "Conspiratorial") << "\"}\n";
  }
  const auto path = dir.file("train.jsonl");
  oracle::write_file(path, body.str());
  const auto d = load_dataset(path);
  EXPECT_EQ(d.size(), 1842u);
  EXPECT_EQ(d.label_classes().size(), 2u);
  const auto dist = class_distribution(d);
  EXPECT_EQ(dist.at("Non-Conspiratorial"), 917u);
  EXPECT_EQ(dist.at("Conspiratorial"), 925u);
}

TEST(LoadDataset, SuppliedClassesFixOrderAndRejectOthers) {
  oracle::TempDir dir("corpus");
  const auto path = dir.file("d.jsonl");
  oracle::write_file(path, "{\"id\":\"1\",\"text\":\"a\",\"label\":\"B\"}\n"
                           "{\"id\":\"2\",\"text\":\"b\",\"label\":\"A\"}\n");
  EXPECT_EQ(load_dataset(path, std::vector<std::string>{"B", "A"}).label_classes(),
            (std::vector<std::string>{"B", "A"}));
  EXPECT_EQ(load_dataset(path).label_classes(), (std::vector<std::string>{"A", "B"}));
  EXPECT_THROW(load_dataset(path, std::vector<std::string>{"A"}), ValidationError);
}

TEST(LoadDataset, MalformedRecordReportsLine) {
  oracle::TempDir dir("corpus");
  const auto path = dir.file("bad.jsonl");
  oracle::write_file(path, "{\"id\":\"1\",\"text\":\"a\",\"label\":\"A\"}\n\n{\"id\": \"2\", \"text\n");
  try {
    load_dataset(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  oracle::write_file(path, "{\"id\":\"1\",\"label\":\"A\"}\n");
  EXPECT_THROW(load_dataset(path), ParseError);
  oracle::write_file(path, "[1,2]\n");
  EXPECT_THROW(load_dataset(path), ParseError);
}

TEST(LoadDataset, MissingLabelIsValidationError) {
  oracle::TempDir dir("corpus");
  const auto path = dir.file("unlabeled.jsonl");
  oracle::write_file(path, "{\"id\":\"1\",\"text\":\"a\"}\n");
  EXPECT_THROW(load_dataset(path), ValidationError);
  EXPECT_EQ(read_records(path).size(), 1u);
}

TEST(LoadDataset, CsvWithQuotedFields) {
  oracle::TempDir dir("corpus");
  const auto path = dir.file("d.csv");
  oracle::write_file(path,
                     "id,text,label\r\n"
                     "1,\"hello, world\",A\r\n"
                     "2,\"she said \"\"hi\"\"\nnext line\",B\r\n"
                     "3,,A\r\n");
  const auto d = load_dataset(path);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].text, "hello, world");
  EXPECT_EQ(d[1].text, "she said \"hi\"\nnext line");
  EXPECT_EQ(d[2].text, "");
}

TEST(LoadDataset, CsvFieldCountMismatchReportsLine) {
  oracle::TempDir dir("corpus");
  const auto path = dir.file("d.csv");
  oracle::write_file(path, "id,text,label\n1,a,A\n2,b\n");
  try {
    load_dataset(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Dataset, DuplicateIdNamesTheId) {
  try {
    Dataset({{"x", "a", "A"}, {"x", "b", "A"}}, {"A"});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("\"x\""), std::string::npos);
  }
}

TEST(Dataset, UndeclaredLabelRejected) {
  EXPECT_THROW(Dataset({{"1", "a", "C"}}, {"A", "B"}), ValidationError);
  EXPECT_THROW(Dataset({}, {}), ValidationError);
  EXPECT_THROW(Dataset({}, {"A", "A"}), ValidationError);
}

TEST(Dataset, EmptyTextAllowed) {
  const Dataset d({{"1", "", "A"}}, {"A"});
  EXPECT_EQ(d[0].text, "");
}

TEST(Dataset, JsonLinesRoundTrip) {
  oracle::TempDir dir("corpus");
  const Dataset d({{"1", "caffè \"quoted\"\nline", "A"}, {"2", "", "B"}}, {"A", "B"},
                  dir.file("out.jsonl"));
  save_dataset(dir.file("out.jsonl"), d);
  const auto back = load_dataset(dir.file("out.jsonl"), d.label_classes());
  EXPECT_EQ(back, d);
}

TEST(ClassDistribution, CountsInClassOrder) {
  const auto d = oracle::counted({"B", "A", "C"}, {2, 5, 0});
  const auto dist = class_distribution(d);
  EXPECT_EQ(dist.classes, (std::vector<std::string>{"B", "A", "C"}));
  EXPECT_EQ(dist.counts, (std::vector<std::size_t>{2, 5, 0}));
  EXPECT_EQ(dist.total(), 7u);
}

TEST(StratifiedSplit, TaskAHoldoutSizes) {
  const auto d = oracle::counted({"Non-Conspiratorial", "Conspiratorial"}, {917, 925});
  const auto s = stratified_split(d, 0.2, 42);
  const auto dist = class_distribution(s.part_b);
  EXPECT_EQ(dist.at("Non-Conspiratorial"), 183u);
  EXPECT_EQ(dist.at("Conspiratorial"), 185u);
  EXPECT_EQ(s.part_a.size(), 1842u - 368u);
}

TEST(StratifiedSplit, PartitionPropertiesOverRandomDatasets) {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t C = 2 + rng.uniform_index(4);
    std::vector<std::string> labels;
    std::vector<std::size_t> counts;
    for (std::size_t c = 0; c < C; ++c) {
      labels.push_back("c" + std::to_string(c));
      counts.push_back(1 + rng.uniform_index(60));
    }
    const auto d = oracle::counted(labels, counts);
    const double f = 0.05 + 0.9 * rng.uniform01();
    const auto seed = rng.next();
    const auto s = stratified_split(d, f, seed);

    std::set<std::string> a, b;
    for (const auto& ex : s.part_a.examples()) a.insert(ex.id);
    for (const auto& ex : s.part_b.examples()) b.insert(ex.id);
    ASSERT_EQ(a.size() + b.size(), d.size());
    for (const auto& id : a) ASSERT_FALSE(b.contains(id));
    const auto db = class_distribution(s.part_b);
    for (std::size_t c = 0; c < C; ++c) {
      ASSERT_EQ(db.counts[c], round_half_up(static_cast<double>(counts[c]) * f));
    }
    ASSERT_EQ(stratified_split(d, f, seed).part_b, s.part_b);
  }
}

TEST(StratifiedSplit, KeepsInputOrder) {
  const auto d = oracle::counted({"A", "B"}, {20, 20});
  const auto s = stratified_split(d, 0.5, 1);
  auto pos = [&](const std::string& id) { return std::stoi(id.substr(1)); };
  for (std::size_t i = 1; i < s.part_a.size(); ++i) {
    EXPECT_LT(pos(s.part_a[i - 1].id), pos(s.part_a[i].id));
  }
}

TEST(StratifiedSplit, FractionOutsideOpenIntervalRejected) {
  const auto d = oracle::counted({"A", "B"}, {3, 3});
  EXPECT_THROW(stratified_split(d, 0.0, 1), ArgumentError);
  EXPECT_THROW(stratified_split(d, 1.0, 1), ArgumentError);
  EXPECT_THROW(stratified_split(d, -0.5, 1), ArgumentError);
}

TEST(LeaderboardSplit, PublicPrivateSizes) {
  const auto d460 = oracle::counted({"A", "B"}, {230, 230});
  const auto s = leaderboard_split(d460, 0.3, 3);
  EXPECT_EQ(s.part_a.size(), 138u);
  EXPECT_EQ(s.part_b.size(), 322u);
  const auto d300 = oracle::counted({"A", "B", "C", "D"}, {75, 75, 75, 75});
  const auto t = leaderboard_split(d300, 0.3, 3);
  EXPECT_EQ(t.part_a.size(), 90u);
  EXPECT_EQ(t.part_b.size(), 210u);
  EXPECT_TRUE(s.warnings.empty());
}

TEST(LeaderboardSplit, EdgeFractionWarnsOnEmptyPrivate) {
  const auto d = oracle::counted({"A", "B"}, {1, 1});
  const auto s = leaderboard_split(d, 0.999, 0);
  EXPECT_EQ(s.part_a.size(), 2u);
  EXPECT_EQ(s.part_b.size(), 0u);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_THROW(leaderboard_split(d, 1.0, 0), ArgumentError);
}

}  // namespace

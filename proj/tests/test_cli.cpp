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

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

#include "confit/corpus.hpp"
#include "confit/synthetic.hpp"
#include "support/oracles.hpp"

#ifndef CONFIT_CLI_PATH
#error "CONFIT_CLI_PATH must point at the confit executable"
#endif

namespace {

using namespace confit;
using json = nlohmann::json;

struct CliRun {
  int status = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticSpec spec;
    spec.classes = {{"A", 30}, {"B", 30}};
    spec.seed = 1;
    spec.id_prefix = "tr";
    save_dataset(dir_.file("train.jsonl"), make_synthetic(spec));
    spec.classes = {{"A", 25}, {"B", 25}};
    spec.seed = 2;
    spec.id_prefix = "te";
    save_dataset(dir_.file("test.jsonl"), make_synthetic(spec));
  }

  CliRun run(const std::string& args) {
    const auto out = dir_.file("stdout.txt");
    const auto err = dir_.file("stderr.txt");
    const std::string cmd = std::string(CONFIT_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int raw = std::system(cmd.c_str());
    CliRun r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = oracle::read_file(out);
    r.err = oracle::read_file(err);
    return r;
  }

  std::string path(const std::string& name) const { return dir_.file(name); }

  // Small model so each CLI run stays fast.
  static constexpr const char* kSmall = " --hash-dim 4096 --embed-dim 16 ";

  oracle::TempDir dir_{"cli"};
};

TEST_F(CliTest, MissingTrainFlagIsUsageError) {
  const auto r = run("train --out " + path("m.confit"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("--train"), std::string::npos);
}

TEST_F(CliTest, NoSubcommandIsUsageError) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

TEST_F(CliTest, StatsJson) {
  const auto r = run("stats --json --data " + path("train.jsonl"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["examples"], 60);
  EXPECT_EQ(j["counts"]["A"], 30);
}

TEST_F(CliTest, TrainIsReproducibleAndEvalPartitionsTest) {
  const std::string common = std::string(kSmall) + "--seed 5 --train " + path("train.jsonl");
  auto r = run("train" + common + " --out " + path("a.confit") + " --trajectory " +
               path("traj.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("epoch 1 mean_loss"), std::string::npos);
  r = run("train" + common + " --out " + path("b.confit"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto a = oracle::read_file(path("a.confit"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, oracle::read_file(path("b.confit")));
  EXPECT_EQ(oracle::read_file(path("traj.csv")).rfind("epoch,mean_loss\n1,", 0), 0u);

  r = run("eval --model " + path("a.confit") + " --test " + path("test.jsonl") +
          " --seed 3 --out " + path("eval.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(oracle::read_file(path("eval.json")));
  EXPECT_EQ(j["public_size"].get<int>() + j["private_size"].get<int>(), 50);
  EXPECT_EQ(j["public_size"], 15);

  r = run("predict --model " + path("a.confit") + " --input " + path("test.jsonl") + " --out " +
          path("preds.jsonl") + " --probabilities");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto preds = oracle::read_file(path("preds.jsonl"));
  EXPECT_EQ(std::count(preds.begin(), preds.end(), '\n'), 50);

  r = run("eval --predictions " + path("preds.jsonl") + " --test " + path("test.jsonl") +
          " --seed 3 --out " + path("eval2.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(oracle::read_file(path("eval2.json"))), j);
}

TEST_F(CliTest, DevFractionReport) {
  const auto r = run("train" + std::string(kSmall) + "--dev-fraction 0.2 --train " +
                     path("train.jsonl") + " --out " + path("m.confit") + " --report " +
                     path("report.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(oracle::read_file(path("report.json")));
  EXPECT_EQ(j["dev_examples"], 12);
  EXPECT_EQ(j["train_examples"], 48);
  EXPECT_EQ(j["pair_count"], 2 * 5 * 48);
}

TEST_F(CliTest, ConfigFileSuppliesDefaultsFlagsWin) {
  oracle::write_file(path("run.ini"), "# pipeline settings\niterations = 2\nhash-dim = 4096\n"
                                      "embed-dim = 16\n");
  auto r = run("train --config " + path("run.ini") + " --train " + path("train.jsonl") +
               " --out " + path("m.confit") + " --report " + path("r.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(oracle::read_file(path("r.json")))["pair_count"], 2 * 2 * 60);
  r = run("train --config " + path("run.ini") + " --iterations 3 --train " +
          path("train.jsonl") + " --out " + path("m.confit") + " --report " + path("r.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(oracle::read_file(path("r.json")))["pair_count"], 2 * 3 * 60);

  oracle::write_file(path("bad.ini"), "bogus = 1\n");
  EXPECT_EQ(run("train --config " + path("bad.ini") + " --train " + path("train.jsonl") +
                " --out " + path("m.confit"))
                .status,
            2);
}

TEST_F(CliTest, SplitWritesBothParts) {
  const auto r = run("split --data " + path("test.jsonl") + " --mode leaderboard --out-a " +
                     path("pub.jsonl") + " --out-b " + path("priv.jsonl"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(load_dataset(path("pub.jsonl")).size(), 15u);
  EXPECT_EQ(load_dataset(path("priv.jsonl")).size(), 35u);
  EXPECT_EQ(run("split --data " + path("test.jsonl") + " --fraction 1.5 --out-a " +
                path("x.jsonl") + " --out-b " + path("y.jsonl"))
                .status,
            2);
  EXPECT_EQ(run("split --data " + path("test.jsonl") + " --out-a " + path("same.jsonl") +
                " --out-b " + path("same.jsonl"))
                .status,
            2);
}

TEST_F(CliTest, AugmentWithMockProvider) {
  const auto r = run("augment --train " + path("train.jsonl") + " --out " + path("aug.jsonl") +
                     " --targets A=40,B=35");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto d = load_dataset(path("aug.jsonl"));
  EXPECT_EQ(d.size(), 75u);
  EXPECT_EQ(class_distribution(d).at("A"), 40u);
  EXPECT_EQ(run("augment --train " + path("train.jsonl") + " --out " + path("aug2.jsonl") +
                " --targets A=10")
                .status,
            2);
}

TEST_F(CliTest, GridSearchCsv) {
  const auto r = run("gridsearch" + std::string(kSmall) + "--train " + path("train.jsonl") +
                     " --iterations 1 2 --out " + path("sweep.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto csv = oracle::read_file(path("sweep.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(r.err.find("fingerprint"), std::string::npos);
}

TEST_F(CliTest, AblateCsv) {
  const auto r = run("ablate" + std::string(kSmall) + "--train " + path("train.jsonl") +
                     " --test " + path("test.jsonl") + " --targets A=40,B=40 --out " +
                     path("ablation.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto csv = oracle::read_file(path("ablation.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("augmented,"), std::string::npos);
}

TEST_F(CliTest, ErrorsMapToExitStatus) {
  oracle::write_file(path("unlabeled.jsonl"), "{\"id\":\"1\",\"text\":\"x\"}\n");
  oracle::write_file(path("junk.confit"), "not a model");
  auto r = run("eval --model " + path("junk.confit") + " --test " + path("test.jsonl"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("load"), std::string::npos);
  r = run("train" + std::string(kSmall) + "--train " + path("unlabeled.jsonl") + " --out " +
          path("m.confit"));
  EXPECT_EQ(r.status, 2);
  r = run("train" + std::string(kSmall) + "--lr 1e300 --train " + path("train.jsonl") +
          " --out " + path("m.confit"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("train"), std::string::npos);
}

}  // namespace

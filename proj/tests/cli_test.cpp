// Copyright 2026 The normconflict Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include <chrono>
#include <map>
#include <thread>

#include <httplib.h>

#include "support.hpp"

namespace {

using namespace nctest;
using nlohmann::json;

struct Result {
  int exit = -1;
  std::string out;
  std::string err;
};

// Starts the tool with stdout and stderr sent to files in `dir`.
pid_t Spawn(const std::vector<std::string>& args, const TempDir& dir,
            const std::string& tag) {
  const auto out = (dir / (tag + ".out")).string();
  const auto err = (dir / (tag + ".err")).string();
  const pid_t pid = fork();
  if (pid == 0) {
    const int o = ::open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int e = ::open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    dup2(o, 1);
    dup2(e, 2);
    std::vector<char*> argv;
    std::string bin = NORMCONFLICT_CLI;
    argv.push_back(bin.data());
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(bin.c_str(), argv.data());
    _exit(127);
  }
  return pid;
}

int Wait(pid_t pid) {
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

Result RunCli(const std::vector<std::string>& args, const TempDir& dir) {
  static int counter = 0;
  const std::string tag = "run" + std::to_string(counter++);
  Result r;
  r.exit = Wait(Spawn(args, dir, tag));
  r.out = ReadText(dir / (tag + ".out"));
  r.err = ReadText(dir / (tag + ".err"));
  return r;
}

// A small synthetic corpus and vectors shared by the tests of one suite.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    auto r = RunCli({"synth", "--dataset-out", Path("d.jsonl"), "--vectors-out",
                  Path("v.txt"), "--dim", "20", "--counts", "200", "40", "30",
                  "20", "20"},
                 *dir_);
    ASSERT_EQ(r.exit, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string Path(const std::string& name) {
    return (*dir_ / name).string();
  }
  static TempDir& dir() { return *dir_; }

  static TempDir* dir_;
};

TempDir* Cli::dir_ = nullptr;

TEST_F(Cli, ExtractWritesOneRecordPerModalSentence) {
  WriteText(dir() / "c.txt",
            "The Buyer shall pay. The sky is blue. The Seller may ship.");
  auto r = RunCli({"extract", "--contracts", Path("c.txt"), "--out",
                Path("norms.jsonl")},
               dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  EXPECT_NE(r.out.find("seed: 42"), std::string::npos);
  std::istringstream in(ReadText(dir() / "norms.jsonl"));
  auto norms = ReadNorms(in);
  ASSERT_EQ(norms.size(), 2u);
  EXPECT_EQ(norms[0].modality, DeonticMeaning::kObligation);
  EXPECT_EQ(norms[1].modality, DeonticMeaning::kPermission);
}

TEST_F(Cli, ExtractMissingFileAndEmptyContract) {
  auto r = RunCli({"extract", "--contracts", Path("absent.txt"), "--out",
                Path("x.jsonl")},
               dir());
  EXPECT_EQ(r.exit, 2);
  EXPECT_NE(r.err.find("absent.txt"), std::string::npos);

  WriteText(dir() / "empty.txt", "");
  r = RunCli({"extract", "--contracts", Path("empty.txt"), "--out",
           Path("empty-norms.jsonl")},
          dir());
  EXPECT_EQ(r.exit, 0) << r.err;
  EXPECT_EQ(ReadText(dir() / "empty-norms.jsonl"), "");
}

TEST_F(Cli, ExtractBundledContractsWithPairs) {
  auto r = RunCli({"extract", "--contracts", NORMCONFLICT_DATA_DIR "/contracts",
                "--lexicon", NORMCONFLICT_DATA_DIR "/lexicon.tsv", "--out",
                Path("bundled.jsonl"), "--pairs-out", Path("pairs.jsonl")},
               dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  std::istringstream in(ReadText(dir() / "bundled.jsonl"));
  std::map<std::string, std::size_t> per_contract;
  for (const auto& n : ReadNorms(in)) ++per_contract[n.contract_id];
  EXPECT_EQ(per_contract.size(), 2u);
  std::size_t expected = 0;
  for (const auto& [c, n] : per_contract) expected += n * (n - 1) / 2;
  EXPECT_EQ(LoadDataset(dir() / "pairs.jsonl").size(), expected);
}

TEST_F(Cli, TrainShapesAndLog) {
  auto r = RunCli({"train", "--dataset", Path("d.jsonl"), "--vectors",
                Path("v.txt"), "--out", Path("c4.model"), "--no-timestamp"},
               dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  auto m4 = LoadModel(dir() / "c4.model");
  EXPECT_EQ(m4.num_classes(), 4u);
  EXPECT_EQ(m4.dim, 40u);
  EXPECT_EQ(m4.feature_mode, FeatureMode::kConcat);

  std::istringstream log(ReadText(dir() / "c4.model.log"));
  std::string line;
  std::getline(log, line);
  auto head = json::parse(line);
  EXPECT_EQ(head["seed"], 42);
  EXPECT_EQ(head["task"], "TypeC");
  EXPECT_FALSE(head.contains("timestamp"));
  int rows = 0;
  double prev = INFINITY;
  while (std::getline(log, line)) {
    auto row = json::parse(line);
    EXPECT_LE(row["objective"].get<double>(), prev);
    prev = row["objective"].get<double>();
    ++rows;
  }
  EXPECT_EQ(rows, head["epochs"].get<int>() + 1);  // row 0 is the start

  r = RunCli({"train", "--dataset", Path("d.jsonl"), "--vectors", Path("v.txt"),
           "--task", "typec-plus-non", "--mode", "offset", "--negatives",
           "match-conflicts", "--out", Path("c5.model")},
          dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  auto m5 = LoadModel(dir() / "c5.model");
  EXPECT_EQ(m5.num_classes(), 5u);
  EXPECT_EQ(m5.dim, 20u);
}

TEST_F(Cli, TrainIsDeterministic) {
  for (const char* name : {"a.model", "b.model"}) {
    auto r = RunCli({"train", "--dataset", Path("d.jsonl"), "--vectors",
                  Path("v.txt"), "--out", Path(name), "--no-timestamp"},
                 dir());
    ASSERT_EQ(r.exit, 0) << r.err;
  }
  EXPECT_EQ(ReadText(dir() / "a.model"), ReadText(dir() / "b.model"));
  EXPECT_EQ(ReadText(dir() / "a.model.log"), ReadText(dir() / "b.model.log"));
}

TEST_F(Cli, TrainOnOneClassIsPipelineError) {
  SaveDataset(CountsDataset({0, 20, 0, 0, 0}), dir() / "one.jsonl");
  WriteText(dir() / "one-v.txt", "first 1 0\nsecond 0 1\nnorm 1 1\n");
  auto r = RunCli({"train", "--dataset", Path("one.jsonl"), "--vectors",
                Path("one-v.txt"), "--out", Path("one.model")},
               dir());
  EXPECT_EQ(r.exit, 3);
  EXPECT_NE(r.err.find("DegenerateData"), std::string::npos);
}

TEST_F(Cli, EvaluateTypeCOnlyHasTwoRowsAndRepeats) {
  std::vector<std::string> args = {
      "evaluate",         "--dataset", Path("d.jsonl"), "--vectors",
      Path("v.txt"),      "--task",    "typec-only",    "--k",
      "5",                "--no-timestamp", "--out",     Path("rep1")};
  auto a = RunCli(args, dir());
  ASSERT_EQ(a.exit, 0) << a.err;
  EXPECT_NE(a.out.find("TypeC (offset)"), std::string::npos);
  EXPECT_NE(a.out.find("TypeC (concat)"), std::string::npos);
  EXPECT_EQ(a.out.find("TypeC+Non"), std::string::npos);
  auto jsonl = ReadText(dir() / "rep1.jsonl");
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 2);
  EXPECT_EQ(ReadText(dir() / "rep1.txt"), a.out);

  args.back() = Path("rep2");
  auto b = RunCli(args, dir());
  ASSERT_EQ(b.exit, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(jsonl, ReadText(dir() / "rep2.jsonl"));
}

TEST_F(Cli, EvaluateBadVectorsNamesTheLine) {
  WriteText(dir() / "bad-v.txt", "shall 1 2 3\nmay 1 2\n");
  auto r = RunCli({"evaluate", "--dataset", Path("d.jsonl"), "--vectors",
                Path("bad-v.txt")},
               dir());
  EXPECT_EQ(r.exit, 3);
  EXPECT_NE(r.err.find("DimensionMismatch"), std::string::npos);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST_F(Cli, ClassifyPrintsLabelAndConfidences) {
  auto t = RunCli({"train", "--dataset", Path("d.jsonl"), "--vectors",
                Path("v.txt"), "--mode", "offset", "--out", Path("off.model")},
               dir());
  ASSERT_EQ(t.exit, 0) << t.err;
  auto r = RunCli({"classify", "--model", Path("off.model"), "--vectors",
                Path("v.txt"), "--norm1", "The Seller shall ship the goods.",
                "--norm2", "The Seller shall ship the goods."},
               dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  // Identical texts give the zero offset, so the label is the argmax of the
  // biases alone.
  auto model = LoadModel(dir() / "off.model");
  const auto zero = Predict(model, {std::vector<double>(model.dim, 0.0),
                                    FeatureMode::kOffset});
  EXPECT_NE(r.out.find("label: " + std::string(LabelName(zero.label))),
            std::string::npos)
      << r.out;
  for (auto l : model.classes)
    EXPECT_NE(r.out.find(std::string(LabelName(l))), std::string::npos);
}

TEST_F(Cli, ClassifyBatch) {
  ASSERT_EQ(RunCli({"train", "--dataset", Path("d.jsonl"), "--vectors",
                 Path("v.txt"), "--out", Path("batch.model")},
                dir())
                .exit,
            0);
  WriteText(dir() / "in.jsonl",
            "{\"id\":\"x\",\"norm1\":\"The Seller shall ship.\",\"norm2\":"
            "\"The Seller may ship.\"}\n"
            "{\"id\":\"y\",\"norm1\":\"qqq\",\"norm2\":\"zzz\"}\n");
  auto r = RunCli({"classify", "--model", Path("batch.model"), "--vectors",
                Path("v.txt"), "--pairs", Path("in.jsonl"), "--out",
                Path("pred.jsonl")},
               dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  std::istringstream in(ReadText(dir() / "pred.jsonl"));
  std::string line;
  std::getline(in, line);
  auto first = json::parse(line);
  EXPECT_EQ(first["id"], "x");
  EXPECT_TRUE(first.contains("label"));
  std::getline(in, line);
  auto second = json::parse(line);
  EXPECT_EQ(second["id"], "y");
  EXPECT_TRUE(second.contains("error"));
}

TEST_F(Cli, ClassifyMissingModel) {
  auto r = RunCli({"classify", "--model", Path("absent.model"), "--vectors",
                Path("v.txt"), "--norm1", "a", "--norm2", "b"},
               dir());
  EXPECT_EQ(r.exit, 2);
}

TEST_F(Cli, StatsTextAndJsonAgree) {
  auto text = RunCli({"stats", "--dataset", Path("d.jsonl")}, dir());
  auto js = RunCli({"stats", "--dataset", Path("d.jsonl"), "--format", "json"},
                dir());
  ASSERT_EQ(text.exit, 0);
  ASSERT_EQ(js.exit, 0);
  auto stats = ComputeStats(LoadDataset(dir() / "d.jsonl"));
  EXPECT_NE(text.out.find(FormatStatsTable(stats)), std::string::npos);
  auto j = json::parse(js.out.substr(js.out.find('{')));
  EXPECT_EQ(j["counts"]["deontic-modality"], 40);
  EXPECT_EQ(j["total"], 310);
}

TEST_F(Cli, SynthDefaultsToTheStandardManifest) {
  auto r = RunCli({"synth", "--dataset-out", Path("t1.jsonl")}, dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  auto s = ComputeStats(LoadDataset(dir() / "t1.jsonl"));
  EXPECT_EQ(s.count(ConflictLabel::kDeonticModality), 97u);
  EXPECT_EQ(s.count(ConflictLabel::kDeonticStructure), 61u);
  EXPECT_EQ(s.count(ConflictLabel::kDeonticObject), 30u);
  EXPECT_EQ(s.count(ConflictLabel::kObjectConditional), 40u);
  EXPECT_EQ(s.count(ConflictLabel::kNonConflict), 11329u);
}

TEST_F(Cli, MergeAndConfigOverlay) {
  SaveDataset(CountsDataset({1, 1, 0, 0, 0}), dir() / "m1.jsonl");
  SaveDataset(CountsDataset({0, 1, 1, 0, 0}), dir() / "m2.jsonl");
  auto r = RunCli({"merge", "--inputs", Path("m1.jsonl"), Path("m2.jsonl"),
                "--out", Path("merged.jsonl")},
               dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  auto merged = LoadDataset(dir() / "merged.jsonl");
  EXPECT_EQ(merged.size(), 4u);
  EXPECT_EQ(merged.pairs[2].id, "DM-1~2");

  WriteText(dir() / "overlay.conf", "# defaults\nseed = 7\nformat = json\n");
  r = RunCli({"--config", Path("overlay.conf"), "stats", "--dataset",
           Path("merged.jsonl")},
          dir());
  ASSERT_EQ(r.exit, 0) << r.err;
  EXPECT_NE(r.out.find("\"total\":4"), std::string::npos) << r.out;
  WriteText(dir() / "seed.conf", "seed = 7\n");
  r = RunCli({"--config", Path("seed.conf"), "--seed", "9", "synth",
           "--dataset-out", Path("s9.jsonl"), "--counts", "1", "1", "0", "0",
           "0"},
          dir());
  EXPECT_NE(r.out.find("seed: 9"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(RunCli({}, dir()).exit, 2);
  EXPECT_EQ(RunCli({"stats"}, dir()).exit, 2);
  EXPECT_EQ(RunCli({"stats", "--dataset", Path("d.jsonl"), "--bogus"}, dir()).exit,
            2);
}

// Starts `serve` and waits for its "listening: host:port" line.
struct Server {
  pid_t pid = -1;
  int port = 0;
};

Server StartServe(const TempDir& dir, const std::string& tag,
                  const std::string& bind) {
  Server s;
  s.pid = Spawn({"serve", "--store", (dir / "store.jsonl").string(),
                 "--contracts", NORMCONFLICT_DATA_DIR "/contracts", "--bind",
                 bind},
                dir, tag);
  for (int i = 0; i < 200; ++i) {
    const auto out = ReadText(dir / (tag + ".out"));
    const auto at = out.find("listening: ");
    if (at != std::string::npos && out.find('\n', at) != std::string::npos) {
      const auto line = out.substr(at, out.find('\n', at) - at);
      s.port = std::stoi(line.substr(line.rfind(':') + 1));
      return s;
    }
    int status = 0;
    if (waitpid(s.pid, &status, WNOHANG) == s.pid) {
      s.port = -(WIFEXITED(status) ? WEXITSTATUS(status) : 128);
      s.pid = -1;
      return s;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  return s;
}

TEST_F(Cli, ServeSmokePortInUseAndInterruptDurability) {
  TempDir tmp;
  auto server = StartServe(tmp, "serve1", "127.0.0.1:0");
  ASSERT_GT(server.port, 0);

  httplib::Client client("127.0.0.1", server.port);
  auto norm = client.Get("/api/norm/random");
  ASSERT_TRUE(norm);
  ASSERT_EQ(norm->status, 200);
  auto n = json::parse(norm->body);

  // A second server on the same port cannot bind.
  auto second =
      StartServe(tmp, "serve2", "127.0.0.1:" + std::to_string(server.port));
  EXPECT_EQ(second.port, -4);

  json sub;
  sub["original_norm_id"] = n["norm_id"];
  sub["original_text"] = n["text"];
  sub["edited_text"] = "Nobody is bound by this clause.";
  sub["conflict_type"] = "deontic-structure";
  auto posted = client.Post("/api/conflict", sub.dump(), "application/json");
  ASSERT_TRUE(posted);
  ASSERT_EQ(posted->status, 201);

  kill(server.pid, SIGINT);
  EXPECT_EQ(Wait(server.pid), 0);
  EXPECT_NE(ReadText(tmp / "serve1.out").find("stopped"), std::string::npos);
  auto d = LoadDataset(tmp / "store.jsonl");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.pairs[0].norm2, "Nobody is bound by this clause.");
  EXPECT_EQ(d.pairs[0].label, ConflictLabel::kDeonticStructure);
}

}  // namespace

/* Copyright 2026 The wemeval Authors. All Rights Reserved.

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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"
#include "wemeval/batch_eval.h"
#include "wemeval/manifest.h"
#include "wemeval/microsim.h"

namespace wemeval {
namespace {

using nlohmann::json;
using testing::TempDir;
using testing::ThrownKind;

std::vector<json> Lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(json::parse(line));
  return out;
}

// Ten identity pairs; pair 3 compares a 3-chunk rollout against a 2-chunk gt.
std::vector<EvalPair> WritePairs(const TempDir& dir, int n = 10) {
  std::vector<EvalPair> pairs;
  for (int i = 0; i < n; ++i) {
    const SimOutput sim = GenerateTrajectory(MixedPhaseConfig(40 + i, 24, 24, 3, 2));
    const std::string stem = "p" + std::to_string(i);
    const auto gt = SaveManifest(sim.trajectory, dir.path(), stem + "_gt");
    std::filesystem::path gen = gt;
    if (i == 3) {
      gen = SaveManifest(GenerateTrajectory(MixedPhaseConfig(40 + i, 24, 24, 3, 3)).trajectory,
                         dir.path(), stem + "_gen");
    }
    pairs.push_back({gen.string(), gt.string()});
  }
  return pairs;
}

TEST(BatchEvalTest, MismatchIsReportedAndRunContinues) {
  TempDir dir;
  const std::vector<EvalPair> pairs = WritePairs(dir);
  std::ostringstream out;
  const BatchSummary s = RunBatchEval(pairs, BatchOptions{}, out);
  EXPECT_EQ(s.evaluated, 9u);
  EXPECT_EQ(s.failed, 1u);
  EXPECT_EQ(s.invalid, 0u);
  EXPECT_EQ(s.exit_code(), 1);

  const std::vector<json> lines = Lines(out.str());
  ASSERT_EQ(lines.size(), 12u);
  EXPECT_EQ(lines[0]["config"]["W"], 4);
  for (int i = 0; i < 10; ++i) {
    const json& l = lines[1 + i];
    EXPECT_EQ(l["pair"], i);
    EXPECT_EQ(l.contains("error"), i == 3);
  }
  EXPECT_EQ(lines[4]["error"]["kind"], "invalid-argument");
  const json& agg = lines.back()["aggregate"];
  EXPECT_EQ(agg["evaluated"], 9);
  EXPECT_EQ(agg["failed"], 1);
  for (const char* name : {"rcbd", "lpsa", "cisr", "pmpa", "fphs"}) {
    EXPECT_NEAR(agg["means"][name].get<double>(), 1.0, 1e-9) << name;
  }
  EXPECT_EQ(lines.back()["config"], lines[0]["config"]);
}

TEST(BatchEvalTest, OutputIndependentOfWorkerCount) {
  TempDir dir;
  const std::vector<EvalPair> pairs = WritePairs(dir);
  std::string reference;
  for (int workers : {1, 3, 8}) {
    BatchOptions opts;
    opts.workers = workers;
    std::ostringstream out;
    RunBatchEval(pairs, opts, out);
    if (reference.empty()) {
      reference = out.str();
    } else {
      EXPECT_EQ(out.str(), reference) << workers << " workers";
    }
  }
}

TEST(BatchEvalTest, InvalidManifestExitsTwo) {
  TempDir dir;
  std::vector<EvalPair> pairs = WritePairs(dir, 2);
  std::ofstream(dir / "broken.json") << "{\"id\": \"x\", \"chunks\": 5}";
  pairs.push_back({(dir / "broken.json").string(), pairs[0].gt});
  pairs.push_back({(dir / "absent.json").string(), pairs[0].gt});
  std::ostringstream out;
  const BatchSummary s = RunBatchEval(pairs, BatchOptions{}, out);
  EXPECT_EQ(s.invalid, 2u);
  EXPECT_EQ(s.evaluated, 2u);
  EXPECT_EQ(s.exit_code(), 2);
  const std::vector<json> lines = Lines(out.str());
  EXPECT_EQ(lines[3]["error"]["kind"], "schema");
  EXPECT_EQ(lines[4]["error"]["kind"], "missing-file");
}

TEST(BatchEvalTest, RejectsBadOptions) {
  std::ostringstream out;
  BatchOptions opts;
  opts.workers = 0;
  EXPECT_EQ(ThrownKind([&] { RunBatchEval({}, opts, out); }), ErrorKind::kConfig);
}

TEST(PairListTest, ResolvesRelativePaths) {
  TempDir dir;
  std::ofstream(dir / "pairs.json") << R"([{"gen": "a.json", "gt": "/abs/b.json"}])";
  const std::vector<EvalPair> pairs = LoadPairList(dir / "pairs.json");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].gen, (dir / "a.json").string());
  EXPECT_EQ(pairs[0].gt, "/abs/b.json");
  std::ofstream(dir / "bad.json") << R"({"gen": "a.json"})";
  EXPECT_EQ(ThrownKind([&] { LoadPairList(dir / "bad.json"); }), ErrorKind::kSchema);
  EXPECT_EQ(ThrownKind([&] { LoadPairList(dir / "none.json"); }), ErrorKind::kMissingFile);
}

TEST(AggregateTest, MeansSkipAbsentScores) {
  const std::vector<json> lines = {
      {{"pair", 0}, {"scores", {{"rcbd", 0.5}, {"lpsa", 1.0}, {"cpdm", nullptr}}}},
      {{"pair", 1}, {"scores", {{"rcbd", 1.0}, {"lpsa", 0.0}, {"cpdm", 0.8}}}},
      {{"pair", 2}, {"error", {{"kind", "schema"}, {"message", "x"}}}},
  };
  const json agg = AggregateReports(lines);
  EXPECT_EQ(agg["pairs"], 3);
  EXPECT_EQ(agg["evaluated"], 2);
  EXPECT_EQ(agg["failed"], 1);
  EXPECT_DOUBLE_EQ(agg["means"]["rcbd"].get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(agg["means"]["cpdm"].get<double>(), 0.8);
  EXPECT_EQ(agg["counts"]["cpdm"], 1);
  EXPECT_TRUE(agg["means"]["fphs"].is_null());
}

TEST(MergeTest, ConcatenatesAndReaggregates) {
  TempDir dir;
  const std::vector<EvalPair> pairs = WritePairs(dir, 4);
  for (int part = 0; part < 2; ++part) {
    std::ofstream out(dir / ("r" + std::to_string(part) + ".jsonl"));
    RunBatchEval({pairs[2 * part], pairs[2 * part + 1]}, BatchOptions{}, out);
  }
  std::ostringstream merged;
  const BatchSummary s = MergeReports({dir / "r0.jsonl", dir / "r1.jsonl"}, merged);
  EXPECT_EQ(s.pairs, 4u);
  EXPECT_EQ(s.failed, 1u);
  const std::vector<json> lines = Lines(merged.str());
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines.back()["aggregate"]["evaluated"], 3);

  BatchOptions other;
  other.metrics.window_w = 2;
  std::ofstream(dir / "r2.jsonl") << "";
  {
    std::ofstream out(dir / "r2.jsonl");
    RunBatchEval({pairs[0]}, other, out);
  }
  std::ostringstream sink;
  EXPECT_EQ(ThrownKind([&] { MergeReports({dir / "r0.jsonl", dir / "r2.jsonl"}, sink); }),
            ErrorKind::kConfig);
  std::ofstream(dir / "junk.jsonl") << "not json\n";
  EXPECT_EQ(ThrownKind([&] { MergeReports({dir / "junk.jsonl"}, sink); }), ErrorKind::kSchema);
}

TEST(WorkerCountTest, Precedence) {
  EXPECT_EQ(ResolveWorkerCount(3, "5", 7), 3);
  EXPECT_EQ(ResolveWorkerCount(std::nullopt, "5", 7), 5);
  EXPECT_EQ(ResolveWorkerCount(std::nullopt, nullptr, 7), 7);
  EXPECT_EQ(ResolveWorkerCount(std::nullopt, "", 7), 7);
  EXPECT_GE(ResolveWorkerCount(std::nullopt, nullptr, std::nullopt), 1);
  EXPECT_EQ(ThrownKind([] { ResolveWorkerCount(0, nullptr, std::nullopt); }), ErrorKind::kConfig);
  EXPECT_EQ(ThrownKind([] { ResolveWorkerCount(std::nullopt, "four", std::nullopt); }),
            ErrorKind::kConfig);
  EXPECT_EQ(ThrownKind([] { ResolveWorkerCount(std::nullopt, "2x", std::nullopt); }),
            ErrorKind::kConfig);
}

}  // namespace
}  // namespace wemeval

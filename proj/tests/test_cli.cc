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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"
#include "wemeval/fixture_io.h"
#include "wemeval/payload_io.h"

namespace wemeval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

int RunBinary(const std::string& binary, const std::string& args) {
  const std::string cmd = "'" + binary + "' " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int Cli(const std::string& args) { return RunBinary(WEMEVAL_CLI_PATH, args); }

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<json> JsonLines(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) out.push_back(json::parse(line));
  return out;
}

std::string Quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Default fixtures are shared by the tests below.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    ASSERT_EQ(Cli("gen-fixtures --out-dir " + Quote(dir_->path()) + " 2>/dev/null"), 0);
    std::ifstream in(*dir_ / "catalog.json");
    catalog_ = new json(json::parse(in));
  }
  static void TearDownTestSuite() {
    delete catalog_;
    delete dir_;
  }

  static fs::path Manifest(const std::string& id) { return *dir_ / id / "manifest.json"; }

  // First fixture whose chunks all carry `phase`.
  static std::string SinglePhaseId(const std::string& phase) {
    for (const json& f : (*catalog_)["fixtures"]) {
      bool all = true;
      for (const json& p : f["phases"]) all &= p == phase;
      if (all) return f["id"];
    }
    ADD_FAILURE() << "no " << phase << "-only fixture";
    return "";
  }

  static TempDir* dir_;
  static json* catalog_;
};

TempDir* CliTest::dir_ = nullptr;
json* CliTest::catalog_ = nullptr;

TEST_F(CliTest, GenFixturesDefaultCatalog) {
  const json& fixtures = (*catalog_)["fixtures"];
  EXPECT_GE(fixtures.size(), 20u);
  for (const json& f : fixtures) {
    EXPECT_EQ(f["status"], "ok");
    EXPECT_TRUE(fs::exists(Manifest(f["id"])));
  }
  EXPECT_FALSE(SinglePhaseId("Nav").empty());
  EXPECT_FALSE(SinglePhaseId("Manip").empty());
}

TEST_F(CliTest, GenFixturesRerunIsBitIdentical) {
  std::map<std::string, std::string> before;
  for (const auto& e : fs::recursive_directory_iterator(dir_->path())) {
    if (e.is_regular_file()) before[fs::relative(e.path(), dir_->path())] = Slurp(e.path());
  }
  ASSERT_EQ(Cli("gen-fixtures --out-dir " + Quote(dir_->path()) + " 2>/dev/null"), 0);
  size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir_->path())) {
    if (!e.is_regular_file()) continue;
    ++files;
    const std::string rel = fs::relative(e.path(), dir_->path());
    ASSERT_TRUE(before.count(rel)) << rel;
    EXPECT_EQ(Slurp(e.path()), before[rel]) << rel;
  }
  EXPECT_EQ(files, before.size());
}

TEST_F(CliTest, GenFixturesReportsBadConfigAndContinues) {
  TempDir out;
  json catalog = {{"fixtures", json::array()}};
  const json& first = (*catalog_)["fixtures"][0]["config"];
  catalog["fixtures"].push_back(first);
  json bad = first;
  bad["id"] = "escapes";
  bad["objects"][bad["ego_object"].get<int>()]["x"] = -50.0;
  catalog["fixtures"].push_back(bad);
  std::ofstream(out / "catalog_in.json") << catalog.dump();
  EXPECT_EQ(Cli("gen-fixtures --catalog " + Quote(out / "catalog_in.json") + " --out-dir " +
                Quote(out / "fx") + " 2>/dev/null"),
            1);
  EXPECT_TRUE(fs::exists(out / "fx" / first["id"].get<std::string>() / "manifest.json"));
  EXPECT_FALSE(fs::exists(out / "fx/escapes/manifest.json"));
  std::ifstream in(out / "fx/catalog.json");
  EXPECT_EQ(json::parse(in)["fixtures"][1]["status"], "error");
}

TEST_F(CliTest, EvalIdentityGivesPerfectScores) {
  TempDir out;
  const std::string id = (*catalog_)["fixtures"][0]["id"];
  ASSERT_EQ(Cli("eval --gen " + Quote(Manifest(id)) + " --gt " + Quote(Manifest(id)) + " -o " +
                Quote(out / "r.jsonl") + " 2>/dev/null"),
            0);
  const std::vector<json> lines = JsonLines(out / "r.jsonl");
  ASSERT_EQ(lines.size(), 3u);
  const json& cfg = lines[0]["config"];
  EXPECT_EQ(cfg["W"], 4);
  EXPECT_EQ(cfg["R"], 4);
  EXPECT_EQ(cfg["tau_cpdm"], 0.05);
  EXPECT_EQ(cfg["resample_steps"], 16);
  EXPECT_EQ(cfg["top_fraction"], 0.2);
  const json& means = lines.back()["aggregate"]["means"];
  for (const char* m : {"rcbd", "lpsa", "cisr", "pmpa", "fphs"}) {
    EXPECT_NEAR(means[m].get<double>(), 1.0, 1e-9) << m;
  }
  EXPECT_GT(means["cpdm"].get<double>(), 0.5);
}

TEST_F(CliTest, EvalFlagsOverrideConfigFile) {
  TempDir out;
  const std::string id = (*catalog_)["fixtures"][0]["id"];
  std::ofstream(out / "cfg.json") << R"({"metrics": {"W": 2, "R": 3}, "workers": 2})";
  ASSERT_EQ(Cli("eval --gen " + Quote(Manifest(id)) + " --gt " + Quote(Manifest(id)) +
                " --config " + Quote(out / "cfg.json") + " --window-w 3 -o " +
                Quote(out / "r.jsonl") + " 2>/dev/null"),
            0);
  const json cfg = JsonLines(out / "r.jsonl")[0]["config"];
  EXPECT_EQ(cfg["W"], 3);
  EXPECT_EQ(cfg["R"], 3);
}

TEST_F(CliTest, EvalUsageAndValidationErrors) {
  TempDir out;
  EXPECT_EQ(Cli("eval 2>/dev/null"), 2);
  EXPECT_EQ(Cli("eval --gen " + Quote(out / "nope.json") + " --gt " + Quote(out / "nope.json") +
                " -o " + Quote(out / "r.jsonl") + " 2>/dev/null"),
            2);
  EXPECT_EQ(Cli("bogus 2>/dev/null"), 2);
}

TEST_F(CliTest, DecomposeNavFixtureLeavesNoResidual) {
  const std::string id = SinglePhaseId("Nav");
  TempDir out;
  ASSERT_EQ(Cli("decompose-flow --flow " +
                Quote(*dir_ / id / "manifest.chunk_000.flows.wemf") + " --matches " +
                Quote(*dir_ / id / "manifest.chunk_000.matches.json") + " --out-dir " +
                Quote(out.path()) + " 2>/dev/null"),
            0);
  const std::vector<FlowField> residual = ReadFlows(out / "residual_flow.wemf");
  ASSERT_FALSE(residual.empty());
  double worst = 0.0;
  for (const FlowField& f : residual) {
    for (size_t i = 0; i < f.pixel_count(); ++i) worst = std::max(worst, f.Magnitude(i));
  }
  EXPECT_LE(worst, 1e-4);
  std::ifstream in(out / "homography.json");
  EXPECT_EQ(json::parse(in)["fits"].size(), residual.size());
}

TEST_F(CliTest, DecomposeIdentityMotion) {
  TempDir out;
  FlowField f = FlowField::Zero(16, 16);
  f.u[f.index(3, 3)] = 2.0f;
  WriteFlows(out / "f.wemf", {f});
  std::vector<PointMatch> m;
  for (int y = 0; y < 16; y += 4) {
    for (int x = 0; x < 16; x += 4) m.push_back({{x + 1.0, y + 1.0}, {x + 1.0, y + 1.0}});
  }
  SaveMatches(out / "m.json", {m});
  ASSERT_EQ(Cli("decompose-flow --flow " + Quote(out / "f.wemf") + " --matches " +
                Quote(out / "m.json") + " --out-dir " + Quote(out / "o") + " 2>/dev/null"),
            0);
  const FlowField cam = ReadFlows(out / "o/camera_flow.wemf")[0];
  const FlowField res = ReadFlows(out / "o/residual_flow.wemf")[0];
  for (size_t i = 0; i < cam.pixel_count(); ++i) {
    EXPECT_NEAR(cam.Magnitude(i), 0.0, 1e-9);
    EXPECT_NEAR(res.u[i], f.u[i], 1e-9);
    EXPECT_NEAR(res.v[i], f.v[i], 1e-9);
  }
}

TEST_F(CliTest, DecomposeTooFewMatches) {
  TempDir out;
  WriteFlows(out / "f.wemf", {FlowField::Zero(8, 8)});
  SaveMatches(out / "m.json", {{{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}}});
  EXPECT_EQ(Cli("decompose-flow --flow " + Quote(out / "f.wemf") + " --matches " +
                Quote(out / "m.json") + " --out-dir " + Quote(out / "o") + " 2>" +
                Quote(out / "err.txt")),
            2);
  EXPECT_NE(Slurp(out / "err.txt").find("4"), std::string::npos);
}

TEST_F(CliTest, ReportMergesRuns) {
  TempDir out;
  const auto& fx = (*catalog_)["fixtures"];
  for (int i = 0; i < 2; ++i) {
    const std::string id = fx[i]["id"];
    ASSERT_EQ(Cli("eval --gen " + Quote(Manifest(id)) + " --gt " + Quote(Manifest(id)) + " -o " +
                  Quote(out / ("r" + std::to_string(i) + ".jsonl")) + " 2>/dev/null"),
              0);
  }
  ASSERT_EQ(Cli("report " + Quote(out / "r0.jsonl") + " " + Quote(out / "r1.jsonl") + " -o " +
                Quote(out / "m.jsonl") + " 2>/dev/null"),
            0);
  const std::vector<json> lines = JsonLines(out / "m.jsonl");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines.back()["aggregate"]["evaluated"], 2);
}

TEST(VerifyCliTest, DefaultRunPasses) {
  TempDir out;
  EXPECT_EQ(Cli("verify-mechanisms --trials 100 -o " + Quote(out / "v.json") + " 2>/dev/null"), 0);
  std::ifstream in(out / "v.json");
  const json j = json::parse(in);
  EXPECT_EQ(j["passed"], true);
  EXPECT_EQ(j["invariants"].size(), 7u);
}

TEST(VerifyCliTest, FaultBuildFailsWithCounterexampleMask) {
  TempDir out;
  EXPECT_EQ(RunBinary(WEMEVAL_FAULTY_CLI_PATH,
                "verify-mechanisms --trials 50 -o " + Quote(out / "v.json") + " 2>/dev/null"),
            1);
  std::ifstream in(out / "v.json");
  const json j = json::parse(in);
  EXPECT_EQ(j["passed"], false);
  bool found = false;
  for (const json& inv : j["invariants"]) {
    if (inv["passed"] == false) {
      found = true;
      EXPECT_TRUE(inv["counterexample"].contains("mask")) << inv.dump();
    }
  }
  EXPECT_TRUE(found);
}

TEST(VerifyCliTest, ZeroTrialsIsUsageError) {
  EXPECT_EQ(Cli("verify-mechanisms --trials 0 >/dev/null 2>&1"), 2);
}

}  // namespace
}  // namespace wemeval

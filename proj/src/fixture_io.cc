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

#include "wemeval/fixture_io.h"

#include <cstdio>
#include <fstream>

#include "wemeval/error.h"
#include "wemeval/manifest.h"
#include "wemeval/metrics.h"
#include "wemeval/payload_io.h"

namespace wemeval {
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kMatchStride = 4;

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

void MakeDirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::kIo, "cannot create directory " + dir.string());
  }
}

json HomographyJson(const Homography& h) { return h.matrix(); }

json ExpectedOutcomes(const SimConfig& cfg) {
  bool nav = false, manip = false, switches = false;
  for (size_t k = 0; k < cfg.chunks.size(); ++k) {
    nav |= cfg.chunks[k].phase == Phase::kNav;
    manip |= cfg.chunks[k].phase == Phase::kManip;
    if (k > 0) switches |= cfg.chunks[k].phase != cfg.chunks[k - 1].phase;
  }
  json identity = json::object();
  identity["lpsa"] = 1.0;
  identity["cisr"] = 1.0;
  identity["pmpa"] = 1.0;
  identity["rcbd"] = cfg.chunks.size() >= 2 ? json(1.0) : json();
  identity["fphs"] = switches ? json(1.0) : json();
  return {{"identity_scores", identity},
          {"identity_cpdm_above", (nav && manip) ? json(0.5) : json()}};
}

}  // namespace

std::vector<SimConfig> LoadCatalog(const fs::path& path) {
  const json j = ReadJsonFile(path);
  if (!j.is_object() || !j.contains("fixtures") || !j["fixtures"].is_array()) {
    throw Error(ErrorKind::kSchema, path.string() + ": expected {\"fixtures\": [...]}");
  }
  std::vector<SimConfig> configs;
  // Entries of a written catalog wrap the config alongside its outcome.
  for (const json& c : j["fixtures"]) {
    configs.push_back(SimConfigFromJson(c.contains("config") ? c["config"] : c));
  }
  return configs;
}

json CatalogToJson(const std::vector<SimConfig>& configs) {
  json fixtures = json::array();
  for (const SimConfig& c : configs) fixtures.push_back(SimConfigToJson(c));
  return {{"fixtures", fixtures}};
}

std::vector<FixtureOutcome> WriteFixtures(const std::vector<SimConfig>& configs,
                                          const fs::path& out_dir) {
  MakeDirs(out_dir);
  std::vector<FixtureOutcome> outcomes;
  json entries = json::array();
  for (const SimConfig& cfg : configs) {
    FixtureOutcome outcome{cfg.id, ""};
    json phases = json::array();
    for (const ChunkSpec& c : cfg.chunks) phases.push_back(PhaseName(c.phase));
    json entry = {{"id", cfg.id},
                  {"seed", cfg.seed},
                  {"phases", phases},
                  {"config", SimConfigToJson(cfg)}};
    try {
      const SimOutput sim = GenerateTrajectory(cfg);
      const fs::path dir = out_dir / cfg.id;
      MakeDirs(dir);
      const fs::path manifest = SaveManifest(sim.trajectory, dir, "manifest");
      json truth_chunks = json::array();
      for (size_t k = 0; k < sim.trajectory.chunks.size(); ++k) {
        std::vector<std::vector<PointMatch>> matches;
        for (const FlowField& f : *sim.trajectory.chunks[k].flows) {
          matches.push_back(SampleMatches(f, kMatchStride));
        }
        char name[64];
        std::snprintf(name, sizeof(name), "manifest.chunk_%03zu.matches.json", k);
        SaveMatches(dir / name, matches);
        json hs = json::array();
        for (const Homography& h : sim.truth.chunks[k].homographies) {
          hs.push_back(HomographyJson(h));
        }
        truth_chunks.push_back(
            {{"phase", PhaseName(sim.truth.chunks[k].phase)}, {"homographies", hs}});
      }
      WriteJsonFile(dir / "truth.json", {{"id", cfg.id}, {"chunks", truth_chunks}});
      entry["manifest"] = (fs::path(cfg.id) / manifest.filename()).generic_string();
      entry["expected"] = ExpectedOutcomes(cfg);
      entry["status"] = "ok";
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) throw;
      outcome.error = e.what();
      entry["status"] = "error";
      entry["error"] = e.what();
    }
    entries.push_back(entry);
    outcomes.push_back(outcome);
  }
  WriteJsonFile(out_dir / "catalog.json", {{"fixtures", entries}});
  return outcomes;
}

std::vector<std::vector<PointMatch>> LoadMatches(const fs::path& path) {
  const json j = ReadJsonFile(path);
  auto bad = [&](const std::string& what) {
    return Error(ErrorKind::kSchema, path.string() + ": " + what);
  };
  if (!j.is_array()) throw bad("expected an array of match lists");
  std::vector<std::vector<PointMatch>> out;
  for (size_t f = 0; f < j.size(); ++f) {
    if (!j[f].is_array()) throw bad("entry " + std::to_string(f) + " is not a list");
    std::vector<PointMatch> list;
    for (const json& m : j[f]) {
      if (!m.is_array() || m.size() != 4) {
        throw bad("match in list " + std::to_string(f) + " is not [x, y, x', y']");
      }
      for (const json& v : m) {
        if (!v.is_number()) throw bad("non-numeric coordinate in list " + std::to_string(f));
      }
      list.push_back({{m[0].get<double>(), m[1].get<double>()},
                      {m[2].get<double>(), m[3].get<double>()}});
    }
    out.push_back(std::move(list));
  }
  return out;
}

void SaveMatches(const fs::path& path,
                 const std::vector<std::vector<PointMatch>>& matches) {
  json j = json::array();
  for (const auto& list : matches) {
    json l = json::array();
    for (const PointMatch& m : list) l.push_back({m.src.x, m.src.y, m.dst.x, m.dst.y});
    j.push_back(std::move(l));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

std::vector<HomographyFit> DecomposeFlowFile(const fs::path& flow_path,
                                             const fs::path& matches_path,
                                             const fs::path& out_dir,
                                             const RansacParams& params) {
  const std::vector<FlowField> flows = ReadFlows(flow_path);
  const std::vector<std::vector<PointMatch>> matches = LoadMatches(matches_path);
  if (matches.size() != flows.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "matches file has " + std::to_string(matches.size()) +
                    " lists for " + std::to_string(flows.size()) + " flow fields");
  }
  std::vector<HomographyFit> fits;
  std::vector<FlowField> camera, residual;
  json records = json::array();
  for (size_t i = 0; i < flows.size(); ++i) {
    if (matches[i].size() < 4) {
      throw Error(ErrorKind::kInvalidArgument,
                  "flow " + std::to_string(i) + " has " +
                      std::to_string(matches[i].size()) + " matches; need at least 4");
    }
    HomographyFit fit = EstimateHomography(matches[i], params);
    camera.push_back(RenderCameraFlow(fit.h, flows[i].width, flows[i].height));
    residual.push_back(ResidualObjectFlow(flows[i], camera.back()));
    records.push_back({{"h", HomographyJson(fit.h)},
                       {"inliers", fit.inlier_count},
                       {"matches", matches[i].size()}});
    fits.push_back(std::move(fit));
  }
  MakeDirs(out_dir);
  WriteJsonFile(out_dir / "homography.json",
                {{"threshold", params.threshold},
                 {"iterations", params.iterations},
                 {"seed", params.seed},
                 {"fits", records}});
  WriteFlows(out_dir / "camera_flow.wemf", camera);
  WriteFlows(out_dir / "residual_flow.wemf", residual);
  return fits;
}

}  // namespace wemeval

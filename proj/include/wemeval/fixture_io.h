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

#ifndef WEMEVAL_FIXTURE_IO_H_
#define WEMEVAL_FIXTURE_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wemeval/flowlab.h"
#include "wemeval/microsim.h"

namespace wemeval {

// Catalog file: {"fixtures": [<sim config>, ...]}. Entries may also be the
// {"config": <sim config>, ...} records of a catalog written by WriteFixtures.
std::vector<SimConfig> LoadCatalog(const std::filesystem::path& path);
nlohmann::json CatalogToJson(const std::vector<SimConfig>& configs);

struct FixtureOutcome {
  std::string id;
  std::string error;  // empty on success
};

// For each config writes <out>/<id>/manifest.json with its sidecars, one
// <stem>.chunk_NNN.matches.json per chunk (exact correspondences sampled
// every 4 px from the scene flow) and truth.json (per-chunk homographies).
// <out>/catalog.json lists every fixture with its phases, expected
// invariant outcomes and status. A config that fails validation is recorded
// as an error and skipped. Output bytes depend only on the configs.
std::vector<FixtureOutcome> WriteFixtures(const std::vector<SimConfig>& configs,
                                          const std::filesystem::path& out_dir);

// Matches file: one list per flow field, each entry [x, y, x', y'].
std::vector<std::vector<PointMatch>> LoadMatches(const std::filesystem::path& path);
void SaveMatches(const std::filesystem::path& path,
                 const std::vector<std::vector<PointMatch>>& matches);

// Fits one homography per flow field and writes homography.json,
// camera_flow.wemf and residual_flow.wemf into `out_dir`. Throws
// kInvalidArgument when the match lists do not line up with the flows or
// hold fewer than 4 matches, and kDegenerate when no fit exists.
std::vector<HomographyFit> DecomposeFlowFile(const std::filesystem::path& flow_path,
                                             const std::filesystem::path& matches_path,
                                             const std::filesystem::path& out_dir,
                                             const RansacParams& params);

}  // namespace wemeval

#endif  // WEMEVAL_FIXTURE_IO_H_

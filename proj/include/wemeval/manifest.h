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

#ifndef WEMEVAL_MANIFEST_H_
#define WEMEVAL_MANIFEST_H_

#include <filesystem>
#include <string>

#include "wemeval/rollout_model.h"

namespace wemeval {

// Trajectory manifest (UTF-8 JSON):
//
//   {"id": str,
//    "chunks": [{"instruction": str, "phase": "Nav"|"Manip",
//                "frames": path, "flows": path|null, "masks": path|null}]}
//
// Sidecar paths are resolved relative to the manifest's directory.
//
// Throws Error with kind kMissingFile, kSchema (message names the field) or
// kAssetMissing (message names the sidecar). The returned trajectory always
// validates cleanly; validation failures are reported as kSchema.
Trajectory LoadManifest(const std::filesystem::path& path);

// Writes `<dir>/<stem>.json` plus one sidecar per chunk payload and returns
// the manifest path. Existing files are overwritten.
std::filesystem::path SaveManifest(const Trajectory& trajectory,
                                   const std::filesystem::path& dir,
                                   const std::string& stem = "manifest");

}  // namespace wemeval

#endif  // WEMEVAL_MANIFEST_H_

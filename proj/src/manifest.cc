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

#include "wemeval/manifest.h"

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "wemeval/error.h"
#include "wemeval/payload_io.h"

namespace wemeval {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void SchemaError(const fs::path& path, const std::string& field,
                              const std::string& what) {
  throw Error(ErrorKind::kSchema,
              path.string() + ": field '" + field + "' " + what);
}

const json& Require(const json& obj, const char* key, const fs::path& path,
                    const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) SchemaError(path, prefix + key, "is missing");
  return *it;
}

std::string RequireString(const json& obj, const char* key,
                          const fs::path& path, const std::string& prefix) {
  const json& v = Require(obj, key, path, prefix);
  if (!v.is_string()) SchemaError(path, prefix + key, "must be a string");
  return v.get<std::string>();
}

// Returns the resolved sidecar path, or nullopt for JSON null / absent key.
std::optional<fs::path> OptionalAsset(const json& obj, const char* key,
                                      const fs::path& base,
                                      const fs::path& path,
                                      const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    SchemaError(path, prefix + key, "must be a path string or null");
  }
  return base / it->get<std::string>();
}

fs::path CheckAsset(const fs::path& asset, const fs::path& manifest,
                    const std::string& field) {
  if (!fs::exists(asset)) {
    throw Error(ErrorKind::kAssetMissing,
                manifest.string() + ": field '" + field +
                    "' references missing file " + asset.string());
  }
  return asset;
}

std::string SidecarName(size_t chunk, const char* kind, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "chunk_%03zu.%s.%s", chunk, kind, ext);
  return buf;
}

}  // namespace

Trajectory LoadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kMissingFile, "manifest not found: " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kSchema,
                path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) SchemaError(path, "<root>", "must be an object");

  const fs::path base = path.parent_path();
  Trajectory traj;
  traj.id = RequireString(doc, "id", path, "");
  const json& chunks = Require(doc, "chunks", path, "");
  if (!chunks.is_array()) SchemaError(path, "chunks", "must be an array");
  if (chunks.empty()) SchemaError(path, "chunks", "must not be empty");

  for (size_t k = 0; k < chunks.size(); ++k) {
    const std::string prefix = "chunks[" + std::to_string(k) + "].";
    const json& entry = chunks[k];
    if (!entry.is_object()) {
      SchemaError(path, prefix.substr(0, prefix.size() - 1), "must be an object");
    }
    Chunk chunk;
    chunk.instruction = RequireString(entry, "instruction", path, prefix);
    const std::string phase = RequireString(entry, "phase", path, prefix);
    auto parsed = ParsePhase(phase);
    if (!parsed) {
      SchemaError(path, prefix + "phase",
                  "has value \"" + phase + "\", expected \"Nav\" or \"Manip\"");
    }
    chunk.phase = *parsed;

    const fs::path frames = base / RequireString(entry, "frames", path, prefix);
    chunk.frames = ReadFrames(CheckAsset(frames, path, prefix + "frames"));
    if (auto flows = OptionalAsset(entry, "flows", base, path, prefix)) {
      chunk.flows = ReadFlows(CheckAsset(*flows, path, prefix + "flows"));
    }
    if (auto masks = OptionalAsset(entry, "masks", base, path, prefix)) {
      chunk.masks = ReadMasks(CheckAsset(*masks, path, prefix + "masks"));
    }
    traj.chunks.push_back(std::move(chunk));
  }

  ValidationReport report = ValidateTrajectory(traj);
  if (!report.ok()) {
    throw Error(ErrorKind::kSchema,
                path.string() + ": invalid trajectory: " + report.ToString());
  }
  return traj;
}

fs::path SaveManifest(const Trajectory& trajectory, const fs::path& dir,
                      const std::string& stem) {
  fs::create_directories(dir);
  json chunks = json::array();
  for (size_t k = 0; k < trajectory.chunks.size(); ++k) {
    const Chunk& chunk = trajectory.chunks[k];
    const std::string frames = stem + "." + SidecarName(k, "frames", "wemv");
    WriteFrames(dir / frames, chunk.frames);
    json entry = {{"instruction", chunk.instruction},
                  {"phase", PhaseName(chunk.phase)},
                  {"frames", frames},
                  {"flows", nullptr},
                  {"masks", nullptr}};
    if (chunk.flows) {
      const std::string flows = stem + "." + SidecarName(k, "flows", "wemf");
      WriteFlows(dir / flows, *chunk.flows);
      entry["flows"] = flows;
    }
    if (chunk.masks) {
      const std::string masks = stem + "." + SidecarName(k, "masks", "wemm");
      WriteMasks(dir / masks, *chunk.masks);
      entry["masks"] = masks;
    }
    chunks.push_back(std::move(entry));
  }
  json doc = {{"id", trajectory.id}, {"chunks", std::move(chunks)}};
  const fs::path out = dir / (stem + ".json");
  std::ofstream os(out, std::ios::trunc);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + out.string());
  os << doc.dump(2) << "\n";
  return out;
}

}  // namespace wemeval

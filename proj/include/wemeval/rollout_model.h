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

#ifndef WEMEVAL_ROLLOUT_MODEL_H_
#define WEMEVAL_ROLLOUT_MODEL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wemeval {

enum class Phase { kNav, kManip };

const char* PhaseName(Phase phase);
// Accepts exactly "Nav" or "Manip".
std::optional<Phase> ParsePhase(std::string_view name);

// Chunk length used by the full-scale rollout protocol. Fixtures are free to
// use shorter chunks; nothing in the data model depends on this value.
inline constexpr int kProtocolChunkFrames = 37;

// Normalized intensities in [0,1], row-major, channels interleaved.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  static Frame Filled(int width, int height, int channels, float value);

  size_t pixel_count() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  // Mean over channels.
  double Gray(int x, int y) const;
};

// Builds a frame from 8-bit samples (value / 255).
Frame FrameFromBytes(int width, int height, int channels,
                     const std::vector<unsigned char>& bytes);

// Dense displacement field in pixels between two consecutive frames. u is
// the horizontal (column) component, v the vertical (row) component.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;

  static FlowField Zero(int width, int height);

  size_t pixel_count() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }
  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width + x;
  }
  double Magnitude(size_t i) const;
};

// 1 = ego, 0 = world. Stored as float so that ingestion of malformed data can
// be reported by validation instead of being silently truncated.
struct WorldEgoMask {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static WorldEgoMask Filled(int width, int height, float value);

  bool is_ego(int x, int y) const {
    return data[static_cast<size_t>(y) * width + x] >= 0.5f;
  }
};

struct Chunk {
  std::vector<Frame> frames;
  std::string instruction;
  Phase phase = Phase::kNav;
  std::optional<std::vector<FlowField>> flows;   // frames.size() - 1 fields
  std::optional<std::vector<WorldEgoMask>> masks;  // frames.size() masks

  bool has_flows() const { return flows.has_value(); }
  bool has_masks() const { return masks.has_value(); }
};

struct Trajectory {
  std::string id;
  std::vector<Chunk> chunks;

  int width() const;
  int height() const;
};

struct ValidationIssue {
  int chunk = -1;  // -1 for trajectory-level issues
  std::string code;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool Contains(std::string_view code) const;
  std::string ToString() const;
};

// Collects every invariant violation; never throws.
ValidationReport ValidateTrajectory(const Trajectory& trajectory);

// 1-based indices k with phase(k) != phase(k+1), ascending.
std::vector<int> PhaseBoundaries(const Trajectory& trajectory);

}  // namespace wemeval

#endif  // WEMEVAL_ROLLOUT_MODEL_H_

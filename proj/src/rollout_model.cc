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

#include "wemeval/rollout_model.h"

#include <cmath>
#include <sstream>

#include "wemeval/error.h"

namespace wemeval {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kMissingFile: return "missing-file";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kAssetMissing: return "asset-missing";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

const char* PhaseName(Phase phase) {
  return phase == Phase::kNav ? "Nav" : "Manip";
}

std::optional<Phase> ParsePhase(std::string_view name) {
  if (name == "Nav") return Phase::kNav;
  if (name == "Manip") return Phase::kManip;
  return std::nullopt;
}

Frame Frame::Filled(int width, int height, int channels, float value) {
  Frame f;
  f.width = width;
  f.height = height;
  f.channels = channels;
  f.data.assign(static_cast<size_t>(width) * height * channels, value);
  return f;
}

double Frame::Gray(int x, int y) const {
  const size_t base = (static_cast<size_t>(y) * width + x) * channels;
  double sum = 0.0;
  for (int c = 0; c < channels; ++c) sum += data[base + c];
  return sum / channels;
}

Frame FrameFromBytes(int width, int height, int channels,
                     const std::vector<unsigned char>& bytes) {
  const size_t expected = static_cast<size_t>(width) * height * channels;
  if (bytes.size() != expected) {
    throw Error(ErrorKind::kDimensionMismatch,
                "8-bit frame has " + std::to_string(bytes.size()) +
                    " samples, expected " + std::to_string(expected));
  }
  Frame f;
  f.width = width;
  f.height = height;
  f.channels = channels;
  f.data.resize(expected);
  for (size_t i = 0; i < expected; ++i) {
    f.data[i] = static_cast<float>(bytes[i]) / 255.0f;
  }
  return f;
}

FlowField FlowField::Zero(int width, int height) {
  FlowField f;
  f.width = width;
  f.height = height;
  f.u.assign(static_cast<size_t>(width) * height, 0.0f);
  f.v.assign(static_cast<size_t>(width) * height, 0.0f);
  return f;
}

double FlowField::Magnitude(size_t i) const {
  return std::hypot(static_cast<double>(u[i]), static_cast<double>(v[i]));
}

WorldEgoMask WorldEgoMask::Filled(int width, int height, float value) {
  WorldEgoMask m;
  m.width = width;
  m.height = height;
  m.data.assign(static_cast<size_t>(width) * height, value);
  return m;
}

int Trajectory::width() const {
  for (const Chunk& c : chunks) {
    if (!c.frames.empty()) return c.frames.front().width;
  }
  return 0;
}

int Trajectory::height() const {
  for (const Chunk& c : chunks) {
    if (!c.frames.empty()) return c.frames.front().height;
  }
  return 0;
}

bool ValidationReport::Contains(std::string_view code) const {
  for (const ValidationIssue& issue : issues) {
    if (issue.code == code) return true;
  }
  return false;
}

std::string ValidationReport::ToString() const {
  std::ostringstream os;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    if (issues[i].chunk >= 0) os << "chunk " << issues[i].chunk << ": ";
    os << issues[i].code;
    if (!issues[i].detail.empty()) os << " (" << issues[i].detail << ")";
  }
  return os.str();
}

namespace {

class Collector {
 public:
  explicit Collector(ValidationReport* report) : report_(report) {}
  void Add(int chunk, std::string code, std::string detail) {
    report_->issues.push_back({chunk, std::move(code), std::move(detail)});
  }

 private:
  ValidationReport* report_;
};

template <typename T>
bool AllFinite(const std::vector<T>& values) {
  for (T v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void ValidateFrames(const Chunk& chunk, int index, int ref_w, int ref_h,
                    Collector& out) {
  for (size_t t = 0; t < chunk.frames.size(); ++t) {
    const Frame& f = chunk.frames[t];
    const std::string where = "frame " + std::to_string(t);
    if (f.channels != 1 && f.channels != 3) {
      out.Add(index, "bad channel count", where);
      continue;
    }
    if (f.width < 1 || f.height < 1 ||
        f.data.size() != f.pixel_count() * f.channels) {
      out.Add(index, "dimension mismatch", where + " payload size");
      continue;
    }
    if (f.width != ref_w || f.height != ref_h) {
      out.Add(index, "dimension mismatch", where);
    }
    if (!AllFinite(f.data)) {
      out.Add(index, "non-finite value", where);
      continue;
    }
    for (float v : f.data) {
      if (v < 0.0f || v > 1.0f) {
        out.Add(index, "value out of range", where);
        break;
      }
    }
  }
}

void ValidateFlows(const Chunk& chunk, int index, int ref_w, int ref_h,
                   Collector& out) {
  const auto& flows = *chunk.flows;
  if (flows.size() + 1 != chunk.frames.size()) {
    out.Add(index, "flow count mismatch",
            std::to_string(flows.size()) + " flows for " +
                std::to_string(chunk.frames.size()) + " frames");
  }
  for (size_t t = 0; t < flows.size(); ++t) {
    const FlowField& f = flows[t];
    const std::string where = "flow " + std::to_string(t);
    if (f.width != ref_w || f.height != ref_h ||
        f.u.size() != f.pixel_count() || f.v.size() != f.pixel_count()) {
      out.Add(index, "dimension mismatch", where);
      continue;
    }
    if (!AllFinite(f.u) || !AllFinite(f.v)) {
      out.Add(index, "non-finite value", where);
    }
  }
}

void ValidateMasks(const Chunk& chunk, int index, int ref_w, int ref_h,
                   Collector& out) {
  const auto& masks = *chunk.masks;
  if (masks.size() != chunk.frames.size()) {
    out.Add(index, "mask count mismatch",
            std::to_string(masks.size()) + " masks for " +
                std::to_string(chunk.frames.size()) + " frames");
  }
  for (size_t t = 0; t < masks.size(); ++t) {
    const WorldEgoMask& m = masks[t];
    const std::string where = "mask " + std::to_string(t);
    if (m.width != ref_w || m.height != ref_h ||
        m.data.size() != static_cast<size_t>(m.width) * m.height) {
      out.Add(index, "dimension mismatch", where);
      continue;
    }
    for (float v : m.data) {
      if (!std::isfinite(v)) {
        out.Add(index, "non-finite value", where);
        break;
      }
      if (v != 0.0f && v != 1.0f) {
        out.Add(index, "non-binary mask", where);
        break;
      }
    }
  }
}

}  // namespace

ValidationReport ValidateTrajectory(const Trajectory& trajectory) {
  ValidationReport report;
  Collector out(&report);
  if (trajectory.chunks.empty()) {
    out.Add(-1, "empty trajectory", "");
    return report;
  }
  const int ref_w = trajectory.width();
  const int ref_h = trajectory.height();
  for (size_t k = 0; k < trajectory.chunks.size(); ++k) {
    const Chunk& chunk = trajectory.chunks[k];
    const int index = static_cast<int>(k);
    if (chunk.frames.empty()) {
      out.Add(index, "empty chunk", "");
      continue;
    }
    ValidateFrames(chunk, index, ref_w, ref_h, out);
    if (chunk.flows) ValidateFlows(chunk, index, ref_w, ref_h, out);
    if (chunk.masks) ValidateMasks(chunk, index, ref_w, ref_h, out);
  }
  return report;
}

std::vector<int> PhaseBoundaries(const Trajectory& trajectory) {
  std::vector<int> boundaries;
  for (size_t k = 0; k + 1 < trajectory.chunks.size(); ++k) {
    if (trajectory.chunks[k].phase != trajectory.chunks[k + 1].phase) {
      boundaries.push_back(static_cast<int>(k) + 1);
    }
  }
  return boundaries;
}

}  // namespace wemeval

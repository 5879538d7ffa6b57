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

#include "wemeval/featurizer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "json.hpp"
#include "wemeval/error.h"

namespace wemeval {
namespace fs = std::filesystem;

double EmbeddingVector::Norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

EmbeddingVector L2Normalize(EmbeddingVector v) {
  const double n = v.Norm();
  if (n > 0.0) {
    for (double& x : v.values) x /= n;
  }
  return v;
}

std::string EmbedKey(const std::string& trajectory_id, int chunk, int first,
                     int last, const std::string& suffix) {
  std::string key = trajectory_id + "/" + std::to_string(chunk) + "/" +
                    std::to_string(first) + "-" + std::to_string(last);
  if (!suffix.empty()) key += "/" + suffix;
  return key;
}

namespace {

void CheckFrames(std::span<const Frame> frames) {
  if (frames.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot embed an empty frame list");
  }
  for (const Frame& f : frames) {
    if (f.width != frames[0].width || f.height != frames[0].height ||
        f.channels != frames[0].channels) {
      throw Error(ErrorKind::kInvalidArgument,
                  "frames passed to the embedder differ in shape");
    }
  }
}

// Half-open cell bounds along one axis. Every cell covers at least one pixel,
// so images narrower than the grid reuse edge pixels.
std::pair<int, int> CellRange(int index, int cells, int extent) {
  int lo = static_cast<int>(static_cast<int64_t>(index) * extent / cells);
  int hi = static_cast<int>(static_cast<int64_t>(index + 1) * extent / cells);
  lo = std::min(lo, extent - 1);
  hi = std::max(hi, lo + 1);
  return {lo, hi};
}

}  // namespace

ReferenceEmbedder::ReferenceEmbedder(int grid) : grid_(grid) {
  if (grid < 1) {
    throw Error(ErrorKind::kInvalidArgument, "embedder grid must be >= 1");
  }
}

EmbeddingVector ReferenceEmbedder::RawFeatures(
    std::span<const Frame> frames) const {
  CheckFrames(frames);
  const size_t cells = static_cast<size_t>(grid_) * grid_;
  EmbeddingVector out;
  out.values.assign(2 * cells, 0.0);
  for (const Frame& f : frames) {
    for (int gy = 0; gy < grid_; ++gy) {
      const auto [y0, y1] = CellRange(gy, grid_, f.height);
      for (int gx = 0; gx < grid_; ++gx) {
        const auto [x0, x1] = CellRange(gx, grid_, f.width);
        double sum = 0.0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) sum += f.Gray(x, y);
        }
        const double n = static_cast<double>((y1 - y0) * (x1 - x0));
        const double mean = sum / n;
        double var = 0.0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            const double d = f.Gray(x, y) - mean;
            var += d * d;
          }
        }
        const size_t c = static_cast<size_t>(gy) * grid_ + gx;
        out.values[c] += mean;
        out.values[cells + c] += std::sqrt(var / n);
      }
    }
  }
  for (double& v : out.values) v /= static_cast<double>(frames.size());
  return out;
}

EmbeddingVector ReferenceEmbedder::Embed(std::span<const Frame> frames,
                                         const std::string&) const {
  return L2Normalize(RawFeatures(frames));
}

ExternalEmbedder::ExternalEmbedder(const fs::path& index) {
  std::ifstream in(index);
  if (!in) {
    throw Error(ErrorKind::kMissingFile,
                "embedding index not found: " + index.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kSchema, index.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kSchema, index.string() + ": root must be an object");
  }
  std::unordered_map<std::string, std::vector<char>> blobs;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& entry = it.value();
    if (!entry.is_object() || !entry.contains("dim") ||
        !entry.contains("file") || !entry.contains("offset")) {
      throw Error(ErrorKind::kSchema, index.string() + ": entry '" + it.key() +
                                          "' needs dim, file and offset");
    }
    const int64_t dim = entry["dim"].get<int64_t>();
    const int64_t offset = entry["offset"].get<int64_t>();
    const std::string file = entry["file"].get<std::string>();
    if (dim < 1 || offset < 0) {
      throw Error(ErrorKind::kSchema,
                  index.string() + ": entry '" + it.key() + "' has bad dim/offset");
    }
    auto blob = blobs.find(file);
    if (blob == blobs.end()) {
      const fs::path path = index.parent_path() / file;
      std::ifstream bin(path, std::ios::binary);
      if (!bin) {
        throw Error(ErrorKind::kAssetMissing,
                    index.string() + ": embedding blob missing: " + path.string());
      }
      blob = blobs.emplace(file, std::vector<char>(
                                     std::istreambuf_iterator<char>(bin),
                                     std::istreambuf_iterator<char>())).first;
    }
    const std::vector<char>& bytes = blob->second;
    if (static_cast<uint64_t>(offset) + 4 * static_cast<uint64_t>(dim) >
        bytes.size()) {
      throw Error(ErrorKind::kSchema,
                  index.string() + ": entry '" + it.key() + "' overruns " + file);
    }
    std::vector<double> values(dim);
    for (int64_t i = 0; i < dim; ++i) {
      uint32_t word = 0;
      for (int b = 0; b < 4; ++b) {
        word |= static_cast<uint32_t>(
                    static_cast<unsigned char>(bytes[offset + 4 * i + b]))
                << (8 * b);
      }
      const float f = std::bit_cast<float>(word);
      if (!std::isfinite(f)) {
        throw Error(ErrorKind::kSchema,
                    index.string() + ": entry '" + it.key() + "' is not finite");
      }
      values[i] = f;
    }
    vectors_.emplace(it.key(), std::move(values));
  }
}

EmbeddingVector ExternalEmbedder::Embed(std::span<const Frame> frames,
                                        const std::string& key) const {
  CheckFrames(frames);
  auto it = vectors_.find(key);
  if (it == vectors_.end()) {
    throw Error(ErrorKind::kAssetMissing, "no external embedding for key '" +
                                              key + "'");
  }
  return L2Normalize(EmbeddingVector{it->second});
}

std::shared_ptr<const Embedder> MakeEmbedder(const EmbedderSpec& spec) {
  if (spec.kind == EmbedderSpec::Kind::kReference) {
    return std::make_shared<ReferenceEmbedder>(spec.grid);
  }
  return std::make_shared<ExternalEmbedder>(spec.source);
}

EmbeddingVector EmbedFrames(std::span<const Frame> frames,
                            const EmbedderSpec& spec, const std::string& key) {
  return MakeEmbedder(spec)->Embed(frames, key);
}

double CosineSimilarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "cosine of vectors with dims " + std::to_string(a.dim()) +
                    " and " + std::to_string(b.dim()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.dim(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double PerceptualDistance(const Frame& a, const Frame& b,
                          const Embedder& embedder, const std::string& key_a,
                          const std::string& key_b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw Error(ErrorKind::kDimensionMismatch,
                "perceptual distance between frames of different shape");
  }
  const EmbeddingVector ea = embedder.Embed(std::span(&a, 1), key_a);
  const EmbeddingVector eb = embedder.Embed(std::span(&b, 1), key_b);
  if (ea.Norm() == 0.0 && eb.Norm() == 0.0) return 0.0;
  return std::clamp(1.0 - CosineSimilarity(ea, eb), 0.0, 2.0);
}

double PerceptualDistance(const Frame& a, const Frame& b,
                          const EmbedderSpec& spec) {
  return PerceptualDistance(a, b, *MakeEmbedder(spec));
}

Frame CropFrame(const Frame& frame, int x0, int y0, int x1, int y1) {
  if (x0 < 0 || y0 < 0 || x1 > frame.width || y1 > frame.height || x0 >= x1 ||
      y0 >= y1) {
    throw Error(ErrorKind::kOutOfRange, "crop rectangle outside frame");
  }
  Frame out = Frame::Filled(x1 - x0, y1 - y0, frame.channels, 0.0f);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < frame.channels; ++c) {
        out.at(x - x0, y - y0, c) = frame.at(x, y, c);
      }
    }
  }
  return out;
}

}  // namespace wemeval

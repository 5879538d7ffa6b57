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

#ifndef WEMEVAL_FEATURIZER_H_
#define WEMEVAL_FEATURIZER_H_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wemeval/rollout_model.h"

namespace wemeval {

struct EmbeddingVector {
  std::vector<double> values;

  size_t dim() const { return values.size(); }
  double Norm() const;
};

// Unit-length copy; a zero vector stays zero.
EmbeddingVector L2Normalize(EmbeddingVector v);

struct EmbedderSpec {
  enum class Kind { kReference, kExternalFile };

  Kind kind = Kind::kReference;
  int grid = 8;                   // cells per side, reference only
  std::filesystem::path source;   // JSON index, external only
};

// Content key handed to embedders that look vectors up instead of computing
// them: "<trajectory-id>/<chunk>/<first>-<last>" with an optional suffix.
std::string EmbedKey(const std::string& trajectory_id, int chunk, int first,
                     int last, const std::string& suffix = "");

class Embedder {
 public:
  virtual ~Embedder() = default;
  // Returns an L2-normalized vector. Throws kInvalidArgument on an empty
  // frame list or mixed frame shapes.
  virtual EmbeddingVector Embed(std::span<const Frame> frames,
                                const std::string& key) const = 0;
};

// Grid statistics: grayscale (channel mean), grid x grid cells, per-cell mean
// then per-cell standard deviation, averaged over frames, 2*grid^2 values.
class ReferenceEmbedder final : public Embedder {
 public:
  explicit ReferenceEmbedder(int grid = 8);

  EmbeddingVector Embed(std::span<const Frame> frames,
                        const std::string& key = "") const override;
  // Pre-normalization statistics.
  EmbeddingVector RawFeatures(std::span<const Frame> frames) const;
  int grid() const { return grid_; }

 private:
  int grid_;
};

// Vectors computed offline by any encoder. The index is
//   {"<key>": {"dim": int, "file": path, "offset": int}}
// where `offset` is a byte offset into `file` (resolved relative to the
// index) holding `dim` little-endian f32 values. Loaded once, read-only.
class ExternalEmbedder final : public Embedder {
 public:
  explicit ExternalEmbedder(const std::filesystem::path& index);

  EmbeddingVector Embed(std::span<const Frame> frames,
                        const std::string& key) const override;
  size_t size() const { return vectors_.size(); }

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

std::shared_ptr<const Embedder> MakeEmbedder(const EmbedderSpec& spec);

EmbeddingVector EmbedFrames(std::span<const Frame> frames,
                            const EmbedderSpec& spec,
                            const std::string& key = "");

// <a,b> / (|a||b|), 0 if either norm is 0. Throws kDimensionMismatch.
double CosineSimilarity(const EmbeddingVector& a, const EmbeddingVector& b);

// 1 - cos(embed(a), embed(b)) clamped to [0,2]; 0 when both embeddings are
// zero.
double PerceptualDistance(const Frame& a, const Frame& b,
                          const Embedder& embedder,
                          const std::string& key_a = "",
                          const std::string& key_b = "");
double PerceptualDistance(const Frame& a, const Frame& b,
                          const EmbedderSpec& spec);

// Copy of the rectangle [x0, x1) x [y0, y1).
Frame CropFrame(const Frame& frame, int x0, int y0, int x1, int y1);

}  // namespace wemeval

#endif  // WEMEVAL_FEATURIZER_H_

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

#ifndef WEMEVAL_METRICS_H_
#define WEMEVAL_METRICS_H_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wemeval/featurizer.h"
#include "wemeval/rollout_model.h"

namespace wemeval {

struct MetricConfig {
  enum class DeltaReduction { kMean, kSum };

  int window_w = 4;           // LPSA: trailing frames per chunk
  int window_r = 4;           // FPHS: frames on each side of a phase switch
  double tau_cpdm = 0.05;
  double tau_pmpa = 0.5;      // chosen default, see README
  int resample_steps = 16;
  double top_fraction = 0.2;
  double eps = 1e-6;
  DeltaReduction pmpa_delta = DeltaReduction::kMean;
  EmbedderSpec embedder;

  // Throws kConfig on non-positive values or top_fraction outside (0,1].
  void Validate() const;
};

nlohmann::json ConfigToJson(const MetricConfig& cfg);
// Applies the keys present in `overrides` on top of `base`.
MetricConfig ConfigFromJson(const nlohmann::json& overrides,
                            MetricConfig base = {});

inline constexpr std::array<const char*, 6> kMetricNames = {
    "rcbd", "lpsa", "cisr", "pmpa", "cpdm", "fphs"};

// One metric's outcome. `score` is absent when the metric does not apply;
// `notes` then says why. `parts` holds the per-chunk or per-boundary values
// the score was reduced from.
struct MetricResult {
  std::optional<double> score;
  std::vector<double> parts;
  std::vector<std::string> notes;
};

struct MetricReport {
  std::string trajectory;
  MetricResult rcbd, lpsa, cisr, pmpa, cpdm, fphs;

  const MetricResult& Get(std::string_view name) const;
  std::vector<std::string> Notes() const;
};

nlohmann::json ReportToJson(const MetricReport& report);

// exp(-|log(x/y)|) with both arguments clamped below by eps.
double SymmetricMatch(double x, double y, double eps = 1e-6);

double Sigmoid(double x);

// Chunk-boundary appearance/motion gap match, mean over K-1 boundaries.
MetricResult ComputeRcbd(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder);
// Linearly weighted cosine of the trailing W-frame windows.
MetricResult ComputeLpsa(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder);
// Mean reciprocal rank of gt chunk k among all gt chunks for gen chunk k;
// ties count against the match.
MetricResult ComputeCisr(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder);
MetricResult ComputePmpa(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg);
MetricResult ComputeCpdm(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder);
MetricResult ComputeFphs(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder);

// Change region used by FPHS: axis-aligned bounding box [x0,x1) x [y0,y1)
// of the pixels whose accumulated gt flow magnitude is in the top
// `top_fraction` (ties at the cutoff included).
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
PixelBox ChangeRegion(const std::vector<const FlowField*>& flows, int width,
                      int height, double top_fraction);

// Runs every applicable metric. Throws kInvalidArgument on a chunk-count
// mismatch, kSchema when either trajectory fails validation and
// kDimensionMismatch when frame sizes differ. Uses `embedder` when given,
// otherwise builds one from cfg.embedder.
MetricReport EvaluateAll(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg,
                         const Embedder* embedder = nullptr);

}  // namespace wemeval

#endif  // WEMEVAL_METRICS_H_

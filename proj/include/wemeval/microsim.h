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

#ifndef WEMEVAL_MICROSIM_H_
#define WEMEVAL_MICROSIM_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "wemeval/flowlab.h"
#include "wemeval/rollout_model.h"

namespace wemeval {

// Per-step image-space camera motion: zoom and rotation about the frame
// center, then a translation. Always a similarity.
struct CameraMotion {
  double tx = 0.0;
  double ty = 0.0;
  double rotation_deg = 0.0;
  double zoom = 1.0;
};

// Per-step image-space velocity of the designated ego object.
struct ObjectMotion {
  double vx = 0.0;
  double vy = 0.0;
};

struct ChunkSpec {
  Phase phase = Phase::kNav;
  int steps = 6;  // frames in the chunk
  CameraMotion camera;  // used by Nav chunks
  ObjectMotion object;  // used by Manip chunks
  std::string instruction;
};

enum class ShapeKind { kRect, kDisc };

struct SimObject {
  ShapeKind shape = ShapeKind::kRect;
  double size = 4.0;      // half side / radius, pixels at the initial view
  float intensity = 0.9f;
  double x = 0.0;         // initial image-space center
  double y = 0.0;
};

struct SimConfig {
  std::string id = "fixture";
  uint64_t seed = 0;
  int width = 64;
  int height = 64;
  std::vector<ChunkSpec> chunks;
  std::vector<SimObject> objects;
  int ego_object = 0;  // index into objects; moved by Manip chunks
  double noise_sigma = 0.0;
};

// Throws kConfig describing the first problem, including the ego object
// leaving the frame during a Manip chunk.
void ValidateSimConfig(const SimConfig& cfg);

struct ChunkTruth {
  Phase phase = Phase::kNav;
  std::vector<WorldEgoMask> masks;          // one per frame
  std::vector<FlowField> camera_flows;      // one per frame pair
  std::vector<FlowField> object_flows;      // one per frame pair
  std::vector<Homography> homographies;     // one per frame pair
};

struct GroundTruth {
  std::vector<ChunkTruth> chunks;
};

struct SimOutput {
  Trajectory trajectory;  // flows = camera + object, masks attached
  GroundTruth truth;
};

// Nav chunks move the camera over a static value-noise scene; Manip chunks
// hold the camera and translate the ego object. A gripper glyph at the bottom
// of the frame is always ego-labeled and, being rigidly attached to the
// camera, is excluded from the recorded scene flow.
SimOutput GenerateTrajectory(const SimConfig& cfg);

// Grid-sampled correspondences src -> src + flow(src).
std::vector<PointMatch> SampleMatches(const FlowField& flow, int stride);

// Replaces round(fraction * n) matches with gross outliers (destination moved
// by 8-20 px in a random direction). Returns the corrupted indices.
std::vector<size_t> InjectOutliers(std::vector<PointMatch>& matches,
                                   double fraction, std::mt19937_64& rng);

enum class PerturbKind { kFrameNoise, kChunkShuffle, kPhaseSwap, kBoundarySmooth };

const char* PerturbKindName(PerturbKind kind);
std::optional<PerturbKind> ParsePerturbKind(std::string_view name);

// Corrupted copy of a rollout. magnitude 0 returns an identical copy.
//   frame-noise: clamped Gaussian noise with sigma = magnitude
//   chunk-shuffle: chunk order permuted by a derangement
//   phase-swap: one chunk's phase label flipped
//   boundary-smooth: the frames on either side of one boundary are blended
//     toward each other so their difference shrinks by (1 - magnitude),
//     magnitude in [0, 1]
// Throws kInvalidArgument for negative magnitudes, blend > 1, or shuffling /
// smoothing a single-chunk rollout.
Trajectory PerturbRollout(const Trajectory& traj, PerturbKind kind,
                          double magnitude, uint64_t seed);

// The chunk boundary (0-based, between k and k + 1) that boundary-smooth
// picks for `seed` on a K-chunk rollout.
int SmoothedBoundary(int chunk_count, uint64_t seed);

// Two-phase fixture: chunks alternate Nav/Manip starting with Nav.
SimConfig MixedPhaseConfig(uint64_t seed, int width = 64, int height = 64,
                           int steps = 6, int chunks = 4);
SimConfig SinglePhaseConfig(uint64_t seed, Phase phase, int width = 64,
                            int height = 64, int steps = 6, int chunks = 3);

struct RandomConfigBounds {
  int min_chunks = 1, max_chunks = 4;
  int min_steps = 2, max_steps = 6;
  int min_size = 16, max_size = 32;
};

// Random but valid config (motion is scaled down until the ego object stays
// in frame).
SimConfig RandomSimConfig(uint64_t seed, const RandomConfigBounds& bounds = {});

// Full-length chunks of the standard rollout protocol.
SimConfig ProtocolConfig(uint64_t seed);

nlohmann::json SimConfigToJson(const SimConfig& cfg);
SimConfig SimConfigFromJson(const nlohmann::json& j);

// Built-in catalog: mixed-phase, Nav-only and Manip-only fixtures.
std::vector<SimConfig> DefaultCatalog();

}  // namespace wemeval

#endif  // WEMEVAL_MICROSIM_H_

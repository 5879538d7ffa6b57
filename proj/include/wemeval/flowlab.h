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

#ifndef WEMEVAL_FLOWLAB_H_
#define WEMEVAL_FLOWLAB_H_

#include <array>
#include <cstdint>
#include <vector>

#include "wemeval/rollout_model.h"

namespace wemeval {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// A correspondence from a pixel in frame t to its position in frame t+1.
struct PointMatch {
  Point2 src;
  Point2 dst;
};

// 3x3 projective transform, row-major, normalized so that h[8] == 1.
class Homography {
 public:
  // Identity.
  Homography();
  // Normalizes by m[8]. Throws kDegenerate if m[8] is ~0 or the matrix is
  // singular (|det| <= 1e-9 after normalization).
  explicit Homography(const std::array<double, 9>& m);

  static Homography Translation(double tx, double ty);
  static Homography Scale(double s);

  const std::array<double, 9>& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_[row * 3 + col]; }
  double Determinant() const;

  // Projective image of p. Throws kDegenerate when the homogeneous
  // coordinate vanishes.
  Point2 Project(Point2 p) const;

  Homography Inverse() const;
  // (this * other): apply `other` first.
  Homography Compose(const Homography& other) const;

 private:
  std::array<double, 9> m_;
};

struct RansacParams {
  double threshold = 1.0;  // pixels
  int iterations = 500;
  uint64_t seed = 0;
};

struct HomographyFit {
  Homography h;
  std::vector<bool> inliers;
  int inlier_count = 0;
};

double ReprojectionError(const Homography& h, const PointMatch& match);

// Normalized DLT least-squares fit over all given matches (>= 4).
Homography FitHomographyDlt(const std::vector<PointMatch>& matches);

// Seeded RANSAC over 4-point hypotheses, refit on the winning inlier set.
// Throws kInvalidArgument for < 4 matches or bad params and kDegenerate when
// every sampled hypothesis was degenerate.
HomographyFit EstimateHomography(const std::vector<PointMatch>& matches,
                                 const RansacParams& params = {});

// Flow at (x, y) = Project(h, (x, y)) - (x, y); pixel centers at integer
// coordinates.
FlowField RenderCameraFlow(const Homography& h, int width, int height);

FlowField ResidualObjectFlow(const FlowField& flow, const FlowField& camera);

struct FlowStats {
  double median = 0.0;
  double top_mean = 0.0;
  double entropy = 0.0;  // in [0,1]
};

inline constexpr int kEntropyBins = 16;

// median: mean of the two central values for even counts. top_mean: mean of
// the ceil(top_fraction * N) largest magnitudes. entropy: Shannon entropy of
// a `bins`-bin histogram over [0, max] divided by log(bins).
FlowStats ComputeFlowStats(const FlowField& flow, double top_fraction = 0.2,
                           int bins = kEntropyBins);

// Number of elements making up the top `fraction` of `n` (at least 1).
size_t TopCount(size_t n, double fraction);

using ProfileStep = std::array<double, 4>;

struct MotionProfile {
  std::vector<ProfileStep> steps;
};

inline constexpr double kProfileEps = 1e-6;
inline constexpr double kProfileLogRatioCap = 20.0;

ProfileStep ProfileStepFromStats(const FlowStats& stats, double diagonal);

// One step per flow field. Throws kInvalidArgument if the chunk has fewer
// than two frames or carries no flows.
MotionProfile ComputeMotionProfile(const Chunk& chunk,
                                   double top_fraction = 0.2);

// Component-wise linear interpolation at `target` equally spaced positions
// over [0, len-1]. A single-step profile is replicated.
MotionProfile ResampleProfile(const MotionProfile& profile, int target = 16);

}  // namespace wemeval

#endif  // WEMEVAL_FLOWLAB_H_

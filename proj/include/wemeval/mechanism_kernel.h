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

#ifndef WEMEVAL_MECHANISM_KERNEL_H_
#define WEMEVAL_MECHANISM_KERNEL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wemeval/rollout_model.h"

namespace wemeval {

// ---------------------------------------------------------------------------
// State-predictor input layout and role-conditioned attention.
// ---------------------------------------------------------------------------

enum class SegmentKind {
  kInitialFrame,
  kInstruction,
  kVideoChunk,
  kWorldQuery,
  kEgoQuery,
};

const char* SegmentKindName(SegmentKind kind);

struct Segment {
  SegmentKind kind;
  int turn = 0;    // 1-based for Instruction/VideoChunk, 0 otherwise
  int length = 1;  // tokens
};

// Interleaved history: InitialFrame, (Instruction_i, VideoChunk_i) for each
// completed turn i, the current Instruction_k, then the two query groups.
class SequenceLayout {
 public:
  explicit SequenceLayout(std::vector<Segment> segments);

  // `turn_lengths[i]` = {instruction tokens, video tokens} for completed
  // turn i + 1.
  static SequenceLayout Interleaved(
      int initial_tokens, const std::vector<std::pair<int, int>>& turn_lengths,
      int current_instruction_tokens, int world_queries, int ego_queries);

  const std::vector<Segment>& segments() const { return segments_; }
  int total_tokens() const { return total_; }
  // Index of the segment holding each token position.
  const std::vector<int>& segment_of() const { return segment_of_; }
  int current_turn() const { return current_turn_; }
  int completed_turns() const { return current_turn_ - 1; }

 private:
  std::vector<Segment> segments_;
  std::vector<int> segment_of_;
  int total_ = 0;
  int current_turn_ = 0;
};

// Throws kInvalidArgument describing the first violated layout rule.
void ValidateLayout(const std::vector<Segment>& segments);

class AttentionMask {
 public:
  AttentionMask(int rows, int cols)
      : rows_(rows), cols_(cols), allowed_(static_cast<size_t>(rows) * cols, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool allowed(int row, int col) const {
    return allowed_[static_cast<size_t>(row) * cols_ + col] != 0;
  }
  void set(int row, int col, bool value) {
    allowed_[static_cast<size_t>(row) * cols_ + col] = value ? 1 : 0;
  }

 private:
  int rows_;
  int cols_;
  std::vector<uint8_t> allowed_;
};

struct RcaOptions {
  int ego_window_turns = 1;  // K most recent completed turns
  // When the window reaches past the first turn, ego queries also see the
  // initial frame.
  bool ego_sees_initial_when_window_exceeds_history = true;
};

// World queries: initial frame, every video chunk, past instructions and the
// world queries. Ego queries: ego queries, the current instruction and the
// last K completed turns. History rows are causal and never see queries.
AttentionMask BuildRcaMask(const SequenceLayout& layout, const RcaOptions& opts);

struct QueryBudget {
  int world = 0;
  int ego = 0;
  int total() const { return world + ego; }
};

// Throws kOutOfRange unless 1 <= world < total.
QueryBudget AllocateQueries(int total, int world);

// ---------------------------------------------------------------------------
// Mask-driven routing between world and ego experts.
// ---------------------------------------------------------------------------

// Binary token grid, (t, h, w) row-major. 1 = ego.
struct TokenMask {
  int t = 1;
  int h = 0;
  int w = 0;
  std::vector<uint8_t> ego;

  size_t size() const { return ego.size(); }
  size_t index(int ti, int y, int x) const {
    return (static_cast<size_t>(ti) * h + y) * w + x;
  }
};

// Pools each pixel mask onto an h x w token grid. Cells are
// floor(H/h) x floor(W/w) pixels (remainder cropped at the bottom/right); a
// token is ego when ego occupancy >= 0.5.
TokenMask PoolMaskToTokens(const WorldEgoMask& mask, int grid_h, int grid_w);
TokenMask PoolMasksToTokens(const std::vector<WorldEgoMask>& masks, int grid_h,
                            int grid_w);

struct RoutePlan {
  int t = 1, h = 0, w = 0;
  int radius = 0;
  std::vector<uint8_t> ego_base;     // the routing mask itself
  std::vector<uint8_t> world_active;  // world base dilated by `radius`
  std::vector<uint8_t> ego_active;    // ego base dilated by `radius`

  size_t size() const { return ego_base.size(); }
  std::vector<size_t> WorldBase() const;
  std::vector<size_t> EgoBase() const;
  std::vector<size_t> WorldActive() const;
  std::vector<size_t> EgoActive() const;
};

// Base sets partition the grid; each active set is its base set dilated by a
// Chebyshev radius inside every frame (no temporal dilation).
RoutePlan RouteTokens(const TokenMask& mask, int radius);

// Per-token channel rows, n x d.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(Eigen::MatrixXd values);
  StateVector(int n, int d, double fill = 0.0);

  int n() const { return static_cast<int>(values_.rows()); }
  int d() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  Eigen::RowVectorXd MeanPool() const;

 private:
  Eigen::MatrixXd values_;
};

// Output of one expert over its active token set; row i belongs to
// tokens[i].
struct ExpertOutput {
  std::vector<size_t> tokens;
  Eigen::MatrixXd values;
};

struct Dispatched {
  ExpertOutput world;
  ExpertOutput ego;
};

// Gathers each expert's active token rows from the full sequence.
Dispatched DispatchTokens(const RoutePlan& plan, const StateVector& input);

// Token i takes the ego output if the base mask marks it ego, otherwise the
// world output. Throws kInvalidArgument if an expert output misses a token of
// its active set or the outputs disagree in width.
StateVector Unroute(const RoutePlan& plan, const ExpertOutput& world_out,
                    const ExpertOutput& ego_out);

// ---------------------------------------------------------------------------
// Soft fusion and gated world-state update.
// ---------------------------------------------------------------------------

// alpha_i = sigmoid((tau - mag_i) / delta). Throws kInvalidArgument if
// delta <= 0 or an input is not finite.
std::vector<double> FlowToAlpha(const std::vector<double>& magnitudes,
                                double tau, double delta);

// alpha_i * world_i + (1 - alpha_i) * ego_i per token.
StateVector SoftFuse(const std::vector<double>& alpha, const StateVector& world,
                     const StateVector& ego);

struct GateParams {
  Eigen::MatrixXd reset_prev, reset_proposal, reset_ego;
  Eigen::RowVectorXd reset_bias;
  Eigen::MatrixXd keep_prev, keep_proposal, keep_ego;
  Eigen::RowVectorXd keep_bias;
  Eigen::MatrixXd cand_prev, cand_proposal;
  Eigen::RowVectorXd cand_bias;

  static GateParams Zero(int d);
  // Entries uniform in [-scale, scale].
  static GateParams Random(int d, std::mt19937_64& rng, double scale = 1.0);
  int d() const { return static_cast<int>(keep_bias.size()); }
};

struct GruStep {
  StateVector output;
  Eigen::MatrixXd keep_gate;
  Eigen::MatrixXd reset_gate;
  Eigen::MatrixXd candidate;
};

// R = sigmoid(prev Wr1 + proposal Wr2 + ego Wr3 + br)
// C = tanh((R . prev) Wc1 + proposal Wc2 + bc)
// G = sigmoid(prev Wg1 + proposal Wg2 + ego Wg3 + bg)
// out = G . prev + (1 - G) . C
GruStep GruWorldUpdateDetailed(const StateVector& prev,
                               const StateVector& proposal,
                               const Eigen::RowVectorXd& ego_summary,
                               const GateParams& params);
StateVector GruWorldUpdate(const StateVector& prev, const StateVector& proposal,
                           const Eigen::RowVectorXd& ego_summary,
                           const GateParams& params);

// ---------------------------------------------------------------------------
// Training-side scalars.
// ---------------------------------------------------------------------------

inline constexpr double kMaskLossEps = 1e-7;

struct MaskLoss {
  double bce = 0.0;
  double dice = 0.0;
  double total = 0.0;
};

// Class-balanced BCE (w1 = N/(2 N1), w0 = N/(2 N0), an empty class weighs 0)
// plus Dice. Predictions are clamped to [eps, 1 - eps]. Dice is 0 when the
// ground truth is empty and the prediction sits at the clamp floor.
MaskLoss BceDiceLoss(const std::vector<double>& pred,
                     const std::vector<uint8_t>& gt);

// L = flow + lambda * mask.
double TotalLoss(double flow_loss, const MaskLoss& mask, double lambda);

inline constexpr double kDefaultMaskLambda = 0.3;
inline constexpr double kAnnealFloorFraction = 0.2;

enum class AnnealSchedule { kLinear, kCosine };

// Decays lambda0 to 0.2 * lambda0 over [0, total_steps]. Throws kOutOfRange
// for step outside the range or total_steps < 1.
double AnnealLambda(int step, int total_steps, double lambda0,
                    AnnealSchedule schedule = AnnealSchedule::kLinear);

// Strips the trailing run of tokens (split on '_' and whitespace) that are at
// least four letters long and contain only consonants.
std::string SanitizeIntent(std::string_view label);

}  // namespace wemeval

#endif  // WEMEVAL_MECHANISM_KERNEL_H_

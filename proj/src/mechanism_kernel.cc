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

#include "wemeval/mechanism_kernel.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "wemeval/error.h"

namespace wemeval {

const char* SegmentKindName(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kInitialFrame: return "InitialFrame";
    case SegmentKind::kInstruction: return "Instruction";
    case SegmentKind::kVideoChunk: return "VideoChunk";
    case SegmentKind::kWorldQuery: return "WorldQuery";
    case SegmentKind::kEgoQuery: return "EgoQuery";
  }
  return "?";
}

void ValidateLayout(const std::vector<Segment>& segments) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidArgument, "malformed layout: " + what);
  };
  if (segments.size() < 4) fail("needs initial frame, instruction and two query groups");
  for (const Segment& s : segments) {
    if (s.length < 1) fail("segment lengths must be >= 1");
  }
  if (segments.front().kind != SegmentKind::kInitialFrame) {
    fail("first segment must be the initial frame");
  }
  const SegmentKind a = segments[segments.size() - 2].kind;
  const SegmentKind b = segments.back().kind;
  const bool queries_last =
      (a == SegmentKind::kWorldQuery && b == SegmentKind::kEgoQuery) ||
      (a == SegmentKind::kEgoQuery && b == SegmentKind::kWorldQuery);
  if (!queries_last) fail("the last two segments must be the two query groups");

  // History between them: I1 V1 I2 V2 ... Ik.
  int expected_turn = 1;
  bool expect_instruction = true;
  for (size_t i = 1; i + 2 < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (expect_instruction) {
      if (s.kind != SegmentKind::kInstruction) {
        fail("expected Instruction at segment " + std::to_string(i));
      }
    } else if (s.kind != SegmentKind::kVideoChunk) {
      fail("expected VideoChunk at segment " + std::to_string(i));
    }
    if (s.turn != expected_turn) {
      fail("segment " + std::to_string(i) + " has turn " +
           std::to_string(s.turn) + ", expected " + std::to_string(expected_turn));
    }
    if (!expect_instruction) ++expected_turn;
    expect_instruction = !expect_instruction;
  }
  if (expect_instruction) fail("history must end with the current instruction");
}

SequenceLayout::SequenceLayout(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  ValidateLayout(segments_);
  for (size_t s = 0; s < segments_.size(); ++s) {
    total_ += segments_[s].length;
    segment_of_.insert(segment_of_.end(), segments_[s].length,
                       static_cast<int>(s));
    if (segments_[s].kind == SegmentKind::kInstruction) {
      current_turn_ = std::max(current_turn_, segments_[s].turn);
    }
  }
}

SequenceLayout SequenceLayout::Interleaved(
    int initial_tokens, const std::vector<std::pair<int, int>>& turn_lengths,
    int current_instruction_tokens, int world_queries, int ego_queries) {
  std::vector<Segment> segs;
  segs.push_back({SegmentKind::kInitialFrame, 0, initial_tokens});
  int turn = 1;
  for (const auto& [instr, video] : turn_lengths) {
    segs.push_back({SegmentKind::kInstruction, turn, instr});
    segs.push_back({SegmentKind::kVideoChunk, turn, video});
    ++turn;
  }
  segs.push_back({SegmentKind::kInstruction, turn, current_instruction_tokens});
  segs.push_back({SegmentKind::kWorldQuery, 0, world_queries});
  segs.push_back({SegmentKind::kEgoQuery, 0, ego_queries});
  return SequenceLayout(std::move(segs));
}

namespace {

bool IsQuery(SegmentKind k) {
  return k == SegmentKind::kWorldQuery || k == SegmentKind::kEgoQuery;
}

bool WorldSees(const Segment& key, int current_turn) {
  switch (key.kind) {
    case SegmentKind::kInitialFrame:
    case SegmentKind::kVideoChunk:
    case SegmentKind::kWorldQuery:
      return true;
    case SegmentKind::kInstruction:
      return key.turn < current_turn;
    case SegmentKind::kEgoQuery:
      return false;
  }
  return false;
}

bool EgoSees(const Segment& key, int current_turn, const RcaOptions& opts) {
  const int completed = current_turn - 1;
  const int oldest_visible = completed - opts.ego_window_turns + 1;
  switch (key.kind) {
    case SegmentKind::kEgoQuery:
      return true;
    case SegmentKind::kWorldQuery:
      return false;
    case SegmentKind::kInitialFrame:
      return opts.ego_sees_initial_when_window_exceeds_history &&
             opts.ego_window_turns > completed;
    case SegmentKind::kInstruction:
      return key.turn == current_turn || key.turn >= oldest_visible;
    case SegmentKind::kVideoChunk:
      return key.turn >= oldest_visible;
  }
  return false;
}

}  // namespace

AttentionMask BuildRcaMask(const SequenceLayout& layout, const RcaOptions& opts) {
  if (opts.ego_window_turns < 1) {
    throw Error(ErrorKind::kInvalidArgument, "ego window must be >= 1 turn");
  }
  const int n = layout.total_tokens();
  const auto& segs = layout.segments();
  const auto& seg_of = layout.segment_of();
  AttentionMask mask(n, n);
  for (int row = 0; row < n; ++row) {
    const Segment& q = segs[seg_of[row]];
    for (int col = 0; col < n; ++col) {
      const Segment& key = segs[seg_of[col]];
      bool allowed;
      if (q.kind == SegmentKind::kWorldQuery) {
        allowed = WorldSees(key, layout.current_turn());
      } else if (q.kind == SegmentKind::kEgoQuery) {
        allowed = EgoSees(key, layout.current_turn(), opts);
      } else {
        allowed = col <= row && !IsQuery(key.kind);
      }
      mask.set(row, col, allowed);
    }
  }
  return mask;
}

QueryBudget AllocateQueries(int total, int world) {
  if (world < 1 || world >= total) {
    throw Error(ErrorKind::kOutOfRange,
                "query split " + std::to_string(world) + "/" +
                    std::to_string(total) + " leaves a group empty");
  }
  return {world, total - world};
}

TokenMask PoolMaskToTokens(const WorldEgoMask& mask, int grid_h, int grid_w) {
  if (grid_h < 1 || grid_w < 1) {
    throw Error(ErrorKind::kInvalidArgument, "token grid must be non-empty");
  }
  const int cell_h = mask.height / grid_h;
  const int cell_w = mask.width / grid_w;
  if (cell_h < 1 || cell_w < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "mask " + std::to_string(mask.width) + "x" +
                    std::to_string(mask.height) + " is smaller than the token grid");
  }
  TokenMask out;
  out.t = 1;
  out.h = grid_h;
  out.w = grid_w;
  out.ego.assign(static_cast<size_t>(grid_h) * grid_w, 0);
  const int cell_pixels = cell_h * cell_w;
  for (int ty = 0; ty < grid_h; ++ty) {
    for (int tx = 0; tx < grid_w; ++tx) {
      int ego = 0;
      for (int y = ty * cell_h; y < (ty + 1) * cell_h; ++y) {
        for (int x = tx * cell_w; x < (tx + 1) * cell_w; ++x) {
          if (mask.is_ego(x, y)) ++ego;
        }
      }
      // Exactly half counts as ego.
      out.ego[out.index(0, ty, tx)] = 2 * ego >= cell_pixels ? 1 : 0;
    }
  }
  return out;
}

TokenMask PoolMasksToTokens(const std::vector<WorldEgoMask>& masks, int grid_h,
                            int grid_w) {
  if (masks.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no masks to pool");
  }
  TokenMask out;
  out.t = static_cast<int>(masks.size());
  out.h = grid_h;
  out.w = grid_w;
  for (const WorldEgoMask& m : masks) {
    const TokenMask one = PoolMaskToTokens(m, grid_h, grid_w);
    out.ego.insert(out.ego.end(), one.ego.begin(), one.ego.end());
  }
  return out;
}

namespace {

std::vector<size_t> Indices(const std::vector<uint8_t>& flags, uint8_t want) {
  std::vector<size_t> out;
  for (size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] == want) out.push_back(i);
  }
  return out;
}

std::vector<uint8_t> Dilate(const std::vector<uint8_t>& base, int t, int h,
                            int w, int radius) {
  if (radius == 0) return base;
  std::vector<uint8_t> out(base.size(), 0);
  for (int ti = 0; ti < t; ++ti) {
    const size_t frame = static_cast<size_t>(ti) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!base[frame + static_cast<size_t>(y) * w + x]) continue;
        for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) {
          for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius);
               ++xx) {
            out[frame + static_cast<size_t>(yy) * w + xx] = 1;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<size_t> RoutePlan::WorldBase() const { return Indices(ego_base, 0); }
std::vector<size_t> RoutePlan::EgoBase() const { return Indices(ego_base, 1); }
std::vector<size_t> RoutePlan::WorldActive() const { return Indices(world_active, 1); }
std::vector<size_t> RoutePlan::EgoActive() const { return Indices(ego_active, 1); }

RoutePlan RouteTokens(const TokenMask& mask, int radius) {
  if (mask.t < 1 || mask.h < 1 || mask.w < 1 ||
      mask.ego.size() != static_cast<size_t>(mask.t) * mask.h * mask.w) {
    throw Error(ErrorKind::kInvalidArgument, "token mask is empty or misshapen");
  }
  if (radius < 0) {
    throw Error(ErrorKind::kInvalidArgument, "neighbor radius must be >= 0");
  }
  RoutePlan plan;
  plan.t = mask.t;
  plan.h = mask.h;
  plan.w = mask.w;
  plan.radius = radius;
  plan.ego_base.resize(mask.size());
  std::vector<uint8_t> world_base(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    plan.ego_base[i] = mask.ego[i] ? 1 : 0;
    world_base[i] = mask.ego[i] ? 0 : 1;
  }
  plan.world_active = Dilate(world_base, mask.t, mask.h, mask.w, radius);
  plan.ego_active = Dilate(plan.ego_base, mask.t, mask.h, mask.w, radius);
  return plan;
}

StateVector::StateVector(Eigen::MatrixXd values) : values_(std::move(values)) {}

StateVector::StateVector(int n, int d, double fill)
    : values_(Eigen::MatrixXd::Constant(n, d, fill)) {}

Eigen::RowVectorXd StateVector::MeanPool() const {
  return values_.colwise().mean();
}

namespace {

ExpertOutput Gather(const std::vector<size_t>& tokens, const StateVector& input) {
  ExpertOutput out;
  out.tokens = tokens;
  out.values.resize(static_cast<Eigen::Index>(tokens.size()), input.d());
  for (size_t r = 0; r < tokens.size(); ++r) {
    out.values.row(static_cast<Eigen::Index>(r)) =
        input.values().row(static_cast<Eigen::Index>(tokens[r]));
  }
  return out;
}

std::unordered_map<size_t, Eigen::Index> RowLookup(const ExpertOutput& out,
                                                   size_t limit,
                                                   const char* name) {
  if (out.values.rows() != static_cast<Eigen::Index>(out.tokens.size())) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(name) + " expert output rows do not match its tokens");
  }
  std::unordered_map<size_t, Eigen::Index> rows;
  for (size_t r = 0; r < out.tokens.size(); ++r) {
    if (out.tokens[r] >= limit) {
      throw Error(ErrorKind::kInvalidArgument,
                  std::string(name) + " expert output names token " +
                      std::to_string(out.tokens[r]) + " outside the grid");
    }
    rows.emplace(out.tokens[r], static_cast<Eigen::Index>(r));
  }
  return rows;
}

void CheckCoverage(const std::vector<uint8_t>& active,
                   const std::unordered_map<size_t, Eigen::Index>& rows,
                   const char* name) {
  for (size_t i = 0; i < active.size(); ++i) {
    if (active[i] && !rows.count(i)) {
      throw Error(ErrorKind::kInvalidArgument,
                  std::string(name) + " expert output is missing token " +
                      std::to_string(i));
    }
  }
}

}  // namespace

Dispatched DispatchTokens(const RoutePlan& plan, const StateVector& input) {
  if (static_cast<size_t>(input.n()) != plan.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "input has " + std::to_string(input.n()) + " tokens, plan has " +
                    std::to_string(plan.size()));
  }
  return {Gather(plan.WorldActive(), input), Gather(plan.EgoActive(), input)};
}

StateVector Unroute(const RoutePlan& plan, const ExpertOutput& world_out,
                    const ExpertOutput& ego_out) {
  const auto world_rows = RowLookup(world_out, plan.size(), "world");
  const auto ego_rows = RowLookup(ego_out, plan.size(), "ego");
  CheckCoverage(plan.world_active, world_rows, "world");
  CheckCoverage(plan.ego_active, ego_rows, "ego");
  const bool has_world = !world_rows.empty();
  const bool has_ego = !ego_rows.empty();
  if (has_world && has_ego && world_out.values.cols() != ego_out.values.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "expert outputs differ in width");
  }
  const Eigen::Index d = has_world ? world_out.values.cols() : ego_out.values.cols();
  StateVector out(static_cast<int>(plan.size()), static_cast<int>(d));
  for (size_t i = 0; i < plan.size(); ++i) {
    bool take_ego = plan.ego_base[i] != 0;
#ifdef WEMEVAL_FAULT_UNROUTE
    // Test-only fault: picks the wrong expert for tokens both experts saw.
    if (plan.world_active[i] && plan.ego_active[i]) take_ego = !take_ego;
#endif
    const Eigen::Index dst = static_cast<Eigen::Index>(i);
    if (take_ego) {
      out.values().row(dst) = ego_out.values.row(ego_rows.at(i));
    } else {
      out.values().row(dst) = world_out.values.row(world_rows.at(i));
    }
  }
  return out;
}

std::vector<double> FlowToAlpha(const std::vector<double>& magnitudes,
                                double tau, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta) || !std::isfinite(tau)) {
    throw Error(ErrorKind::kInvalidArgument,
                "flow_to_alpha needs finite tau and delta > 0");
  }
  std::vector<double> alpha;
  alpha.reserve(magnitudes.size());
  for (double m : magnitudes) {
    if (!std::isfinite(m)) {
      throw Error(ErrorKind::kInvalidArgument, "non-finite flow magnitude");
    }
    const double z = (tau - m) / delta;
    alpha.push_back(z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                             : std::exp(z) / (1.0 + std::exp(z)));
  }
  return alpha;
}

StateVector SoftFuse(const std::vector<double>& alpha, const StateVector& world,
                     const StateVector& ego) {
  if (world.n() != ego.n() || world.d() != ego.d() ||
      static_cast<int>(alpha.size()) != world.n()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "soft fusion needs matching token counts and channels");
  }
  StateVector out(world.n(), world.d());
  for (int i = 0; i < world.n(); ++i) {
    const double a = alpha[i];
    out.values().row(i) =
        a * world.values().row(i) + (1.0 - a) * ego.values().row(i);
  }
  return out;
}

GateParams GateParams::Zero(int d) {
  GateParams p;
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(d, d);
  const Eigen::RowVectorXd zb = Eigen::RowVectorXd::Zero(d);
  p.reset_prev = p.reset_proposal = p.reset_ego = z;
  p.keep_prev = p.keep_proposal = p.keep_ego = z;
  p.cand_prev = p.cand_proposal = z;
  p.reset_bias = p.keep_bias = p.cand_bias = zb;
  return p;
}

GateParams GateParams::Random(int d, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  auto mat = [&] {
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  auto vec = [&] {
    Eigen::RowVectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = u(rng);
    return v;
  };
  GateParams p;
  p.reset_prev = mat();
  p.reset_proposal = mat();
  p.reset_ego = mat();
  p.reset_bias = vec();
  p.keep_prev = mat();
  p.keep_proposal = mat();
  p.keep_ego = mat();
  p.keep_bias = vec();
  p.cand_prev = mat();
  p.cand_proposal = mat();
  p.cand_bias = vec();
  return p;
}

namespace {

Eigen::MatrixXd SigmoidM(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
}

}  // namespace

GruStep GruWorldUpdateDetailed(const StateVector& prev,
                               const StateVector& proposal,
                               const Eigen::RowVectorXd& ego_summary,
                               const GateParams& params) {
  const int d = prev.d();
  if (proposal.n() != prev.n() || proposal.d() != d || ego_summary.size() != d ||
      params.d() != d) {
    throw Error(ErrorKind::kDimensionMismatch,
                "gated update needs prev/proposal of equal shape and d-wide "
                "ego summary and params");
  }
  const Eigen::MatrixXd& s = prev.values();
  const Eigen::MatrixXd& p = proposal.values();
  const Eigen::Index n = s.rows();
  auto rows = [n](const Eigen::RowVectorXd& v) { return v.replicate(n, 1); };

  GruStep step;
  step.reset_gate = SigmoidM(s * params.reset_prev + p * params.reset_proposal +
                             rows(ego_summary * params.reset_ego + params.reset_bias));
  step.candidate = (step.reset_gate.cwiseProduct(s) * params.cand_prev +
                    p * params.cand_proposal + rows(params.cand_bias))
                       .array()
                       .tanh()
                       .matrix();
  step.keep_gate = SigmoidM(s * params.keep_prev + p * params.keep_proposal +
                            rows(ego_summary * params.keep_ego + params.keep_bias));
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, d);
  step.output = StateVector(step.keep_gate.cwiseProduct(s) +
                            (ones - step.keep_gate).cwiseProduct(step.candidate));
  return step;
}

StateVector GruWorldUpdate(const StateVector& prev, const StateVector& proposal,
                           const Eigen::RowVectorXd& ego_summary,
                           const GateParams& params) {
  return GruWorldUpdateDetailed(prev, proposal, ego_summary, params).output;
}

MaskLoss BceDiceLoss(const std::vector<double>& pred,
                     const std::vector<uint8_t>& gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "mask loss needs equally sized non-empty prediction and target");
  }
  const double n = static_cast<double>(pred.size());
  double n1 = 0.0;
  for (uint8_t g : gt) n1 += g ? 1.0 : 0.0;
  const double n0 = n - n1;
  const double w1 = n1 > 0.0 ? n / (2.0 * n1) : 0.0;
  const double w0 = n0 > 0.0 ? n / (2.0 * n0) : 0.0;

  double bce = 0.0, inter = 0.0, sum_pred = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kMaskLossEps, 1.0 - kMaskLossEps);
    if (gt[i]) {
      bce -= w1 * std::log(p);
      inter += p;
    } else {
      bce -= w0 * std::log1p(-p);
    }
    sum_pred += p;
  }
  MaskLoss loss;
  loss.bce = bce / n;
  const bool pred_empty = sum_pred <= n * kMaskLossEps * (1.0 + 1e-9);
  if (n1 == 0.0 && pred_empty) {
    loss.dice = 0.0;
  } else {
    loss.dice = 1.0 - 2.0 * inter / (sum_pred + n1);
  }
  loss.total = loss.bce + loss.dice;
  return loss;
}

double TotalLoss(double flow_loss, const MaskLoss& mask, double lambda) {
  return flow_loss + lambda * mask.total;
}

double AnnealLambda(int step, int total_steps, double lambda0,
                    AnnealSchedule schedule) {
  if (total_steps < 1 || step < 0 || step > total_steps) {
    throw Error(ErrorKind::kOutOfRange,
                "anneal step " + std::to_string(step) + " outside [0, " +
                    std::to_string(total_steps) + "]");
  }
  if (step == total_steps) return kAnnealFloorFraction * lambda0;
  const double progress = static_cast<double>(step) / total_steps;
  const double decay = 1.0 - kAnnealFloorFraction;
  if (schedule == AnnealSchedule::kLinear) {
    return lambda0 * (1.0 - decay * progress);
  }
  return lambda0 * (kAnnealFloorFraction +
                    decay * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

namespace {

bool IsSeparator(char c) {
  return c == '_' || std::isspace(static_cast<unsigned char>(c));
}

bool IsGarbledToken(std::string_view token) {
  if (token.size() < 4) return false;
  for (char c : token) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (!std::isalpha(u)) return false;
    switch (std::tolower(u)) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      default:
        break;
    }
  }
  return true;
}

}  // namespace

std::string SanitizeIntent(std::string_view label) {
  struct Span {
    size_t begin, end;
  };
  std::vector<Span> tokens;
  size_t i = 0;
  while (i < label.size()) {
    while (i < label.size() && IsSeparator(label[i])) ++i;
    const size_t begin = i;
    while (i < label.size() && !IsSeparator(label[i])) ++i;
    if (i > begin) tokens.push_back({begin, i});
  }
  size_t keep = tokens.size();
  while (keep > 0 &&
         IsGarbledToken(label.substr(tokens[keep - 1].begin,
                                     tokens[keep - 1].end - tokens[keep - 1].begin))) {
    --keep;
  }
  if (keep == tokens.size()) return std::string(label);
  if (keep == 0) return "";
  return std::string(label.substr(0, tokens[keep - 1].end));
}

}  // namespace wemeval

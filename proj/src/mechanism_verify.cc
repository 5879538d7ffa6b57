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

#include "wemeval/mechanism_verify.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "wemeval/error.h"

namespace wemeval {
using nlohmann::json;

bool VerificationReport::passed() const {
  return std::all_of(invariants.begin(), invariants.end(),
                     [](const InvariantOutcome& o) { return o.passed(); });
}

json VerificationReport::ToJson() const {
  json list = json::array();
  for (const InvariantOutcome& o : invariants) {
    list.push_back({{"name", o.name},
                    {"passed", o.passed()},
                    {"trials", o.trials},
                    {"failures", o.failures},
                    {"counterexample", o.counterexample}});
  }
  return {{"seed", seed}, {"trials", trials}, {"passed", passed()},
          {"invariants", std::move(list)}};
}

bool RcaRuleAllows(const std::vector<Segment>& segments, const RcaOptions& opts,
                   int row, int col) {
  auto locate = [&](int pos) -> const Segment& {
    int start = 0;
    for (const Segment& s : segments) {
      if (pos < start + s.length) return s;
      start += s.length;
    }
    throw Error(ErrorKind::kOutOfRange, "position outside layout");
  };
  int instructions = 0, videos = 0;
  for (const Segment& s : segments) {
    if (s.kind == SegmentKind::kInstruction) ++instructions;
    if (s.kind == SegmentKind::kVideoChunk) ++videos;
  }
  const int current = instructions;
  const int completed = videos;
  const Segment& q = locate(row);
  const Segment& k = locate(col);

  if (q.kind == SegmentKind::kWorldQuery) {
    if (k.kind == SegmentKind::kEgoQuery) return false;
    if (k.kind == SegmentKind::kInstruction && k.turn == current) return false;
    return true;
  }
  if (q.kind == SegmentKind::kEgoQuery) {
    if (k.kind == SegmentKind::kWorldQuery) return false;
    if (k.kind == SegmentKind::kEgoQuery) return true;
    if (k.kind == SegmentKind::kInitialFrame) {
      return opts.ego_sees_initial_when_window_exceeds_history &&
             completed < opts.ego_window_turns;
    }
    if (k.kind == SegmentKind::kInstruction && k.turn == current) return true;
    return completed - k.turn < opts.ego_window_turns;
  }
  const bool key_is_query =
      k.kind == SegmentKind::kWorldQuery || k.kind == SegmentKind::kEgoQuery;
  return col <= row && !key_is_query;
}

namespace {

using Rng = std::mt19937_64;

int Uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double UniformReal(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Instance size grows from 1 to `cap` over the trials.
int Size(int trial, int cap) { return 1 + trial % cap; }

json MatrixJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json GridJson(const std::vector<uint8_t>& flags, int t, int h, int w) {
  return {{"t", t}, {"h", h}, {"w", w}, {"values", flags}};
}

// Runs `check` per trial; it returns a counterexample or null. Exceptions
// count as failures too.
InvariantOutcome Run(const std::string& name, int trials, Rng& rng,
                     const std::function<json(Rng&, int)>& check) {
  InvariantOutcome out;
  out.name = name;
  out.trials = trials;
  out.counterexample = nullptr;
  for (int trial = 0; trial < trials; ++trial) {
    json failure;
    try {
      failure = check(rng, trial);
    } catch (const std::exception& e) {
      failure = {{"trial", trial}, {"exception", e.what()}};
    }
    if (!failure.is_null()) {
      if (out.failures == 0) {
        failure["trial"] = trial;
        out.counterexample = std::move(failure);
      }
      ++out.failures;
    }
  }
  return out;
}

json CheckRca(Rng& rng, int trial) {
  const int completed = Size(trial, 6) - 1;
  std::vector<std::pair<int, int>> turns;
  for (int i = 0; i < completed; ++i) {
    turns.emplace_back(Uniform(rng, 1, 3), Uniform(rng, 1, 3));
  }
  const SequenceLayout layout = SequenceLayout::Interleaved(
      Uniform(rng, 1, 3), turns, Uniform(rng, 1, 3), Uniform(rng, 1, 3),
      Uniform(rng, 1, 3));
  RcaOptions opts;
  opts.ego_window_turns = Uniform(rng, 1, 6);
  opts.ego_sees_initial_when_window_exceeds_history = Uniform(rng, 0, 1) == 1;
  const AttentionMask mask = BuildRcaMask(layout, opts);
  const auto& segs = layout.segments();
  const auto& seg_of = layout.segment_of();
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      const bool expected = RcaRuleAllows(segs, opts, r, c);
      // Hard rules that hold for every layout.
      const SegmentKind qk = segs[seg_of[r]].kind;
      const Segment& key = segs[seg_of[c]];
      bool forbidden = false;
      if (qk == SegmentKind::kWorldQuery && key.kind == SegmentKind::kInstruction &&
          key.turn == layout.current_turn()) {
        forbidden = true;
      }
      if (qk == SegmentKind::kEgoQuery && key.kind == SegmentKind::kWorldQuery) {
        forbidden = true;
      }
      if (mask.allowed(r, c) != expected || (forbidden && mask.allowed(r, c))) {
        json layout_json = json::array();
        for (const Segment& s : segs) {
          layout_json.push_back(
              {{"kind", SegmentKindName(s.kind)}, {"turn", s.turn}, {"length", s.length}});
        }
        return {{"layout", layout_json},
                {"ego_window_turns", opts.ego_window_turns},
                {"row", r},
                {"col", c},
                {"mask", mask.allowed(r, c)},
                {"rule", expected}};
      }
    }
  }
  return nullptr;
}

TokenMask RandomTokenMask(Rng& rng, int trial) {
  TokenMask m;
  m.t = Uniform(rng, 1, 3);
  m.h = Size(trial, 8);
  m.w = Uniform(rng, 1, 8);
  const double density = UniformReal(rng, 0.0, 1.0);
  m.ego.resize(static_cast<size_t>(m.t) * m.h * m.w);
  for (auto& v : m.ego) v = UniformReal(rng, 0.0, 1.0) < density ? 1 : 0;
  return m;
}

json CheckRouting(Rng& rng, int trial) {
  const TokenMask mask = RandomTokenMask(rng, trial);
  const int radius = Uniform(rng, 0, 2);
  const RoutePlan plan = RouteTokens(mask, radius);
  auto fail = [&](const char* why) -> json {
    return {{"reason", why}, {"radius", radius},
            {"mask", GridJson(mask.ego, mask.t, mask.h, mask.w)}};
  };
  for (size_t i = 0; i < plan.size(); ++i) {
    const bool ego = plan.ego_base[i] != 0;
    if (ego != (mask.ego[i] != 0)) return fail("base sets differ from mask");
    if (ego && !plan.ego_active[i]) return fail("ego active set misses base token");
    if (!ego && !plan.world_active[i]) return fail("world active set misses base token");
    if (!plan.ego_active[i] && !plan.world_active[i]) return fail("token uncovered");
    if (radius == 0 && (plan.ego_active[i] != (ego ? 1 : 0) ||
                        plan.world_active[i] != (ego ? 0 : 1))) {
      return fail("radius 0 is not an exact partition");
    }
  }
  // Active membership against a direct Chebyshev-neighborhood search.
  for (int t = 0; t < mask.t; ++t) {
    for (int y = 0; y < mask.h; ++y) {
      for (int x = 0; x < mask.w; ++x) {
        bool near_ego = false, near_world = false;
        for (int yy = 0; yy < mask.h; ++yy) {
          for (int xx = 0; xx < mask.w; ++xx) {
            if (std::max(std::abs(yy - y), std::abs(xx - x)) > radius) continue;
            (mask.ego[mask.index(t, yy, xx)] ? near_ego : near_world) = true;
          }
        }
        const size_t i = mask.index(t, y, x);
        if ((plan.ego_active[i] != 0) != near_ego ||
            (plan.world_active[i] != 0) != near_world) {
          return fail("active set disagrees with neighborhood search");
        }
      }
    }
  }
  return nullptr;
}

json CheckUnroute(Rng& rng, int trial) {
  const TokenMask mask = RandomTokenMask(rng, trial);
  const int radius = Uniform(rng, 0, 2);
  const int d = Uniform(rng, 1, 4);
  const RoutePlan plan = RouteTokens(mask, radius);
  StateVector input(static_cast<int>(plan.size()), d);
  for (Eigen::Index i = 0; i < input.values().size(); ++i) {
    input.values().data()[i] = UniformReal(rng, -1.0, 1.0);
  }
  auto fail = [&](const char* why) -> json {
    return {{"reason", why}, {"radius", radius},
            {"mask", GridJson(mask.ego, mask.t, mask.h, mask.w)}};
  };
  // Identity experts.
  const Dispatched routed = DispatchTokens(plan, input);
  const StateVector same = Unroute(plan, routed.world, routed.ego);
  if (same.values() != input.values()) return fail("identity experts changed the input");

  // Constant experts: world -> 0, ego -> 1 must reproduce the mask.
  ExpertOutput zeros{routed.world.tokens,
                     Eigen::MatrixXd::Zero(routed.world.values.rows(), d)};
  ExpertOutput ones{routed.ego.tokens,
                    Eigen::MatrixXd::Ones(routed.ego.values.rows(), d)};
  const StateVector selected = Unroute(plan, zeros, ones);
  for (size_t i = 0; i < plan.size(); ++i) {
    const double want = mask.ego[i] ? 1.0 : 0.0;
    for (int c = 0; c < d; ++c) {
      if (selected.values()(static_cast<Eigen::Index>(i), c) != want) {
        json out = fail("selection does not follow the base mask");
        out["token"] = i;
        return out;
      }
    }
  }
  return nullptr;
}

json CheckFusion(Rng& rng, int trial) {
  const int n = Size(trial, 32);
  const int d = Uniform(rng, 1, 4);
  std::vector<double> mags(n);
  for (double& m : mags) m = UniformReal(rng, 0.0, 5.0);
  const double tau = UniformReal(rng, 0.0, 3.0);
  const double delta = UniformReal(rng, 0.05, 2.0);
  const std::vector<double> alpha = FlowToAlpha(mags, tau, delta);
  StateVector world(n, d), ego(n, d);
  for (Eigen::Index i = 0; i < world.values().size(); ++i) {
    world.values().data()[i] = UniformReal(rng, -3.0, 3.0);
    ego.values().data()[i] = UniformReal(rng, -3.0, 3.0);
  }
  const StateVector fused = SoftFuse(alpha, world, ego);
  for (int i = 0; i < n; ++i) {
    if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0)) {
      return {{"reason", "alpha outside [0,1]"}, {"alpha", alpha[i]}};
    }
    for (int c = 0; c < d; ++c) {
      const double a = world.values()(i, c), b = ego.values()(i, c);
      const double v = fused.values()(i, c);
      const double slack = 1e-12 * (1.0 + std::abs(a) + std::abs(b));
      if (v < std::min(a, b) - slack || v > std::max(a, b) + slack) {
        return {{"reason", "fused value outside its inputs"}, {"alpha", alpha[i]},
                {"world", a}, {"ego", b}, {"fused", v}};
      }
    }
  }
  return nullptr;
}

json CheckGru(Rng& rng, int trial) {
  const int n = Uniform(rng, 1, 6);
  const int d = Size(trial, 6);
  const double scale = UniformReal(rng, 0.1, 3.0);
  const GateParams params = GateParams::Random(d, rng, scale);
  StateVector prev(n, d), proposal(n, d);
  for (Eigen::Index i = 0; i < prev.values().size(); ++i) {
    prev.values().data()[i] = UniformReal(rng, -2.0, 2.0);
    proposal.values().data()[i] = UniformReal(rng, -2.0, 2.0);
  }
  Eigen::RowVectorXd ego(d);
  for (int i = 0; i < d; ++i) ego(i) = UniformReal(rng, -1.0, 1.0);
  const GruStep step = GruWorldUpdateDetailed(prev, proposal, ego, params);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) {
      const double a = prev.values()(i, c), b = step.candidate(i, c);
      const double g = step.keep_gate(i, c);
      const double v = step.output.values()(i, c);
      const double slack = 1e-12 * (1.0 + std::abs(a) + std::abs(b));
      if (!(g >= 0.0 && g <= 1.0) || v < std::min(a, b) - slack ||
          v > std::max(a, b) + slack) {
        return {{"reason", "update leaves the prev/candidate interval"},
                {"prev", a}, {"candidate", b}, {"keep_gate", g}, {"output", v},
                {"prev_state", MatrixJson(prev.values())}};
      }
    }
  }
  return nullptr;
}

json CheckLossFloor(Rng& rng, int trial) {
  const int n = 4 * Size(trial, 16);
  std::vector<uint8_t> gt(n);
  const double density = UniformReal(rng, 0.0, 1.0);
  for (auto& g : gt) g = UniformReal(rng, 0.0, 1.0) < density ? 1 : 0;
  std::vector<double> perfect(n);
  for (int i = 0; i < n; ++i) perfect[i] = gt[i];
  std::vector<double> pred(n);
  double l1 = 0.0;
  do {
    const double noise = UniformReal(rng, 0.05, 1.0);
    l1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double shift = UniformReal(rng, 0.0, noise);
      pred[i] = gt[i] ? 1.0 - shift : shift;
      l1 += std::abs(pred[i] - gt[i]);
    }
  } while (!(l1 > 0.05 * n));
  const MaskLoss best = BceDiceLoss(perfect, gt);
  const MaskLoss other = BceDiceLoss(pred, gt);
  if (!(best.total < other.total)) {
    return {{"reason", "perturbed prediction does not lose more"},
            {"gt", gt}, {"pred", pred}, {"perfect_total", best.total},
            {"perturbed_total", other.total}};
  }
  return nullptr;
}

json CheckAnneal(Rng& rng, int trial) {
  const int total = Size(trial, 1000);
  const double lambda0 = trial == 0 ? kDefaultMaskLambda : UniformReal(rng, 0.01, 2.0);
  for (AnnealSchedule s : {AnnealSchedule::kLinear, AnnealSchedule::kCosine}) {
    const double start = AnnealLambda(0, total, lambda0, s);
    const double end = AnnealLambda(total, total, lambda0, s);
    if (start != lambda0 || std::abs(end - kAnnealFloorFraction * lambda0) > 1e-15) {
      return {{"reason", "endpoints"}, {"lambda0", lambda0}, {"start", start},
              {"end", end}, {"total_steps", total}};
    }
    double prev = start;
    for (int step = 1; step <= total; ++step) {
      const double v = AnnealLambda(step, total, lambda0, s);
      if (v > prev) {
        return {{"reason", "schedule increased"}, {"step", step},
                {"total_steps", total}, {"lambda0", lambda0}};
      }
      prev = v;
    }
  }
  if (trial == 0) {
    const double end = AnnealLambda(total, total, kDefaultMaskLambda);
    if (std::abs(end - 0.06) > 1e-15) {
      return {{"reason", "0.3 does not anneal to 0.06"}, {"end", end}};
    }
  }
  return nullptr;
}

}  // namespace

VerificationReport VerifyMechanisms(uint64_t seed, int trials) {
  if (trials < 1) {
    throw Error(ErrorKind::kInvalidArgument, "trials must be >= 1");
  }
  VerificationReport report;
  report.seed = seed;
  report.trials = trials;
  // Each invariant gets its own stream so adding one does not reshuffle the
  // others.
  const std::vector<std::pair<std::string, std::function<json(Rng&, int)>>> checks = {
      {"rca_rule_agreement", CheckRca},
      {"routing_partition_coverage", CheckRouting},
      {"unroute_identity", CheckUnroute},
      {"fusion_convexity", CheckFusion},
      {"gru_convexity", CheckGru},
      {"loss_floor", CheckLossFloor},
      {"anneal_endpoints", CheckAnneal},
  };
  for (size_t i = 0; i < checks.size(); ++i) {
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + i + 1);
    report.invariants.push_back(Run(checks[i].first, trials, rng, checks[i].second));
  }
  return report;
}

}  // namespace wemeval

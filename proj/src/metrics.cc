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

#include "wemeval/metrics.h"

#include <algorithm>
#include <cmath>
#include <span>

#include "wemeval/error.h"
#include "wemeval/flowlab.h"

namespace wemeval {
using nlohmann::json;

void MetricConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kConfig, "metric config: " + what);
  };
  if (window_w < 1) fail("W must be >= 1");
  if (window_r < 1) fail("R must be >= 1");
  if (!(tau_cpdm > 0.0)) fail("tau_cpdm must be > 0");
  if (!(tau_pmpa > 0.0)) fail("tau_pmpa must be > 0");
  if (resample_steps < 1) fail("resample_steps must be >= 1");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    fail("top_fraction must lie in (0, 1]");
  }
  if (!(eps > 0.0)) fail("eps must be > 0");
  if (embedder.kind == EmbedderSpec::Kind::kReference && embedder.grid < 1) {
    fail("embedder grid must be >= 1");
  }
}

json ConfigToJson(const MetricConfig& cfg) {
  json embedder = {
      {"kind", cfg.embedder.kind == EmbedderSpec::Kind::kReference ? "reference"
                                                                  : "external-file"}};
  if (cfg.embedder.kind == EmbedderSpec::Kind::kReference) {
    embedder["grid"] = cfg.embedder.grid;
  } else {
    embedder["source"] = cfg.embedder.source.string();
  }
  return {{"W", cfg.window_w},
          {"R", cfg.window_r},
          {"tau_cpdm", cfg.tau_cpdm},
          {"tau_pmpa", cfg.tau_pmpa},
          {"resample_steps", cfg.resample_steps},
          {"top_fraction", cfg.top_fraction},
          {"eps", cfg.eps},
          {"pmpa_delta",
           cfg.pmpa_delta == MetricConfig::DeltaReduction::kMean ? "mean" : "sum"},
          {"embedder", embedder}};
}

MetricConfig ConfigFromJson(const json& overrides, MetricConfig base) {
  if (!overrides.is_object()) {
    throw Error(ErrorKind::kConfig, "metric config must be a JSON object");
  }
  try {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "W") base.window_w = v.get<int>();
      else if (key == "R") base.window_r = v.get<int>();
      else if (key == "tau_cpdm") base.tau_cpdm = v.get<double>();
      else if (key == "tau_pmpa") base.tau_pmpa = v.get<double>();
      else if (key == "resample_steps") base.resample_steps = v.get<int>();
      else if (key == "top_fraction") base.top_fraction = v.get<double>();
      else if (key == "eps") base.eps = v.get<double>();
      else if (key == "pmpa_delta") {
        const std::string s = v.get<std::string>();
        if (s == "mean") base.pmpa_delta = MetricConfig::DeltaReduction::kMean;
        else if (s == "sum") base.pmpa_delta = MetricConfig::DeltaReduction::kSum;
        else throw Error(ErrorKind::kConfig, "pmpa_delta must be mean or sum");
      } else if (key == "embedder") {
        const std::string kind = v.value("kind", "reference");
        if (kind == "reference") {
          base.embedder.kind = EmbedderSpec::Kind::kReference;
          base.embedder.grid = v.value("grid", base.embedder.grid);
        } else if (kind == "external-file") {
          base.embedder.kind = EmbedderSpec::Kind::kExternalFile;
          base.embedder.source = v.at("source").get<std::string>();
        } else {
          throw Error(ErrorKind::kConfig, "unknown embedder kind " + kind);
        }
      } else {
        throw Error(ErrorKind::kConfig, "unknown metric config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("metric config: ") + e.what());
  }
  base.Validate();
  return base;
}

const MetricResult& MetricReport::Get(std::string_view name) const {
  if (name == "rcbd") return rcbd;
  if (name == "lpsa") return lpsa;
  if (name == "cisr") return cisr;
  if (name == "pmpa") return pmpa;
  if (name == "cpdm") return cpdm;
  if (name == "fphs") return fphs;
  throw Error(ErrorKind::kInvalidArgument, "unknown metric " + std::string(name));
}

std::vector<std::string> MetricReport::Notes() const {
  std::vector<std::string> notes;
  for (const char* name : kMetricNames) {
    for (const std::string& n : Get(name).notes) {
      notes.push_back(std::string(name) + ": " + n);
    }
  }
  return notes;
}

json ReportToJson(const MetricReport& report) {
  json scores = json::object();
  json breakdowns = json::object();
  for (const char* name : kMetricNames) {
    const MetricResult& r = report.Get(name);
    scores[name] = r.score ? json(*r.score) : json(nullptr);
    breakdowns[name] = r.parts;
  }
  return {{"trajectory", report.trajectory},
          {"scores", std::move(scores)},
          {"breakdowns", std::move(breakdowns)},
          {"notes", report.Notes()}};
}

double SymmetricMatch(double x, double y, double eps) {
  const double a = std::max(x, eps), b = std::max(y, eps);
  // Ordered so that swapping the arguments is bit-exact.
  return std::exp(-std::log(std::max(a, b) / std::min(a, b)));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double MeanFlowMagnitude(const FlowField& f) {
  double s = 0.0;
  for (size_t i = 0; i < f.pixel_count(); ++i) s += f.Magnitude(i);
  return s / static_cast<double>(f.pixel_count());
}

bool HasUsableFlows(const Chunk& c) {
  return c.frames.size() >= 2 && c.flows && !c.flows->empty();
}

EmbeddingVector EmbedRange(const Trajectory& traj, int k, int first, int count,
                           const Embedder& embedder) {
  const Chunk& c = traj.chunks[k];
  std::span<const Frame> frames(c.frames.data() + first, count);
  return embedder.Embed(frames, EmbedKey(traj.id, k, first, first + count - 1));
}

EmbeddingVector EmbedChunk(const Trajectory& traj, int k,
                           const Embedder& embedder) {
  return EmbedRange(traj, k, 0, static_cast<int>(traj.chunks[k].frames.size()),
                    embedder);
}

std::vector<EmbeddingVector> EmbedChunks(const Trajectory& traj,
                                         const Embedder& embedder) {
  std::vector<EmbeddingVector> out;
  for (size_t k = 0; k < traj.chunks.size(); ++k) {
    out.push_back(EmbedChunk(traj, static_cast<int>(k), embedder));
  }
  return out;
}

struct BoundaryGaps {
  double appearance;
  double motion;
};

BoundaryGaps Gaps(const Trajectory& traj, int k, const Embedder& embedder) {
  const Chunk& a = traj.chunks[k];
  const Chunk& b = traj.chunks[k + 1];
  const int last = static_cast<int>(a.frames.size()) - 1;
  const double appearance =
      PerceptualDistance(a.frames.back(), b.frames.front(), embedder,
                         EmbedKey(traj.id, k, last, last),
                         EmbedKey(traj.id, k + 1, 0, 0));
  const double motion = std::abs(MeanFlowMagnitude(a.flows->back()) -
                                 MeanFlowMagnitude(b.flows->front()));
  return {appearance, motion};
}

std::vector<double> ChunkEmbeddingsCos(const EmbeddingVector& query,
                                       const std::vector<EmbeddingVector>& pool) {
  std::vector<double> sims;
  sims.reserve(pool.size());
  for (const EmbeddingVector& e : pool) sims.push_back(CosineSimilarity(query, e));
  return sims;
}

std::vector<std::vector<double>> ChunkSimilarities(const Trajectory& gen,
                                                   const Trajectory& gt,
                                                   const Embedder& embedder) {
  const std::vector<EmbeddingVector> eg = EmbedChunks(gen, embedder);
  const std::vector<EmbeddingVector> et = EmbedChunks(gt, embedder);
  std::vector<std::vector<double>> sims;
  for (const EmbeddingVector& e : eg) sims.push_back(ChunkEmbeddingsCos(e, et));
  return sims;
}

MetricResult Absent(std::string note) {
  MetricResult r;
  r.notes.push_back(std::move(note));
  return r;
}

}  // namespace

MetricResult ComputeRcbd(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder) {
  const size_t k_count = gt.chunks.size();
  if (k_count < 2 || gen.chunks.size() < 2) {
    return Absent("needs at least 2 chunks");
  }
  for (size_t k = 0; k < k_count; ++k) {
    if (!HasUsableFlows(gen.chunks[k]) || !HasUsableFlows(gt.chunks[k])) {
      return Absent("missing flows in chunk " + std::to_string(k));
    }
  }
  MetricResult r;
  for (size_t k = 0; k + 1 < k_count; ++k) {
    const BoundaryGaps g = Gaps(gen, static_cast<int>(k), embedder);
    const BoundaryGaps t = Gaps(gt, static_cast<int>(k), embedder);
    r.parts.push_back(std::sqrt(SymmetricMatch(g.appearance, t.appearance, cfg.eps) *
                                SymmetricMatch(g.motion, t.motion, cfg.eps)));
  }
  r.score = Mean(r.parts);
  return r;
}

MetricResult ComputeLpsa(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder) {
  MetricResult r;
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < gt.chunks.size(); ++k) {
    const int tg = static_cast<int>(gen.chunks[k].frames.size());
    const int tt = static_cast<int>(gt.chunks[k].frames.size());
    const int wg = std::min(cfg.window_w, tg);
    const int wt = std::min(cfg.window_w, tt);
    const double sim =
        CosineSimilarity(EmbedRange(gen, static_cast<int>(k), tg - wg, wg, embedder),
                         EmbedRange(gt, static_cast<int>(k), tt - wt, wt, embedder));
    r.parts.push_back(sim);
    const double weight = static_cast<double>(k + 1);
    num += weight * sim;
    den += weight;
  }
  r.score = num / den;
  return r;
}

MetricResult ComputeCisr(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig&, const Embedder& embedder) {
  const auto sims = ChunkSimilarities(gen, gt, embedder);
  MetricResult r;
  for (size_t k = 0; k < sims.size(); ++k) {
    const double target = sims[k][k];
    int rank = 0;
    for (double s : sims[k]) {
      if (s >= target) ++rank;
    }
    r.parts.push_back(1.0 / rank);
  }
  r.score = Mean(r.parts);
  return r;
}

MetricResult ComputePmpa(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg) {
  MetricResult r;
  for (size_t k = 0; k < gt.chunks.size(); ++k) {
    const Chunk& g = gen.chunks[k];
    const Chunk& t = gt.chunks[k];
    if (g.frames.size() < 2 || t.frames.size() < 2) {
      r.notes.push_back("chunk " + std::to_string(k) + " skipped: fewer than 2 frames");
      continue;
    }
    if (!HasUsableFlows(g) || !HasUsableFlows(t)) {
      r.notes.push_back("chunk " + std::to_string(k) + " skipped: missing flows");
      continue;
    }
    const MotionProfile pg = ResampleProfile(
        ComputeMotionProfile(g, cfg.top_fraction), cfg.resample_steps);
    const MotionProfile pt = ResampleProfile(
        ComputeMotionProfile(t, cfg.top_fraction), cfg.resample_steps);
    double delta = 0.0;
    for (int i = 0; i < cfg.resample_steps; ++i) {
      double d2 = 0.0;
      for (int c = 0; c < 4; ++c) {
        const double d = pg.steps[i][c] - pt.steps[i][c];
        d2 += d * d;
      }
      delta += std::sqrt(d2);
    }
    if (cfg.pmpa_delta == MetricConfig::DeltaReduction::kMean) {
      delta /= cfg.resample_steps;
    }
    r.parts.push_back(std::exp(-delta / cfg.tau_pmpa));
  }
  if (!r.parts.empty()) r.score = Mean(r.parts);
  return r;
}

MetricResult ComputeCpdm(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder) {
  bool has_nav = false, has_manip = false;
  for (const Chunk& c : gt.chunks) {
    (c.phase == Phase::kNav ? has_nav : has_manip) = true;
  }
  if (!has_nav || !has_manip) return Absent("single-phase ground truth");

  const auto sims = ChunkSimilarities(gen, gt, embedder);
  MetricResult r;
  for (size_t k = 0; k < sims.size(); ++k) {
    const Phase phase = gen.chunks[k].phase;
    double hardest = -2.0;
    for (size_t j = 0; j < gt.chunks.size(); ++j) {
      if (gt.chunks[j].phase != phase) hardest = std::max(hardest, sims[k][j]);
    }
    r.parts.push_back(Sigmoid((sims[k][k] - hardest) / cfg.tau_cpdm));
  }
  r.score = Mean(r.parts);
  return r;
}

PixelBox ChangeRegion(const std::vector<const FlowField*>& flows, int width,
                      int height, double top_fraction) {
  const size_t n = static_cast<size_t>(width) * height;
  std::vector<double> acc(n, 0.0);
  for (const FlowField* f : flows) {
    for (size_t i = 0; i < n; ++i) acc[i] += f->Magnitude(i);
  }
  std::vector<double> sorted = acc;
  const size_t top = TopCount(n, top_fraction);
  std::nth_element(sorted.begin(), sorted.begin() + (top - 1), sorted.end(),
                   std::greater<double>());
  const double cutoff = sorted[top - 1];
  PixelBox box{width, height, 0, 0};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (acc[static_cast<size_t>(y) * width + x] >= cutoff) {
        box.x0 = std::min(box.x0, x);
        box.y0 = std::min(box.y0, y);
        box.x1 = std::max(box.x1, x + 1);
        box.y1 = std::max(box.y1, y + 1);
      }
    }
  }
  return box;
}

namespace {

// Trailing `left` frames of chunk k followed by the leading `right` frames of
// chunk k + 1.
std::vector<Frame> SwitchWindow(const Trajectory& traj, size_t k, int r,
                                const PixelBox& box) {
  const Chunk& a = traj.chunks[k];
  const Chunk& b = traj.chunks[k + 1];
  const int left = std::min<int>(r, static_cast<int>(a.frames.size()));
  const int right = std::min<int>(r, static_cast<int>(b.frames.size()));
  std::vector<Frame> out;
  for (size_t t = a.frames.size() - left; t < a.frames.size(); ++t) {
    out.push_back(CropFrame(a.frames[t], box.x0, box.y0, box.x1, box.y1));
  }
  for (int t = 0; t < right; ++t) {
    out.push_back(CropFrame(b.frames[t], box.x0, box.y0, box.x1, box.y1));
  }
  return out;
}

std::string SwitchKey(const Trajectory& traj, size_t k, int r) {
  const int ta = static_cast<int>(traj.chunks[k].frames.size());
  const int tb = static_cast<int>(traj.chunks[k + 1].frames.size());
  return EmbedKey(traj.id, static_cast<int>(k), ta - std::min(r, ta),
                  std::min(r, tb) - 1, "fphs");
}

}  // namespace

MetricResult ComputeFphs(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder& embedder) {
  const std::vector<int> switches = PhaseBoundaries(gt);
  if (switches.empty()) return Absent("no phase switch");
  MetricResult r;
  const int width = gt.width();
  const int height = gt.height();
  for (int boundary : switches) {
    const size_t k = static_cast<size_t>(boundary - 1);
    const Chunk& a = gt.chunks[k];
    const Chunk& b = gt.chunks[k + 1];
    if (!a.flows || !b.flows) {
      r.notes.push_back("boundary " + std::to_string(boundary) +
                        " skipped: missing gt flows");
      continue;
    }
    const int left = std::min<int>(cfg.window_r, static_cast<int>(a.frames.size()));
    const int right = std::min<int>(cfg.window_r, static_cast<int>(b.frames.size()));
    std::vector<const FlowField*> flows;
    for (size_t i = a.frames.size() - left; i + 1 < a.frames.size(); ++i) {
      flows.push_back(&(*a.flows)[i]);
    }
    for (int i = 0; i + 1 < right; ++i) flows.push_back(&(*b.flows)[i]);
    const PixelBox box = ChangeRegion(flows, width, height, cfg.top_fraction);

    const std::vector<Frame> wg = SwitchWindow(gen, k, cfg.window_r, box);
    const std::vector<Frame> wt = SwitchWindow(gt, k, cfg.window_r, box);
    r.parts.push_back(
        CosineSimilarity(embedder.Embed(wg, SwitchKey(gen, k, cfg.window_r)),
                         embedder.Embed(wt, SwitchKey(gt, k, cfg.window_r))));
  }
  if (!r.parts.empty()) r.score = Mean(r.parts);
  return r;
}

MetricReport EvaluateAll(const Trajectory& gen, const Trajectory& gt,
                         const MetricConfig& cfg, const Embedder* embedder) {
  cfg.Validate();
  if (gen.chunks.size() != gt.chunks.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "chunk count mismatch: gen has " +
                    std::to_string(gen.chunks.size()) + ", gt has " +
                    std::to_string(gt.chunks.size()));
  }
  for (const Trajectory* t : {&gen, &gt}) {
    ValidationReport v = ValidateTrajectory(*t);
    if (!v.ok()) {
      throw Error(ErrorKind::kSchema,
                  "trajectory '" + t->id + "' is invalid: " + v.ToString());
    }
  }
  if (gen.width() != gt.width() || gen.height() != gt.height()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "gen and gt frame sizes differ");
  }
  std::shared_ptr<const Embedder> owned;
  if (!embedder) {
    owned = MakeEmbedder(cfg.embedder);
    embedder = owned.get();
  }
  MetricReport report;
  report.trajectory = gt.id;
  report.rcbd = ComputeRcbd(gen, gt, cfg, *embedder);
  report.lpsa = ComputeLpsa(gen, gt, cfg, *embedder);
  report.cisr = ComputeCisr(gen, gt, cfg, *embedder);
  report.pmpa = ComputePmpa(gen, gt, cfg);
  report.cpdm = ComputeCpdm(gen, gt, cfg, *embedder);
  report.fphs = ComputeFphs(gen, gt, cfg, *embedder);
  return report;
}

}  // namespace wemeval

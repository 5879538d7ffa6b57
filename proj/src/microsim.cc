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

#include "wemeval/microsim.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wemeval/error.h"

namespace wemeval {
using nlohmann::json;

namespace {

constexpr float kGripperIntensity = 0.05f;

uint64_t SplitMix(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double LatticeValue(int64_t ix, int64_t iy, uint64_t seed) {
  const uint64_t h = SplitMix(seed ^ SplitMix(static_cast<uint64_t>(ix) * 0x1F1F1F1FULL ^
                                               SplitMix(static_cast<uint64_t>(iy))));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double Smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double ValueNoise(double x, double y, double spacing, uint64_t seed) {
  const double gx = x / spacing, gy = y / spacing;
  const double fx = std::floor(gx), fy = std::floor(gy);
  const int64_t ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy);
  const double tx = Smooth(gx - fx), ty = Smooth(gy - fy);
  const double a = LatticeValue(ix, iy, seed), b = LatticeValue(ix + 1, iy, seed);
  const double c = LatticeValue(ix, iy + 1, seed), d = LatticeValue(ix + 1, iy + 1, seed);
  return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

// Static scene texture in world coordinates, values in [0.1, 0.8].
double SceneTexture(double x, double y, uint64_t seed) {
  const double v = 0.6 * ValueNoise(x, y, 8.0, seed) +
                   0.4 * ValueNoise(x, y, 3.0, seed ^ 0x5DEECE66DULL);
  return 0.1 + 0.7 * v;
}

bool InGripper(int x, int y, int width, int height) {
  if (y < static_cast<int>(std::floor(0.82 * height))) return false;
  const bool left = x >= static_cast<int>(0.12 * width) && x < static_cast<int>(0.30 * width);
  const bool right = x >= static_cast<int>(0.70 * width) && x < static_cast<int>(0.88 * width);
  return left || right;
}

Homography StepTransform(const CameraMotion& m, int width, int height) {
  const double cx = 0.5 * (width - 1), cy = 0.5 * (height - 1);
  const double th = m.rotation_deg * std::numbers::pi / 180.0;
  const double a = m.zoom * std::cos(th), b = -m.zoom * std::sin(th);
  const double c = m.zoom * std::sin(th), d = m.zoom * std::cos(th);
  return Homography({a, b, cx - a * cx - b * cy + m.tx,
                     c, d, cy - c * cx - d * cy + m.ty,
                     0, 0, 1});
}

struct SimState {
  Homography camera;  // world -> image
  std::vector<Point2> centers;  // world coordinates
};

bool Covers(const SimObject& obj, Point2 center, Point2 w) {
  const double dx = w.x - center.x, dy = w.y - center.y;
  if (obj.shape == ShapeKind::kRect) {
    return std::abs(dx) <= obj.size && std::abs(dy) <= obj.size;
  }
  return dx * dx + dy * dy <= obj.size * obj.size;
}

// Advances the state by one step of `spec`. Returns the image-space
// transform of the step (identity for Manip).
Homography Advance(SimState& s, const ChunkSpec& spec, int ego, int width,
                   int height) {
  if (spec.phase == Phase::kNav) {
    const Homography step = StepTransform(spec.camera, width, height);
    s.camera = step.Compose(s.camera);
    return step;
  }
  // Solve A * dw = v for the affine camera's linear part.
  const double a = s.camera(0, 0), b = s.camera(0, 1);
  const double c = s.camera(1, 0), d = s.camera(1, 1);
  const double det = a * d - b * c;
  const double vx = spec.object.vx, vy = spec.object.vy;
  s.centers[ego].x += (d * vx - b * vy) / det;
  s.centers[ego].y += (-c * vx + a * vy) / det;
  return Homography();
}

SimState InitialState(const SimConfig& cfg) {
  SimState s;
  for (const SimObject& o : cfg.objects) s.centers.push_back({o.x, o.y});
  return s;
}

// Image-space bounding box of object `i` under the current camera.
std::array<double, 4> ImageBox(const SimState& s, const SimObject& o, int i) {
  const Point2 c = s.centers[i];
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      const Point2 p = s.camera.Project({c.x + sx * o.size, c.y + sy * o.size});
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  return {x0, y0, x1, y1};
}

// Calls visit(k, t, state, step) for every frame; `step` is the transform
// from the previous frame of the same chunk (absent for t == 0).
template <typename Visit>
void Walk(const SimConfig& cfg, Visit visit) {
  SimState s = InitialState(cfg);
  for (size_t k = 0; k < cfg.chunks.size(); ++k) {
    const ChunkSpec& spec = cfg.chunks[k];
    for (int t = 0; t < spec.steps; ++t) {
      std::optional<Homography> step;
      if (k > 0 || t > 0) {
        const Homography h = Advance(s, spec, cfg.ego_object, cfg.width, cfg.height);
        if (t > 0) step = h;
      }
      visit(k, t, static_cast<const SimState&>(s), step);
    }
  }
}

struct Rendered {
  Frame frame;
  WorldEgoMask mask;
  std::vector<uint8_t> ego_object;  // pixels covered by the ego object
};

Rendered Render(const SimConfig& cfg, const SimState& s, Phase phase) {
  Rendered r;
  r.frame = Frame::Filled(cfg.width, cfg.height, 1, 0.0f);
  r.mask = WorldEgoMask::Filled(cfg.width, cfg.height, 0.0f);
  r.ego_object.assign(static_cast<size_t>(cfg.width) * cfg.height, 0);
  const Homography inv = s.camera.Inverse();
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const size_t i = static_cast<size_t>(y) * cfg.width + x;
      const Point2 w = inv.Project({static_cast<double>(x), static_cast<double>(y)});
      float value = static_cast<float>(SceneTexture(w.x, w.y, cfg.seed));
      for (size_t o = 0; o < cfg.objects.size(); ++o) {
        if (Covers(cfg.objects[o], s.centers[o], w)) {
          value = cfg.objects[o].intensity;
          if (static_cast<int>(o) == cfg.ego_object) r.ego_object[i] = 1;
        }
      }
      const bool gripper = InGripper(x, y, cfg.width, cfg.height);
      if (gripper) value = kGripperIntensity;
      r.frame.data[i] = value;
      const bool ego = gripper || (phase == Phase::kManip && r.ego_object[i]);
      r.mask.data[i] = ego ? 1.0f : 0.0f;
    }
  }
  return r;
}

}  // namespace

void ValidateSimConfig(const SimConfig& cfg) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kConfig, "sim config '" + cfg.id + "': " + what);
  };
  if (cfg.width < 16 || cfg.height < 16) fail("frame must be at least 16x16");
  if (cfg.chunks.empty()) fail("needs at least one chunk");
  if (!(cfg.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  bool manip = false;
  for (size_t k = 0; k < cfg.chunks.size(); ++k) {
    const ChunkSpec& c = cfg.chunks[k];
    if (c.steps < 2) fail("chunk " + std::to_string(k) + " needs >= 2 steps");
    if (c.phase == Phase::kManip) manip = true;
    if (!(c.camera.zoom > 0.0)) fail("chunk " + std::to_string(k) + " zoom must be > 0");
  }
  for (size_t o = 0; o < cfg.objects.size(); ++o) {
    const SimObject& obj = cfg.objects[o];
    if (!(obj.size > 0.0)) fail("object " + std::to_string(o) + " size must be > 0");
    if (obj.intensity < 0.0f || obj.intensity > 1.0f) {
      fail("object " + std::to_string(o) + " intensity outside [0,1]");
    }
    if (obj.x < 0 || obj.y < 0 || obj.x > cfg.width - 1 || obj.y > cfg.height - 1) {
      fail("object " + std::to_string(o) + " starts outside the frame");
    }
  }
  if (manip && (cfg.ego_object < 0 ||
                cfg.ego_object >= static_cast<int>(cfg.objects.size()))) {
    fail("Manip chunks need a valid ego_object index");
  }
  if (!manip) return;
  Walk(cfg, [&](size_t k, int t, const SimState& s, const std::optional<Homography>&) {
    if (cfg.chunks[k].phase != Phase::kManip) return;
    const auto box = ImageBox(s, cfg.objects[cfg.ego_object], cfg.ego_object);
    if (box[0] < 0.0 || box[1] < 0.0 || box[2] > cfg.width - 1 ||
        box[3] > cfg.height - 1) {
      fail("ego object leaves the frame in chunk " + std::to_string(k) +
           " at frame " + std::to_string(t));
    }
  });
}

SimOutput GenerateTrajectory(const SimConfig& cfg) {
  ValidateSimConfig(cfg);
  SimOutput out;
  out.trajectory.id = cfg.id;
  std::vector<uint8_t> prev_ego_object;
  Walk(cfg, [&](size_t k, int t, const SimState& s, const std::optional<Homography>& step) {
    const ChunkSpec& spec = cfg.chunks[k];
    if (t == 0) {
      Chunk chunk;
      chunk.instruction = spec.instruction;
      chunk.phase = spec.phase;
      chunk.flows.emplace();
      chunk.masks.emplace();
      out.trajectory.chunks.push_back(std::move(chunk));
      ChunkTruth truth;
      truth.phase = spec.phase;
      out.truth.chunks.push_back(std::move(truth));
    }
    Chunk& chunk = out.trajectory.chunks.back();
    ChunkTruth& truth = out.truth.chunks.back();
    Rendered r = Render(cfg, s, spec.phase);
    if (step) {
      FlowField camera = RenderCameraFlow(*step, cfg.width, cfg.height);
      FlowField object = FlowField::Zero(cfg.width, cfg.height);
      if (spec.phase == Phase::kManip) {
        for (size_t i = 0; i < prev_ego_object.size(); ++i) {
          if (!prev_ego_object[i]) continue;
          object.u[i] = static_cast<float>(spec.object.vx);
          object.v[i] = static_cast<float>(spec.object.vy);
        }
      }
      FlowField full = FlowField::Zero(cfg.width, cfg.height);
      for (size_t i = 0; i < full.pixel_count(); ++i) {
        full.u[i] = camera.u[i] + object.u[i];
        full.v[i] = camera.v[i] + object.v[i];
      }
      chunk.flows->push_back(std::move(full));
      truth.camera_flows.push_back(std::move(camera));
      truth.object_flows.push_back(std::move(object));
      truth.homographies.push_back(*step);
    }
    chunk.frames.push_back(std::move(r.frame));
    chunk.masks->push_back(r.mask);
    truth.masks.push_back(std::move(r.mask));
    prev_ego_object = std::move(r.ego_object);
  });

  if (cfg.noise_sigma > 0.0) {
    std::mt19937_64 rng(SplitMix(cfg.seed ^ 0xA5A5A5A5ULL));
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (Chunk& c : out.trajectory.chunks) {
      for (Frame& f : c.frames) {
        for (float& v : f.data) {
          v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
        }
      }
    }
  }
  return out;
}

std::vector<PointMatch> SampleMatches(const FlowField& flow, int stride) {
  if (stride < 1) throw Error(ErrorKind::kInvalidArgument, "stride must be >= 1");
  std::vector<PointMatch> matches;
  for (int y = stride / 2; y < flow.height; y += stride) {
    for (int x = stride / 2; x < flow.width; x += stride) {
      const size_t i = flow.index(x, y);
      matches.push_back({{static_cast<double>(x), static_cast<double>(y)},
                         {x + static_cast<double>(flow.u[i]),
                          y + static_cast<double>(flow.v[i])}});
    }
  }
  return matches;
}

std::vector<size_t> InjectOutliers(std::vector<PointMatch>& matches,
                                   double fraction, std::mt19937_64& rng) {
  std::vector<size_t> order(matches.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t count = static_cast<size_t>(std::lround(fraction * matches.size()));
  order.resize(std::min(count, order.size()));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> dist(8.0, 20.0);
  for (size_t i : order) {
    const double a = angle(rng), r = dist(rng);
    matches[i].dst.x += r * std::cos(a);
    matches[i].dst.y += r * std::sin(a);
  }
  std::sort(order.begin(), order.end());
  return order;
}

const char* PerturbKindName(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::kFrameNoise: return "frame-noise";
    case PerturbKind::kChunkShuffle: return "chunk-shuffle";
    case PerturbKind::kPhaseSwap: return "phase-swap";
    case PerturbKind::kBoundarySmooth: return "boundary-smooth";
  }
  return "?";
}

std::optional<PerturbKind> ParsePerturbKind(std::string_view name) {
  for (PerturbKind k : {PerturbKind::kFrameNoise, PerturbKind::kChunkShuffle,
                        PerturbKind::kPhaseSwap, PerturbKind::kBoundarySmooth}) {
    if (name == PerturbKindName(k)) return k;
  }
  return std::nullopt;
}

int SmoothedBoundary(int chunk_count, uint64_t seed) {
  std::mt19937_64 rng(SplitMix(seed));
  return std::uniform_int_distribution<int>(0, chunk_count - 2)(rng);
}

Trajectory PerturbRollout(const Trajectory& traj, PerturbKind kind,
                          double magnitude, uint64_t seed) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw Error(ErrorKind::kInvalidArgument, "perturbation magnitude must be >= 0");
  }
  if (kind == PerturbKind::kBoundarySmooth && magnitude > 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "blend factor must lie in [0, 1]");
  }
  Trajectory out = traj;
  if (magnitude == 0.0) return out;
  const int k_count = static_cast<int>(traj.chunks.size());
  std::mt19937_64 rng(SplitMix(seed));
  switch (kind) {
    case PerturbKind::kFrameNoise: {
      std::normal_distribution<double> noise(0.0, magnitude);
      for (Chunk& c : out.chunks) {
        for (Frame& f : c.frames) {
          for (float& v : f.data) {
            v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
          }
        }
      }
      break;
    }
    case PerturbKind::kChunkShuffle: {
      if (k_count < 2) {
        throw Error(ErrorKind::kInvalidArgument, "cannot derange a single chunk");
      }
      // Sattolo's algorithm yields a single cycle, hence a derangement.
      std::vector<int> perm(k_count);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = k_count - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i - 1);
        std::swap(perm[i], perm[pick(rng)]);
      }
      for (int k = 0; k < k_count; ++k) out.chunks[k] = traj.chunks[perm[k]];
      break;
    }
    case PerturbKind::kPhaseSwap: {
      std::uniform_int_distribution<int> pick(0, k_count - 1);
      Chunk& c = out.chunks[pick(rng)];
      c.phase = c.phase == Phase::kNav ? Phase::kManip : Phase::kNav;
      break;
    }
    case PerturbKind::kBoundarySmooth: {
      if (k_count < 2) {
        throw Error(ErrorKind::kInvalidArgument, "no chunk boundary to smooth");
      }
      const int k = SmoothedBoundary(k_count, seed);
      const Frame& a = traj.chunks[k].frames.back();
      const Frame& b = traj.chunks[k + 1].frames.front();
      Frame& a_out = out.chunks[k].frames.back();
      Frame& b_out = out.chunks[k + 1].frames.front();
      const double half = 0.5 * magnitude;
      for (size_t i = 0; i < a.data.size(); ++i) {
        const double diff = static_cast<double>(b.data[i]) - a.data[i];
        a_out.data[i] = static_cast<float>(std::clamp(a.data[i] + half * diff, 0.0, 1.0));
        b_out.data[i] = static_cast<float>(std::clamp(b.data[i] - half * diff, 0.0, 1.0));
      }
      break;
    }
  }
  return out;
}

namespace {

const std::array<const char*, 4> kNavInstructions = {
    "move_forward", "turn_left", "approach_counter", "back_up"};
const std::array<const char*, 4> kManipInstructions = {
    "pick_up_plate", "push_box", "slide_cup_right", "place_bowl"};

double U(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ChunkSpec RandomChunk(std::mt19937_64& rng, Phase phase, int steps, double scale) {
  ChunkSpec c;
  c.phase = phase;
  c.steps = steps;
  const int pick = std::uniform_int_distribution<int>(0, 3)(rng);
  if (phase == Phase::kNav) {
    c.instruction = kNavInstructions[pick];
    c.camera.tx = scale * U(rng, -1.2, 1.2);
    c.camera.ty = scale * U(rng, -1.2, 1.2);
    c.camera.rotation_deg = scale * U(rng, -1.5, 1.5);
    c.camera.zoom = 1.0 + scale * U(rng, -0.02, 0.02);
  } else {
    c.instruction = kManipInstructions[pick];
    const double a = U(rng, 0.0, 2.0 * std::numbers::pi);
    const double speed = scale * U(rng, 0.4, 1.2);
    c.object.vx = speed * std::cos(a);
    c.object.vy = speed * std::sin(a);
  }
  return c;
}

std::vector<SimObject> RandomObjects(std::mt19937_64& rng, int width, int height) {
  std::vector<SimObject> objects;
  const double unit = std::min(width, height);
  SimObject ego;
  ego.shape = ShapeKind::kDisc;
  ego.size = std::max(2.0, U(rng, 0.07, 0.11) * unit);
  ego.intensity = static_cast<float>(U(rng, 0.85, 0.95));
  ego.x = U(rng, 0.4, 0.6) * (width - 1);
  ego.y = U(rng, 0.35, 0.55) * (height - 1);
  objects.push_back(ego);
  const int extra = std::uniform_int_distribution<int>(1, 2)(rng);
  for (int i = 0; i < extra; ++i) {
    SimObject o;
    o.shape = ShapeKind::kRect;
    o.size = std::max(2.0, U(rng, 0.05, 0.1) * unit);
    o.intensity = static_cast<float>(U(rng, 0.0, 1.0) < 0.5 ? U(rng, 0.0, 0.1)
                                                             : U(rng, 0.9, 1.0));
    o.x = U(rng, 0.1, 0.9) * (width - 1);
    o.y = U(rng, 0.1, 0.7) * (height - 1);
    objects.push_back(o);
  }
  return objects;
}

// Draws a config from `build(rng, scale)`, shrinking motion until valid.
template <typename Build>
SimConfig DrawValid(uint64_t seed, Build build) {
  for (double scale : {1.0, 0.6, 0.35, 0.2, 0.1, 0.0}) {
    std::mt19937_64 rng(SplitMix(seed));
    SimConfig cfg = build(rng, scale);
    try {
      ValidateSimConfig(cfg);
      return cfg;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorKind::kConfig, "could not draw a valid config for seed " +
                                      std::to_string(seed));
}

}  // namespace

SimConfig MixedPhaseConfig(uint64_t seed, int width, int height, int steps,
                           int chunks) {
  return DrawValid(seed, [&](std::mt19937_64& rng, double scale) {
    SimConfig cfg;
    cfg.id = "mixed-" + std::to_string(seed);
    cfg.seed = seed;
    cfg.width = width;
    cfg.height = height;
    cfg.objects = RandomObjects(rng, width, height);
    for (int k = 0; k < chunks; ++k) {
      cfg.chunks.push_back(
          RandomChunk(rng, k % 2 == 0 ? Phase::kNav : Phase::kManip, steps, scale));
    }
    return cfg;
  });
}

SimConfig SinglePhaseConfig(uint64_t seed, Phase phase, int width, int height,
                            int steps, int chunks) {
  return DrawValid(seed, [&](std::mt19937_64& rng, double scale) {
    SimConfig cfg;
    cfg.id = std::string(phase == Phase::kNav ? "nav-" : "manip-") +
             std::to_string(seed);
    cfg.seed = seed;
    cfg.width = width;
    cfg.height = height;
    cfg.objects = RandomObjects(rng, width, height);
    for (int k = 0; k < chunks; ++k) {
      cfg.chunks.push_back(RandomChunk(rng, phase, steps, scale));
    }
    return cfg;
  });
}

SimConfig RandomSimConfig(uint64_t seed, const RandomConfigBounds& bounds) {
  return DrawValid(seed, [&](std::mt19937_64& rng, double scale) {
    auto pick = [&](int lo, int hi) {
      return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    SimConfig cfg;
    cfg.id = "random-" + std::to_string(seed);
    cfg.seed = seed;
    cfg.width = pick(bounds.min_size, bounds.max_size);
    cfg.height = pick(bounds.min_size, bounds.max_size);
    cfg.objects = RandomObjects(rng, cfg.width, cfg.height);
    const int k_count = pick(bounds.min_chunks, bounds.max_chunks);
    for (int k = 0; k < k_count; ++k) {
      const Phase phase = pick(0, 1) ? Phase::kManip : Phase::kNav;
      cfg.chunks.push_back(
          RandomChunk(rng, phase, pick(bounds.min_steps, bounds.max_steps), scale));
    }
    return cfg;
  });
}

SimConfig ProtocolConfig(uint64_t seed) {
  SimConfig cfg = MixedPhaseConfig(seed, 64, 64, kProtocolChunkFrames, 4);
  cfg.id = "protocol-" + std::to_string(seed);
  return cfg;
}

json SimConfigToJson(const SimConfig& cfg) {
  json chunks = json::array();
  for (const ChunkSpec& c : cfg.chunks) {
    chunks.push_back({{"phase", PhaseName(c.phase)},
                      {"steps", c.steps},
                      {"instruction", c.instruction},
                      {"camera", {{"tx", c.camera.tx},
                                  {"ty", c.camera.ty},
                                  {"rotation_deg", c.camera.rotation_deg},
                                  {"zoom", c.camera.zoom}}},
                      {"object", {{"vx", c.object.vx}, {"vy", c.object.vy}}}});
  }
  json objects = json::array();
  for (const SimObject& o : cfg.objects) {
    objects.push_back({{"shape", o.shape == ShapeKind::kRect ? "rect" : "disc"},
                       {"size", o.size},
                       {"intensity", o.intensity},
                       {"x", o.x},
                       {"y", o.y}});
  }
  return {{"id", cfg.id},
          {"seed", cfg.seed},
          {"width", cfg.width},
          {"height", cfg.height},
          {"noise_sigma", cfg.noise_sigma},
          {"ego_object", cfg.ego_object},
          {"objects", std::move(objects)},
          {"chunks", std::move(chunks)}};
}

SimConfig SimConfigFromJson(const json& j) {
  try {
    SimConfig cfg;
    cfg.id = j.value("id", cfg.id);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.width = j.value("width", cfg.width);
    cfg.height = j.value("height", cfg.height);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.ego_object = j.value("ego_object", cfg.ego_object);
    for (const json& o : j.value("objects", json::array())) {
      SimObject obj;
      const std::string shape = o.value("shape", "rect");
      if (shape != "rect" && shape != "disc") {
        throw Error(ErrorKind::kConfig, "unknown shape " + shape);
      }
      obj.shape = shape == "rect" ? ShapeKind::kRect : ShapeKind::kDisc;
      obj.size = o.value("size", obj.size);
      obj.intensity = o.value("intensity", obj.intensity);
      obj.x = o.at("x").get<double>();
      obj.y = o.at("y").get<double>();
      cfg.objects.push_back(obj);
    }
    for (const json& c : j.at("chunks")) {
      ChunkSpec spec;
      const std::string phase = c.at("phase").get<std::string>();
      auto parsed = ParsePhase(phase);
      if (!parsed) throw Error(ErrorKind::kConfig, "unknown phase " + phase);
      spec.phase = *parsed;
      spec.steps = c.value("steps", spec.steps);
      spec.instruction = c.value("instruction", "");
      if (c.contains("camera")) {
        const json& m = c["camera"];
        spec.camera.tx = m.value("tx", 0.0);
        spec.camera.ty = m.value("ty", 0.0);
        spec.camera.rotation_deg = m.value("rotation_deg", 0.0);
        spec.camera.zoom = m.value("zoom", 1.0);
      }
      if (c.contains("object")) {
        spec.object.vx = c["object"].value("vx", 0.0);
        spec.object.vy = c["object"].value("vy", 0.0);
      }
      cfg.chunks.push_back(spec);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("sim config: ") + e.what());
  }
}

std::vector<SimConfig> DefaultCatalog() {
  std::vector<SimConfig> catalog;
  for (uint64_t s = 1; s <= 10; ++s) catalog.push_back(MixedPhaseConfig(s));
  for (uint64_t s = 11; s <= 12; ++s) {
    catalog.push_back(MixedPhaseConfig(s, 48, 48, 5, 3));
  }
  for (uint64_t s = 21; s <= 25; ++s) {
    catalog.push_back(SinglePhaseConfig(s, Phase::kNav));
  }
  for (uint64_t s = 31; s <= 35; ++s) {
    catalog.push_back(SinglePhaseConfig(s, Phase::kManip));
  }
  return catalog;
}

}  // namespace wemeval

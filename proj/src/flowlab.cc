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

#include "wemeval/flowlab.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "wemeval/error.h"

namespace wemeval {
namespace {

constexpr double kMinDeterminant = 1e-9;
constexpr double kMinHomogeneous = 1e-12;

// Hartley normalization: centroid to origin, mean distance sqrt(2).
struct Normalizer {
  double cx = 0.0, cy = 0.0, s = 1.0;

  Point2 Apply(Point2 p) const { return {(p.x - cx) * s, (p.y - cy) * s}; }
  Eigen::Matrix3d Matrix() const {
    Eigen::Matrix3d t;
    t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return t;
  }
  Eigen::Matrix3d InverseMatrix() const {
    Eigen::Matrix3d t;
    t << 1 / s, 0, cx, 0, 1 / s, cy, 0, 0, 1;
    return t;
  }
};

template <typename Getter>
std::optional<Normalizer> MakeNormalizer(const std::vector<PointMatch>& m,
                                         Getter get) {
  Normalizer n;
  for (const PointMatch& pm : m) {
    n.cx += get(pm).x;
    n.cy += get(pm).y;
  }
  n.cx /= m.size();
  n.cy /= m.size();
  double mean_dist = 0.0;
  for (const PointMatch& pm : m) {
    mean_dist += std::hypot(get(pm).x - n.cx, get(pm).y - n.cy);
  }
  mean_dist /= m.size();
  if (!(mean_dist > 1e-12)) return std::nullopt;
  n.s = std::sqrt(2.0) / mean_dist;
  return n;
}

double Cross(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// True if any three of the four points are (nearly) collinear. Points are
// expected in normalized coordinates (spread ~ sqrt(2)).
bool HasCollinearTriple(const std::array<Point2, 4>& p) {
  constexpr double kMinArea = 1e-6;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        if (std::abs(Cross(p[i], p[j], p[k])) < kMinArea) return true;
      }
    }
  }
  return false;
}

// DLT on already-normalized correspondences. Returns nullopt when the
// solution is not a usable homography.
std::optional<Eigen::Matrix3d> SolveDlt(const std::vector<Point2>& src,
                                        const std::vector<Point2>& dst) {
  const int n = static_cast<int>(src.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const double x = src[i].x, y = src[i].y;
    const double u = dst[i].x, v = dst[i].y;
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  if (!m.allFinite()) return std::nullopt;
  return m;
}

std::optional<Homography> FitNormalized(const std::vector<PointMatch>& matches) {
  auto ns = MakeNormalizer(matches, [](const PointMatch& m) { return m.src; });
  auto nd = MakeNormalizer(matches, [](const PointMatch& m) { return m.dst; });
  if (!ns || !nd) return std::nullopt;
  std::vector<Point2> src, dst;
  src.reserve(matches.size());
  dst.reserve(matches.size());
  for (const PointMatch& m : matches) {
    src.push_back(ns->Apply(m.src));
    dst.push_back(nd->Apply(m.dst));
  }
  if (matches.size() == 4) {
    if (HasCollinearTriple({src[0], src[1], src[2], src[3]}) ||
        HasCollinearTriple({dst[0], dst[1], dst[2], dst[3]})) {
      return std::nullopt;
    }
  }
  auto hn = SolveDlt(src, dst);
  if (!hn) return std::nullopt;
  const Eigen::Matrix3d h = nd->InverseMatrix() * (*hn) * ns->Matrix();
  if (std::abs(h(2, 2)) < kMinHomogeneous) return std::nullopt;
  std::array<double, 9> m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r * 3 + c] = h(r, c) / h(2, 2);
  }
  try {
    return Homography(m);
  } catch (const Error&) {
    return std::nullopt;
  }
}

struct Score {
  int count = 0;
  double error = 0.0;
};

Score ScoreHypothesis(const Homography& h, const std::vector<PointMatch>& m,
                      double threshold, std::vector<bool>* mask) {
  Score s;
  if (mask) mask->assign(m.size(), false);
  for (size_t i = 0; i < m.size(); ++i) {
    double e;
    try {
      e = ReprojectionError(h, m[i]);
    } catch (const Error&) {
      continue;
    }
    if (e <= threshold) {
      ++s.count;
      s.error += e;
      if (mask) (*mask)[i] = true;
    }
  }
  return s;
}

}  // namespace

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& m) {
  if (!(std::abs(m[8]) > kMinHomogeneous) || !std::isfinite(m[8])) {
    throw Error(ErrorKind::kDegenerate, "homography h[2][2] is zero");
  }
  for (int i = 0; i < 9; ++i) m_[i] = m[i] / m[8];
  const double det = Determinant();
  if (!std::isfinite(det) || std::abs(det) <= kMinDeterminant) {
    throw Error(ErrorKind::kDegenerate,
                "homography is singular (det = " + std::to_string(det) + ")");
  }
}

Homography Homography::Translation(double tx, double ty) {
  return Homography({1, 0, tx, 0, 1, ty, 0, 0, 1});
}

Homography Homography::Scale(double s) {
  return Homography({s, 0, 0, 0, s, 0, 0, 0, 1});
}

double Homography::Determinant() const {
  const auto& a = m_;
  return a[0] * (a[4] * a[8] - a[5] * a[7]) -
         a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Point2 Homography::Project(Point2 p) const {
  const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
  if (std::abs(w) < kMinHomogeneous) {
    throw Error(ErrorKind::kDegenerate,
                "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") projects to infinity");
  }
  return {(m_[0] * p.x + m_[1] * p.y + m_[2]) / w,
          (m_[3] * p.x + m_[4] * p.y + m_[5]) / w};
}

Homography Homography::Inverse() const {
  Eigen::Matrix3d m;
  m << m_[0], m_[1], m_[2], m_[3], m_[4], m_[5], m_[6], m_[7], m_[8];
  const Eigen::Matrix3d inv = m.inverse();
  std::array<double, 9> out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 3 + c] = inv(r, c);
  }
  return Homography(out);
}

Homography Homography::Compose(const Homography& other) const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (*this)(r, k) * other(k, c);
      out[r * 3 + c] = s;
    }
  }
  return Homography(out);
}

double ReprojectionError(const Homography& h, const PointMatch& match) {
  const Point2 p = h.Project(match.src);
  return std::hypot(p.x - match.dst.x, p.y - match.dst.y);
}

Homography FitHomographyDlt(const std::vector<PointMatch>& matches) {
  if (matches.size() < 4) {
    throw Error(ErrorKind::kInvalidArgument,
                "homography fit needs at least 4 matches, got " +
                    std::to_string(matches.size()));
  }
  auto h = FitNormalized(matches);
  if (!h) throw Error(ErrorKind::kDegenerate, "degenerate match configuration");
  return *h;
}

HomographyFit EstimateHomography(const std::vector<PointMatch>& matches,
                                 const RansacParams& params) {
  if (matches.size() < 4) {
    throw Error(ErrorKind::kInvalidArgument,
                "RANSAC needs at least 4 matches, got " +
                    std::to_string(matches.size()));
  }
  if (!(params.threshold > 0.0) || params.iterations < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "RANSAC threshold must be > 0 and iterations >= 1");
  }

  std::mt19937_64 rng(params.seed);
  std::vector<size_t> order(matches.size());
  std::iota(order.begin(), order.end(), 0);

  std::optional<Homography> best;
  Score best_score;
  std::vector<PointMatch> sample(4);
  for (int it = 0; it < params.iterations; ++it) {
    for (size_t i = 0; i < 4; ++i) {
      std::uniform_int_distribution<size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
      sample[i] = matches[order[i]];
    }
    auto h = FitNormalized(sample);
    if (!h) continue;
    const Score s = ScoreHypothesis(*h, matches, params.threshold, nullptr);
    if (!best || s.count > best_score.count ||
        (s.count == best_score.count && s.error < best_score.error)) {
      best = h;
      best_score = s;
    }
  }
  if (!best) {
    throw Error(ErrorKind::kDegenerate,
                "all " + std::to_string(params.iterations) +
                    " RANSAC hypotheses were degenerate");
  }

  HomographyFit fit{*best, {}, 0};
  ScoreHypothesis(fit.h, matches, params.threshold, &fit.inliers);
  std::vector<PointMatch> inliers;
  for (size_t i = 0; i < matches.size(); ++i) {
    if (fit.inliers[i]) inliers.push_back(matches[i]);
  }
  if (inliers.size() >= 4) {
    if (auto refit = FitNormalized(inliers)) fit.h = *refit;
  }
  fit.inlier_count = ScoreHypothesis(fit.h, matches, params.threshold,
                                     &fit.inliers).count;
  return fit;
}

FlowField RenderCameraFlow(const Homography& h, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::kInvalidArgument, "flow dimensions must be >= 1");
  }
  FlowField f = FlowField::Zero(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double hx = h(0, 0) * x + h(0, 1) * y + h(0, 2);
      const double hy = h(1, 0) * x + h(1, 1) * y + h(1, 2);
      const double hw = h(2, 0) * x + h(2, 1) * y + h(2, 2);
      if (std::abs(hw) < kMinHomogeneous) {
        throw Error(ErrorKind::kDegenerate, "pixel (" + std::to_string(x) + ", " +
                                                std::to_string(y) +
                                                ") projects to infinity");
      }
      const Point2 p{hx / hw, hy / hw};
      const size_t i = f.index(x, y);
      f.u[i] = static_cast<float>(p.x - x);
      f.v[i] = static_cast<float>(p.y - y);
    }
  }
  return f;
}

FlowField ResidualObjectFlow(const FlowField& flow, const FlowField& camera) {
  if (flow.width != camera.width || flow.height != camera.height) {
    throw Error(ErrorKind::kDimensionMismatch,
                "flow " + std::to_string(flow.width) + "x" +
                    std::to_string(flow.height) + " vs camera flow " +
                    std::to_string(camera.width) + "x" +
                    std::to_string(camera.height));
  }
  FlowField out = FlowField::Zero(flow.width, flow.height);
  for (size_t i = 0; i < flow.pixel_count(); ++i) {
    out.u[i] = flow.u[i] - camera.u[i];
    out.v[i] = flow.v[i] - camera.v[i];
  }
  return out;
}

size_t TopCount(size_t n, double fraction) {
  // The small slack keeps products like 0.2 * 10 from rounding up to 3.
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  return std::clamp<size_t>(static_cast<size_t>(std::max(raw, 1.0)), 1, n);
}

FlowStats ComputeFlowStats(const FlowField& flow, double top_fraction,
                           int bins) {
  FlowStats stats;
  const size_t n = flow.pixel_count();
  if (n == 0) return stats;
  std::vector<double> mags(n);
  for (size_t i = 0; i < n; ++i) mags[i] = flow.Magnitude(i);

  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  stats.median = (n % 2 == 1) ? sorted[n / 2]
                              : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const size_t top = TopCount(n, top_fraction);
  double sum = 0.0;
  for (size_t i = n - top; i < n; ++i) sum += sorted[i];
  stats.top_mean = sum / static_cast<double>(top);

  const double max_mag = sorted.back();
  if (max_mag > 0.0 && bins > 1) {
    std::vector<size_t> hist(bins, 0);
    for (double m : mags) {
      const int b = std::min(bins - 1, static_cast<int>(m / max_mag * bins));
      ++hist[b];
    }
    double h = 0.0;
    for (size_t c : hist) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / static_cast<double>(n);
      h -= p * std::log(p);
    }
    stats.entropy = std::clamp(h / std::log(static_cast<double>(bins)), 0.0, 1.0);
  }
  return stats;
}

ProfileStep ProfileStepFromStats(const FlowStats& stats, double diagonal) {
  double log_ratio;
  if (stats.median > 0.0) {
    log_ratio = std::log1p(stats.top_mean / stats.median);
  } else {
    log_ratio = std::min(kProfileLogRatioCap,
                         std::log1p(stats.top_mean / kProfileEps));
  }
  return {stats.median / diagonal, stats.top_mean / diagonal, log_ratio,
          stats.entropy};
}

MotionProfile ComputeMotionProfile(const Chunk& chunk, double top_fraction) {
  if (chunk.frames.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument,
                "motion profile needs at least 2 frames");
  }
  if (!chunk.flows || chunk.flows->empty()) {
    throw Error(ErrorKind::kInvalidArgument, "motion profile needs flows");
  }
  const Frame& f0 = chunk.frames.front();
  const double diagonal = std::hypot(static_cast<double>(f0.width),
                                     static_cast<double>(f0.height));
  MotionProfile profile;
  for (const FlowField& flow : *chunk.flows) {
    profile.steps.push_back(
        ProfileStepFromStats(ComputeFlowStats(flow, top_fraction), diagonal));
  }
  return profile;
}

MotionProfile ResampleProfile(const MotionProfile& profile, int target) {
  if (profile.steps.empty() || target < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "resampling needs a non-empty profile and target >= 1");
  }
  const size_t len = profile.steps.size();
  MotionProfile out;
  out.steps.resize(target);
  if (len == 1) {
    std::fill(out.steps.begin(), out.steps.end(), profile.steps.front());
    return out;
  }
  if (static_cast<size_t>(target) == len) return profile;
  for (int i = 0; i < target; ++i) {
    const double pos = target == 1 ? 0.0
                                   : static_cast<double>(i) * (len - 1) /
                                         static_cast<double>(target - 1);
    size_t lo = static_cast<size_t>(std::floor(pos));
    if (lo >= len - 1) lo = len - 2;
    const double t = pos - static_cast<double>(lo);
    for (int c = 0; c < 4; ++c) {
      const double a = profile.steps[lo][c];
      const double b = profile.steps[lo + 1][c];
      const double v = t == 0.0 ? a : t == 1.0 ? b : a + t * (b - a);
      out.steps[i][c] = std::clamp(v, std::min(a, b), std::max(a, b));
    }
  }
  return out;
}

}  // namespace wemeval

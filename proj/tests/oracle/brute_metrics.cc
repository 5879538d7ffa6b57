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

#include "oracle/brute_metrics.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {
namespace {

using wemeval::Chunk;
using wemeval::FlowField;
using wemeval::Frame;
using wemeval::Phase;
using wemeval::Trajectory;

using Vec = std::vector<double>;

double PixelGray(const Frame& f, int x, int y) {
  double s = 0.0;
  for (int c = 0; c < f.channels; ++c) {
    s += f.data[(static_cast<size_t>(y) * f.width + x) * f.channels + c];
  }
  return s / f.channels;
}

// Cell i of g along an axis of length e spans [i*e/g, (i+1)*e/g), widened to
// one pixel when that is empty.
void Cell(int i, int g, int e, int* lo, int* hi) {
  *lo = i * e / g;
  *hi = (i + 1) * e / g;
  if (*hi <= *lo) *hi = *lo + 1;
}

Vec FrameStats(const Frame& f, int grid) {
  Vec means, stds;
  for (int gy = 0; gy < grid; ++gy) {
    for (int gx = 0; gx < grid; ++gx) {
      int x0, x1, y0, y1;
      Cell(gx, grid, f.width, &x0, &x1);
      Cell(gy, grid, f.height, &y0, &y1);
      Vec px;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) px.push_back(PixelGray(f, x, y));
      }
      double m = 0.0;
      for (double v : px) m += v;
      m /= px.size();
      double ss = 0.0;
      for (double v : px) ss += (v - m) * (v - m);
      means.push_back(m);
      stds.push_back(std::sqrt(ss / px.size()));
    }
  }
  means.insert(means.end(), stds.begin(), stds.end());
  return means;
}

Vec Embed(const std::vector<Frame>& frames, int grid) {
  Vec acc(2 * grid * grid, 0.0);
  for (const Frame& f : frames) {
    const Vec s = FrameStats(f, grid);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
  }
  double norm = 0.0;
  for (double& v : acc) {
    v /= frames.size();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& v : acc) v /= norm;
  }
  return acc;
}

double Cos(const Vec& a, const Vec& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::max(-1.0, std::min(1.0, ab / (std::sqrt(aa) * std::sqrt(bb))));
}

double Match(double x, double y, double eps) {
  x = std::max(x, eps);
  y = std::max(y, eps);
  return std::exp(-std::abs(std::log(x / y)));
}

Vec Magnitudes(const FlowField& f) {
  Vec m;
  for (size_t i = 0; i < f.u.size(); ++i) {
    const double u = f.u[i], v = f.v[i];
    m.push_back(std::sqrt(u * u + v * v));
  }
  return m;
}

double MeanOf(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

size_t HowManyTop(size_t n, double fraction) {
  double c = std::ceil(fraction * n - 1e-9);
  if (c < 1.0) c = 1.0;
  if (c > n) c = static_cast<double>(n);
  return static_cast<size_t>(c);
}

std::vector<double> ProfileStep(const FlowField& f, double diag, double top) {
  Vec m = Magnitudes(f);
  const size_t n = m.size();
  Vec asc = m;
  std::sort(asc.begin(), asc.end());
  const double median = n % 2 ? asc[n / 2] : (asc[n / 2 - 1] + asc[n / 2]) / 2.0;
  const size_t k = HowManyTop(n, top);
  double tsum = 0.0;
  for (size_t i = 0; i < k; ++i) tsum += asc[n - 1 - i];
  const double top_mean = tsum / k;
  const double mx = asc.back();
  double entropy = 0.0;
  if (mx > 0.0) {
    std::vector<int> hist(16, 0);
    for (double v : m) {
      int b = static_cast<int>(v / mx * 16);
      if (b > 15) b = 15;
      hist[b]++;
    }
    for (int c : hist) {
      if (c > 0) {
        const double p = static_cast<double>(c) / n;
        entropy -= p * std::log(p);
      }
    }
    entropy /= std::log(16.0);
  }
  double ratio = median > 0.0 ? std::log(1.0 + top_mean / median)
                              : std::log(1.0 + top_mean / 1e-6);
  if (median <= 0.0 && ratio > 20.0) ratio = 20.0;
  return {median / diag, top_mean / diag, ratio, entropy};
}

std::vector<Vec> Resample(const std::vector<Vec>& prof, int target) {
  std::vector<Vec> out;
  const size_t len = prof.size();
  for (int i = 0; i < target; ++i) {
    if (len == 1) {
      out.push_back(prof[0]);
      continue;
    }
    const double pos = static_cast<double>(i) * (len - 1) / (target - 1);
    size_t lo = static_cast<size_t>(pos);
    if (lo > len - 2) lo = len - 2;
    const double t = pos - lo;
    Vec s(4);
    for (int c = 0; c < 4; ++c) s[c] = prof[lo][c] * (1.0 - t) + prof[lo + 1][c] * t;
    out.push_back(s);
  }
  return out;
}

std::vector<Frame> Slice(const Chunk& c, size_t first, size_t count) {
  return std::vector<Frame>(c.frames.begin() + first, c.frames.begin() + first + count);
}

Frame Crop(const Frame& f, int x0, int y0, int x1, int y1) {
  Frame out;
  out.width = x1 - x0;
  out.height = y1 - y0;
  out.channels = f.channels;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < f.channels; ++c) {
        out.data.push_back(f.data[(static_cast<size_t>(y) * f.width + x) * f.channels + c]);
      }
    }
  }
  return out;
}

}  // namespace

Scores Evaluate(const Trajectory& gen, const Trajectory& gt, const Params& p) {
  Scores s;
  const size_t kk = gt.chunks.size();

  // Chunk-level embeddings.
  std::vector<Vec> eg, et;
  for (size_t k = 0; k < kk; ++k) {
    eg.push_back(Embed(gen.chunks[k].frames, p.grid));
    et.push_back(Embed(gt.chunks[k].frames, p.grid));
  }

  // Boundary continuity.
  if (kk >= 2) {
    double total = 0.0;
    for (size_t k = 0; k + 1 < kk; ++k) {
      auto gaps = [&](const Trajectory& t, double* app, double* mot) {
        const Vec a = Embed({t.chunks[k].frames.back()}, p.grid);
        const Vec b = Embed({t.chunks[k + 1].frames.front()}, p.grid);
        bool za = true, zb = true;
        for (double v : a) za = za && v == 0.0;
        for (double v : b) zb = zb && v == 0.0;
        *app = (za && zb) ? 0.0 : std::max(0.0, std::min(2.0, 1.0 - Cos(a, b)));
        *mot = std::abs(MeanOf(Magnitudes(t.chunks[k].flows->back())) -
                        MeanOf(Magnitudes(t.chunks[k + 1].flows->front())));
      };
      double ga, gm, ta, tm;
      gaps(gen, &ga, &gm);
      gaps(gt, &ta, &tm);
      total += std::sqrt(Match(ga, ta, p.eps) * Match(gm, tm, p.eps));
    }
    s.rcbd = total / (kk - 1);
  }

  // Late-chunk appearance, weights 1..K.
  {
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < kk; ++k) {
      const Chunk& a = gen.chunks[k];
      const Chunk& b = gt.chunks[k];
      const size_t wa = std::min<size_t>(p.w, a.frames.size());
      const size_t wb = std::min<size_t>(p.w, b.frames.size());
      const double r = Cos(Embed(Slice(a, a.frames.size() - wa, wa), p.grid),
                           Embed(Slice(b, b.frames.size() - wb, wb), p.grid));
      num += (k + 1) * r;
      den += k + 1;
    }
    s.lpsa = num / den;
  }

  // Chunk identity retrieval, pessimistic ranks.
  {
    double total = 0.0;
    for (size_t k = 0; k < kk; ++k) {
      const double mine = Cos(eg[k], et[k]);
      int rank = 0;
      for (size_t j = 0; j < kk; ++j) {
        if (Cos(eg[k], et[j]) >= mine) rank++;
      }
      total += 1.0 / rank;
    }
    s.cisr = total / kk;
  }

  // Motion profiles.
  {
    double total = 0.0;
    int used = 0;
    for (size_t k = 0; k < kk; ++k) {
      const Chunk& a = gen.chunks[k];
      const Chunk& b = gt.chunks[k];
      if (a.frames.size() < 2 || b.frames.size() < 2 || !a.flows || !b.flows) continue;
      auto profile = [&](const Chunk& c) {
        const double diag = std::sqrt(static_cast<double>(c.frames[0].width) * c.frames[0].width +
                                      static_cast<double>(c.frames[0].height) * c.frames[0].height);
        std::vector<Vec> steps;
        for (const FlowField& f : *c.flows) steps.push_back(ProfileStep(f, diag, p.top));
        return Resample(steps, p.steps);
      };
      const auto pa = profile(a), pb = profile(b);
      double delta = 0.0;
      for (int i = 0; i < p.steps; ++i) {
        double d2 = 0.0;
        for (int c = 0; c < 4; ++c) d2 += (pa[i][c] - pb[i][c]) * (pa[i][c] - pb[i][c]);
        delta += std::sqrt(d2);
      }
      delta /= p.steps;
      total += std::exp(-delta / p.tau_pmpa);
      used++;
    }
    if (used > 0) s.pmpa = total / used;
  }

  // Cross-phase discrimination.
  {
    bool nav = false, manip = false;
    for (const Chunk& c : gt.chunks) {
      if (c.phase == Phase::kNav) nav = true;
      if (c.phase == Phase::kManip) manip = true;
    }
    if (nav && manip) {
      double total = 0.0;
      for (size_t k = 0; k < kk; ++k) {
        const double pos = Cos(eg[k], et[k]);
        double neg = -1e300;
        for (size_t j = 0; j < kk; ++j) {
          if (gt.chunks[j].phase != gen.chunks[k].phase) neg = std::max(neg, Cos(eg[k], et[j]));
        }
        total += 1.0 / (1.0 + std::exp(-(pos - neg) / p.tau_cpdm));
      }
      s.cpdm = total / kk;
    }
  }

  // Phase-switch hotspots.
  {
    double total = 0.0;
    int used = 0;
    const int width = gt.chunks[0].frames[0].width;
    const int height = gt.chunks[0].frames[0].height;
    for (size_t k = 0; k + 1 < kk; ++k) {
      if (gt.chunks[k].phase == gt.chunks[k + 1].phase) continue;
      const Chunk& a = gt.chunks[k];
      const Chunk& b = gt.chunks[k + 1];
      const size_t left = std::min<size_t>(p.r, a.frames.size());
      const size_t right = std::min<size_t>(p.r, b.frames.size());
      Vec acc(static_cast<size_t>(width) * height, 0.0);
      // Flow i links frames i and i + 1; keep those inside the window.
      for (size_t i = 0; i + 1 < a.frames.size(); ++i) {
        if (i < a.frames.size() - left) continue;
        const Vec m = Magnitudes((*a.flows)[i]);
        for (size_t q = 0; q < acc.size(); ++q) acc[q] += m[q];
      }
      for (size_t i = 0; i + 1 < right; ++i) {
        const Vec m = Magnitudes((*b.flows)[i]);
        for (size_t q = 0; q < acc.size(); ++q) acc[q] += m[q];
      }
      Vec desc = acc;
      std::sort(desc.begin(), desc.end(), [](double x, double y) { return x > y; });
      const double cutoff = desc[HowManyTop(acc.size(), p.top) - 1];
      int x0 = width, y0 = height, x1 = -1, y1 = -1;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          if (acc[static_cast<size_t>(y) * width + x] < cutoff) continue;
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
      }
      auto window = [&](const Trajectory& t) {
        const Chunk& ca = t.chunks[k];
        const Chunk& cb = t.chunks[k + 1];
        const size_t l = std::min<size_t>(p.r, ca.frames.size());
        const size_t r = std::min<size_t>(p.r, cb.frames.size());
        std::vector<Frame> out;
        for (size_t i = ca.frames.size() - l; i < ca.frames.size(); ++i) {
          out.push_back(Crop(ca.frames[i], x0, y0, x1 + 1, y1 + 1));
        }
        for (size_t i = 0; i < r; ++i) out.push_back(Crop(cb.frames[i], x0, y0, x1 + 1, y1 + 1));
        return out;
      };
      total += Cos(Embed(window(gen), p.grid), Embed(window(gt), p.grid));
      used++;
    }
    if (used > 0) s.fphs = total / used;
  }
  return s;
}

}  // namespace oracle

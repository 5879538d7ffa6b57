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

#include <cstring>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_util.h"
#include "wemeval/featurizer.h"

namespace wemeval {
namespace {

using testing::TempDir;
using testing::ThrownKind;

Frame RandomFrame(std::mt19937& rng, int w = 9, int h = 7, int c = 1) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Frame f = Frame::Filled(w, h, c, 0.0f);
  for (float& v : f.data) v = u(rng);
  return f;
}

TEST(EmbedTest, UniformGrayGridTwo) {
  const Frame gray = Frame::Filled(4, 4, 1, 0.5f);
  const ReferenceEmbedder e(2);
  const std::vector<Frame> frames = {gray};
  const EmbeddingVector raw = e.RawFeatures(frames);
  EXPECT_EQ(raw.values, (std::vector<double>{0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0}));
  const EmbeddingVector v = e.Embed(frames);
  EXPECT_EQ(v.values, (std::vector<double>{0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0}));
}

TEST(EmbedTest, IdenticalListsGiveIdenticalVectors) {
  std::mt19937 rng(1);
  const std::vector<Frame> frames = {RandomFrame(rng), RandomFrame(rng)};
  const ReferenceEmbedder e;
  EXPECT_EQ(e.Embed(frames).values, e.Embed(frames).values);
  EXPECT_DOUBLE_EQ(CosineSimilarity(e.Embed(frames), e.Embed(frames)), 1.0);
}

TEST(EmbedTest, BlackFramesGiveZeroVector) {
  const std::vector<Frame> frames(2, Frame::Filled(8, 8, 3, 0.0f));
  const EmbeddingVector v = ReferenceEmbedder().Embed(frames);
  EXPECT_EQ(v.dim(), 128u);
  EXPECT_EQ(v.Norm(), 0.0);
}

TEST(EmbedTest, ColorUsesChannelMean) {
  Frame rgb = Frame::Filled(2, 2, 3, 0.0f);
  for (size_t i = 0; i < rgb.data.size(); i += 3) {
    rgb.data[i] = 0.9f;
    rgb.data[i + 1] = 0.3f;
  }
  const std::vector<Frame> a = {rgb};
  const std::vector<Frame> b = {Frame::Filled(2, 2, 1, 0.4f)};
  const ReferenceEmbedder e(1);
  EXPECT_NEAR(e.RawFeatures(a).values[0], 0.4, 1e-7);
  EXPECT_NEAR(CosineSimilarity(e.Embed(a), e.Embed(b)), 1.0, 1e-12);
}

TEST(EmbedTest, CellStatisticsMatchHandComputation) {
  Frame f = Frame::Filled(2, 2, 1, 0.0f);
  f.data = {0.0f, 1.0f, 0.5f, 0.5f};
  const std::vector<Frame> frames = {f};
  const EmbeddingVector raw = ReferenceEmbedder(1).RawFeatures(frames);
  EXPECT_DOUBLE_EQ(raw.values[0], 0.5);
  EXPECT_NEAR(raw.values[1], std::sqrt(0.125), 1e-12);
}

TEST(EmbedTest, GridLargerThanFrameStillCoversPixels) {
  std::mt19937 rng(2);
  const std::vector<Frame> frames = {RandomFrame(rng, 3, 2)};
  const EmbeddingVector v = ReferenceEmbedder(8).Embed(frames);
  EXPECT_EQ(v.dim(), 128u);
  for (double x : v.values) EXPECT_TRUE(std::isfinite(x));
  EXPECT_NEAR(v.Norm(), 1.0, 1e-12);
}

TEST(EmbedTest, FrameOrderDoesNotMatter) {
  std::mt19937 rng(3);
  std::vector<Frame> frames = {RandomFrame(rng), RandomFrame(rng), RandomFrame(rng)};
  const ReferenceEmbedder e;
  const EmbeddingVector a = e.Embed(frames);
  std::swap(frames[0], frames[2]);
  const EmbeddingVector b = e.Embed(frames);
  for (size_t i = 0; i < a.dim(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-15);
}

TEST(EmbedTest, RejectsEmptyAndMixedShapes) {
  const ReferenceEmbedder e;
  EXPECT_EQ(ThrownKind([&] { e.Embed(std::vector<Frame>{}); }), ErrorKind::kInvalidArgument);
  const std::vector<Frame> mixed = {Frame::Filled(2, 2, 1, 0.f), Frame::Filled(3, 2, 1, 0.f)};
  EXPECT_EQ(ThrownKind([&] { e.Embed(mixed); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(ThrownKind([] { ReferenceEmbedder(0); }), ErrorKind::kInvalidArgument);
}

TEST(CosineTest, Examples) {
  const EmbeddingVector a{{1, 2, 3}};
  const EmbeddingVector neg{{-1, -2, -3}};
  EXPECT_DOUBLE_EQ(CosineSimilarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(CosineSimilarity(EmbeddingVector{{1, 0}}, EmbeddingVector{{0, 1}}), 0.0);
  EXPECT_DOUBLE_EQ(CosineSimilarity(a, neg), -1.0);
  EXPECT_EQ(CosineSimilarity(a, EmbeddingVector{{0, 0, 0}}), 0.0);
  EXPECT_EQ(ThrownKind([&] { CosineSimilarity(a, EmbeddingVector{{1, 2}}); }),
            ErrorKind::kDimensionMismatch);
}

TEST(CosineTest, ScaleInvariant) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    EmbeddingVector a, b;
    for (int i = 0; i < 16; ++i) {
      a.values.push_back(n(rng));
      b.values.push_back(n(rng));
    }
    EmbeddingVector scaled = a;
    const double lambda = std::exp(n(rng) * 3);
    for (double& v : scaled.values) v *= lambda;
    EXPECT_NEAR(CosineSimilarity(scaled, b), CosineSimilarity(a, b), 1e-12);
  }
}

TEST(PerceptualDistanceTest, Examples) {
  EmbedderSpec spec;
  std::mt19937 rng(5);
  const Frame f = RandomFrame(rng);
  EXPECT_NEAR(PerceptualDistance(f, f, spec), 0.0, 1e-12);
  const Frame black = Frame::Filled(4, 4, 1, 0.0f);
  EXPECT_EQ(PerceptualDistance(black, black, spec), 0.0);
  // Black against its negative under a one-cell grid: zero vs. nonzero
  // embedding, cosine 0, distance 1.
  EmbedderSpec one;
  one.grid = 1;
  const double d = PerceptualDistance(black, Frame::Filled(4, 4, 1, 1.0f), one);
  EXPECT_GT(d, 0.0);
  EXPECT_LE(d, 2.0);
  EXPECT_DOUBLE_EQ(d, 1.0);
}

TEST(PerceptualDistanceTest, SymmetricAndBounded) {
  std::mt19937 rng(6);
  const ReferenceEmbedder e(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Frame a = RandomFrame(rng), b = RandomFrame(rng);
    const double ab = PerceptualDistance(a, b, e);
    EXPECT_DOUBLE_EQ(ab, PerceptualDistance(b, a, e));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 2.0);
    EXPECT_NEAR(PerceptualDistance(a, a, e), 0.0, 1e-12);
  }
}

TEST(CropTest, CopiesRectangle) {
  Frame f = Frame::Filled(4, 3, 1, 0.0f);
  for (size_t i = 0; i < f.data.size(); ++i) f.data[i] = static_cast<float>(i) / 16.0f;
  const Frame c = CropFrame(f, 1, 1, 3, 3);
  EXPECT_EQ(c.width, 2);
  EXPECT_EQ(c.height, 2);
  EXPECT_EQ(c.data, (std::vector<float>{5 / 16.f, 6 / 16.f, 9 / 16.f, 10 / 16.f}));
}

void WriteIndex(const TempDir& dir, const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  nlohmann::json index = nlohmann::json::object();
  std::ofstream blob(dir / "vectors.bin", std::ios::binary);
  int64_t offset = 0;
  for (const auto& [key, values] : rows) {
    blob.write(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(float));
    index[key] = {{"dim", values.size()}, {"file", "vectors.bin"}, {"offset", offset}};
    offset += static_cast<int64_t>(values.size() * sizeof(float));
  }
  std::ofstream(dir / "index.json") << index.dump();
}

TEST(ExternalEmbedderTest, LooksUpAndNormalizes) {
  TempDir dir;
  WriteIndex(dir, {{EmbedKey("t", 0, 0, 3), {3.0f, 4.0f}}, {EmbedKey("t", 1, 2, 3), {0.0f, 2.0f}}});
  const ExternalEmbedder e(dir / "index.json");
  EXPECT_EQ(e.size(), 2u);
  const std::vector<Frame> frames = {Frame::Filled(2, 2, 1, 0.f)};
  const EmbeddingVector v = e.Embed(frames, "t/0/0-3");
  EXPECT_NEAR(v.values[0], 0.6, 1e-7);
  EXPECT_NEAR(v.values[1], 0.8, 1e-7);
  EXPECT_NEAR(e.Embed(frames, "t/1/2-3").values[1], 1.0, 1e-12);
  EXPECT_EQ(ThrownKind([&] { e.Embed(frames, "t/9/0-0"); }), ErrorKind::kAssetMissing);
}

TEST(ExternalEmbedderTest, SpecBuildsExternalEmbedder) {
  TempDir dir;
  WriteIndex(dir, {{"x/0/0-0", {1.0f, 0.0f, 0.0f}}});
  EmbedderSpec spec;
  spec.kind = EmbedderSpec::Kind::kExternalFile;
  spec.source = dir / "index.json";
  const std::vector<Frame> frames = {Frame::Filled(2, 2, 1, 0.f)};
  EXPECT_EQ(EmbedFrames(frames, spec, "x/0/0-0").values, (std::vector<double>{1, 0, 0}));
  spec.source = dir / "missing.json";
  EXPECT_EQ(ThrownKind([&] { MakeEmbedder(spec); }), ErrorKind::kMissingFile);
}

TEST(ExternalEmbedderTest, BlobTooShortIsSchemaError) {
  TempDir dir;
  WriteIndex(dir, {{"k", {1.0f}}});
  nlohmann::json index = {{"k", {{"dim", 4}, {"file", "vectors.bin"}, {"offset", 0}}}};
  std::ofstream(dir / "index.json") << index.dump();
  EXPECT_EQ(ThrownKind([&] { ExternalEmbedder(dir / "index.json"); }), ErrorKind::kSchema);
}

TEST(EmbedKeyTest, Format) {
  EXPECT_EQ(EmbedKey("traj", 2, 3, 5), "traj/2/3-5");
  EXPECT_EQ(EmbedKey("traj", 0, 0, 7, "fphs"), "traj/0/0-7/fphs");
}

}  // namespace
}  // namespace wemeval

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

#include "wemeval/payload_io.h"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "wemeval/error.h"

namespace wemeval {
namespace {

constexpr std::array<char, 4> kFrameMagic = {'W', 'E', 'M', 'V'};
constexpr std::array<char, 4> kFlowMagic = {'W', 'E', 'M', 'F'};
constexpr std::array<char, 4> kMaskMagic = {'W', 'E', 'M', 'M'};

// Upper bound on a single payload so a corrupt header cannot request an
// absurd allocation.
constexpr uint64_t kMaxElements = uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
      throw Error(ErrorKind::kIo, "cannot open for writing: " + path.string());
    }
  }

  void Magic(const std::array<char, 4>& magic) { out_.write(magic.data(), 4); }

  void U32(uint32_t value) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(value >> (8 * i));
    out_.write(reinterpret_cast<const char*>(b), 4);
  }

  void F32(float value) { U32(std::bit_cast<uint32_t>(value)); }

  void U8(uint8_t value) { out_.put(static_cast<char>(value)); }

  void Finish() {
    out_.flush();
    if (!out_) throw Error(ErrorKind::kIo, "write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorKind::kMissingFile, "cannot open: " + path.string());
    }
    bytes_.assign(std::istreambuf_iterator<char>(in),
                  std::istreambuf_iterator<char>());
  }

  void ExpectMagic(const std::array<char, 4>& magic) {
    Need(4);
    if (std::memcmp(bytes_.data(), magic.data(), 4) != 0) {
      throw Error(ErrorKind::kSchema,
                  path_.string() + ": bad magic, expected " +
                      std::string(magic.data(), 4));
    }
    pos_ = 4;
  }

  uint32_t U32() {
    Need(4);
    uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      value |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
               << (8 * i);
    }
    pos_ += 4;
    return value;
  }

  float F32() { return std::bit_cast<float>(U32()); }

  uint8_t U8() {
    Need(1);
    return static_cast<uint8_t>(bytes_[pos_++]);
  }

  void ExpectRemaining(uint64_t count) {
    if (bytes_.size() - pos_ != count) {
      throw Error(ErrorKind::kSchema,
                  path_.string() + ": payload size " +
                      std::to_string(bytes_.size() - pos_) +
                      " does not match header (" + std::to_string(count) + ")");
    }
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  void Need(size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorKind::kSchema, path_.string() + ": truncated payload");
    }
  }

  std::filesystem::path path_;
  std::vector<char> bytes_;
  size_t pos_ = 0;
};

uint64_t CheckedElements(const Reader& r, std::initializer_list<uint32_t> dims) {
  uint64_t n = 1;
  for (uint32_t d : dims) {
    n *= d;
    if (n > kMaxElements) {
      throw Error(ErrorKind::kSchema, r.path().string() + ": header too large");
    }
  }
  return n;
}

}  // namespace

void WriteFrames(const std::filesystem::path& path,
                 const std::vector<Frame>& frames) {
  Writer w(path);
  w.Magic(kFrameMagic);
  const Frame* first = frames.empty() ? nullptr : &frames.front();
  w.U32(first ? first->width : 0);
  w.U32(first ? first->height : 0);
  w.U32(first ? first->channels : 1);
  w.U32(static_cast<uint32_t>(frames.size()));
  for (const Frame& f : frames) {
    if (f.width != first->width || f.height != first->height ||
        f.channels != first->channels) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "frames written to " + path.string() + " differ in shape");
    }
    for (float v : f.data) w.F32(v);
  }
  w.Finish();
}

std::vector<Frame> ReadFrames(const std::filesystem::path& path) {
  Reader r(path);
  r.ExpectMagic(kFrameMagic);
  const uint32_t width = r.U32();
  const uint32_t height = r.U32();
  const uint32_t channels = r.U32();
  const uint32_t count = r.U32();
  const uint64_t per_frame = CheckedElements(r, {width, height, channels});
  r.ExpectRemaining(CheckedElements(r, {count, 4}) * per_frame);
  std::vector<Frame> frames(count);
  for (Frame& f : frames) {
    f.width = static_cast<int>(width);
    f.height = static_cast<int>(height);
    f.channels = static_cast<int>(channels);
    f.data.resize(per_frame);
    for (float& v : f.data) v = r.F32();
  }
  return frames;
}

void WriteFlows(const std::filesystem::path& path,
                const std::vector<FlowField>& flows) {
  Writer w(path);
  w.Magic(kFlowMagic);
  const FlowField* first = flows.empty() ? nullptr : &flows.front();
  w.U32(first ? first->width : 0);
  w.U32(first ? first->height : 0);
  w.U32(static_cast<uint32_t>(flows.size()));
  for (const FlowField& f : flows) {
    if (f.width != first->width || f.height != first->height) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "flows written to " + path.string() + " differ in shape");
    }
    for (size_t i = 0; i < f.pixel_count(); ++i) {
      w.F32(f.u[i]);
      w.F32(f.v[i]);
    }
  }
  w.Finish();
}

std::vector<FlowField> ReadFlows(const std::filesystem::path& path) {
  Reader r(path);
  r.ExpectMagic(kFlowMagic);
  const uint32_t width = r.U32();
  const uint32_t height = r.U32();
  const uint32_t count = r.U32();
  const uint64_t pixels = CheckedElements(r, {width, height});
  r.ExpectRemaining(CheckedElements(r, {count, 8}) * pixels);
  std::vector<FlowField> flows(count);
  for (FlowField& f : flows) {
    f = FlowField::Zero(static_cast<int>(width), static_cast<int>(height));
    for (size_t i = 0; i < pixels; ++i) {
      f.u[i] = r.F32();
      f.v[i] = r.F32();
    }
  }
  return flows;
}

void WriteMasks(const std::filesystem::path& path,
                const std::vector<WorldEgoMask>& masks) {
  Writer w(path);
  w.Magic(kMaskMagic);
  const WorldEgoMask* first = masks.empty() ? nullptr : &masks.front();
  w.U32(first ? first->width : 0);
  w.U32(first ? first->height : 0);
  w.U32(static_cast<uint32_t>(masks.size()));
  for (const WorldEgoMask& m : masks) {
    if (m.width != first->width || m.height != first->height) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "masks written to " + path.string() + " differ in shape");
    }
    for (float v : m.data) w.U8(v >= 0.5f ? 1 : 0);
  }
  w.Finish();
}

std::vector<WorldEgoMask> ReadMasks(const std::filesystem::path& path) {
  Reader r(path);
  r.ExpectMagic(kMaskMagic);
  const uint32_t width = r.U32();
  const uint32_t height = r.U32();
  const uint32_t count = r.U32();
  const uint64_t pixels = CheckedElements(r, {width, height});
  r.ExpectRemaining(CheckedElements(r, {count}) * pixels);
  std::vector<WorldEgoMask> masks(count);
  for (WorldEgoMask& m : masks) {
    m = WorldEgoMask::Filled(static_cast<int>(width), static_cast<int>(height),
                             0.0f);
    for (float& v : m.data) {
      const uint8_t b = r.U8();
      if (b > 1) {
        throw Error(ErrorKind::kSchema,
                    path.string() + ": mask value " + std::to_string(b) +
                        " outside {0,1}");
      }
      v = static_cast<float>(b);
    }
  }
  return masks;
}

}  // namespace wemeval

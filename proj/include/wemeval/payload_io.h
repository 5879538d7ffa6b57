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

#ifndef WEMEVAL_PAYLOAD_IO_H_
#define WEMEVAL_PAYLOAD_IO_H_

#include <filesystem>
#include <vector>

#include "wemeval/rollout_model.h"

namespace wemeval {

// Sidecar binary payloads. All integers and floats are little-endian.
//
//   frames: "WEMV" u32 width, u32 height, u32 channels, u32 count,
//           count*height*width*channels f32, row-major, channel-interleaved
//   flows:  "WEMF" u32 width, u32 height, u32 count,
//           count*height*width (u,v) f32 pairs, row-major
//   masks:  "WEMM" u32 width, u32 height, u32 count,
//           count*height*width u8 values in {0,1}

void WriteFrames(const std::filesystem::path& path,
                 const std::vector<Frame>& frames);
std::vector<Frame> ReadFrames(const std::filesystem::path& path);

void WriteFlows(const std::filesystem::path& path,
                const std::vector<FlowField>& flows);
std::vector<FlowField> ReadFlows(const std::filesystem::path& path);

// Values >= 0.5 are written as 1.
void WriteMasks(const std::filesystem::path& path,
                const std::vector<WorldEgoMask>& masks);
std::vector<WorldEgoMask> ReadMasks(const std::filesystem::path& path);

}  // namespace wemeval

#endif  // WEMEVAL_PAYLOAD_IO_H_

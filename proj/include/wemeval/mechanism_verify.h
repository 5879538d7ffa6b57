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

#ifndef WEMEVAL_MECHANISM_VERIFY_H_
#define WEMEVAL_MECHANISM_VERIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "wemeval/mechanism_kernel.h"

namespace wemeval {

struct InvariantOutcome {
  std::string name;
  int trials = 0;
  int failures = 0;
  // First failing instance; null when every trial passed. Instances grow
  // with the trial index, so the first failure is also among the smallest.
  nlohmann::json counterexample;

  bool passed() const { return failures == 0; }
};

struct VerificationReport {
  uint64_t seed = 0;
  int trials = 0;
  std::vector<InvariantOutcome> invariants;

  bool passed() const;
  nlohmann::json ToJson() const;
};

// Segment-level restatement of the role-conditioned attention rules, used to
// cross-check BuildRcaMask one (row, col) pair at a time.
bool RcaRuleAllows(const std::vector<Segment>& segments, const RcaOptions& opts,
                   int row, int col);

// Runs every mechanism invariant over `trials` random instances. Throws
// kInvalidArgument for trials < 1.
VerificationReport VerifyMechanisms(uint64_t seed, int trials);

}  // namespace wemeval

#endif  // WEMEVAL_MECHANISM_VERIFY_H_

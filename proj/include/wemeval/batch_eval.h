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

#ifndef WEMEVAL_BATCH_EVAL_H_
#define WEMEVAL_BATCH_EVAL_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wemeval/metrics.h"

namespace wemeval {

struct EvalPair {
  std::string gen;
  std::string gt;
};

// Reads [{"gen": path, "gt": path}, ...]. Relative paths are resolved against
// the list's directory.
std::vector<EvalPair> LoadPairList(const std::filesystem::path& path);

struct BatchOptions {
  MetricConfig metrics;
  int workers = 1;
};

struct BatchSummary {
  size_t pairs = 0;
  size_t evaluated = 0;
  size_t failed = 0;   // evaluation errors such as a chunk-count mismatch
  size_t invalid = 0;  // manifests that could not be loaded or validated
  double seconds = 0.0;

  // 2 if any manifest was invalid, else 1 if any pair failed, else 0.
  int exit_code() const;
};

// Evaluates every pair and streams line-delimited JSON to `out`:
//
//   {"config": {...}}
//   {"pair": i, "gen": ..., "gt": ..., "trajectory": ..., "scores": ...}
//   {"pair": i, "gen": ..., "gt": ..., "error": {"kind": ..., "message": ...}}
//   {"aggregate": {...}, "config": {...}}
//
// Lines are emitted in input order regardless of the worker count, so the
// output is a function of the inputs and config only.
BatchSummary RunBatchEval(const std::vector<EvalPair>& pairs,
                          const BatchOptions& options, std::ostream& out);

// {"pairs", "evaluated", "failed", "means": {metric: mean|null},
//  "counts": {metric: n}} over report lines (those carrying "scores") and
// error lines.
nlohmann::json AggregateReports(const std::vector<nlohmann::json>& lines);

// Concatenates the per-pair lines of several report files and appends a
// fresh aggregate. Throws kConfig when the files were produced under
// different configs and kSchema on malformed lines.
BatchSummary MergeReports(const std::vector<std::filesystem::path>& inputs,
                          std::ostream& out);

// Worker count precedence: flag, then the WEMEVAL_THREADS environment
// value, then the config file, then the hardware concurrency. Throws kConfig
// for values < 1 or an unparsable environment value.
int ResolveWorkerCount(std::optional<int> flag, const char* env_value,
                       std::optional<int> file_value);

}  // namespace wemeval

#endif  // WEMEVAL_BATCH_EVAL_H_

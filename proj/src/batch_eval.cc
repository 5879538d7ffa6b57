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

#include "wemeval/batch_eval.h"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "wemeval/error.h"
#include "wemeval/manifest.h"

namespace wemeval {
using nlohmann::json;
namespace fs = std::filesystem;

std::vector<EvalPair> LoadPairList(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "cannot open pair list " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, "pair list " + path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorKind::kSchema, "pair list must be a JSON array");
  const fs::path base = path.parent_path();
  auto resolve = [&](const json& v, size_t i, const char* field) {
    if (!v.is_object() || !v.contains(field) || !v[field].is_string()) {
      throw Error(ErrorKind::kSchema, "pair list entry " + std::to_string(i) +
                                          " lacks string field '" + field + "'");
    }
    fs::path p = v[field].get<std::string>();
    return (p.is_relative() ? base / p : p).string();
  };
  std::vector<EvalPair> pairs;
  for (size_t i = 0; i < j.size(); ++i) {
    pairs.push_back({resolve(j[i], i, "gen"), resolve(j[i], i, "gt")});
  }
  return pairs;
}

int BatchSummary::exit_code() const {
  if (invalid > 0) return 2;
  return failed > 0 ? 1 : 0;
}

namespace {

bool IsLoadFailure(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingFile:
    case ErrorKind::kSchema:
    case ErrorKind::kAssetMissing:
    case ErrorKind::kIo:
      return true;
    default:
      return false;
  }
}

struct PairOutcome {
  std::string line;
  bool invalid = false;
  bool failed = false;
};

PairOutcome EvaluatePair(size_t index, const EvalPair& pair,
                         const MetricConfig& cfg, const Embedder& embedder) {
  json head = {{"pair", index}, {"gen", pair.gen}, {"gt", pair.gt}};
  PairOutcome outcome;
  bool loading = true;
  try {
    const Trajectory gen = LoadManifest(pair.gen);
    const Trajectory gt = LoadManifest(pair.gt);
    loading = false;
    const MetricReport report = EvaluateAll(gen, gt, cfg, &embedder);
    head.update(ReportToJson(report));
  } catch (const Error& e) {
    outcome.invalid = loading && IsLoadFailure(e.kind());
    outcome.failed = !outcome.invalid;
    head["error"] = {{"kind", ErrorKindName(e.kind())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    outcome.failed = true;
    head["error"] = {{"kind", "internal"}, {"message", e.what()}};
  }
  outcome.line = head.dump();
  return outcome;
}

// Writes completed lines strictly in index order.
class OrderedSink {
 public:
  OrderedSink(std::ostream& out, size_t n) : out_(out), pending_(n) {}

  void Put(size_t index, std::string line) {
    std::lock_guard<std::mutex> lock(mu_);
    pending_[index] = std::move(line);
    while (next_ < pending_.size() && pending_[next_]) {
      out_ << *pending_[next_] << '\n';
      pending_[next_].reset();
      ++next_;
    }
  }

 private:
  std::ostream& out_;
  std::mutex mu_;
  std::vector<std::optional<std::string>> pending_;
  size_t next_ = 0;
};

}  // namespace

json AggregateReports(const std::vector<json>& lines) {
  std::map<std::string, double> sums;
  std::map<std::string, int> counts;
  size_t evaluated = 0, failed = 0;
  for (const json& line : lines) {
    if (line.contains("error")) {
      ++failed;
      continue;
    }
    if (!line.contains("scores")) continue;
    ++evaluated;
    for (const char* name : kMetricNames) {
      const json& s = line["scores"].value(name, json());
      if (s.is_number()) {
        sums[name] += s.get<double>();
        ++counts[name];
      }
    }
  }
  json means = json::object(), n = json::object();
  for (const char* name : kMetricNames) {
    const int c = counts[name];
    means[name] = c > 0 ? json(sums[name] / c) : json();
    n[name] = c;
  }
  return {{"pairs", evaluated + failed},
          {"evaluated", evaluated},
          {"failed", failed},
          {"means", means},
          {"counts", n}};
}

BatchSummary RunBatchEval(const std::vector<EvalPair>& pairs,
                          const BatchOptions& options, std::ostream& out) {
  options.metrics.Validate();
  if (options.workers < 1) throw Error(ErrorKind::kConfig, "worker count must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const std::shared_ptr<const Embedder> embedder = MakeEmbedder(options.metrics.embedder);
  const json config = ConfigToJson(options.metrics);
  out << json{{"config", config}}.dump() << '\n';

  std::vector<PairOutcome> outcomes(pairs.size());
  std::vector<json> parsed(pairs.size());
  OrderedSink sink(out, pairs.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < pairs.size(); i = next++) {
      outcomes[i] = EvaluatePair(i, pairs[i], options.metrics, *embedder);
      parsed[i] = json::parse(outcomes[i].line);
      sink.Put(i, outcomes[i].line);
    }
  };
  const int workers = static_cast<int>(
      std::min<size_t>(options.workers, std::max<size_t>(pairs.size(), 1)));
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (std::thread& t : threads) t.join();

  BatchSummary summary;
  summary.pairs = pairs.size();
  for (const PairOutcome& o : outcomes) {
    if (o.invalid) {
      ++summary.invalid;
    } else if (o.failed) {
      ++summary.failed;
    } else {
      ++summary.evaluated;
    }
  }
  out << json{{"aggregate", AggregateReports(parsed)}, {"config", config}}.dump() << '\n';
  out.flush();
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

BatchSummary MergeReports(const std::vector<fs::path>& inputs, std::ostream& out) {
  std::optional<json> config;
  std::vector<json> lines;
  for (const fs::path& path : inputs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kMissingFile, "cannot open report " + path.string());
    std::string text;
    size_t line_no = 0;
    while (std::getline(in, text)) {
      ++line_no;
      if (text.empty()) continue;
      json j;
      try {
        j = json::parse(text);
      } catch (const json::exception&) {
        throw Error(ErrorKind::kSchema, path.string() + ":" + std::to_string(line_no) +
                                            ": not a JSON line");
      }
      if (j.contains("aggregate")) continue;
      if (j.contains("config")) {
        if (config && *config != j["config"]) {
          throw Error(ErrorKind::kConfig, path.string() +
                                              " was produced under a different config");
        }
        config = j["config"];
        continue;
      }
      if (!j.contains("pair")) {
        throw Error(ErrorKind::kSchema, path.string() + ":" + std::to_string(line_no) +
                                            ": not a report line");
      }
      lines.push_back(std::move(j));
    }
  }
  const json cfg = config.value_or(json());
  out << json{{"config", cfg}}.dump() << '\n';
  BatchSummary summary;
  for (const json& j : lines) {
    out << j.dump() << '\n';
    ++summary.pairs;
    if (j.contains("error")) {
      ++summary.failed;
    } else {
      ++summary.evaluated;
    }
  }
  out << json{{"aggregate", AggregateReports(lines)}, {"config", cfg}}.dump() << '\n';
  return summary;
}

int ResolveWorkerCount(std::optional<int> flag, const char* env_value,
                       std::optional<int> file_value) {
  auto check = [](int n, const std::string& source) {
    if (n < 1) {
      throw Error(ErrorKind::kConfig, "worker count from " + source + " must be >= 1");
    }
    return n;
  };
  if (flag) return check(*flag, "--workers");
  if (env_value != nullptr && *env_value != '\0') {
    size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(env_value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || env_value[used] != '\0') {
      throw Error(ErrorKind::kConfig,
                  std::string("WEMEVAL_THREADS is not an integer: ") + env_value);
    }
    return check(n, "WEMEVAL_THREADS");
  }
  if (file_value) return check(*file_value, "the config file");
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace wemeval

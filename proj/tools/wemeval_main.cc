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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wemeval/batch_eval.h"
#include "wemeval/error.h"
#include "wemeval/fixture_io.h"
#include "wemeval/mechanism_verify.h"

namespace {

using nlohmann::json;
using wemeval::Error;
using wemeval::ErrorKind;

constexpr int kUsageExit = 2;

struct EvalArgs {
  std::string gen, gt, pairs, config, out = "-", embedder_index;
  std::optional<int> workers, window_w, window_r, grid;
  std::optional<double> tau_cpdm, tau_pmpa;
};

// Output stream for "-" (stdout) or a file.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw Error(ErrorKind::kIo, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int RunEval(const EvalArgs& a) {
  wemeval::BatchOptions options;
  std::optional<int> file_workers;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw Error(ErrorKind::kMissingFile, "cannot open config " + a.config);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig, a.config + ": " + e.what());
    }
    for (const auto& [key, v] : j.items()) {
      if (key == "metrics") {
        options.metrics = wemeval::ConfigFromJson(v, options.metrics);
      } else if (key == "workers") {
        file_workers = v.get<int>();
      } else {
        throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
      }
    }
  }
  wemeval::MetricConfig& m = options.metrics;
  if (a.window_w) m.window_w = *a.window_w;
  if (a.window_r) m.window_r = *a.window_r;
  if (a.tau_cpdm) m.tau_cpdm = *a.tau_cpdm;
  if (a.tau_pmpa) m.tau_pmpa = *a.tau_pmpa;
  if (a.grid) {
    m.embedder.kind = wemeval::EmbedderSpec::Kind::kReference;
    m.embedder.grid = *a.grid;
  }
  if (!a.embedder_index.empty()) {
    m.embedder.kind = wemeval::EmbedderSpec::Kind::kExternalFile;
    m.embedder.source = a.embedder_index;
  }
  options.workers =
      wemeval::ResolveWorkerCount(a.workers, std::getenv("WEMEVAL_THREADS"), file_workers);

  std::vector<wemeval::EvalPair> pairs;
  if (!a.pairs.empty()) pairs = wemeval::LoadPairList(a.pairs);
  if (!a.gen.empty() || !a.gt.empty()) {
    if (a.gen.empty() || a.gt.empty()) {
      std::cerr << "eval: --gen and --gt must be given together\n";
      return kUsageExit;
    }
    pairs.push_back({a.gen, a.gt});
  }
  if (pairs.empty()) {
    std::cerr << "eval: give --gen/--gt or --pairs\n";
    return kUsageExit;
  }

  OutputTarget out(a.out);
  const wemeval::BatchSummary s = wemeval::RunBatchEval(pairs, options, out.stream());
  std::cerr << "evaluated " << s.evaluated << "/" << s.pairs << " pairs in " << s.seconds
            << " s (" << (s.seconds > 0 ? s.pairs / s.seconds : 0.0)
            << " trajectories/s, " << options.workers << " workers)";
  if (s.failed > 0) std::cerr << ", " << s.failed << " failed";
  if (s.invalid > 0) std::cerr << ", " << s.invalid << " invalid";
  std::cerr << "\n";
  return s.exit_code();
}

int RunDecompose(const std::string& flow, const std::string& matches,
                 const std::string& out_dir, const wemeval::RansacParams& params) {
  const auto fits = wemeval::DecomposeFlowFile(flow, matches, out_dir, params);
  for (size_t i = 0; i < fits.size(); ++i) {
    std::cerr << "flow " << i << ": " << fits[i].inlier_count << " inliers\n";
  }
  return 0;
}

int RunVerify(uint64_t seed, int trials, const std::string& out_path) {
  const wemeval::VerificationReport report = wemeval::VerifyMechanisms(seed, trials);
  OutputTarget out(out_path);
  out.stream() << report.ToJson().dump(2) << '\n';
  for (const auto& inv : report.invariants) {
    std::cerr << (inv.passed() ? "pass " : "FAIL ") << inv.name << " (" << inv.failures
              << "/" << inv.trials << " failures)\n";
  }
  return report.passed() ? 0 : 1;
}

int RunGenFixtures(const std::string& catalog, const std::string& out_dir) {
  const std::vector<wemeval::SimConfig> configs =
      catalog.empty() ? wemeval::DefaultCatalog() : wemeval::LoadCatalog(catalog);
  const auto outcomes = wemeval::WriteFixtures(configs, out_dir);
  int failed = 0;
  for (const auto& o : outcomes) {
    if (!o.error.empty()) {
      std::cerr << "fixture " << o.id << ": " << o.error << "\n";
      ++failed;
    }
  }
  std::cerr << "wrote " << outcomes.size() - failed << "/" << outcomes.size()
            << " fixtures to " << out_dir << "\n";
  return failed > 0 ? 1 : 0;
}

int RunReport(const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  OutputTarget out(out_path);
  const wemeval::BatchSummary s = wemeval::MergeReports(paths, out.stream());
  return s.failed > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation and verification tools for multi-turn embodied rollouts"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score generated rollouts against ground truth");
  eval->add_option("--gen", eval_args.gen, "Generated rollout manifest");
  eval->add_option("--gt", eval_args.gt, "Ground-truth rollout manifest");
  eval->add_option("--pairs", eval_args.pairs, "JSON list of {gen, gt} manifest pairs");
  eval->add_option("--config", eval_args.config,
                   "JSON config: {\"metrics\": {...}, \"workers\": n}");
  eval->add_option("-o,--out", eval_args.out, "Report path (line-delimited JSON), - for stdout");
  eval->add_option("-j,--workers", eval_args.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  eval->add_option("--window-w", eval_args.window_w, "LPSA window");
  eval->add_option("--window-r", eval_args.window_r, "FPHS window");
  eval->add_option("--tau-cpdm", eval_args.tau_cpdm, "CPDM temperature");
  eval->add_option("--tau-pmpa", eval_args.tau_pmpa, "PMPA temperature");
  eval->add_option("--grid", eval_args.grid, "Reference embedder grid size");
  eval->add_option("--embedder-index", eval_args.embedder_index,
                   "Index of precomputed embeddings");

  std::string flow_path, matches_path, decompose_out;
  wemeval::RansacParams ransac;
  CLI::App* decompose =
      app.add_subcommand("decompose-flow", "Split flow into camera and residual object flow");
  decompose->add_option("--flow", flow_path, "Flow file (.wemf)")->required();
  decompose->add_option("--matches", matches_path, "Matches JSON")->required();
  decompose->add_option("--out-dir", decompose_out, "Output directory")->required();
  decompose->add_option("--threshold", ransac.threshold, "RANSAC inlier threshold (px)")
      ->check(CLI::PositiveNumber);
  decompose->add_option("--iterations", ransac.iterations, "RANSAC iterations")
      ->check(CLI::PositiveNumber);
  decompose->add_option("--seed", ransac.seed, "RANSAC seed");

  uint64_t verify_seed = 0;
  int verify_trials = 1000;
  std::string verify_out = "-";
  CLI::App* verify =
      app.add_subcommand("verify-mechanisms", "Check mechanism invariants on random instances");
  verify->add_option("--seed", verify_seed, "Random seed");
  verify->add_option("--trials", verify_trials, "Trials per invariant")
      ->check(CLI::PositiveNumber);
  verify->add_option("-o,--out", verify_out, "JSON record path, - for stdout");

  std::string catalog_path, fixtures_out;
  CLI::App* gen = app.add_subcommand("gen-fixtures", "Write simulated fixture rollouts");
  gen->add_option("--catalog", catalog_path, "Catalog JSON (default: built-in catalog)");
  gen->add_option("--out-dir", fixtures_out, "Output directory")->required();

  std::vector<std::string> report_inputs;
  std::string report_out = "-";
  CLI::App* report = app.add_subcommand("report", "Merge report files and re-aggregate");
  report->add_option("inputs", report_inputs, "Report files")->required();
  report->add_option("-o,--out", report_out, "Merged report path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  try {
    if (*eval) return RunEval(eval_args);
    if (*decompose) return RunDecompose(flow_path, matches_path, decompose_out, ransac);
    if (*verify) return RunVerify(verify_seed, verify_trials, verify_out);
    if (*gen) return RunGenFixtures(catalog_path, fixtures_out);
    if (*report) return RunReport(report_inputs, report_out);
  } catch (const Error& e) {
    std::cerr << "error (" << wemeval::ErrorKindName(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

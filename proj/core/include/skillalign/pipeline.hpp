// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skillalign/extract.hpp"

namespace skillalign {

/// Exit statuses shared by the pipeline and the CLI.
enum ExitStatus : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitStageFailure = 2,
    kExitPartial = 3,  // completed with recorded failures; resumable
};

struct StrategySpec {
    StrategyKind kind = StrategyKind::Tfidf;
    std::string provider;  // chat provider name for llm strategies
    std::string model;
};

/// Everything the end-to-end run needs. Relative paths in the config file
/// resolve against the file's own directory.
struct PipelineConfig {
    std::string taxonomy_path;
    std::string corpus_path;
    std::string background_path;
    std::string benchmark_path;
    std::string providers_path;  // empty: mock providers only
    std::string prompts_dir;     // empty: built-in templates
    std::string out_dir;
    std::string embedding_provider = "mock";
    std::size_t k = 10;
    std::uint64_t seed = 0;
    std::int64_t epoch = -1;
    unsigned workers = 1;
    std::size_t sample_n = 0;  // 0: use the whole corpus
    std::vector<std::string> strata_keys;
    std::vector<StrategySpec> strategies;
    std::vector<StrategySpec> judges;  // kind ignored; provider+model used

    static PipelineConfig load(const std::string& path);
};

struct StageStatus {
    std::string name;
    std::string outcome;  // "done", "skipped", "partial"
    std::string detail;
};

struct PipelineResult {
    int exit_code = kExitOk;
    std::vector<StageStatus> stages;
    std::vector<std::pair<std::string, std::string>> artifacts;  // label -> path
    std::string error;
};

/// validate -> sample -> embed -> extract -> ensemble -> calibrate -> score
/// -> report, with per-stage resumption. Prints a summary table to `log`.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log);

}  // namespace skillalign

#pragma once

// Stage orchestration over a working directory. Every stage checks its
// declared inputs, writes outputs atomically and leaves a manifest under
// <workdir>/manifests/<stage>.json.

#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "lexdiv/config.hpp"

namespace lexdiv::pipeline {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kMissingDependency = 2, kRuntimeFailure = 3 };

// delineate, clean, stats, freq, sentiment, embed, align, diverge, topics,
// classify, annotate, report
const std::vector<std::string>& stages();
bool is_stage(std::string_view name);

using LogFn = std::function<void(const std::string&)>;

struct StageResult {
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::map<std::string, std::string> notes;
};

// Throws lexdiv::Error; MissingInput names the absent artifact.
StageResult run_stage(const std::string& stage, const config::PipelineConfig& cfg, const LogFn& log);

// Lock, run, write the manifest; maps failures to exit codes.
int run(const std::string& stage, const config::PipelineConfig& cfg, const LogFn& log);
// All stages in order; stops at the first failure.
int run_all(const config::PipelineConfig& cfg, const LogFn& log);

fs::path artifact(const config::PipelineConfig& cfg, std::string_view name);
fs::path session_dir(const config::PipelineConfig& cfg);

// Annotation follow-ups on the configured session.
int annotate_score(const config::PipelineConfig& cfg, const std::vector<std::string>& annotators, const LogFn& log);
int annotate_agreement(const config::PipelineConfig& cfg, const std::vector<std::string>& annotators,
                       const std::vector<std::string>& only_targets, const LogFn& log);
int annotate_llm(const config::PipelineConfig& cfg, const LogFn& log);

int exit_code_for(const std::exception& e);
std::string version();

}  // namespace lexdiv::pipeline

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "maneuver/bench/dataset.hpp"
#include "maneuver/control/loop.hpp"
#include "maneuver/sysid/analysis.hpp"
#include "maneuver/sysid/fingerprint.hpp"

namespace maneuver::sysid {

// Identification corpus and evaluation set share a task id.
class DatasetOverlap : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

struct SynthesizeOptions {
  const PromptLibrary* prompts = nullptr;
  std::string model_id;
  double temperature = 0.1;
  int max_output_tokens = 4096;
  std::string request_tag = "synthesis";
  // Analyses per synthesis request; more get map-reduced in chunks.
  int chunk_size = 8;
};

// Distills per-task analyses into one fingerprint. Replies must follow the
// sectioned report shape; the weakness tags come from the weaknesses section
// via the controlled vocabulary.
PerformanceFingerprint synthesize_fingerprint(std::span<const TaskAnalysis> analyses,
                                              gateway::Backend& backend,
                                              const SynthesizeOptions& options);

struct IdentifyOptions {
  control::RunMode probe_mode = control::RunMode::uncontrolled;
  control::RunConfig run_template;
  AnalyzeOptions analyze;
  SynthesizeOptions synthesize;
  // Task ids reserved for evaluation; identification refuses to touch them.
  std::vector<std::string> eval_task_ids;
  // Where fingerprint.json / fingerprint.md land; empty skips saving.
  std::filesystem::path out_dir;
};

// Offline pipeline: run every corpus task in the probe mode, analyze each
// run, synthesize the fingerprint. Throws DatasetOverlap if the corpus
// intersects eval_task_ids, EmptyCorpus on an empty corpus.
PerformanceFingerprint identify(std::span<const bench::TaskRecord> corpus,
                                const IdentifyOptions& options,
                                const control::RunEnv& env);

}  // namespace maneuver::sysid

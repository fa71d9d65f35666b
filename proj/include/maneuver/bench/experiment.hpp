#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "maneuver/bench/dataset.hpp"
#include "maneuver/bench/metrics.hpp"
#include "maneuver/control/loop.hpp"

namespace maneuver::bench {

struct ExperimentOptions {
  control::RunMode mode = control::RunMode::uncontrolled;
  int rounds = 3;
  std::uint64_t seed = 0;
  // Template for every task run; run_id and seed are filled in per run.
  control::RunConfig run_template;
  int parallelism = 1;
  // Artifact root (config.json, runs/, rounds/, report.json, report.md).
  // Empty keeps the experiment entirely in memory.
  std::filesystem::path out_dir;
  bool persist_runs = true;
};

struct ExperimentArtifacts {
  ScoreReport report;
  std::vector<std::string> task_ids;
  // round_hits[r][t]: round r scored task t correct.
  std::vector<std::vector<bool>> round_hits;
};

// "<task>__<mode>__r<round>__s<seed>" with the task id sanitized for the
// filesystem. Round is 1-based.
std::string experiment_run_id(std::string_view task_id, control::RunMode mode, int round,
                              std::uint64_t seed);

// Runs every task for the configured number of rounds and aggregates the
// scores. Task order inside a round never affects results: each run is
// seeded from (experiment seed, task id, round) alone, so any parallelism
// level produces the same report. In composite mode the fingerprint's
// source tasks must be disjoint from the evaluated tasks (DatasetOverlap).
ExperimentArtifacts run_experiment(std::span<const TaskRecord> tasks,
                                   const ExperimentOptions& options,
                                   const control::RunEnv& env);

}  // namespace maneuver::bench

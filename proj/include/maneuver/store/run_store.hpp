#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "maneuver/control/types.hpp"
#include "maneuver/error.hpp"

namespace maneuver::store {

class UnknownRun : public Error {
 public:
  using Error::Error;
};

class CorruptManifest : public Error {
 public:
  using Error::Error;
};

// Appended step index does not extend the stored sequence by exactly one.
class IndexGap : public Error {
 public:
  using Error::Error;
};

struct RunManifest {
  std::string run_id;
  std::string task_id;
  std::string mode;
  std::string model_id;
  double temperature = 0.1;
  std::uint64_t seed = 0;
  std::int64_t started_at_ms = 0;
  std::map<std::string, std::string> prompt_asset_versions;
  int format_version = 1;
};

struct LoadedRun {
  RunManifest manifest;
  std::vector<control::TrajectoryStep> steps;
  std::optional<control::TaskResult> result;
  // True when a torn final line was dropped during recovery.
  bool truncated_tail = false;
};

// Where a run's events land while it executes. The loop persists every event
// before the next backend call, so a crash loses at most the in-flight step.
class RunSink {
 public:
  virtual ~RunSink() = default;
  virtual void begin_run(const RunManifest& manifest) = 0;
  virtual void append_step(const std::string& run_id, const control::TrajectoryStep& step) = 0;
  virtual void write_result(const std::string& run_id, const control::TaskResult& result) = 0;
};

// Layout: <root>/<run_id>/{manifest.json, steps.jsonl, result.json}.
// steps.jsonl is append-only, one JSON object per line, flushed per append.
class DirRunStore final : public RunSink {
 public:
  explicit DirRunStore(std::filesystem::path root);

  void begin_run(const RunManifest& manifest) override;
  void append_step(const std::string& run_id, const control::TrajectoryStep& step) override;
  void write_result(const std::string& run_id, const control::TaskResult& result) override;

  bool exists(const std::string& run_id) const;
  // Tolerates a missing result.json (crash before completion) and a torn
  // final step line (sets truncated_tail). Anything else throws.
  LoadedRun load_run(const std::string& run_id) const;
  std::vector<std::string> list_runs() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path run_dir(const std::string& run_id) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  // run_id -> next expected step index
  std::map<std::string, int> next_index_;
};

// Keeps whole runs in memory; used by bulk simulation studies where disk
// persistence would dominate the runtime.
class MemoryRunSink final : public RunSink {
 public:
  void begin_run(const RunManifest& manifest) override;
  void append_step(const std::string& run_id, const control::TrajectoryStep& step) override;
  void write_result(const std::string& run_id, const control::TaskResult& result) override;

  const LoadedRun& run(const std::string& run_id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, LoadedRun> runs_;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

}  // namespace maneuver::store

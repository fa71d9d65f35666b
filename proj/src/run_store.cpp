#include "maneuver/store/run_store.hpp"

#include <algorithm>
#include <fstream>

#include "maneuver/util/strings.hpp"

namespace maneuver::store {

using nlohmann::json;

json manifest_to_json(const RunManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["mode"] = m.mode;
  j["model_id"] = m.model_id;
  j["prompt_asset_versions"] = m.prompt_asset_versions;
  j["run_id"] = m.run_id;
  j["seed"] = m.seed;
  j["started_at_ms"] = m.started_at_ms;
  j["task_id"] = m.task_id;
  j["temperature"] = m.temperature;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.task_id = j.at("task_id").get<std::string>();
  m.mode = j.at("mode").get<std::string>();
  m.model_id = j.value("model_id", "");
  m.temperature = j.value("temperature", 0.1);
  m.seed = j.value("seed", std::uint64_t{0});
  m.started_at_ms = j.value("started_at_ms", std::int64_t{0});
  m.format_version = j.value("format_version", 1);
  if (j.contains("prompt_asset_versions")) {
    m.prompt_asset_versions =
        j["prompt_asset_versions"].get<std::map<std::string, std::string>>();
  }
  return m;
}

DirRunStore::DirRunStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path DirRunStore::run_dir(const std::string& run_id) const {
  return root_ / run_id;
}

void DirRunStore::begin_run(const RunManifest& manifest) {
  if (manifest.run_id.empty()) throw Error("run_id is empty");
  auto dir = run_dir(manifest.run_id);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << manifest_to_json(manifest).dump(2) << '\n';
  }
  // fresh steps file; a re-begun run starts over
  std::ofstream(dir / "steps.jsonl", std::ios::binary | std::ios::trunc);
  std::lock_guard lock(mutex_);
  next_index_[manifest.run_id] = 0;
}

void DirRunStore::append_step(const std::string& run_id, const control::TrajectoryStep& step) {
  auto dir = run_dir(run_id);
  if (!std::filesystem::is_directory(dir)) {
    throw UnknownRun(util::cat("no such run: ", run_id));
  }
  {
    std::lock_guard lock(mutex_);
    auto it = next_index_.find(run_id);
    int expected = it == next_index_.end() ? 0 : it->second;
    if (step.index != expected) {
      throw IndexGap(util::cat("run ", run_id, ": expected step index ", expected,
                               ", got ", step.index));
    }
    next_index_[run_id] = expected + 1;
  }
  std::ofstream out(dir / "steps.jsonl", std::ios::binary | std::ios::app);
  out << json(step).dump() << '\n';
  out.flush();
}

void DirRunStore::write_result(const std::string& run_id, const control::TaskResult& result) {
  auto dir = run_dir(run_id);
  if (!std::filesystem::is_directory(dir)) {
    throw UnknownRun(util::cat("no such run: ", run_id));
  }
  auto tmp = dir / "result.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << control::result_to_json(result).dump(2) << '\n';
  }
  std::filesystem::rename(tmp, dir / "result.json");
}

bool DirRunStore::exists(const std::string& run_id) const {
  return std::filesystem::is_regular_file(run_dir(run_id) / "manifest.json");
}

LoadedRun DirRunStore::load_run(const std::string& run_id) const {
  auto dir = run_dir(run_id);
  auto manifest_path = dir / "manifest.json";
  std::ifstream manifest_in(manifest_path, std::ios::binary);
  if (!manifest_in) throw UnknownRun(util::cat("no such run: ", run_id));

  LoadedRun run;
  {
    json doc = json::parse(manifest_in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      throw CorruptManifest(util::cat("unreadable manifest: ", manifest_path.string()));
    }
    try {
      run.manifest = manifest_from_json(doc);
    } catch (const json::exception& e) {
      throw CorruptManifest(util::cat("manifest missing fields: ", e.what()));
    }
  }

  std::ifstream steps_in(dir / "steps.jsonl", std::ios::binary);
  std::string line;
  int expected = 0;
  while (std::getline(steps_in, line)) {
    if (util::trim(line).empty()) continue;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    bool torn = doc.is_discarded();
    control::TrajectoryStep step;
    if (!torn) {
      try {
        step = doc.get<control::TrajectoryStep>();
      } catch (const std::exception&) {
        torn = true;
      }
    }
    if (torn) {
      // only the final line may be damaged (a crash mid-append); damage
      // anywhere else means the log was edited and is not trusted
      if (steps_in.peek() != std::char_traits<char>::eof()) {
        throw Error(util::cat("run ", run_id, ": corrupt step line mid-log"));
      }
      run.truncated_tail = true;
      break;
    }
    if (step.index != expected) {
      throw IndexGap(util::cat("run ", run_id, ": step log jumps from ", expected - 1,
                               " to ", step.index));
    }
    ++expected;
    run.steps.push_back(std::move(step));
  }
  // a final newline-less partial is also a torn tail
  if (!steps_in.eof() && steps_in.bad()) {
    throw Error(util::cat("run ", run_id, ": cannot read step log"));
  }

  std::ifstream result_in(dir / "result.json", std::ios::binary);
  if (result_in) {
    json doc = json::parse(result_in, nullptr, /*allow_exceptions=*/false);
    if (!doc.is_discarded()) {
      auto result = control::result_from_json(doc);
      result.steps = run.steps;
      // the completed run recorded how many steps it persisted; fewer on
      // disk means the tail was lost even if every surviving line parses
      auto recorded = doc.value("step_count", std::uint64_t{0});
      if (recorded > run.steps.size()) run.truncated_tail = true;
      run.result = std::move(result);
    } else {
      run.truncated_tail = true;  // torn result write
    }
  }
  return run;
}

std::vector<std::string> DirRunStore::list_runs() const {
  std::vector<std::string> out;
  if (!std::filesystem::is_directory(root_)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_directory() &&
        std::filesystem::is_regular_file(entry.path() / "manifest.json")) {
      out.push_back(entry.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void MemoryRunSink::begin_run(const RunManifest& manifest) {
  std::lock_guard lock(mutex_);
  LoadedRun run;
  run.manifest = manifest;
  runs_[manifest.run_id] = std::move(run);
}

void MemoryRunSink::append_step(const std::string& run_id, const control::TrajectoryStep& step) {
  std::lock_guard lock(mutex_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw UnknownRun(util::cat("no such run: ", run_id));
  int expected = static_cast<int>(it->second.steps.size());
  if (step.index != expected) {
    throw IndexGap(util::cat("run ", run_id, ": expected step index ", expected, ", got ",
                             step.index));
  }
  it->second.steps.push_back(step);
}

void MemoryRunSink::write_result(const std::string& run_id, const control::TaskResult& result) {
  std::lock_guard lock(mutex_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw UnknownRun(util::cat("no such run: ", run_id));
  it->second.result = result;
}

const LoadedRun& MemoryRunSink::run(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw UnknownRun(util::cat("no such run: ", run_id));
  return it->second;
}

std::size_t MemoryRunSink::size() const {
  std::lock_guard lock(mutex_);
  return runs_.size();
}

}  // namespace maneuver::store

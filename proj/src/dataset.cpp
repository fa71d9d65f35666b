#include "maneuver/bench/dataset.hpp"

#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "maneuver/util/strings.hpp"

namespace maneuver::bench {

using nlohmann::json;

namespace {

std::string pick_string(const json& j, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  }
  return {};
}

TaskRecord record_from_json(const json& j, std::size_t line_no) {
  TaskRecord record;
  record.task_id = pick_string(j, {"task_id", "task_ID", "id"});
  record.question = pick_string(j, {"question", "Question"});
  record.gold_answer = pick_string(j, {"answer", "Final answer", "final_answer"});

  if (j.contains("level") && j["level"].is_number_integer()) {
    record.level = j["level"].get<int>();
  } else if (j.contains("Level")) {
    // benchmark exports carry the level as either an integer or a string
    if (j["Level"].is_number_integer()) {
      record.level = j["Level"].get<int>();
    } else if (j["Level"].is_string()) {
      try {
        record.level = std::stoi(j["Level"].get<std::string>());
      } catch (const std::exception&) {
        throw MalformedDataset(util::cat("line ", line_no, ": unreadable Level"));
      }
    }
  }

  record.reference_steps = pick_string(j, {"reference_steps"});
  if (record.reference_steps.empty() && j.contains("Annotator Metadata") &&
      j["Annotator Metadata"].is_object()) {
    record.reference_steps = pick_string(j["Annotator Metadata"], {"Steps", "steps"});
  }

  if (j.contains("attachments") && j["attachments"].is_array()) {
    for (const auto& a : j["attachments"]) {
      if (a.is_string()) record.attachments.push_back(a.get<std::string>());
    }
  } else {
    auto file_name = pick_string(j, {"file_name"});
    if (!file_name.empty()) record.attachments.push_back(file_name);
  }

  auto kind = pick_string(j, {"answer_kind"});
  if (!kind.empty()) record.kind = control::answer_kind_from_name(kind);

  if (record.task_id.empty()) {
    throw MalformedDataset(util::cat("line ", line_no, ": no task_id"));
  }
  if (record.question.empty()) {
    throw MalformedDataset(util::cat("line ", line_no, ": task ", record.task_id,
                                     " has no question"));
  }
  return record;
}

}  // namespace

std::vector<std::string> read_subset(const std::filesystem::path& subset_path) {
  std::ifstream in(subset_path, std::ios::binary);
  if (!in) {
    throw MalformedDataset(util::cat("cannot open subset file: ", subset_path.string()));
  }
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto trimmed = util::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    ids.emplace_back(trimmed);
  }
  return ids;
}

std::vector<TaskRecord> load_tasks(const std::filesystem::path& dataset_path,
                                   const std::optional<std::filesystem::path>& subset_path) {
  std::ifstream in(dataset_path, std::ios::binary);
  if (!in) {
    throw MalformedDataset(util::cat("cannot open dataset: ", dataset_path.string()));
  }

  std::vector<TaskRecord> all;
  std::map<std::string, std::size_t> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw MalformedDataset(util::cat("line ", line_no, ": not a JSON object"));
    }
    auto record = record_from_json(doc, line_no);
    if (by_id.count(record.task_id)) {
      throw MalformedDataset(util::cat("line ", line_no, ": duplicate task_id ",
                                       record.task_id));
    }
    by_id[record.task_id] = all.size();
    all.push_back(std::move(record));
  }
  if (all.empty()) {
    throw MalformedDataset(util::cat("dataset is empty: ", dataset_path.string()));
  }
  if (!subset_path) return all;

  auto ids = read_subset(*subset_path);
  if (ids.empty()) {
    throw MalformedDataset(util::cat("subset file names no tasks: ", subset_path->string()));
  }
  std::set<std::string> seen;
  std::vector<TaskRecord> picked;
  picked.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw MalformedDataset(util::cat("subset lists task ", id, " twice"));
    }
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw MissingTask(util::cat("subset names unknown task: ", id));
    }
    picked.push_back(all[it->second]);
  }
  return picked;
}

void write_dataset(const std::filesystem::path& path, const std::vector<TaskRecord>& tasks) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& record : tasks) {
    json j;
    j["answer"] = record.gold_answer;
    j["answer_kind"] = control::answer_kind_name(record.kind);
    if (!record.attachments.empty()) j["attachments"] = record.attachments;
    j["level"] = record.level;
    j["question"] = record.question;
    if (!record.reference_steps.empty()) j["reference_steps"] = record.reference_steps;
    j["task_id"] = record.task_id;
    out << j.dump() << '\n';
  }
}

control::TaskInput to_task_input(const TaskRecord& record) {
  control::TaskInput task;
  task.task_id = record.task_id;
  task.question = record.question;
  task.level = record.level;
  task.attachments = record.attachments;
  task.expected_answer_kind = record.kind;
  return task;
}

}  // namespace maneuver::bench

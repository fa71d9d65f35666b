#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "maneuver/control/types.hpp"
#include "maneuver/error.hpp"

namespace maneuver::bench {

class MalformedDataset : public Error {
 public:
  using Error::Error;
};

// A subset file names a task id the dataset does not contain.
class MissingTask : public Error {
 public:
  using Error::Error;
};

struct TaskRecord {
  std::string task_id;
  int level = 1;
  std::string question;
  std::string gold_answer;
  std::string reference_steps;
  std::vector<std::string> attachments;
  control::AnswerKind kind = control::AnswerKind::unknown;
};

// Loads a JSONL dataset (one task object per line). Canonical lowercase
// keys are preferred; capitalized benchmark-export variants ("Question",
// "Final answer", "Level", "task_id", "Annotator Metadata".steps) are
// accepted. An optional subset file (one task id per line, '#' comments)
// filters and orders the result.
std::vector<TaskRecord> load_tasks(const std::filesystem::path& dataset_path,
                                   const std::optional<std::filesystem::path>& subset_path);

std::vector<std::string> read_subset(const std::filesystem::path& subset_path);

// One task per line, canonical keys, stable key order.
void write_dataset(const std::filesystem::path& path, const std::vector<TaskRecord>& tasks);

control::TaskInput to_task_input(const TaskRecord& record);

}  // namespace maneuver::bench

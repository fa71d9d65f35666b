#pragma once

#include <string>

#include "maneuver/gateway/chat.hpp"
#include "maneuver/prompts.hpp"
#include "maneuver/store/run_store.hpp"

namespace maneuver::sysid {

// Structured read of one analysis reply. Sections are matched leniently by
// heading; a reply with no recognizable headings lands whole in
// error_analysis so nothing is silently lost.
struct TaskAnalysis {
  std::string task_id;
  int level = 1;
  bool was_correct = false;
  std::string run_id;

  std::string approach_comparison;
  std::string tool_usage;
  std::string information_acquisition;
  std::string reasoning_assessment;
  std::string error_analysis;
  std::string strengths;
  std::string recommendations;
};

struct AnalyzeOptions {
  const PromptLibrary* prompts = nullptr;
  std::string model_id;
  double temperature = 0.1;
  int max_output_tokens = 4096;
  std::string request_tag;
  // Serialized-log budget in characters; longer logs keep the tail and get
  // an explicit truncation marker. The head is what gets cut because the
  // failure usually lives near the end.
  int log_budget_chars = 60000;
};

struct TaskFacts {
  std::string question;
  int level = 1;
  std::string gold_answer;
  std::string reference_steps;  // may be empty
  bool was_correct = false;
};

// Runs the per-task analysis prompt over a stored run and parses the reply.
TaskAnalysis analyze_task(const store::LoadedRun& run, const TaskFacts& facts,
                          gateway::Backend& backend, const AnalyzeOptions& options);

// Exposed for tests: section splitting of a raw analysis reply.
TaskAnalysis parse_analysis_reply(std::string_view reply);

}  // namespace maneuver::sysid

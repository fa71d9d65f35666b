#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maneuver/error.hpp"
#include "maneuver/tools/registry.hpp"

namespace maneuver::control {

class InvalidTask : public Error {
 public:
  using Error::Error;
};

// Trajectory step indices must be 0..n-1 with no gaps.
class NonContiguousTrajectory : public Error {
 public:
  using Error::Error;
};

enum class RunMode { uncontrolled, feedback, composite };
enum class Actor { plant, controller, tool };
enum class Verdict { no_issue, hint, turn_signal, needs_info };
enum class SourceMode { feedback, composite };
enum class Termination { answered, step_limit, retry_limit, backend_error };
enum class AnswerKind { number, string_, list, formatted, unknown };

std::string_view run_mode_name(RunMode mode);
RunMode run_mode_from_name(std::string_view name);
std::string_view actor_name(Actor actor);
Actor actor_from_name(std::string_view name);
std::string_view verdict_name(Verdict verdict);
Verdict verdict_from_name(std::string_view name);
std::string_view termination_name(Termination t);
Termination termination_from_name(std::string_view name);
std::string_view answer_kind_name(AnswerKind kind);
AnswerKind answer_kind_from_name(std::string_view name);

struct TaskInput {
  std::string task_id;
  std::string question;
  int level = 1;
  std::vector<std::string> attachments;
  AnswerKind expected_answer_kind = AnswerKind::unknown;
};

// Throws InvalidTask on empty id/question or level outside [1, 3].
void validate(const TaskInput& task);

struct TrajectoryStep {
  int index = 0;
  Actor actor = Actor::plant;
  std::string content;
  std::optional<tools::ToolCall> tool_call;  // plant steps that invoke a tool
  std::int64_t produced_at_ms = 0;
};

// The guard's output: one verdict, critique prose, and for composite mode a
// list of pre-emptive advisories keyed to fingerprint weaknesses.
struct ControlSignal {
  Verdict verdict = Verdict::hint;
  std::string critique;
  std::vector<std::string> feed_forward_advisories;
  SourceMode source_mode = SourceMode::feedback;
};

// Feedback mode never carries advisories; throws Error if violated.
void validate(const ControlSignal& signal);

struct PlacedSignal {
  ControlSignal signal;
  int after_step = 0;  // context position: signal lands after this step index
};

struct TaskResult {
  std::string task_id;
  std::string final_raw_output;
  std::optional<std::string> extracted_answer;
  std::vector<TrajectoryStep> steps;
  int guard_invocations = 0;
  Termination termination = Termination::answered;
};

void to_json(nlohmann::json& j, const TrajectoryStep& step);
void from_json(const nlohmann::json& j, TrajectoryStep& step);
void to_json(nlohmann::json& j, const ControlSignal& signal);
void from_json(const nlohmann::json& j, ControlSignal& signal);

// result.json payload; steps travel separately in the step log, only their
// count is recorded here.
nlohmann::json result_to_json(const TaskResult& result);
TaskResult result_from_json(const nlohmann::json& j);

}  // namespace maneuver::control

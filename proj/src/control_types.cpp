#include "maneuver/control/types.hpp"

#include "maneuver/util/strings.hpp"

namespace maneuver::control {

using nlohmann::json;

std::string_view run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::uncontrolled: return "uncontrolled";
    case RunMode::feedback: return "feedback";
    case RunMode::composite: return "composite";
  }
  return "uncontrolled";
}

RunMode run_mode_from_name(std::string_view name) {
  if (name == "uncontrolled") return RunMode::uncontrolled;
  if (name == "feedback") return RunMode::feedback;
  if (name == "composite") return RunMode::composite;
  throw Error(util::cat("unknown run mode: ", name));
}

std::string_view actor_name(Actor actor) {
  switch (actor) {
    case Actor::plant: return "plant";
    case Actor::controller: return "controller";
    case Actor::tool: return "tool";
  }
  return "plant";
}

Actor actor_from_name(std::string_view name) {
  if (name == "plant") return Actor::plant;
  if (name == "controller") return Actor::controller;
  if (name == "tool") return Actor::tool;
  throw Error(util::cat("unknown actor: ", name));
}

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::no_issue: return "no_issue";
    case Verdict::hint: return "hint";
    case Verdict::turn_signal: return "turn_signal";
    case Verdict::needs_info: return "needs_info";
  }
  return "hint";
}

Verdict verdict_from_name(std::string_view name) {
  if (name == "no_issue") return Verdict::no_issue;
  if (name == "hint") return Verdict::hint;
  if (name == "turn_signal") return Verdict::turn_signal;
  if (name == "needs_info") return Verdict::needs_info;
  throw Error(util::cat("unknown verdict: ", name));
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::answered: return "answered";
    case Termination::step_limit: return "step_limit";
    case Termination::retry_limit: return "retry_limit";
    case Termination::backend_error: return "backend_error";
  }
  return "answered";
}

Termination termination_from_name(std::string_view name) {
  if (name == "answered") return Termination::answered;
  if (name == "step_limit") return Termination::step_limit;
  if (name == "retry_limit") return Termination::retry_limit;
  if (name == "backend_error") return Termination::backend_error;
  throw Error(util::cat("unknown termination: ", name));
}

std::string_view answer_kind_name(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::number: return "number";
    case AnswerKind::string_: return "string";
    case AnswerKind::list: return "list";
    case AnswerKind::formatted: return "formatted";
    case AnswerKind::unknown: return "unknown";
  }
  return "unknown";
}

AnswerKind answer_kind_from_name(std::string_view name) {
  if (name == "number") return AnswerKind::number;
  if (name == "string") return AnswerKind::string_;
  if (name == "list") return AnswerKind::list;
  if (name == "formatted") return AnswerKind::formatted;
  if (name == "unknown") return AnswerKind::unknown;
  throw Error(util::cat("unknown answer kind: ", name));
}

void validate(const TaskInput& task) {
  if (task.task_id.empty()) throw InvalidTask("task_id is empty");
  if (task.question.empty()) throw InvalidTask(util::cat("task ", task.task_id, ": question is empty"));
  if (task.level < 1 || task.level > 3) {
    throw InvalidTask(util::cat("task ", task.task_id, ": level out of range: ", task.level));
  }
}

void validate(const ControlSignal& signal) {
  if (signal.source_mode == SourceMode::feedback && !signal.feed_forward_advisories.empty()) {
    throw Error("feedback-mode signal carries advisories");
  }
}

void to_json(json& j, const TrajectoryStep& step) {
  j = json{{"actor", actor_name(step.actor)},
           {"content", step.content},
           {"index", step.index},
           {"produced_at_ms", step.produced_at_ms}};
  if (step.tool_call) {
    j["tool_call"] = json{{"arguments", step.tool_call->arguments},
                          {"name", step.tool_call->name}};
  }
}

void from_json(const json& j, TrajectoryStep& step) {
  step.index = j.at("index").get<int>();
  step.actor = actor_from_name(j.at("actor").get<std::string>());
  step.content = j.at("content").get<std::string>();
  step.produced_at_ms = j.value("produced_at_ms", std::int64_t{0});
  if (j.contains("tool_call")) {
    tools::ToolCall call;
    call.name = j["tool_call"].at("name").get<std::string>();
    call.arguments = j["tool_call"].value("arguments", json::object());
    step.tool_call = std::move(call);
  } else {
    step.tool_call.reset();
  }
}

void to_json(json& j, const ControlSignal& signal) {
  j = json{{"advisories", signal.feed_forward_advisories},
           {"critique", signal.critique},
           {"source_mode", signal.source_mode == SourceMode::feedback ? "feedback" : "composite"},
           {"verdict", verdict_name(signal.verdict)}};
}

void from_json(const json& j, ControlSignal& signal) {
  signal.verdict = verdict_from_name(j.at("verdict").get<std::string>());
  signal.critique = j.value("critique", "");
  signal.feed_forward_advisories = j.value("advisories", std::vector<std::string>{});
  signal.source_mode = j.value("source_mode", "feedback") == std::string("composite")
                           ? SourceMode::composite
                           : SourceMode::feedback;
}

json result_to_json(const TaskResult& result) {
  json j;
  j["task_id"] = result.task_id;
  j["final_raw_output"] = result.final_raw_output;
  if (result.extracted_answer) j["extracted_answer"] = *result.extracted_answer;
  j["guard_invocations"] = result.guard_invocations;
  j["step_count"] = result.steps.size();
  j["termination"] = termination_name(result.termination);
  return j;
}

TaskResult result_from_json(const json& j) {
  TaskResult result;
  result.task_id = j.at("task_id").get<std::string>();
  result.final_raw_output = j.value("final_raw_output", "");
  if (j.contains("extracted_answer")) {
    result.extracted_answer = j["extracted_answer"].get<std::string>();
  }
  result.guard_invocations = j.value("guard_invocations", 0);
  result.termination = termination_from_name(j.at("termination").get<std::string>());
  return result;
}

}  // namespace maneuver::control

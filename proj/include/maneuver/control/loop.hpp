#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "maneuver/control/context.hpp"
#include "maneuver/control/guard.hpp"
#include "maneuver/store/run_store.hpp"
#include "maneuver/tools/registry.hpp"
#include "maneuver/util/clock.hpp"

namespace maneuver::control {

class StepLimitExceeded : public Error {
 public:
  using Error::Error;
};

class RetryLimitExceeded : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string run_id;
  std::string model_id = "scripted-model";
  double temperature = 0.1;
  int max_output_tokens = 4096;
  int max_steps = 30;       // plant invocations per run
  int answer_retries = 5;   // malformed final answers tolerated before giving up
  int guard_cap = 3;        // guard invocations per run
  int fingerprint_budget_tokens = 2000;
  std::uint64_t seed = 0;
};

struct RunEnv {
  gateway::Backend* backend = nullptr;           // required
  const tools::ToolRegistry* base_tools = nullptr;  // required
  const PromptLibrary* prompts = nullptr;        // required
  store::RunSink* sink = nullptr;                // optional
  util::Clock* clock = nullptr;                  // optional; default LogicalClock
  // required in composite mode, ignored otherwise
  const sysid::PerformanceFingerprint* fingerprint = nullptr;
};

struct FinalText {
  std::string text;
};

struct MalformedCall {
  std::string reason;
};

// One plant turn: the raw reply plus its parsed intent. An <answer> tag
// anywhere makes the turn final; otherwise the last <tool>{...}</tool>
// block is the action; tool-shaped but unparseable blocks are malformed.
struct PlantOutput {
  std::string raw;
  std::variant<FinalText, tools::ToolCall, MalformedCall> action;
};

struct PlantOptions {
  std::string model_id;
  double temperature = 0.1;
  int max_output_tokens = 4096;
  std::string request_tag;
};

PlantOutput step_plant(const Context& context, gateway::Backend& backend,
                       const PlantOptions& options);

// Drives one task to termination under the given mode. Never throws for
// in-run trouble: limits and backend failures land in TaskResult.termination.
// Configuration errors (missing env pieces, invalid fingerprint) do throw.
TaskResult run_task(const TaskInput& task, RunMode mode, const RunConfig& config,
                    const RunEnv& env);

}  // namespace maneuver::control

#include "maneuver/control/loop.hpp"

#include <nlohmann/json.hpp>

#include "maneuver/util/strings.hpp"

namespace maneuver::control {

using nlohmann::json;

namespace {

std::variant<FinalText, tools::ToolCall, MalformedCall> parse_action(const std::string& raw) {
  auto scan = scan_answer_tag(raw);
  if (scan.status != TagScan::missing) return FinalText{raw};

  auto lowered = util::to_lower(raw);
  static constexpr std::string_view open_tag = "<tool>";
  static constexpr std::string_view close_tag = "</tool>";
  std::size_t open = std::string::npos;
  std::size_t close = std::string::npos;
  std::size_t search_from = 0;
  while (true) {
    auto o = lowered.find(open_tag, search_from);
    if (o == std::string::npos) break;
    auto c = lowered.find(close_tag, o + open_tag.size());
    if (c == std::string::npos) break;
    open = o;
    close = c;
    search_from = c + close_tag.size();
  }
  if (open == std::string::npos) return FinalText{raw};

  auto payload = raw.substr(open + open_tag.size(), close - open - open_tag.size());
  json doc = json::parse(payload, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return MalformedCall{"tool block is not a JSON object"};
  }
  if (!doc.contains("name") || !doc["name"].is_string()) {
    return MalformedCall{"tool block has no string 'name'"};
  }
  tools::ToolCall call;
  call.name = doc["name"].get<std::string>();
  call.arguments = doc.value("arguments", json::object());
  if (!call.arguments.is_object()) return MalformedCall{"'arguments' is not an object"};
  return call;
}

struct GuardState {
  int invocations = 0;
  std::optional<ControlSignal> last_signal;
};

}  // namespace

PlantOutput step_plant(const Context& context, gateway::Backend& backend,
                       const PlantOptions& options) {
  gateway::ChatRequest request;
  request.model_id = options.model_id;
  request.temperature = options.temperature;
  request.max_output_tokens = options.max_output_tokens;
  request.request_tag = options.request_tag;
  request.messages = context.messages;
  auto response = backend.complete(request);
  PlantOutput output;
  output.raw = response.content;
  output.action = parse_action(output.raw);
  return output;
}

TaskResult run_task(const TaskInput& task, RunMode mode, const RunConfig& config,
                    const RunEnv& env) {
  validate(task);
  if (env.backend == nullptr) throw Error("run_task: backend not set");
  if (env.base_tools == nullptr) throw Error("run_task: base tools not set");
  if (env.prompts == nullptr) throw Error("run_task: prompts not set");
  if (config.run_id.empty()) throw Error("run_task: run_id is empty");
  if (config.max_steps < 1) throw Error("run_task: max_steps must be >= 1");
  if (mode != RunMode::uncontrolled && config.guard_cap < 1) {
    throw Error("run_task: controlled modes need guard_cap >= 1");
  }
  if (mode == RunMode::composite) {
    if (env.fingerprint == nullptr) throw Error("run_task: composite mode needs a fingerprint");
    auto violations = sysid::validate_fingerprint(*env.fingerprint);
    if (!violations.empty()) {
      throw Error(util::cat("run_task: fingerprint failed validation: ",
                            util::join(violations, "; ")));
    }
  }

  util::LogicalClock fallback_clock;
  util::Clock& clock = env.clock ? *env.clock : fallback_clock;

  std::vector<TrajectoryStep> steps;
  GuardState guard;

  // The effective registry: base tools plus, in controlled modes, the guard
  // tool wired to the reviewer for this run's mode.
  tools::ToolRegistry registry = *env.base_tools;
  if (mode != RunMode::uncontrolled) {
    registry.register_guard(
        "Requests a review of the current reasoning from the guard. Call it "
        "before concluding your final answer.",
        [&](const json&) -> tools::ToolResult {
          if (guard.invocations >= config.guard_cap) {
            return {"", util::cat("guard invocation limit reached (cap ",
                                  config.guard_cap, ")"),
                    true};
          }
          GuardOptions options;
          options.prompts = env.prompts;
          options.model_id = config.model_id;
          options.temperature = config.temperature;
          options.request_tag = util::cat(config.run_id, "/guard");
          options.fingerprint_budget_tokens = config.fingerprint_budget_tokens;
          ControlSignal signal;
          if (mode == RunMode::composite) {
            try {
              signal = invoke_guard_profiled(steps, *env.fingerprint, *env.backend, options);
            } catch (const sysid::FingerprintRenderOverflow&) {
              // profile too large for the window: degrade to a plain review
              // rather than stalling the run
              signal = invoke_guard_naive(steps, *env.backend, options);
              signal.source_mode = SourceMode::composite;
            }
          } else {
            signal = invoke_guard_naive(steps, *env.backend, options);
          }
          ++guard.invocations;
          guard.last_signal = signal;
          return {"", render_signal(signal), false};
        });
  }

  store::RunManifest manifest;
  manifest.run_id = config.run_id;
  manifest.task_id = task.task_id;
  manifest.mode = std::string(run_mode_name(mode));
  manifest.model_id = config.model_id;
  manifest.temperature = config.temperature;
  manifest.seed = config.seed;
  manifest.started_at_ms = clock.now_ms();
  manifest.prompt_asset_versions = env.prompts->versions();
  if (env.sink) env.sink->begin_run(manifest);

  auto record = [&](Actor actor, std::string content,
                    std::optional<tools::ToolCall> call = std::nullopt) {
    TrajectoryStep step;
    step.index = static_cast<int>(steps.size());
    step.actor = actor;
    step.content = std::move(content);
    step.tool_call = std::move(call);
    step.produced_at_ms = clock.now_ms();
    if (env.sink) env.sink->append_step(config.run_id, step);
    steps.push_back(std::move(step));
  };

  ContextOptions context_options;
  context_options.prompts = env.prompts;
  context_options.tool_roster = registry.render_roster();

  PlantOptions plant_options;
  plant_options.model_id = config.model_id;
  plant_options.temperature = config.temperature;
  plant_options.max_output_tokens = config.max_output_tokens;
  plant_options.request_tag = config.run_id;

  TaskResult result;
  result.task_id = task.task_id;

  auto finish = [&](Termination termination, std::string final_raw,
                    std::optional<std::string> extracted) {
    result.termination = termination;
    result.final_raw_output = std::move(final_raw);
    result.extracted_answer = std::move(extracted);
    result.guard_invocations = guard.invocations;
    result.steps = steps;
    if (env.sink) env.sink->write_result(config.run_id, result);
    return result;
  };

  int retries_used = 0;
  for (int plant_calls = 0; plant_calls < config.max_steps; ++plant_calls) {
    PlantOutput output;
    try {
      auto context = assemble_context(task, steps, {}, context_options);
      output = step_plant(context, *env.backend, plant_options);
    } catch (const gateway::BackendError& e) {
      record(Actor::tool, util::cat("[backend failure] ", e.what()));
      return finish(Termination::backend_error, "", std::nullopt);
    }

    if (auto* final_text = std::get_if<FinalText>(&output.action)) {
      auto scan = scan_answer_tag(final_text->text);
      if (scan.status == TagScan::ok) {
        record(Actor::plant, output.raw);
        if (mode != RunMode::uncontrolled && guard.invocations == 0) {
          // mandatory review: no answer is accepted before the guard has
          // seen the reasoning at least once
          guard.last_signal.reset();
          tools::ToolCall forced{std::string(tools::kGuardToolName),
                                 json{{"question", "Final review before answering."}}};
          auto review = registry.dispatch(forced);
          if (guard.last_signal) {
            record(Actor::controller, review.content);
            if (guard.last_signal->verdict == Verdict::no_issue) {
              return finish(Termination::answered, output.raw, scan.answer);
            }
            continue;  // the plant must address the signal first
          }
          record(Actor::tool, review.content);
          continue;
        }
        return finish(Termination::answered, output.raw, scan.answer);
      }

      // final-shaped text without a usable answer: nudge and retry
      record(Actor::plant, output.raw);
      ++retries_used;
      if (retries_used > config.answer_retries) {
        return finish(Termination::retry_limit, output.raw, std::nullopt);
      }
      record(Actor::tool,
             scan.status == TagScan::empty
                 ? "[format check] The <answer></answer> tag is empty. Restate your "
                   "final answer inside the tag."
                 : "[format check] Your reply has no well-formed <answer></answer> tag. "
                   "Either call a tool or give the final answer inside the tag.");
      continue;
    }

    if (auto* call = std::get_if<tools::ToolCall>(&output.action)) {
      record(Actor::plant, output.raw, *call);
      guard.last_signal.reset();
      // dispatch never throws; a guard-side backend failure comes back as an
      // error observation and the next plant call surfaces the real error
      auto tool_result = registry.dispatch(*call);
      bool was_guard_review =
          call->name == tools::kGuardToolName && guard.last_signal.has_value();
      if (was_guard_review) {
        record(Actor::controller, tool_result.content);
      } else {
        record(Actor::tool,
               util::cat("Observation from tool '", call->name, "'",
                         tool_result.is_error ? " (error)" : "", ":\n", tool_result.content));
      }
      continue;
    }

    const auto& malformed = std::get<MalformedCall>(output.action);
    record(Actor::plant, output.raw);
    record(Actor::tool,
           util::cat("[malformed tool call] ", malformed.reason,
                     ". Use <tool>{\"name\": \"tool_name\", \"arguments\": {...}}</tool> "
                     "with valid JSON."));
  }

  std::string last_plant;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->actor == Actor::plant) {
      last_plant = it->content;
      break;
    }
  }
  return finish(Termination::step_limit, last_plant, std::nullopt);
}

}  // namespace maneuver::control

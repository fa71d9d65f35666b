#include "maneuver/control/guard.hpp"

#include "maneuver/util/strings.hpp"

namespace maneuver::control {

namespace {

gateway::ChatRequest make_review_request(std::string system_prompt,
                                         std::span<const TrajectoryStep> steps,
                                         const GuardOptions& options) {
  gateway::ChatRequest request;
  request.model_id = options.model_id;
  request.temperature = options.temperature;
  request.max_output_tokens = options.max_output_tokens;
  request.request_tag = options.request_tag;
  request.messages.push_back({gateway::Role::system, std::move(system_prompt)});
  request.messages.push_back(
      {gateway::Role::user,
       util::cat("Question: Is my reasoning process correct?\n\nReasoning Process:\n",
                 serialize_trajectory(steps))});
  return request;
}

const std::vector<std::string>& prospective_cues() {
  static const std::vector<std::string> cues = {
      "advisory",   "in advance",  "pre-emptive", "preemptive",  "proactively",
      "watch for",  "guard against", "be careful", "going forward", "avoid",
  };
  return cues;
}

}  // namespace

std::string guard_system_prompt_naive(const PromptLibrary& prompts) {
  return prompts.get("guard_agent").text;
}

std::string guard_system_prompt_profiled(const PromptLibrary& prompts,
                                         const sysid::PerformanceFingerprint& fingerprint,
                                         int budget_tokens) {
  auto block = sysid::render_fingerprint(fingerprint, budget_tokens,
                                         prompts.get("fingerprint_header").text);
  return util::cat(prompts.get("guard_agent").text, "\n\n", block);
}

ControlSignal invoke_guard_naive(std::span<const TrajectoryStep> steps,
                                 gateway::Backend& backend, const GuardOptions& options) {
  if (options.prompts == nullptr) throw Error("guard: prompts not set");
  auto request = make_review_request(guard_system_prompt_naive(*options.prompts), steps, options);
  auto response = backend.complete(request);
  auto parse = parse_verdict(response.content);
  ControlSignal signal;
  signal.verdict = parse.verdict;
  signal.critique = parse.critique;
  signal.source_mode = SourceMode::feedback;
  return signal;
}

ControlSignal invoke_guard_profiled(std::span<const TrajectoryStep> steps,
                                    const sysid::PerformanceFingerprint& fingerprint,
                                    gateway::Backend& backend, const GuardOptions& options) {
  if (options.prompts == nullptr) throw Error("guard: prompts not set");
  auto request = make_review_request(
      guard_system_prompt_profiled(*options.prompts, fingerprint,
                                   options.fingerprint_budget_tokens),
      steps, options);
  auto response = backend.complete(request);
  auto parse = parse_verdict(response.content);
  ControlSignal signal;
  signal.verdict = parse.verdict;
  signal.critique = parse.critique;
  signal.source_mode = SourceMode::composite;
  signal.feed_forward_advisories =
      extract_advisories(response.content, fingerprint.weakness_tags);
  return signal;
}

std::vector<std::string> extract_advisories(std::string_view reply,
                                            const std::vector<std::string>& weakness_tags) {
  std::vector<std::string> out;
  if (weakness_tags.empty()) return out;
  for (const auto& raw_line : util::split_lines(reply)) {
    auto line = std::string(util::trim(raw_line));
    if (line.empty()) continue;
    auto lowered = util::to_lower(line);

    bool names_weakness = false;
    for (const auto& tag : weakness_tags) {
      // the tag itself or its spaced form counts as a mention
      auto spaced = tag;
      for (auto& c : spaced) {
        if (c == '-') c = ' ';
      }
      if (lowered.find(tag) != std::string::npos ||
          lowered.find(spaced) != std::string::npos) {
        names_weakness = true;
        break;
      }
    }
    if (!names_weakness) continue;

    for (const auto& cue : prospective_cues()) {
      if (lowered.find(cue) != std::string::npos) {
        // strip a leading bullet for a cleaner rendered list
        while (!line.empty() && (line.front() == '-' || line.front() == '*' ||
                                 line.front() == ' ')) {
          line.erase(line.begin());
        }
        out.push_back(line);
        break;
      }
    }
  }
  return out;
}

}  // namespace maneuver::control

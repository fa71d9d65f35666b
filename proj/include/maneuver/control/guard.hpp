#pragma once

#include <span>
#include <string>

#include "maneuver/control/context.hpp"
#include "maneuver/control/types.hpp"
#include "maneuver/gateway/chat.hpp"
#include "maneuver/prompts.hpp"
#include "maneuver/sysid/fingerprint.hpp"

namespace maneuver::control {

struct GuardOptions {
  const PromptLibrary* prompts = nullptr;
  std::string model_id;
  double temperature = 0.1;
  int max_output_tokens = 2048;
  std::string request_tag;
  // Token budget for the injected fingerprint block (composite mode).
  int fingerprint_budget_tokens = 2000;
};

// Reactive review: the guard sees the serialized trajectory and returns a
// verdict + critique. No fingerprint, no advisories.
ControlSignal invoke_guard_naive(std::span<const TrajectoryStep> steps,
                                 gateway::Backend& backend, const GuardOptions& options);

// Profile-aware review: same reactive critique, plus the fingerprint is
// injected into the guard prompt and prospective advisory lines that
// reference fingerprint weaknesses are extracted from the reply.
ControlSignal invoke_guard_profiled(std::span<const TrajectoryStep> steps,
                                    const sysid::PerformanceFingerprint& fingerprint,
                                    gateway::Backend& backend, const GuardOptions& options);

// Guard system prompts, exposed for inspection and tests.
std::string guard_system_prompt_naive(const PromptLibrary& prompts);
std::string guard_system_prompt_profiled(const PromptLibrary& prompts,
                                         const sysid::PerformanceFingerprint& fingerprint,
                                         int budget_tokens);

// Lines of the reply that name a fingerprint weakness in a prospective
// phrasing ("watch for", "guard against", ...). Reactive critique lines
// that merely diagnose a past mistake do not qualify.
std::vector<std::string> extract_advisories(std::string_view reply,
                                            const std::vector<std::string>& weakness_tags);

}  // namespace maneuver::control

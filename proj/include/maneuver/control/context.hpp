#pragma once

#include <span>
#include <string>
#include <vector>

#include "maneuver/control/types.hpp"
#include "maneuver/gateway/chat.hpp"
#include "maneuver/prompts.hpp"

namespace maneuver::control {

// The plant's working context: a chat transcript rebuilt from the trajectory
// on every step. serialize() is one message per line, so extending the
// trajectory extends the serialization by strict append.
struct Context {
  std::vector<gateway::ChatMessage> messages;
  std::string serialize() const;
};

struct ContextOptions {
  const PromptLibrary* prompts = nullptr;
  std::string tool_roster;  // rendered by ToolRegistry::render_roster
};

// Maps trajectory actors onto chat roles (plant -> assistant, everything
// else -> user) under the execution system prompt and the task statement.
// Placed signals land immediately after the step they are anchored to.
Context assemble_context(const TaskInput& task, std::span<const TrajectoryStep> steps,
                         std::span<const PlacedSignal> signals,
                         const ContextOptions& options);

// Plain-text transcript of a trajectory, used for guard review and analysis
// logs. One block per step, prefixed with the acting party.
std::string serialize_trajectory(std::span<const TrajectoryStep> steps);

// Text form of a control signal as the plant sees it.
std::string render_signal(const ControlSignal& signal);

// Canonical all-clear sentence from the guard contract.
inline constexpr std::string_view kNoIssueSentence = "No loopholes or oversights found";

struct VerdictParse {
  Verdict verdict = Verdict::hint;
  std::string critique;
  // False when the reply matched no pattern and fell back to hint.
  bool classifiable = true;
};

// Classifies a raw guard reply. Priority: no_issue (near-exact match of the
// canonical sentence) > needs_info > turn_signal > hint. Unclassifiable text
// degrades to hint with the full reply as critique, never to silence.
VerdictParse parse_verdict(std::string_view reply);

enum class TagScan { ok, missing, empty };

struct AnswerTagScan {
  TagScan status = TagScan::missing;
  std::string answer;
};

// Scans plant output for the <answer></answer> envelope. Tags are matched
// case-insensitively; the last well-formed pair wins; the payload is
// whitespace-trimmed. A present-but-blank payload reports empty.
AnswerTagScan scan_answer_tag(std::string_view raw);

}  // namespace maneuver::control

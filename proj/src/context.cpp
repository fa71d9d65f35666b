#include "maneuver/control/context.hpp"

#include <nlohmann/json.hpp>

#include "maneuver/util/strings.hpp"

namespace maneuver::control {

using gateway::ChatMessage;
using gateway::Role;

std::string Context::serialize() const {
  // JSONL, one message per line: appending a message appends exactly one
  // line, which keeps earlier serializations a byte prefix of later ones.
  std::string out;
  for (const auto& m : messages) {
    nlohmann::json j{{"content", m.content}, {"role", gateway::role_name(m.role)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

void check_contiguous(std::span<const TrajectoryStep> steps) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].index != static_cast<int>(i)) {
      throw NonContiguousTrajectory(util::cat("step at position ", i, " has index ",
                                              steps[i].index));
    }
  }
}

std::string render_task_message(const TaskInput& task) {
  std::string out = util::cat("Task (difficulty level ", task.level, "):\n", task.question);
  if (!task.attachments.empty()) {
    out += "\n\nAttached files:";
    for (const auto& a : task.attachments) out += util::cat("\n- ", a);
  }
  return out;
}

}  // namespace

Context assemble_context(const TaskInput& task, std::span<const TrajectoryStep> steps,
                         std::span<const PlacedSignal> signals,
                         const ContextOptions& options) {
  validate(task);
  check_contiguous(steps);
  if (options.prompts == nullptr) throw Error("assemble_context: prompts not set");
  for (const auto& placed : signals) {
    if (placed.after_step < 0 || placed.after_step >= static_cast<int>(steps.size())) {
      throw Error(util::cat("signal anchored after step ", placed.after_step,
                            " but trajectory has ", steps.size(), " steps"));
    }
  }

  Context ctx;
  ctx.messages.push_back(
      {Role::system, render_prompt(options.prompts->get("execution_agent").text,
                                   {{"tool_list", options.tool_roster}})});
  ctx.messages.push_back({Role::user, render_task_message(task)});

  for (const auto& step : steps) {
    switch (step.actor) {
      case Actor::plant:
        ctx.messages.push_back({Role::assistant, step.content});
        break;
      case Actor::tool:
      case Actor::controller:
        // observations and guard signals both come back to the plant as
        // user input; their stored content already carries its framing
        ctx.messages.push_back({Role::user, step.content});
        break;
    }
    for (const auto& placed : signals) {
      if (placed.after_step == step.index) {
        ctx.messages.push_back({Role::user, render_signal(placed.signal)});
      }
    }
  }
  return ctx;
}

std::string serialize_trajectory(std::span<const TrajectoryStep> steps) {
  check_contiguous(steps);
  std::string out;
  for (const auto& step : steps) {
    out += util::cat("[step ", step.index, " | ", actor_name(step.actor), "]\n",
                     step.content, "\n\n");
  }
  return out;
}

std::string render_signal(const ControlSignal& signal) {
  validate(signal);
  std::string out = util::cat("[guard verdict: ", verdict_name(signal.verdict), "]");
  if (!signal.critique.empty()) out += util::cat("\n", signal.critique);
  if (signal.verdict == Verdict::needs_info) {
    out += "\n(Restate your reasoning with the missing details filled in.)";
  }
  if (!signal.feed_forward_advisories.empty()) {
    out += "\n[advisories]";
    for (const auto& advisory : signal.feed_forward_advisories) {
      out += util::cat("\n- ", advisory);
    }
  }
  return out;
}

namespace {

// Stem lists for the reply classifier. Matching is case-insensitive on
// whitespace-collapsed text.
const std::vector<std::string>& needs_info_stems() {
  static const std::vector<std::string> stems = {
      "lacks some information", "lacks necessary details", "lacks the necessary details",
      "need more information",  "needs more information",  "provide more details",
      "provide me more details", "more details are needed", "missing information",
  };
  return stems;
}

const std::vector<std::string>& turn_signal_stems() {
  static const std::vector<std::string> stems = {
      "turn signal",       "turn the reasoning", "seriously incorrect", "start over",
      "wrong track",       "wrong approach",     "approach is wrong",   "approach must change",
      "change your approach", "re-approach",     "redirect",            "abandon",
      "entirely wrong",    "fundamentally flawed",
  };
  return stems;
}

bool matches_any(const std::string& haystack, const std::vector<std::string>& stems) {
  for (const auto& stem : stems) {
    if (haystack.find(stem) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

VerdictParse parse_verdict(std::string_view reply) {
  auto normalized = util::to_lower(util::collapse_whitespace(reply));
  // drop trailing sentence punctuation for the exact-sentence check
  auto stripped = normalized;
  while (!stripped.empty() && (stripped.back() == '.' || stripped.back() == '!')) {
    stripped.pop_back();
  }

  VerdictParse parse;
  if (stripped == util::to_lower(kNoIssueSentence)) {
    parse.verdict = Verdict::no_issue;
    return parse;
  }
  parse.critique = std::string(util::trim(reply));
  if (matches_any(normalized, needs_info_stems())) {
    parse.verdict = Verdict::needs_info;
    return parse;
  }
  if (matches_any(normalized, turn_signal_stems())) {
    parse.verdict = Verdict::turn_signal;
    return parse;
  }
  parse.verdict = Verdict::hint;
  // a reply that hit no pattern is still delivered, but flagged so callers
  // can tell a deliberate hint from a fallback
  parse.classifiable = matches_any(normalized, {"hint", "check", "verify", "consider",
                                                "remember", "correct", "should", "but",
                                                "however", "issue", "sound", "right"});
  return parse;
}

AnswerTagScan scan_answer_tag(std::string_view raw) {
  static constexpr std::string_view open_tag = "<answer>";
  static constexpr std::string_view close_tag = "</answer>";
  auto lowered = util::to_lower(raw);

  AnswerTagScan scan;
  std::size_t search_from = 0;
  while (true) {
    auto open = lowered.find(open_tag, search_from);
    if (open == std::string::npos) break;
    auto close = lowered.find(close_tag, open + open_tag.size());
    if (close == std::string::npos) break;
    auto payload = raw.substr(open + open_tag.size(), close - open - open_tag.size());
    scan.answer = std::string(util::trim(payload));
    scan.status = scan.answer.empty() ? TagScan::empty : TagScan::ok;
    search_from = close + close_tag.size();
  }
  return scan;
}

}  // namespace maneuver::control

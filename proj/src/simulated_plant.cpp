#include <algorithm>
#include <set>
#include <string_view>

#include "maneuver/bench/simulated_plant.hpp"
#include "maneuver/util/digest.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver::bench {

namespace {

// Prompt anchors that identify which of the four roles a request plays.
constexpr std::string_view kGuardAnchor = "identifying the potential loopholes";
constexpr std::string_view kAnalysisAnchor = "# Event Background";
constexpr std::string_view kSynthesisAnchor = "# Analysis Reports";
constexpr std::string_view kProfileAnchor = "## Agent's Reasoning Feature:";

constexpr std::string_view kMarkerPrefix = "Issue marker: ";
constexpr std::string_view kCritiquePrefix = "detected ";
constexpr std::string_view kAdvisoryPrefix = "often shows ";
constexpr std::string_view kAllClear = "No loopholes or oversights found.";

bool is_tag_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
}

// Collects the tags that follow every occurrence of `prefix` in `text`.
std::vector<std::string> tags_after(std::string_view text, std::string_view prefix) {
  std::vector<std::string> tags;
  std::size_t pos = 0;
  while ((pos = text.find(prefix, pos)) != std::string_view::npos) {
    pos += prefix.size();
    std::size_t end = pos;
    while (end < text.size() && is_tag_char(text[end])) ++end;
    if (end > pos) tags.push_back(std::string(text.substr(pos, end - pos)));
    pos = end;
  }
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

bool contains(const std::vector<std::string>& haystack, const std::string& needle) {
  return std::find(haystack.begin(), haystack.end(), needle) != haystack.end();
}

const gateway::ChatMessage* last_controller_message(const gateway::ChatRequest& request) {
  const gateway::ChatMessage* found = nullptr;
  for (const auto& message : request.messages) {
    if (message.role == gateway::Role::user &&
        message.content.rfind("[guard verdict:", 0) == 0) {
      found = &message;
    }
  }
  return found;
}

std::string all_system_text(const gateway::ChatRequest& request) {
  std::string out;
  for (const auto& message : request.messages) {
    if (message.role == gateway::Role::system) out += message.content;
  }
  return out;
}

std::string all_user_text(const gateway::ChatRequest& request) {
  std::string out;
  for (const auto& message : request.messages) {
    if (message.role == gateway::Role::user) {
      out += message.content;
      out += '\n';
    }
  }
  return out;
}

std::string parse_task_identifier(const gateway::ChatRequest& request) {
  constexpr std::string_view kPrefix = "Identifier: ";
  for (const auto& message : request.messages) {
    if (message.role != gateway::Role::user) continue;
    auto pos = message.content.find(kPrefix);
    if (pos == std::string::npos) continue;
    pos += kPrefix.size();
    std::size_t end = pos;
    const auto& text = message.content;
    while (end < text.size() && (is_tag_char(text[end]) || (text[end] >= 'A' && text[end] <= 'Z'))) {
      ++end;
    }
    if (end > pos) return text.substr(pos, end - pos);
  }
  return "unidentified";
}

// The run root groups every request of one logical run under one coin
// stream. Guard requests carry a "/guard" suffix; experiment run ids embed
// the mode token, which is stripped so all three modes draw the same
// failure pattern for a given task, round and seed.
std::string coin_root(std::string_view request_tag) {
  std::string root(request_tag);
  constexpr std::string_view kGuardSuffix = "/guard";
  if (root.size() >= kGuardSuffix.size() &&
      root.compare(root.size() - kGuardSuffix.size(), kGuardSuffix.size(), kGuardSuffix) == 0) {
    root.resize(root.size() - kGuardSuffix.size());
  }
  for (std::string_view mode : {"__uncontrolled", "__feedback", "__composite"}) {
    auto pos = root.find(mode);
    if (pos != std::string::npos) {
      root.erase(pos, mode.size());
      break;
    }
  }
  return root;
}

int estimate_tokens(std::size_t chars) {
  return static_cast<int>((chars + 3) / 4);
}

}  // namespace

void FailureProfile::validate() const {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (const auto& [tag, rate] : rates) {
    if (tag.empty()) throw Error("failure profile: empty weakness tag");
    if (!in_unit(rate)) throw Error(util::cat("failure rate for '", tag, "' outside [0, 1]"));
  }
  if (!in_unit(critique_fix_rate)) throw Error("critique_fix_rate outside [0, 1]");
  if (!in_unit(advisory_suppress_rate)) throw Error("advisory_suppress_rate outside [0, 1]");
}

SimulatedPlant::SimulatedPlant(FailureProfile profile, std::uint64_t seed)
    : profile_(std::move(profile)), seed_(seed) {
  profile_.validate();
}

std::string SimulatedPlant::reference_answer(const std::string& task_id) {
  return util::cat("ref-", task_id);
}

std::string SimulatedPlant::question_text(const std::string& task_id) {
  return util::cat("Synthetic probe task. Identifier: ", task_id,
                   ". Provide the reference answer for this identifier.");
}

bool SimulatedPlant::coin(std::string_view kind, std::string_view root,
                          std::string_view tag, double rate) const {
  auto h = util::stable_seed({std::to_string(seed_), kind, root, tag});
  return util::unit_interval(h) < rate;
}

gateway::ChatResponse SimulatedPlant::complete(const gateway::ChatRequest& request) {
  gateway::validate(request);
  std::string system_text = all_system_text(request);
  std::string user_text = all_user_text(request);

  std::string content;
  if (system_text.find(kGuardAnchor) != std::string::npos) {
    content = act_as_guard(request);
  } else if (user_text.find(kAnalysisAnchor) != std::string::npos) {
    content = act_as_analyst(request);
  } else if (user_text.find(kSynthesisAnchor) != std::string::npos) {
    content = act_as_synthesizer(request);
  } else {
    content = act_as_plant(request);
  }

  gateway::ChatResponse response;
  response.content = std::move(content);
  response.finish_reason = "stop";
  std::size_t prompt_chars = 0;
  for (const auto& message : request.messages) prompt_chars += message.content.size();
  response.prompt_tokens = estimate_tokens(prompt_chars);
  response.completion_tokens = estimate_tokens(response.content.size());
  return response;
}

std::string SimulatedPlant::act_as_plant(const gateway::ChatRequest& request) const {
  std::string root = coin_root(request.request_tag);
  std::string task_id = parse_task_identifier(request);

  std::vector<std::string> drafted;
  for (const auto& [tag, rate] : profile_.rates) {
    if (coin("fail", root, tag, rate)) drafted.push_back(tag);
  }

  const auto* signal = last_controller_message(request);
  std::string body;
  std::vector<std::string> surviving;
  if (signal == nullptr) {
    body = "Reading the task statement and drafting the final response.\n";
    surviving = drafted;
  } else {
    body = "Revising the draft to address the review.\n";
    auto critiqued = tags_after(signal->content, kCritiquePrefix);
    auto advised = tags_after(signal->content, kAdvisoryPrefix);
    for (const auto& tag : drafted) {
      if (contains(critiqued, tag)) {
        body += util::cat("Corrected the flagged issue: ", tag, ".\n");
        continue;
      }
      if (contains(advised, tag) &&
          coin("suppress", root, tag, profile_.advisory_suppress_rate)) {
        body += util::cat("Avoided a known risk in advance: ", tag, ".\n");
        continue;
      }
      surviving.push_back(tag);
    }
  }

  for (const auto& tag : surviving) {
    body += util::cat(kMarkerPrefix, tag, ".\n");
  }

  std::string answer;
  if (surviving.empty()) {
    answer = reference_answer(task_id);
  } else {
    answer = util::cat("wrong-", util::join(surviving, "+"), "-for-", task_id);
  }
  return util::cat(body, "<answer>", answer, "</answer>");
}

std::string SimulatedPlant::act_as_guard(const gateway::ChatRequest& request) const {
  std::string root = coin_root(request.request_tag);
  std::string system_text = all_system_text(request);
  std::string user_text = all_user_text(request);

  auto markers = tags_after(user_text, kMarkerPrefix);
  std::vector<std::string> critique_lines;
  for (const auto& [tag, rate] : profile_.rates) {
    (void)rate;
    if (!contains(markers, tag)) continue;
    if (coin("critic", root, tag, profile_.critique_fix_rate)) {
      critique_lines.push_back(util::cat("Give the turn signal: ", kCritiquePrefix, tag,
                                         " in the draft; correct it."));
    }
  }

  std::vector<std::string> advisory_lines;
  if (system_text.find(kProfileAnchor) != std::string::npos) {
    auto profile_start = system_text.find(kProfileAnchor);
    std::string_view profile_text = std::string_view(system_text).substr(profile_start);
    for (const auto& [tag, rate] : profile_.rates) {
      (void)rate;
      if (profile_text.find(tag) != std::string_view::npos) {
        advisory_lines.push_back(util::cat("Advisory: the agent ", kAdvisoryPrefix, tag,
                                           "; verify and guard against it in advance."));
      }
    }
  }

  if (critique_lines.empty() && advisory_lines.empty()) {
    return std::string(kAllClear);
  }
  std::vector<std::string> lines;
  if (critique_lines.empty()) {
    lines.push_back("No immediate loopholes in the draft.");
  }
  lines.insert(lines.end(), critique_lines.begin(), critique_lines.end());
  lines.insert(lines.end(), advisory_lines.begin(), advisory_lines.end());
  return util::join(lines, "\n");
}

std::string SimulatedPlant::act_as_analyst(const gateway::ChatRequest& request) const {
  std::string user_text = all_user_text(request);
  auto observed = tags_after(user_text, kMarkerPrefix);

  std::string errors;
  if (observed.empty()) {
    errors = "No failure markers appear in the log.";
  } else {
    errors = util::cat("Observed failure modes: ", util::join(observed, ", "), ".");
  }

  return util::cat(
      "### 1. Comparison of Problem-Solving Approaches\n",
      "The agent followed the reference path with minor deviations.\n\n",
      "### 2. Tool Usage Analysis\n",
      "No external tools were needed for this synthetic item.\n\n",
      "### 3. Information Acquisition\n",
      "All required facts were present in the task statement.\n\n",
      "### 4. Reasoning Process Assessment\n",
      "The drafted reasoning is traceable from statement to answer.\n\n",
      "### 5. Error Analysis\n", errors, "\n\n",
      "### 6. Summary of Strengths\n",
      "Concise final answers in the required format.\n\n",
      "### 7. Recommendations\n",
      "Re-verify drafted claims before concluding.");
}

std::string SimulatedPlant::act_as_synthesizer(const gateway::ChatRequest& request) const {
  std::string user_text = all_user_text(request);
  // Only the submitted reports count as evidence; the instructions above
  // the anchor enumerate the whole tag vocabulary and must not be scanned.
  auto reports_start = user_text.find(kSynthesisAnchor);
  std::string_view reports = std::string_view(user_text).substr(reports_start);

  std::vector<std::string> observed;
  for (const auto& [tag, rate] : profile_.rates) {
    (void)rate;
    if (reports.find(tag) != std::string_view::npos) observed.push_back(tag);
  }

  std::string weakness_block;
  for (const auto& tag : observed) {
    weakness_block += util::cat("  - ", tag, ": recurring failure pattern in the reports.\n");
  }

  return util::cat(
      "### 1. Core Capability Assessment\n",
      "The agent reliably answers keyed items when no failure mode fires.\n\n",
      "### 2. Performance by Task Type\n",
      "Accuracy is uniform across difficulty levels in this synthetic corpus.\n\n",
      "### 3. Strengths and Weaknesses Analysis\n",
      "- **Key Strengths**: Stable answer formatting and short reasoning chains.\n",
      "- **Key Weaknesses**:\n", weakness_block,
      "- **Capability Boundaries**: Reliability drops when several failure modes "
      "fire on one task.\n\n",
      "### 4. Recommendations for Improvement\n",
      "Verify drafted claims against the task statement before answering.\n\n",
      "### 5. Overall Evaluation\n",
      "The agent is moderately reliable on this corpus.\n",
      "- **Overall Score**: 6.5 / 10");
}

}  // namespace maneuver::bench

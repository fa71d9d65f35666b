#pragma once

#include <string>
#include <string_view>

#include "maneuver/control/types.hpp"

namespace maneuver::bench {

enum class ExtractStatus { ok, missing_tag, empty_answer };

struct Extracted {
  ExtractStatus status = ExtractStatus::missing_tag;
  std::string answer;
};

// Pulls the final answer out of raw plant output (<answer></answer>
// envelope; last well-formed pair wins, case-insensitive tags).
Extracted extract_answer(std::string_view raw);

// Kind-aware canonical form used on both sides of the comparison:
//   number    strip currency/percent signs and thousands separators, then a
//             canonical decimal rendering
//   string    lowercase, drop one leading article, collapse whitespace
//   list      split on commas, normalize each element by its inferred kind
//   formatted collapse whitespace only (case preserved)
//   unknown   number normalization when the text parses as one, else string
std::string normalize_answer(std::string_view raw, control::AnswerKind kind);

// Exact match after normalization of both sides.
bool score_answer(std::string_view predicted, std::string_view gold,
                  control::AnswerKind kind);

}  // namespace maneuver::bench
